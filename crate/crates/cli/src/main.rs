fn main() {
    std::process::exit(beacon_cli::run(std::env::args_os()));
}
