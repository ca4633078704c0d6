//! A small HTTP/1.1 server for crawler tests.
//!
//! Clients reach it as an HTTP proxy: requests arrive in absolute form
//! (`GET http://host/path HTTP/1.1`) and are routed by host name. Unknown
//! hosts get 502, unknown paths on known hosts 404. Every request is logged
//! and per-host concurrency is tracked.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Response {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
}

impl Response {
    pub fn new(status: u16, content_type: &str, body: impl Into<Vec<u8>>) -> Self {
        Response {
            status,
            headers: vec![("Content-Type".into(), content_type.into())],
            body: body.into(),
        }
    }

    pub fn html(body: impl Into<String>) -> Self {
        Response::new(200, "text/html; charset=utf-8", body.into().into_bytes())
    }

    pub fn redirect(status: u16, location: &str) -> Self {
        Response {
            status,
            headers: vec![("Location".into(), location.into())],
            body: Vec::new(),
        }
    }

    pub fn header(mut self, name: &str, value: &str) -> Self {
        self.headers.push((name.into(), value.into()));
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Route {
    pub response: Response,
    /// Sleep applied to the first `delay_times` requests of this route.
    pub delay: Duration,
    pub delay_times: usize,
}

impl From<Response> for Route {
    fn from(response: Response) -> Self {
        Route {
            response,
            delay: Duration::ZERO,
            delay_times: 0,
        }
    }
}

/// Routes keyed by host, then by path-and-query. A path without its query
/// is tried when the exact target is not listed.
#[derive(Clone, Debug, Default)]
pub struct Routes {
    hosts: HashMap<String, HashMap<String, Route>>,
}

impl Routes {
    pub fn add(&mut self, host: &str, target: &str, route: impl Into<Route>) {
        self.hosts
            .entry(host.to_ascii_lowercase())
            .or_default()
            .insert(target.to_string(), route.into());
    }

    /// Registers a host with no routes, so its paths answer 404.
    pub fn add_host(&mut self, host: &str) {
        self.hosts.entry(host.to_ascii_lowercase()).or_default();
    }

    pub fn hosts(&self) -> BTreeSet<String> {
        self.hosts.keys().cloned().collect()
    }

    pub fn get(&self, host: &str, target: &str) -> Option<&Route> {
        self.hosts.get(host)?.get(target)
    }

    fn lookup(&self, host: &str, target: &str) -> Result<(&Route, String), u16> {
        let Some(paths) = self.hosts.get(host) else {
            return Err(502);
        };
        if let Some(r) = paths.get(target) {
            return Ok((r, target.to_string()));
        }
        let path = target.split('?').next().unwrap_or(target);
        paths.get(path).map(|r| (r, path.to_string())).ok_or(404)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoggedRequest {
    pub method: String,
    pub host: String,
    pub target: String,
    pub user_agent: Option<String>,
    pub status: u16,
}

#[derive(Default)]
struct State {
    log: Vec<LoggedRequest>,
    active: HashMap<String, usize>,
    peak: HashMap<String, usize>,
    hits: HashMap<(String, String), usize>,
}

pub struct FixtureServer {
    addr: SocketAddr,
    state: Arc<Mutex<State>>,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl FixtureServer {
    pub fn start(routes: Routes) -> std::io::Result<Self> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let state = Arc::new(Mutex::new(State::default()));
        let stop = Arc::new(AtomicBool::new(false));
        let routes = Arc::new(routes);
        let thread = {
            let (state, stop) = (state.clone(), stop.clone());
            thread::spawn(move || {
                for conn in listener.incoming() {
                    if stop.load(Ordering::SeqCst) {
                        break;
                    }
                    let Ok(stream) = conn else { continue };
                    let (state, routes) = (state.clone(), routes.clone());
                    thread::spawn(move || {
                        let _ = serve(stream, &routes, &state);
                    });
                }
            })
        };
        Ok(FixtureServer {
            addr,
            state,
            stop,
            thread: Some(thread),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Proxy URL to hand to an HTTP client.
    pub fn proxy_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn requests(&self) -> Vec<LoggedRequest> {
        self.state.lock().unwrap().log.clone()
    }

    pub fn requested_hosts(&self) -> BTreeSet<String> {
        self.requests().into_iter().map(|r| r.host).collect()
    }

    /// Highest number of simultaneously open requests seen for `host`.
    pub fn peak_concurrency(&self, host: &str) -> usize {
        self.state.lock().unwrap().peak.get(host).copied().unwrap_or(0)
    }

    pub fn peak_concurrency_all(&self) -> HashMap<String, usize> {
        self.state.lock().unwrap().peak.clone()
    }
}

impl Drop for FixtureServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

fn reason(status: u16) -> &'static str {
    match status {
        200 => "OK",
        301 => "Moved Permanently",
        302 => "Found",
        303 => "See Other",
        307 => "Temporary Redirect",
        308 => "Permanent Redirect",
        404 => "Not Found",
        500 => "Internal Server Error",
        502 => "Bad Gateway",
        _ => "Status",
    }
}

fn split_target(target: &str, host_header: Option<&str>) -> (String, String) {
    if let Some(rest) = target
        .strip_prefix("http://")
        .or_else(|| target.strip_prefix("https://"))
    {
        let (authority, path) = match rest.find('/') {
            Some(i) => (&rest[..i], &rest[i..]),
            None => (rest, "/"),
        };
        return (strip_port(authority), path.to_string());
    }
    (strip_port(host_header.unwrap_or("")), target.to_string())
}

fn strip_port(authority: &str) -> String {
    let host = if authority.starts_with('[') {
        authority.find(']').map_or(authority, |i| &authority[..=i])
    } else {
        authority.rsplit_once(':').map_or(authority, |(h, _)| h)
    };
    host.to_ascii_lowercase()
}

fn serve(stream: TcpStream, routes: &Routes, state: &Mutex<State>) -> std::io::Result<()> {
    stream.set_read_timeout(Some(Duration::from_secs(10)))?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    let mut parts = request_line.split_whitespace();
    let (Some(method), Some(target)) = (parts.next(), parts.next()) else {
        return Ok(());
    };
    let mut host_header = None;
    let mut user_agent = None;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 || line.trim().is_empty() {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            let value = value.trim().to_string();
            if name.eq_ignore_ascii_case("host") {
                host_header = Some(value);
            } else if name.eq_ignore_ascii_case("user-agent") {
                user_agent = Some(value);
            }
        }
    }
    let (host, path) = split_target(target, host_header.as_deref());

    let started = Instant::now();
    let (response, delay) = {
        let mut st = state.lock().unwrap();
        let active = st.active.entry(host.clone()).or_default();
        *active += 1;
        let now = *active;
        let peak = st.peak.entry(host.clone()).or_default();
        *peak = (*peak).max(now);
        match routes.lookup(&host, &path) {
            Ok((route, key)) => {
                let hits = st.hits.entry((host.clone(), key)).or_default();
                *hits += 1;
                let delay = if *hits <= route.delay_times { route.delay } else { Duration::ZERO };
                (route.response.clone(), delay)
            }
            Err(status) => (Response::new(status, "text/plain", reason(status)), Duration::ZERO),
        }
    };
    state.lock().unwrap().log.push(LoggedRequest {
        method: method.to_string(),
        host: host.clone(),
        target: path,
        user_agent,
        status: response.status,
    });
    if !delay.is_zero() {
        thread::sleep(delay.saturating_sub(started.elapsed()));
    }
    let mut out = stream;
    let mut head = format!("HTTP/1.1 {} {}\r\n", response.status, reason(response.status));
    for (k, v) in &response.headers {
        head.push_str(&format!("{k}: {v}\r\n"));
    }
    head.push_str(&format!("Content-Length: {}\r\nConnection: close\r\n\r\n", response.body.len()));
    let result = out
        .write_all(head.as_bytes())
        .and_then(|_| if method == "HEAD" { Ok(()) } else { out.write_all(&response.body) })
        .and_then(|_| out.flush());
    let _ = out.shutdown(Shutdown::Write);
    if let Some(a) = state.lock().unwrap().active.get_mut(&host) {
        *a -= 1;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Read;

    fn get(server: &FixtureServer, raw_target: &str) -> String {
        let mut s = TcpStream::connect(server.addr()).unwrap();
        write!(s, "GET {raw_target} HTTP/1.1\r\nHost: ignored\r\n\r\n").unwrap();
        let mut out = String::new();
        s.read_to_string(&mut out).unwrap();
        out
    }

    #[test]
    fn routes_by_absolute_target() {
        let mut routes = Routes::default();
        routes.add("a.test", "/", Response::html("<p>hi</p>"));
        routes.add("a.test", "/q", Response::html("path only"));
        let server = FixtureServer::start(routes).unwrap();
        assert!(get(&server, "http://a.test/").ends_with("<p>hi</p>"));
        assert!(get(&server, "http://A.test:80/q?x=1").ends_with("path only"));
        assert!(get(&server, "http://a.test/missing").starts_with("HTTP/1.1 404"));
        assert!(get(&server, "http://b.test/").starts_with("HTTP/1.1 502"));
        let log = server.requests();
        assert_eq!(log.len(), 4);
        assert_eq!(log[1].target, "/q?x=1");
        assert_eq!(server.peak_concurrency("a.test"), 1);
    }

    #[test]
    fn strip_port_cases() {
        assert_eq!(strip_port("a.test:8080"), "a.test");
        assert_eq!(strip_port("a.test"), "a.test");
        assert_eq!(strip_port("[::1]:80"), "[::1]");
        assert_eq!(strip_port("[::1]"), "[::1]");
    }
}
