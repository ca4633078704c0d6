use std::time::Duration;

use beacon_core::corpus::{parse_url, FetchStatus, SkipReason};
use beacon_crawl::{CrawlConfig, Crawler, DomainEntry, FetchError};
use beacon_testkit::fixture_server::{FixtureServer, Response, Route, Routes};
use beacon_testkit::imagegen;

fn config(server: &FixtureServer, domains: &[&str]) -> CrawlConfig {
    CrawlConfig {
        domain_list: domains
            .iter()
            .map(|d| DomainEntry {
                domain: d.to_string(),
                category: None,
            })
            .collect(),
        proxy: Some(server.proxy_url()),
        timeout_seconds: 0.5,
        politeness_ms: 0,
        passes: 1,
        ..CrawlConfig::default()
    }
}

fn url(s: &str) -> beacon_core::corpus::ParsedUrl {
    parse_url(s, None).unwrap()
}

fn gif_response(salt: u64) -> Response {
    Response::new(200, "image/gif", imagegen::gif(1, 1, salt))
}

#[test]
fn redirect_chain_of_two() {
    let mut routes = Routes::default();
    routes.add("a.test", "/", Response::redirect(301, "http://www.a.test/home"));
    routes.add("www.a.test", "/home", Response::html("ok"));
    let server = FixtureServer::start(routes).unwrap();
    let crawler = Crawler::new(config(&server, &[])).unwrap();
    let r = crawler.fetcher().fetch(&url("http://a.test/")).unwrap();
    assert_eq!(r.status, 200);
    assert_eq!(r.final_url, url("http://www.a.test/home"));
    assert_eq!(r.redirect_chain, vec![url("http://a.test/"), url("http://www.a.test/home")]);
    assert_eq!(r.body.as_deref(), Some(&b"ok"[..]));
}

#[test]
fn redirect_loop_stops_after_ten() {
    let mut routes = Routes::default();
    routes.add("loop.test", "/a", Response::redirect(302, "/b"));
    routes.add("loop.test", "/b", Response::redirect(302, "http://loop.test/a"));
    let server = FixtureServer::start(routes).unwrap();
    let crawler = Crawler::new(config(&server, &[])).unwrap();
    let err = crawler.fetcher().fetch(&url("http://loop.test/a")).unwrap_err();
    assert_eq!(err, FetchError::TooManyRedirects(10));
    // The original request plus ten followed redirects.
    assert_eq!(server.requests().len(), 11);
}

#[test]
fn slow_server_times_out() {
    let mut routes = Routes::default();
    routes.add(
        "slow.test",
        "/",
        Route {
            response: Response::html("late"),
            delay: Duration::from_millis(1500),
            delay_times: 1,
        },
    );
    let server = FixtureServer::start(routes).unwrap();
    let crawler = Crawler::new(config(&server, &[])).unwrap();
    assert_eq!(crawler.fetcher().fetch(&url("http://slow.test/")).unwrap_err(), FetchError::Timeout);
}

#[test]
fn error_status_has_no_body() {
    let server = FixtureServer::start(Routes::default()).unwrap();
    let crawler = Crawler::new(config(&server, &[])).unwrap();
    let r = crawler.fetcher().fetch(&url("http://nowhere.test/")).unwrap();
    assert_eq!(r.status, 502);
    assert_eq!(r.body, None);
}

#[test]
fn primary_plus_same_site_links() {
    let mut routes = Routes::default();
    routes.add(
        "s.test",
        "/",
        Response::html(
            r#"<a href="/1">1</a><a href="http://blog.s.test/">b</a><a href="2">2</a>
               <a href="http://other.test/">x</a><a href="//else.test/">y</a><a href="/1#frag">dup</a>"#,
        ),
    );
    routes.add("s.test", "/1", Response::html(r#"<a href="/deeper">d</a>"#));
    routes.add("s.test", "/2", Response::html(""));
    routes.add("blog.s.test", "/", Response::html(""));
    let server = FixtureServer::start(routes).unwrap();
    let crawler = Crawler::new(config(&server, &["s.test"])).unwrap();
    let visit = crawler.crawl_site("s.test", 1);
    assert_eq!(visit.pages.len(), 4);
    let hosts = server.requested_hosts();
    assert!(!hosts.contains("other.test") && !hosts.contains("else.test"));
    assert!(!server.requests().iter().any(|r| r.target == "/deeper"));
}

#[test]
fn primary_timeout_gives_single_page() {
    let mut routes = Routes::default();
    routes.add(
        "t.test",
        "/",
        Route {
            response: Response::html(r#"<a href="/x">x</a><img src="/p.gif">"#),
            delay: Duration::from_millis(1500),
            delay_times: 1,
        },
    );
    let server = FixtureServer::start(routes).unwrap();
    let crawler = Crawler::new(config(&server, &["t.test"])).unwrap();
    let visit = crawler.crawl_site("t.test", 1);
    assert_eq!(visit.pages.len(), 1);
    assert_eq!(visit.pages[0].page.fetch_status, FetchStatus::Timeout);
    assert!(visit.pages[0].page.image_refs.is_empty());
}

#[test]
fn off_site_redirect_kept_with_final_url() {
    let mut routes = Routes::default();
    routes.add("r.test", "/", Response::html(r#"<a href="/go">go</a>"#));
    routes.add("r.test", "/go", Response::redirect(302, "http://land.other.test/p"));
    routes.add("land.other.test", "/p", Response::html(r#"<img src="http://px.other.test/1.gif">"#));
    routes.add("px.other.test", "/1.gif", gif_response(1));
    let server = FixtureServer::start(routes).unwrap();
    let out = Crawler::new(config(&server, &["r.test"])).unwrap().run().unwrap();
    let page = &out.corpus.pages[1];
    assert_eq!(page.requested_url, url("http://r.test/go"));
    assert_eq!(page.final_url, url("http://land.other.test/p"));
    assert_eq!(page.site_domain, "r.test");
    assert!(!out.corpus.images[0].is_cross_domain);
}

#[test]
fn per_site_dedup_and_skips() {
    let mut routes = Routes::default();
    let page = r#"<img src="/a.gif"><img src="/a.gif"><img src="/copy.gif">
                  <img src="data:image/gif;base64,AAAA"><img src=""><img src="ftp://f.test/x.gif">"#;
    for host in ["one.test", "two.test"] {
        routes.add(host, "/", Response::html(page));
        routes.add(host, "/a.gif", gif_response(7));
        routes.add(host, "/copy.gif", gif_response(7));
    }
    let server = FixtureServer::start(routes).unwrap();
    let out = Crawler::new(config(&server, &["one.test", "two.test"])).unwrap().run().unwrap();
    // Same bytes: one record per site, two overall.
    assert_eq!(out.corpus.images.len(), 2);
    assert_eq!(out.blobs.len(), 1);
    let reasons: Vec<_> = out.corpus.skipped.iter().filter(|s| s.site_domain == "one.test").map(|s| &s.reason).collect();
    assert_eq!(
        reasons,
        vec![
            &SkipReason::DataUri,
            &SkipReason::EmptySrc,
            &SkipReason::UnsupportedScheme { scheme: "ftp".into() }
        ]
    );
    assert!(!server.requested_hosts().contains("f.test"));
    let fetches = server.requests().iter().filter(|r| r.host == "one.test" && r.target == "/a.gif").count();
    assert_eq!(fetches, 1);
}

#[test]
fn failing_site_excluded_and_empty_list() {
    let mut routes = Routes::default();
    routes.add("up.test", "/", Response::html(""));
    let server = FixtureServer::start(routes).unwrap();
    let mut cfg = config(&server, &["up.test", "down.test"]);
    cfg.passes = 3;
    let out = Crawler::new(cfg).unwrap().run().unwrap();
    let ok: Vec<_> = out.corpus.sites.iter().map(|s| s.sampled_ok).collect();
    assert_eq!(ok, vec![true, false]);
    assert_eq!(out.corpus.sites[1].passes_attempted, 3);
    // One record per requested page across passes.
    assert_eq!(out.corpus.pages.len(), 2);

    let empty = Crawler::new(config(&server, &[])).unwrap().run().unwrap();
    assert!(empty.corpus.sites.is_empty() && empty.corpus.pages.is_empty());
}

#[test]
fn robots_can_be_ignored() {
    let mut routes = Routes::default();
    routes.add("r.test", "/robots.txt", Response::new(200, "text/plain", "User-agent: *\nDisallow: /\n"));
    routes.add("r.test", "/", Response::html(""));
    let server = FixtureServer::start(routes).unwrap();
    let out = Crawler::new(config(&server, &["r.test"])).unwrap().run().unwrap();
    assert!(!out.corpus.sites[0].sampled_ok);
    let mut cfg = config(&server, &["r.test"]);
    cfg.respect_robots = false;
    let out = Crawler::new(cfg).unwrap().run().unwrap();
    assert!(out.corpus.sites[0].sampled_ok);
}

#[test]
fn per_host_limit_holds_under_load() {
    let mut routes = Routes::default();
    let mut html = String::new();
    for i in 0..12 {
        html.push_str(&format!("<img src=\"http://img.test/{i}.gif\">"));
        routes.add(
            "img.test",
            &format!("/{i}.gif"),
            Route {
                response: gif_response(i),
                delay: Duration::from_millis(30),
                delay_times: 5,
            },
        );
    }
    let sites = ["a.test", "b.test", "c.test", "d.test"];
    for s in sites {
        routes.add(s, "/", Response::html(html.clone()));
    }
    let server = FixtureServer::start(routes).unwrap();
    let mut cfg = config(&server, &sites);
    cfg.per_host_parallelism = 2;
    cfg.timeout_seconds = 5.0;
    Crawler::new(cfg).unwrap().run().unwrap();
    assert_eq!(server.peak_concurrency("img.test"), 2);
}

#[test]
fn user_agent_is_sent() {
    let mut routes = Routes::default();
    routes.add("u.test", "/", Response::html(""));
    let server = FixtureServer::start(routes).unwrap();
    let mut cfg = config(&server, &[]);
    cfg.user_agent = "probe-agent/1".into();
    Crawler::new(cfg).unwrap().fetcher().fetch(&url("http://u.test/")).unwrap();
    assert_eq!(server.requests()[0].user_agent.as_deref(), Some("probe-agent/1"));
}
