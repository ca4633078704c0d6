//! HTTP GET with manual redirects, a total time budget and per-host gating.

use std::collections::HashMap;
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};

use beacon_core::corpus::{parse_url, ParsedUrl};
use reqwest::blocking::Client;
use reqwest::redirect::Policy;

use crate::config::CrawlConfig;
use crate::error::{CrawlError, FetchError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FetchResult {
    pub final_url: ParsedUrl,
    pub status: u16,
    /// Header fields of the final response as received.
    pub headers: Vec<(String, String)>,
    /// Present only for 2xx responses.
    pub body: Option<Vec<u8>>,
    pub elapsed_ms: u64,
    /// Requested URL first, then every redirect target.
    pub redirect_chain: Vec<ParsedUrl>,
}

impl FetchResult {
    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }

    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Default)]
struct HostState {
    active: usize,
    next_start: Option<Instant>,
}

/// Bounds open requests per host and spaces their start times.
pub struct HostGate {
    limit: usize,
    gap: Duration,
    hosts: Mutex<HashMap<String, HostState>>,
    freed: Condvar,
}

pub struct Permit<'a> {
    gate: &'a HostGate,
    host: String,
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut hosts = self.gate.hosts.lock().unwrap();
        if let Some(s) = hosts.get_mut(&self.host) {
            s.active -= 1;
        }
        self.gate.freed.notify_all();
    }
}

impl HostGate {
    pub fn new(limit: usize, gap: Duration) -> Self {
        HostGate {
            limit: limit.max(1),
            gap,
            hosts: Mutex::new(HashMap::new()),
            freed: Condvar::new(),
        }
    }

    pub fn acquire(&self, host: &str) -> Permit<'_> {
        let mut hosts = self.hosts.lock().unwrap();
        loop {
            let now = Instant::now();
            let state = hosts.entry(host.to_string()).or_default();
            let wait = state.next_start.map_or(Duration::ZERO, |t| t.saturating_duration_since(now));
            if state.active < self.limit && wait.is_zero() {
                state.active += 1;
                state.next_start = Some(now + self.gap);
                return Permit {
                    gate: self,
                    host: host.to_string(),
                };
            }
            hosts = if state.active < self.limit {
                self.freed.wait_timeout(hosts, wait).unwrap().0
            } else {
                self.freed.wait(hosts).unwrap()
            };
        }
    }
}

pub struct Fetcher {
    client: Client,
    gate: Arc<HostGate>,
    timeout: Duration,
    max_redirects: usize,
}

fn is_redirect(status: u16) -> bool {
    matches!(status, 301 | 302 | 303 | 307 | 308)
}

impl Fetcher {
    pub fn new(config: &CrawlConfig) -> Result<Self, CrawlError> {
        let mut builder = Client::builder()
            .redirect(Policy::none())
            .user_agent(config.user_agent.clone());
        if let Some(p) = &config.proxy {
            let proxy = reqwest::Proxy::all(p).map_err(|e| CrawlError::Client(e.to_string()))?;
            builder = builder.proxy(proxy);
        }
        let client = builder.build().map_err(|e| CrawlError::Client(e.to_string()))?;
        Ok(Fetcher {
            client,
            gate: Arc::new(HostGate::new(
                config.per_host_parallelism,
                Duration::from_millis(config.politeness_ms),
            )),
            timeout: config.timeout(),
            max_redirects: config.max_redirects,
        })
    }

    /// GETs `url`, following redirects. The whole chain shares one deadline.
    pub fn fetch(&self, url: &ParsedUrl) -> Result<FetchResult, FetchError> {
        let started = Instant::now();
        let deadline = started + self.timeout;
        let mut chain = vec![url.clone()];
        loop {
            let current = chain.last().unwrap().clone();
            let remaining = deadline.saturating_duration_since(Instant::now());
            if remaining.is_zero() {
                return Err(FetchError::Timeout);
            }
            let (status, headers, body) = self.get_once(&current, remaining)?;
            if is_redirect(status) {
                let location = headers
                    .iter()
                    .find(|(k, _)| k.eq_ignore_ascii_case("location"))
                    .map(|(_, v)| v.clone());
                if let Some(loc) = location {
                    let next = parse_url(&loc, Some(&current))
                        .ok()
                        .filter(ParsedUrl::is_http)
                        .ok_or_else(|| FetchError::BadRedirect(loc.clone()))?;
                    if chain.len() > self.max_redirects {
                        return Err(FetchError::TooManyRedirects(self.max_redirects));
                    }
                    chain.push(next);
                    continue;
                }
            }
            let ok = (200..300).contains(&status);
            return Ok(FetchResult {
                final_url: current,
                status,
                headers,
                body: ok.then_some(body),
                elapsed_ms: started.elapsed().as_millis() as u64,
                redirect_chain: chain,
            });
        }
    }

    fn get_once(
        &self,
        url: &ParsedUrl,
        timeout: Duration,
    ) -> Result<(u16, Vec<(String, String)>, Vec<u8>), FetchError> {
        let _permit = self.gate.acquire(url.host());
        let classify = |e: reqwest::Error| {
            if e.is_timeout() {
                FetchError::Timeout
            } else {
                FetchError::Connection(e.to_string())
            }
        };
        let resp = self
            .client
            .get(url.to_string())
            .timeout(timeout)
            .send()
            .map_err(classify)?;
        let status = resp.status().as_u16();
        let headers = resp
            .headers()
            .iter()
            .map(|(k, v)| (k.as_str().to_string(), String::from_utf8_lossy(v.as_bytes()).into_owned()))
            .collect();
        let body = if is_redirect(status) {
            Vec::new()
        } else {
            resp.bytes().map_err(classify)?.to_vec()
        };
        Ok((status, headers, body))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::thread;

    #[test]
    fn gate_limits_concurrency_and_spacing() {
        let gate = HostGate::new(2, Duration::from_millis(20));
        let peak = Mutex::new((0usize, 0usize));
        let started = Instant::now();
        thread::scope(|s| {
            for _ in 0..6 {
                s.spawn(|| {
                    let _p = gate.acquire("h");
                    {
                        let mut p = peak.lock().unwrap();
                        p.0 += 1;
                        p.1 = p.1.max(p.0);
                    }
                    thread::sleep(Duration::from_millis(30));
                    peak.lock().unwrap().0 -= 1;
                });
            }
        });
        assert!(peak.lock().unwrap().1 <= 2);
        // Six starts spaced at least 20 ms apart.
        assert!(started.elapsed() >= Duration::from_millis(100));
    }
}
