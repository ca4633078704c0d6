//! robots.txt checks for page fetches, cached per scheme and host.

use std::collections::HashMap;
use std::sync::Mutex;

use beacon_core::corpus::{parse_url, ParsedUrl};
use robotstxt::DefaultMatcher;

use crate::fetch::Fetcher;

pub struct RobotsCache {
    agent: String,
    /// `None` when robots.txt could not be fetched; everything is allowed then.
    bodies: Mutex<HashMap<(String, String, u16), Option<String>>>,
}

/// The product token of a user-agent string, as robots.txt groups name it.
pub fn product_token(user_agent: &str) -> &str {
    user_agent
        .split(['/', ' '])
        .next()
        .filter(|t| !t.is_empty())
        .unwrap_or("*")
}

pub fn allowed(body: &str, agent: &str, url: &ParsedUrl) -> bool {
    DefaultMatcher::default().one_agent_allowed_by_robots(body, agent, &url.to_string())
}

impl RobotsCache {
    pub fn new(user_agent: &str) -> Self {
        RobotsCache {
            agent: product_token(user_agent).to_string(),
            bodies: Mutex::new(HashMap::new()),
        }
    }

    pub fn is_allowed(&self, fetcher: &Fetcher, url: &ParsedUrl) -> bool {
        let key = (url.scheme().to_string(), url.host().to_string(), url.port());
        let cached = self.bodies.lock().unwrap().get(&key).cloned();
        let body = match cached {
            Some(b) => b,
            None => {
                let robots_url = parse_url("/robots.txt", Some(url)).expect("robots url");
                let body = fetcher
                    .fetch(&robots_url)
                    .ok()
                    .and_then(|r| r.body)
                    .map(|b| String::from_utf8_lossy(&b).into_owned());
                self.bodies.lock().unwrap().entry(key).or_insert(body).clone()
            }
        };
        body.is_none_or(|b| allowed(&b, &self.agent, url))
    }
}
