use std::fmt;
use std::net::{Ipv4Addr, Ipv6Addr};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::UrlError;

/// An absolute URL reduced to the parts the pipeline cares about.
///
/// Credentials and fragments are dropped at parse time; scheme and host are
/// lowercase. `port` always holds a concrete value: the explicit port when
/// one was given, otherwise the scheme default (0 for schemes without one).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParsedUrl {
    scheme: String,
    host: String,
    port: u16,
    path: String,
    query: Option<String>,
}

pub(crate) fn default_port(scheme: &str) -> Option<u16> {
    match scheme {
        "http" | "ws" => Some(80),
        "https" | "wss" => Some(443),
        "ftp" => Some(21),
        _ => None,
    }
}

impl ParsedUrl {
    /// Parses `raw`, resolving it against `base` when it is relative.
    pub fn parse(raw: &str, base: Option<&ParsedUrl>) -> Result<Self, UrlError> {
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            return Err(UrlError::Empty);
        }
        let base_url = match base {
            Some(b) => Some(
                url::Url::parse(&b.to_string())
                    .map_err(|_| UrlError::Malformed(b.to_string()))?,
            ),
            None => None,
        };
        let parsed = url::Url::options()
            .base_url(base_url.as_ref())
            .parse(trimmed)
            .map_err(|_| UrlError::Malformed(trimmed.to_string()))?;
        Self::from_url(&parsed).ok_or_else(|| UrlError::Malformed(trimmed.to_string()))
    }

    fn from_url(url: &url::Url) -> Option<Self> {
        let host = match url.host()? {
            url::Host::Domain(d) => d.to_ascii_lowercase(),
            url::Host::Ipv4(ip) => ip.to_string(),
            url::Host::Ipv6(ip) => format!("[{ip}]"),
        };
        let host = host.trim_end_matches('.').to_string();
        if host.is_empty() || host.chars().any(char::is_whitespace) {
            return None;
        }
        let scheme = url.scheme().to_ascii_lowercase();
        let port = url
            .port()
            .or_else(|| default_port(&scheme))
            .unwrap_or(0);
        let path = if url.path().is_empty() {
            "/".to_string()
        } else {
            url.path().to_string()
        };
        Some(ParsedUrl {
            scheme,
            host,
            port,
            path,
            query: url.query().map(str::to_string),
        })
    }

    pub fn scheme(&self) -> &str {
        &self.scheme
    }

    pub fn host(&self) -> &str {
        &self.host
    }

    pub fn port(&self) -> u16 {
        self.port
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    /// The text after `?` and before `#`; `Some("")` for a bare trailing `?`.
    pub fn query(&self) -> Option<&str> {
        self.query.as_deref()
    }

    pub fn is_http(&self) -> bool {
        self.scheme == "http" || self.scheme == "https"
    }

    /// True when the host is an IPv4 or bracketed IPv6 literal.
    pub fn host_is_ip(&self) -> bool {
        host_is_ip(&self.host)
    }

    /// The (scheme, host, port) triple used by the same-origin rule.
    pub fn origin(&self) -> (&str, &str, u16) {
        (&self.scheme, &self.host, self.port)
    }

    /// Byte range of the host inside the serialized form.
    pub fn host_span(&self) -> std::ops::Range<usize> {
        let start = self.scheme.len() + 3;
        start..start + self.host.len()
    }
}

pub(crate) fn host_is_ip(host: &str) -> bool {
    if let Some(inner) = host.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
        return Ipv6Addr::from_str(inner).is_ok();
    }
    Ipv4Addr::from_str(host).is_ok()
}

impl fmt::Display for ParsedUrl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}://{}", self.scheme, self.host)?;
        let implicit = default_port(&self.scheme).unwrap_or(0);
        if self.port != implicit {
            write!(f, ":{}", self.port)?;
        }
        f.write_str(&self.path)?;
        if let Some(q) = &self.query {
            write!(f, "?{q}")?;
        }
        Ok(())
    }
}

impl FromStr for ParsedUrl {
    type Err = UrlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ParsedUrl::parse(s, None)
    }
}

impl Serialize for ParsedUrl {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ParsedUrl {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        ParsedUrl::parse(&raw, None).map_err(serde::de::Error::custom)
    }
}

/// Parses `raw` as an absolute URL, resolving relative forms against `base`.
pub fn parse_url(raw: &str, base: Option<&ParsedUrl>) -> Result<ParsedUrl, UrlError> {
    ParsedUrl::parse(raw, base)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(s: &str) -> ParsedUrl {
        parse_url(s, None).unwrap()
    }

    #[test]
    fn protocol_relative_takes_base_scheme() {
        let base = u("http://shop.example.com/");
        let p = parse_url("//t.example.net/p.gif", Some(&base)).unwrap();
        assert_eq!(p.scheme(), "http");
        assert_eq!(p.host(), "t.example.net");
        assert_eq!(p.path(), "/p.gif");
    }

    #[test]
    fn relative_path_resolution() {
        let base = u("http://a.com/x/");
        let p = parse_url("img/a.png", Some(&base)).unwrap();
        assert_eq!(p.to_string(), "http://a.com/x/img/a.png");
    }

    #[test]
    fn scheme_and_host_case_folded() {
        let p = u("HTTP://A.COM/Q?id=1");
        assert_eq!(p.scheme(), "http");
        assert_eq!(p.host(), "a.com");
        assert_eq!(p.path(), "/Q");
        assert_eq!(p.query(), Some("id=1"));
    }

    #[test]
    fn credentials_and_fragment_stripped() {
        let p = u("http://user:pw@a.com:8080/p?x=1#frag");
        assert_eq!(p.to_string(), "http://a.com:8080/p?x=1");
        assert_eq!(p.port(), 8080);
    }

    #[test]
    fn default_port_filled_and_elided() {
        let p = u("http://a.com:80/");
        assert_eq!(p.port(), 80);
        assert_eq!(p.to_string(), "http://a.com/");
        assert_eq!(u("https://a.com").port(), 443);
    }

    #[test]
    fn empty_query_is_kept_distinct() {
        assert_eq!(u("http://t.net/p.gif?").query(), Some(""));
        assert_eq!(u("http://t.net/p.gif").query(), None);
        assert_eq!(u("http://t.net/p.gif?").to_string(), "http://t.net/p.gif?");
    }

    #[test]
    fn hostless_inputs_rejected() {
        assert!(matches!(parse_url("   ", None), Err(UrlError::Empty)));
        assert!(parse_url("img/a.png", None).is_err());
        assert!(parse_url("mailto:me@a.com", None).is_err());
        assert!(parse_url("data:image/gif;base64,R0lG", None).is_err());
    }

    #[test]
    fn ip_hosts() {
        assert!(u("http://10.0.0.1/x").host_is_ip());
        assert!(u("http://[::1]:81/x").host_is_ip());
        assert_eq!(u("http://[::1]:81/x").host(), "[::1]");
        assert!(!u("http://a.com/").host_is_ip());
    }

    #[test]
    fn host_span_points_at_host() {
        let p = u("https://ads.example.com/x");
        let s = p.to_string();
        assert_eq!(&s[p.host_span()], "ads.example.com");
    }

    #[test]
    fn json_uses_string_form() {
        let p = u("http://a.com/p?q=1");
        let js = serde_json::to_string(&p).unwrap();
        assert_eq!(js, "\"http://a.com/p?q=1\"");
        let back: ParsedUrl = serde_json::from_str(&js).unwrap();
        assert_eq!(back, p);
    }
}
