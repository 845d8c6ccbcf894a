//! Identifier newtypes and web-identifier normalization.

use std::fmt;

use serde::{Deserialize, Serialize};
use url::Url;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

string_id!(
    /// Opaque scholar identifier. Also identifies the scholar's self-journal.
    ScholarId
);
string_id!(ArticleId);
string_id!(ReviewId);
string_id!(IssueId);

/// A normalized web identifier.
///
/// Two spellings that differ only in scheme/host case, an explicit default
/// port, or a trailing slash on the path normalize to the same `ItemUri`.
/// Path and query case are preserved.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct ItemUri(String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid web identifier {raw:?}: {reason}")]
pub struct UriError {
    pub raw: String,
    pub reason: String,
}

impl ItemUri {
    pub fn parse(raw: &str) -> Result<Self, UriError> {
        let err = |reason: &str| UriError {
            raw: raw.to_owned(),
            reason: reason.to_owned(),
        };
        let url = Url::parse(raw.trim()).map_err(|e| err(&e.to_string()))?;
        let host = url.host_str().ok_or_else(|| err("missing host"))?;
        if host.is_empty() {
            return Err(err("missing host"));
        }

        // `Url` already lowercases scheme and host and drops default ports.
        let mut out = String::with_capacity(raw.len());
        out.push_str(url.scheme());
        out.push_str("://");
        if !url.username().is_empty() {
            out.push_str(url.username());
            if let Some(pw) = url.password() {
                out.push(':');
                out.push_str(pw);
            }
            out.push('@');
        }
        out.push_str(host);
        if let Some(port) = url.port() {
            out.push(':');
            out.push_str(&port.to_string());
        }
        let path = url.path();
        out.push_str(path.strip_suffix('/').unwrap_or(path));
        if let Some(q) = url.query() {
            out.push('?');
            out.push_str(q);
        }
        if let Some(frag) = url.fragment() {
            out.push('#');
            out.push_str(frag);
        }
        Ok(Self(out))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ItemUri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for ItemUri {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        ItemUri::parse(&raw).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(s: &str) -> String {
        ItemUri::parse(s).unwrap().as_str().to_owned()
    }

    #[test]
    fn trivial_variants_collapse() {
        let canonical = "https://arxiv.org/abs/1234.5678";
        assert_eq!(norm("https://arxiv.org/abs/1234.5678"), canonical);
        assert_eq!(norm("HTTPS://ArXiv.ORG/abs/1234.5678"), canonical);
        assert_eq!(norm("https://arxiv.org:443/abs/1234.5678"), canonical);
        assert_eq!(norm("https://arxiv.org/abs/1234.5678/"), canonical);
    }

    #[test]
    fn path_and_query_case_preserved() {
        assert_eq!(
            norm("http://Example.com/A/B?Q=X"),
            "http://example.com/A/B?Q=X"
        );
        assert_ne!(norm("http://example.com/a"), norm("http://example.com/A"));
    }

    #[test]
    fn bare_host_drops_root_slash() {
        assert_eq!(norm("http://example.com"), "http://example.com");
        assert_eq!(norm("http://example.com/"), "http://example.com");
        assert_eq!(
            norm("http://example.com:8080/x/"),
            "http://example.com:8080/x"
        );
    }

    #[test]
    fn rejects_non_web_identifiers() {
        assert!(ItemUri::parse("not a uri").is_err());
        assert!(ItemUri::parse("mailto:someone@example.com").is_err());
        assert!(ItemUri::parse("").is_err());
    }
}
