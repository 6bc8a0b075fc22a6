//! Registry metadata client with an on-disk response cache.
//!
//! Responses are stored verbatim at `cache/<ecosystem>/<name>/<version>.json`
//! so reruns reproduce the same metadata without network access.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::Value;

use super::{npm, pypi, rubygems, MetadataError, PackageMetadata};
use crate::types::Ecosystem;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistryEndpoints {
    pub npm: String,
    pub pypi: String,
    pub rubygems: String,
}

impl Default for RegistryEndpoints {
    fn default() -> Self {
        RegistryEndpoints {
            npm: "https://registry.npmjs.org".into(),
            pypi: "https://pypi.org".into(),
            rubygems: "https://rubygems.org".into(),
        }
    }
}

impl RegistryEndpoints {
    pub fn base(&self, ecosystem: Ecosystem) -> &str {
        match ecosystem {
            Ecosystem::Npm => &self.npm,
            Ecosystem::Pypi => &self.pypi,
            Ecosystem::Rubygems => &self.rubygems,
        }
    }

    /// Same endpoint for all ecosystems (used by fixture servers).
    pub fn uniform(base: &str) -> Self {
        RegistryEndpoints { npm: base.into(), pypi: base.into(), rubygems: base.into() }
    }
}

/// Percent-encodes a path segment (`@scope/pkg` → `@scope%2Fpkg`).
fn encode_segment(raw: &str) -> String {
    let mut out = String::new();
    for b in raw.bytes() {
        if b.is_ascii_alphanumeric() || b"-._~@".contains(&b) {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

pub fn version_url(base: &str, ecosystem: Ecosystem, name: &str, version: &str) -> String {
    let base = base.trim_end_matches('/');
    let (n, v) = (encode_segment(name), encode_segment(version));
    match ecosystem {
        Ecosystem::Npm => format!("{base}/{n}/{v}"),
        Ecosystem::Pypi => format!("{base}/pypi/{n}/{v}/json"),
        Ecosystem::Rubygems => format!("{base}/api/v2/rubygems/{n}/versions/{v}.json"),
    }
}

#[derive(Debug, Clone)]
pub struct RegistryClient {
    endpoints: RegistryEndpoints,
    cache_dir: PathBuf,
    offline: bool,
    attempts: u32,
    timeout: Duration,
}

impl RegistryClient {
    pub fn new(endpoints: RegistryEndpoints, cache_dir: impl Into<PathBuf>) -> Self {
        RegistryClient {
            endpoints,
            cache_dir: cache_dir.into(),
            offline: false,
            attempts: 3,
            timeout: Duration::from_secs(30),
        }
    }

    pub fn offline(mut self, offline: bool) -> Self {
        self.offline = offline;
        self
    }

    pub fn attempts(mut self, attempts: u32) -> Self {
        self.attempts = attempts.max(1);
        self
    }

    pub fn timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn cache_path(&self, ecosystem: Ecosystem, name: &str, version: &str) -> PathBuf {
        self.cache_dir
            .join(ecosystem.as_str())
            .join(encode_segment(name))
            .join(format!("{}.json", encode_segment(version)))
    }

    /// Metadata for one published version, from cache when present.
    pub fn fetch(&self, ecosystem: Ecosystem, name: &str, version: &str) -> Result<PackageMetadata, MetadataError> {
        if name.trim().is_empty() || version.trim().is_empty() {
            return Err(MetadataError::SchemaError("name and version must be non-empty".into()));
        }
        let cache = self.cache_path(ecosystem, name, version);
        let body = match fs::read(&cache) {
            Ok(bytes) => bytes,
            Err(_) if self.offline => {
                return Err(MetadataError::OfflineCacheMiss(format!("{ecosystem}:{name}@{version}")))
            }
            Err(_) => {
                let url = version_url(self.endpoints.base(ecosystem), ecosystem, name, version);
                let bytes = self.get_with_retry(&url, name)?;
                // Validate before caching so a bad document is not replayed forever.
                parse_registry_document(ecosystem, &bytes)?;
                write_cache(&cache, &bytes)?;
                bytes
            }
        };
        parse_registry_document(ecosystem, &body)
    }

    fn get_with_retry(&self, url: &str, name: &str) -> Result<Vec<u8>, MetadataError> {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .build()
            .new_agent();
        let mut last = None;
        for attempt in 0..self.attempts {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(200 * u64::from(attempt)));
            }
            match agent.get(url).call() {
                Ok(mut resp) => {
                    return resp
                        .body_mut()
                        .read_to_vec()
                        .map_err(|e| MetadataError::NetworkError(e.to_string()))
                }
                Err(ureq::Error::StatusCode(404)) => return Err(MetadataError::NotFound(name.to_string())),
                Err(ureq::Error::StatusCode(code)) if (400..500).contains(&code) && code != 429 => {
                    return Err(MetadataError::NetworkError(format!("{url}: http status {code}")))
                }
                Err(e) => last = Some(format!("{url}: {e}")),
            }
        }
        Err(MetadataError::NetworkError(last.unwrap_or_default()))
    }
}

/// Writes one cache entry through a uniquely named temp file and rename, so
/// concurrent writers of the same key never interleave bytes.
fn write_cache(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension(format!("json.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
    }
    fs::rename(tmp, path)
}

pub fn parse_registry_document(ecosystem: Ecosystem, bytes: &[u8]) -> Result<PackageMetadata, MetadataError> {
    let doc: Value = serde_json::from_slice(bytes).map_err(|e| MetadataError::SchemaError(e.to_string()))?;
    let md = match ecosystem {
        Ecosystem::Npm => {
            if doc.get("name").and_then(Value::as_str).is_none() {
                None
            } else {
                npm::from_document(&doc, "registry").ok()
            }
        }
        Ecosystem::Pypi => pypi::from_json_api(&doc),
        Ecosystem::Rubygems => rubygems::from_json_api(&doc),
    };
    md.filter(|m| !m.name.is_empty())
        .ok_or_else(|| MetadataError::SchemaError("name".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn urls_per_ecosystem() {
        assert_eq!(
            version_url("https://registry.npmjs.org/", Ecosystem::Npm, "left-pad", "1.3.0"),
            "https://registry.npmjs.org/left-pad/1.3.0"
        );
        assert_eq!(
            version_url("http://h", Ecosystem::Npm, "@types/node", "20.0.0"),
            "http://h/@types%2Fnode/20.0.0"
        );
        assert_eq!(
            version_url("https://pypi.org", Ecosystem::Pypi, "requests", "2.31.0"),
            "https://pypi.org/pypi/requests/2.31.0/json"
        );
        assert_eq!(
            version_url("https://rubygems.org", Ecosystem::Rubygems, "rake", "13.0.6"),
            "https://rubygems.org/api/v2/rubygems/rake/versions/13.0.6.json"
        );
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(
            parse_registry_document(Ecosystem::Npm, br#"{"version":"1.0.0"}"#),
            Err(MetadataError::SchemaError(_))
        ));
        assert!(matches!(
            parse_registry_document(Ecosystem::Pypi, br#"{"info":{}}"#),
            Err(MetadataError::SchemaError(_))
        ));
        assert!(parse_registry_document(Ecosystem::Rubygems, b"not json").is_err());
    }

    #[test]
    fn rubygems_document() {
        let md = parse_registry_document(
            Ecosystem::Rubygems,
            br#"{"name":"rake","version":"13.0.6","authors":"Hiroshi SHIBATA, Eric Hodel","info":"Make-like","downloads":42,
                "homepage_uri":"https://github.com/ruby/rake","dependencies":{"runtime":[{"name":"x","requirements":">= 1"}],"development":[]}}"#,
        )
        .unwrap();
        assert_eq!(md.authors.len(), 2);
        assert_eq!(md.download_count, Some(42));
        assert_eq!(md.dependencies.len(), 1);
        assert_eq!(md.description, "Make-like");
    }

    #[test]
    fn offline_cache_miss() {
        let dir = tempfile::tempdir().unwrap();
        let client = RegistryClient::new(RegistryEndpoints::uniform("http://127.0.0.1:9"), dir.path()).offline(true);
        assert!(matches!(
            client.fetch(Ecosystem::Npm, "left-pad", "1.3.0"),
            Err(MetadataError::OfflineCacheMiss(_))
        ));
    }
}
