//! Package metadata: manifest parsing per ecosystem, a cached registry
//! client, and the derived per-package metadata features.

mod npm;
mod pypi;
pub mod registry;
mod rubygems;
pub mod yaml;

use std::fs;

use serde::{Deserialize, Serialize};

use crate::corpus::{FileKind, UnpackedTree};
use crate::types::Ecosystem;

pub use registry::{RegistryClient, RegistryEndpoints};

#[derive(Debug, thiserror::Error)]
pub enum MetadataError {
    #[error("no manifest found for {0} package")]
    NoManifestFound(Ecosystem),
    #[error("malformed manifest `{file}`: {message}")]
    MalformedManifest { file: String, message: String },
    #[error("network error: {0}")]
    NetworkError(String),
    #[error("{0} not found in registry")]
    NotFound(String),
    #[error("registry response lacks mandatory field: {0}")]
    SchemaError(String),
    #[error("offline mode and no cached response for {0}")]
    OfflineCacheMiss(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl MetadataError {
    fn malformed(file: &str, message: impl ToString) -> Self {
        MetadataError::MalformedManifest { file: file.to_string(), message: message.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Person {
    pub name: Option<String>,
    pub email: Option<String>,
}

impl Person {
    /// Builds a person from optional parts; `None` when both are blank.
    pub fn new(name: Option<&str>, email: Option<&str>) -> Option<Person> {
        let clean = |s: Option<&str>| s.map(str::trim).filter(|s| !s.is_empty()).map(str::to_string);
        let (name, email) = (clean(name), clean(email));
        if name.is_none() && email.is_none() {
            None
        } else {
            Some(Person { name, email })
        }
    }

    /// Parses `Name <email> (url)`, `<email>`, a bare email or a bare name.
    pub fn parse(raw: &str) -> Option<Person> {
        let raw = raw.trim();
        let without_url = match raw.find('(') {
            Some(i) if raw.ends_with(')') => raw[..i].trim(),
            _ => raw,
        };
        if let (Some(open), Some(close)) = (without_url.find('<'), without_url.rfind('>')) {
            if open < close {
                let name = without_url[..open].trim().trim_matches('"');
                let email = &without_url[open + 1..close];
                return Person::new(Some(name), Some(email));
            }
        }
        if without_url.contains('@') && !without_url.contains(' ') {
            Person::new(None, Some(without_url))
        } else {
            Person::new(Some(without_url), None)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dependency {
    pub name: String,
    /// Opaque, never resolved.
    pub constraint: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackageMetadata {
    pub name: String,
    pub version: String,
    pub description: String,
    pub authors: Vec<Person>,
    pub maintainers: Vec<Person>,
    pub homepage_url: Option<String>,
    pub repository_url: Option<String>,
    pub dependencies: Vec<Dependency>,
    pub dependents_count: Option<u64>,
    /// Carried when a registry exposes it; not used as a feature.
    pub download_count: Option<u64>,
}

impl PackageMetadata {
    pub(crate) fn set_description(&mut self, raw: &str) {
        self.description = raw.trim().to_string();
    }

    pub(crate) fn push_dependency(&mut self, name: &str, constraint: &str) {
        let name = name.trim();
        if !name.is_empty() {
            self.dependencies.push(Dependency {
                name: name.to_string(),
                constraint: constraint.trim().to_string(),
            });
        }
    }
}

pub(crate) fn non_empty(s: Option<&str>) -> Option<String> {
    s.map(str::trim).filter(|s| !s.is_empty()).map(str::to_string)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetadataFeatures {
    /// Unicode scalar values in the description.
    pub description_length: usize,
    /// Whitespace-separated tokens in the description.
    pub description_tokens: usize,
    pub author_maintainer_count: usize,
    pub has_url: bool,
    pub has_git_url: bool,
    pub dependency_count: usize,
}

pub fn metadata_features(md: &PackageMetadata) -> MetadataFeatures {
    let urls: Vec<&str> = [&md.homepage_url, &md.repository_url]
        .into_iter()
        .flatten()
        .map(|u| u.trim())
        .filter(|u| !u.is_empty())
        .collect();
    let mut people: Vec<&Person> = md.authors.iter().chain(&md.maintainers).collect();
    people.sort();
    people.dedup();
    MetadataFeatures {
        description_length: md.description.chars().count(),
        description_tokens: md.description.split_whitespace().count(),
        author_maintainer_count: people.len(),
        has_url: !urls.is_empty(),
        has_git_url: urls.iter().any(|u| u.to_ascii_lowercase().contains("git")),
        dependency_count: md.dependencies.len(),
    }
}

/// Preference rank of a manifest file name for an ecosystem (lower wins);
/// `None` when the file is not a manifest.
pub fn manifest_rank(ecosystem: Ecosystem, file_name: &str) -> Option<u8> {
    match ecosystem {
        Ecosystem::Npm => (file_name == "package.json").then_some(0),
        Ecosystem::Pypi => match file_name {
            "PKG-INFO" | "METADATA" => Some(0),
            "pyproject.toml" => Some(1),
            "setup.cfg" => Some(2),
            _ => None,
        },
        Ecosystem::Rubygems => {
            if file_name == "metadata.yml" || file_name == "metadata" {
                Some(0)
            } else if file_name.ends_with(".gemspec") {
                Some(1)
            } else {
                None
            }
        }
    }
}

/// Parses one manifest file's bytes. `file_name` selects the format.
pub fn parse_manifest_bytes(
    ecosystem: Ecosystem,
    file_name: &str,
    bytes: &[u8],
) -> Result<PackageMetadata, MetadataError> {
    let text = String::from_utf8_lossy(bytes);
    match (ecosystem, file_name) {
        (Ecosystem::Npm, _) => npm::parse_package_json(&text, file_name),
        (Ecosystem::Pypi, "pyproject.toml") => pypi::parse_pyproject(&text, file_name),
        (Ecosystem::Pypi, "setup.cfg") => pypi::parse_setup_cfg(&text),
        (Ecosystem::Pypi, _) => Ok(pypi::parse_core_metadata(&text)),
        (Ecosystem::Rubygems, f) if f.ends_with(".gemspec") => Ok(rubygems::parse_gemspec_ruby(&text)),
        (Ecosystem::Rubygems, _) => rubygems::parse_gem_yaml(&text, file_name),
    }
}

/// Reads the package's primary manifest: the shallowest manifest file,
/// ties broken by format preference and then path.
pub fn parse_manifest(tree: &UnpackedTree, ecosystem: Ecosystem) -> Result<PackageMetadata, MetadataError> {
    let mut candidates: Vec<_> = tree
        .files_of_kind(FileKind::Manifest)
        .filter_map(|f| {
            let name = f.path.file_name()?.to_string_lossy().into_owned();
            let rank = manifest_rank(ecosystem, &name)?;
            Some((f.path.components().count(), rank, f, name))
        })
        .collect();
    candidates.sort_by(|a, b| (a.0, a.1, &a.2.path).cmp(&(b.0, b.1, &b.2.path)));
    let (_, _, file, name) = candidates.first().ok_or(MetadataError::NoManifestFound(ecosystem))?;
    let bytes = fs::read(tree.absolute(file))?;
    parse_manifest_bytes(ecosystem, name, &bytes)
}
