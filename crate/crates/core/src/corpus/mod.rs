//! Package ingestion: archive storage, safe unpacking and the labeled dataset
//! manifest.

pub mod archive;
pub mod manifest;
pub mod zip;

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::metadata;
use crate::types::{Ecosystem, Label, Language};

pub use archive::{ArchiveFormat, ExtractionLimits};
pub use manifest::{DatasetManifest, Tallies};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("unreadable archive: {0}")]
    UnreadableArchive(String),
    #[error("unknown package format: {0}")]
    UnknownFormat(String),
    #[error("extraction limit exceeded: {0}")]
    ExtractionLimitExceeded(String),
    #[error("duplicate manifest entry {0}")]
    DuplicateEntry(String),
    #[error("malformed dataset manifest line {line}: {message}")]
    MalformedManifest { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// (ecosystem, name, version): unique within a dataset manifest.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PackageId {
    pub ecosystem: Ecosystem,
    pub name: String,
    pub version: String,
}

impl std::fmt::Display for PackageId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.version.is_empty() {
            write!(f, "{}:{}", self.ecosystem, self.name)
        } else {
            write!(f, "{}:{}@{}", self.ecosystem, self.name, self.version)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackageRef {
    pub ecosystem: Ecosystem,
    pub name: String,
    pub version: String,
    pub label: Label,
    pub archive_path: PathBuf,
    pub content_digest: String,
}

impl PackageRef {
    pub fn id(&self) -> PackageId {
        PackageId {
            ecosystem: self.ecosystem,
            name: self.name.clone(),
            version: self.version.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileKind {
    Source,
    Manifest,
    Binary,
    Resource,
    Other,
}

const BINARY_EXTENSIONS: &[&str] = &[
    "so", "dll", "exe", "dylib", "pyd", "pyc", "pyo", "node", "o", "a", "class", "jar", "wasm",
    "bin", "gz", "zip", "tgz", "whl", "gem",
];
const RESOURCE_EXTENSIONS: &[&str] = &[
    "json", "md", "markdown", "rst", "txt", "html", "htm", "css", "scss", "svg", "png", "jpg",
    "jpeg", "gif", "ico", "yml", "yaml", "xml", "csv", "ts", "map", "cfg", "ini", "toml", "lock",
];

impl FileKind {
    /// Classifies one extracted file. Manifests win over extension rules.
    pub fn classify(ecosystem: Ecosystem, path: &Path, contents: &[u8]) -> FileKind {
        let file_name = path.file_name().map(|n| n.to_string_lossy()).unwrap_or_default();
        if metadata::manifest_rank(ecosystem, &file_name).is_some() {
            return FileKind::Manifest;
        }
        let ext = path
            .extension()
            .map(|e| e.to_string_lossy().to_ascii_lowercase())
            .unwrap_or_default();
        if Language::from_extension(&ext) == Some(ecosystem.language()) {
            return FileKind::Source;
        }
        if BINARY_EXTENSIONS.contains(&ext.as_str()) || contents.iter().take(8192).any(|&b| b == 0)
        {
            return FileKind::Binary;
        }
        if RESOURCE_EXTENSIONS.contains(&ext.as_str()) {
            return FileKind::Resource;
        }
        FileKind::Other
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeFile {
    pub path: PathBuf,
    pub size: u64,
    pub kind: FileKind,
}

/// A package archive extracted under an isolated working root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnpackedTree {
    pub root: PathBuf,
    pub ecosystem: Ecosystem,
    /// Sorted by path.
    pub files: Vec<TreeFile>,
    pub warnings: Vec<String>,
}

impl UnpackedTree {
    pub fn files_of_kind(&self, kind: FileKind) -> impl Iterator<Item = &TreeFile> {
        self.files.iter().filter(move |f| f.kind == kind)
    }

    pub fn absolute(&self, file: &TreeFile) -> PathBuf {
        self.root.join(&file.path)
    }
}

/// Result of ingesting one archive.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub package: PackageRef,
    pub warnings: Vec<String>,
}

/// On-disk corpus: `store/<ecosystem>/<name>/<version>/<digest>.archive`
/// for archives and `work/<digest>/` for unpacked trees.
#[derive(Debug, Clone)]
pub struct CorpusStore {
    root: PathBuf,
    limits: ExtractionLimits,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Encodes a package name or version as a single safe path component.
fn path_component(raw: &str) -> String {
    if raw.is_empty() {
        return "_".to_string();
    }
    let mut out = String::with_capacity(raw.len());
    for ch in raw.chars() {
        if ch.is_ascii_alphanumeric() || matches!(ch, '-' | '_' | '@' | '+') {
            out.push(ch);
        } else if ch == '.' && !out.is_empty() {
            out.push(ch);
        } else {
            for b in ch.to_string().bytes() {
                out.push_str(&format!("%{b:02X}"));
            }
        }
    }
    out
}

impl CorpusStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        CorpusStore { root: root.into(), limits: ExtractionLimits::default() }
    }

    pub fn with_limits(mut self, limits: ExtractionLimits) -> Self {
        self.limits = limits;
        self
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn limits(&self) -> ExtractionLimits {
        self.limits
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.root.join("manifest.jsonl")
    }

    pub fn archive_path(&self, id: &PackageId, digest: &str) -> PathBuf {
        self.root
            .join("store")
            .join(id.ecosystem.as_str())
            .join(path_component(&id.name))
            .join(path_component(&id.version))
            .join(format!("{digest}.archive"))
    }

    pub fn work_dir(&self, digest: &str) -> PathBuf {
        self.root.join("work").join(path_component(digest))
    }

    /// Copies an archive into the store after a full bounded read, taking
    /// name and version from its manifest and falling back to the file name.
    pub fn ingest_archive(
        &self,
        path: &Path,
        ecosystem: Ecosystem,
        label: Label,
    ) -> Result<Ingested, CorpusError> {
        let bytes = fs::read(path)?;
        let digest = sha256_hex(&bytes);

        let mut candidates: Vec<(usize, u8, PathBuf, Vec<u8>)> = Vec::new();
        let mut warnings = archive::visit_archive(&bytes, self.limits, &mut |member| {
            let name = member.path.file_name().map(|n| n.to_string_lossy().into_owned());
            if let Some(rank) = name.and_then(|n| metadata::manifest_rank(ecosystem, &n)) {
                candidates.push((member.path.components().count(), rank, member.path, member.data));
            }
            Ok(())
        })?;
        candidates.sort_by(|a, b| (a.0, a.1, &a.2).cmp(&(b.0, b.1, &b.2)));

        let from_file = path
            .file_name()
            .and_then(|n| parse_archive_file_name(&n.to_string_lossy()));
        let mut from_manifest = None;
        for (_, _, member_path, data) in &candidates {
            let file_name = member_path.file_name().unwrap_or_default().to_string_lossy();
            match metadata::parse_manifest_bytes(ecosystem, &file_name, data) {
                Ok(md) if !md.name.is_empty() => {
                    from_manifest = Some((md.name, md.version));
                    break;
                }
                Ok(_) => warnings.push(format!("manifest `{}` declares no name", member_path.display())),
                Err(e) => warnings.push(format!("manifest `{}`: {e}", member_path.display())),
            }
        }

        let (name, version) = match (from_manifest, from_file) {
            (Some((name, version)), file) => {
                let version = if version.is_empty() {
                    file.as_ref().and_then(|(_, v)| v.clone()).unwrap_or_default()
                } else {
                    version
                };
                if let Some((fname, fversion)) = file {
                    let version_differs = fversion.as_ref().is_some_and(|v| *v != version);
                    if fname != name || version_differs {
                        warnings.push(format!(
                            "file name suggests {fname}@{} but manifest declares {name}@{version}; trusting manifest",
                            fversion.unwrap_or_default()
                        ));
                    }
                }
                (name, version)
            }
            (None, Some((name, version))) => (name, version.unwrap_or_default()),
            (None, None) => {
                return Err(CorpusError::UnknownFormat(format!(
                    "{}: no manifest and no parseable file name",
                    path.display()
                )))
            }
        };

        let id = PackageId { ecosystem, name, version };
        let dest = self.archive_path(&id, &digest);
        if let Some(parent) = dest.parent() {
            fs::create_dir_all(parent)?;
        }
        if !dest.exists() {
            fs::write(&dest, &bytes)?;
        }
        for w in &warnings {
            log::warn!("{id}: {w}");
        }
        Ok(Ingested {
            package: PackageRef {
                ecosystem,
                name: id.name,
                version: id.version,
                label,
                archive_path: dest,
                content_digest: digest,
            },
            warnings,
        })
    }

    /// Extracts `package` into `work/<digest>/`, replacing any previous tree.
    pub fn unpack(&self, package: &PackageRef) -> Result<UnpackedTree, CorpusError> {
        let bytes = fs::read(&package.archive_path)
            .map_err(|e| CorpusError::UnreadableArchive(format!("{}: {e}", package.archive_path.display())))?;
        let root = self.work_dir(&package.content_digest);
        unpack_bytes(&bytes, package.ecosystem, &root, self.limits)
    }
}

/// Extracts archive bytes under `root`. Every written path is checked to stay
/// under `root`.
pub fn unpack_bytes(
    bytes: &[u8],
    ecosystem: Ecosystem,
    root: &Path,
    limits: ExtractionLimits,
) -> Result<UnpackedTree, CorpusError> {
    if root.exists() {
        fs::remove_dir_all(root)?;
    }
    fs::create_dir_all(root)?;
    let mut files: BTreeMap<PathBuf, TreeFile> = BTreeMap::new();
    let result = archive::visit_archive(bytes, limits, &mut |member| {
        let dest = root.join(&member.path);
        if !dest.starts_with(root) {
            return Err(CorpusError::UnreadableArchive(format!(
                "entry `{}` resolves outside the working root",
                member.path.display()
            )));
        }
        if let Some(parent) = dest.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&dest, &member.data)?;
        let kind = FileKind::classify(ecosystem, &member.path, &member.data);
        files.insert(
            member.path.clone(),
            TreeFile { path: member.path, size: member.data.len() as u64, kind },
        );
        Ok(())
    });
    match result {
        Ok(warnings) => Ok(UnpackedTree {
            root: root.to_path_buf(),
            ecosystem,
            files: files.into_values().collect(),
            warnings,
        }),
        Err(e) => {
            let _ = fs::remove_dir_all(root);
            Err(e)
        }
    }
}

const ARCHIVE_SUFFIXES: &[&str] = &[".tar.gz", ".tgz", ".tar", ".zip", ".whl", ".gem", ".egg"];

/// Splits `name-1.2.3.tgz`, `name-1.2.3-py3-none-any.whl` or `name.gem`
/// into name and optional version.
pub fn parse_archive_file_name(file_name: &str) -> Option<(String, Option<String>)> {
    let lower = file_name.to_ascii_lowercase();
    let suffix = ARCHIVE_SUFFIXES.iter().find(|s| lower.ends_with(*s))?;
    let stem = &file_name[..file_name.len() - suffix.len()];
    if stem.is_empty() {
        return None;
    }
    if *suffix == ".whl" {
        let mut parts = stem.split('-');
        let name = parts.next()?.to_string();
        let version = parts.next().map(str::to_string);
        return Some((name, version));
    }
    let split = stem
        .char_indices()
        .filter(|&(i, c)| c == '-' && stem[i + 1..].starts_with(|d: char| d.is_ascii_digit()))
        .map(|(i, _)| i)
        .next();
    match split {
        Some(i) if i > 0 => Some((stem[..i].to_string(), Some(stem[i + 1..].to_string()))),
        _ => Some((stem.to_string(), None)),
    }
}

/// Among entries sharing (ecosystem, name, version), keeps the one with the
/// lexicographically smallest digest. Survivors stay in first-seen order.
pub fn dedup(manifest: &DatasetManifest) -> DatasetManifest {
    let mut best: BTreeMap<PackageId, usize> = BTreeMap::new();
    for (i, entry) in manifest.entries.iter().enumerate() {
        best.entry(entry.id())
            .and_modify(|cur| {
                if entry.content_digest < manifest.entries[*cur].content_digest {
                    *cur = i;
                }
            })
            .or_insert(i);
    }
    let mut keep: Vec<usize> = best.into_values().collect();
    keep.sort_unstable();
    let mut first_seen: BTreeMap<PackageId, usize> = BTreeMap::new();
    for (i, entry) in manifest.entries.iter().enumerate() {
        first_seen.entry(entry.id()).or_insert(i);
    }
    keep.sort_by_key(|&i| first_seen[&manifest.entries[i].id()]);
    let entries = keep.into_iter().map(|i| manifest.entries[i].clone()).collect();
    DatasetManifest::from_entries(entries, manifest.created_at, manifest.revision)
}
