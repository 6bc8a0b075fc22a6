//! Bounded, path-sanitizing traversal over package archives.

use std::io::Read;
use std::path::{Component, Path, PathBuf};

use flate2::read::GzDecoder;

use super::zip::{ZipError, ZipReader};
use super::CorpusError;

/// Caps applied while decompressing untrusted archives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtractionLimits {
    pub max_total_bytes: u64,
    pub max_files: usize,
    pub max_depth: usize,
}

impl Default for ExtractionLimits {
    fn default() -> Self {
        ExtractionLimits {
            max_total_bytes: 256 * 1024 * 1024,
            max_files: 50_000,
            max_depth: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArchiveFormat {
    TarGz,
    Tar,
    Zip,
    /// RubyGems `.gem`: a plain tar holding `metadata.gz` and `data.tar.gz`.
    Gem,
}

struct Budget {
    limits: ExtractionLimits,
    bytes: u64,
    files: usize,
}

impl Budget {
    fn new(limits: ExtractionLimits) -> Self {
        Budget { limits, bytes: 0, files: 0 }
    }

    fn read_entry(&mut self, reader: &mut dyn Read) -> Result<Vec<u8>, CorpusError> {
        self.files += 1;
        if self.files > self.limits.max_files {
            return Err(CorpusError::ExtractionLimitExceeded(format!(
                "more than {} files",
                self.limits.max_files
            )));
        }
        let remaining = self.limits.max_total_bytes.saturating_sub(self.bytes);
        let mut buf = Vec::new();
        reader
            .take(remaining + 1)
            .read_to_end(&mut buf)
            .map_err(|e| CorpusError::UnreadableArchive(e.to_string()))?;
        if buf.len() as u64 > remaining {
            return Err(CorpusError::ExtractionLimitExceeded(format!(
                "decompressed size above {} bytes",
                self.limits.max_total_bytes
            )));
        }
        self.bytes += buf.len() as u64;
        Ok(buf)
    }
}

/// Normalizes an archive member name into a relative path that stays inside
/// the extraction root. Returns `None` for absolute or traversing names.
pub fn sanitize_entry_path(raw: &str) -> Option<PathBuf> {
    let raw = raw.replace('\\', "/");
    if raw.starts_with('/') || raw.as_bytes().get(1) == Some(&b':') {
        return None;
    }
    let mut out = PathBuf::new();
    for comp in Path::new(&raw).components() {
        match comp {
            Component::Normal(part) => out.push(part),
            Component::CurDir => {}
            Component::ParentDir | Component::RootDir | Component::Prefix(_) => return None,
        }
    }
    if out.as_os_str().is_empty() {
        None
    } else {
        Some(out)
    }
}

pub fn detect_format(bytes: &[u8]) -> Option<ArchiveFormat> {
    if bytes.starts_with(&[0x1f, 0x8b]) {
        return Some(ArchiveFormat::TarGz);
    }
    if bytes.starts_with(b"PK\x03\x04") || bytes.starts_with(b"PK\x05\x06") {
        return Some(ArchiveFormat::Zip);
    }
    if bytes.get(257..262) == Some(b"ustar") {
        return Some(if is_gem(bytes) { ArchiveFormat::Gem } else { ArchiveFormat::Tar });
    }
    None
}

fn is_gem(bytes: &[u8]) -> bool {
    let mut archive = tar::Archive::new(bytes);
    let Ok(entries) = archive.entries() else { return false };
    let names: Vec<String> = entries
        .filter_map(Result::ok)
        .filter_map(|e| e.path().ok().map(|p| p.to_string_lossy().into_owned()))
        .collect();
    names.iter().any(|n| n == "metadata.gz") && names.iter().any(|n| n == "data.tar.gz")
}

/// A sanitized member delivered to the visitor.
pub struct Member {
    pub path: PathBuf,
    pub data: Vec<u8>,
}

/// Walks every regular file in `bytes`, enforcing `limits` and dropping
/// entries whose names would escape the root. Returns the sanitization
/// warnings that were recorded along the way.
pub fn visit_archive(
    bytes: &[u8],
    limits: ExtractionLimits,
    visit: &mut dyn FnMut(Member) -> Result<(), CorpusError>,
) -> Result<Vec<String>, CorpusError> {
    let format = detect_format(bytes)
        .ok_or_else(|| CorpusError::UnreadableArchive("unrecognized archive format".into()))?;
    let mut budget = Budget::new(limits);
    let mut warnings = Vec::new();
    match format {
        ArchiveFormat::TarGz => visit_tar(GzDecoder::new(bytes), &mut budget, &mut warnings, visit)?,
        ArchiveFormat::Tar => visit_tar(bytes, &mut budget, &mut warnings, visit)?,
        ArchiveFormat::Zip => visit_zip(bytes, &mut budget, &mut warnings, visit)?,
        ArchiveFormat::Gem => visit_gem(bytes, &mut budget, &mut warnings, visit)?,
    }
    Ok(warnings)
}

fn accept_path(
    raw: &str,
    budget: &Budget,
    warnings: &mut Vec<String>,
) -> Result<Option<PathBuf>, CorpusError> {
    match sanitize_entry_path(raw) {
        None => {
            warnings.push(format!("dropped entry `{raw}`: path escapes extraction root"));
            Ok(None)
        }
        Some(p) if p.components().count() > budget.limits.max_depth => {
            Err(CorpusError::ExtractionLimitExceeded(format!(
                "entry `{raw}` nested deeper than {}",
                budget.limits.max_depth
            )))
        }
        Some(p) => Ok(Some(p)),
    }
}

fn visit_tar<R: Read>(
    reader: R,
    budget: &mut Budget,
    warnings: &mut Vec<String>,
    visit: &mut dyn FnMut(Member) -> Result<(), CorpusError>,
) -> Result<(), CorpusError> {
    let unreadable = |e: std::io::Error| CorpusError::UnreadableArchive(e.to_string());
    let mut archive = tar::Archive::new(reader);
    for entry in archive.entries().map_err(unreadable)? {
        let mut entry = entry.map_err(unreadable)?;
        let raw = String::from_utf8_lossy(&entry.path_bytes()).into_owned();
        let kind = entry.header().entry_type();
        if kind.is_dir() {
            continue;
        }
        if !(kind.is_file() || kind == tar::EntryType::Continuous || kind.is_gnu_sparse()) {
            warnings.push(format!("skipped non-regular entry `{raw}` ({kind:?})"));
            continue;
        }
        let Some(path) = accept_path(&raw, budget, warnings)? else { continue };
        let data = budget.read_entry(&mut entry)?;
        visit(Member { path, data })?;
    }
    Ok(())
}

fn visit_zip(
    bytes: &[u8],
    budget: &mut Budget,
    warnings: &mut Vec<String>,
    visit: &mut dyn FnMut(Member) -> Result<(), CorpusError>,
) -> Result<(), CorpusError> {
    let unreadable = |e: ZipError| CorpusError::UnreadableArchive(e.to_string());
    let zip = ZipReader::new(bytes).map_err(unreadable)?;
    for entry in zip.entries() {
        if entry.is_dir {
            continue;
        }
        if entry.is_symlink {
            warnings.push(format!("skipped symlink entry `{}`", entry.name));
            continue;
        }
        let Some(path) = accept_path(&entry.name, budget, warnings)? else { continue };
        let mut reader = zip.open(entry).map_err(unreadable)?;
        let data = budget.read_entry(&mut reader)?;
        ZipReader::verify(entry, &data).map_err(unreadable)?;
        visit(Member { path, data })?;
    }
    Ok(())
}

fn visit_gem(
    bytes: &[u8],
    budget: &mut Budget,
    warnings: &mut Vec<String>,
    visit: &mut dyn FnMut(Member) -> Result<(), CorpusError>,
) -> Result<(), CorpusError> {
    let unreadable = |e: std::io::Error| CorpusError::UnreadableArchive(e.to_string());
    let mut outer = tar::Archive::new(bytes);
    for entry in outer.entries().map_err(unreadable)? {
        let mut entry = entry.map_err(unreadable)?;
        let name = entry.path().map_err(unreadable)?.to_string_lossy().into_owned();
        match name.as_str() {
            "metadata.gz" => {
                let mut gz = GzDecoder::new(&mut entry);
                let data = budget.read_entry(&mut gz)?;
                visit(Member { path: PathBuf::from("metadata.yml"), data })?;
            }
            "data.tar.gz" => {
                let mut inner = Vec::new();
                entry.read_to_end(&mut inner).map_err(unreadable)?;
                visit_tar(GzDecoder::new(inner.as_slice()), budget, warnings, visit)?;
            }
            _ => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sanitizer_rejects_escapes() {
        assert_eq!(sanitize_entry_path("package/index.js"), Some(PathBuf::from("package/index.js")));
        assert_eq!(sanitize_entry_path("./a/./b"), Some(PathBuf::from("a/b")));
        assert_eq!(sanitize_entry_path("../../evil"), None);
        assert_eq!(sanitize_entry_path("a/../../evil"), None);
        assert_eq!(sanitize_entry_path("/etc/passwd"), None);
        assert_eq!(sanitize_entry_path("C:\\windows\\x"), None);
        assert_eq!(sanitize_entry_path("..\\evil"), None);
        assert_eq!(sanitize_entry_path("."), None);
    }

    #[test]
    fn format_detection() {
        assert_eq!(detect_format(&[0x1f, 0x8b, 0, 0]), Some(ArchiveFormat::TarGz));
        assert_eq!(detect_format(b"PK\x03\x04rest"), Some(ArchiveFormat::Zip));
        assert_eq!(detect_format(b"hello"), None);
    }
}
