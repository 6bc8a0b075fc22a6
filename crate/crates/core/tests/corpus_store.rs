mod common;

use std::collections::BTreeMap;

use fgi_core::corpus::{self, CorpusStore, DatasetManifest, ExtractionLimits};
use fgi_core::metadata;
use fgi_core::Label;

#[test]
fn fixture_archives_ingest_with_manifest_identity() {
    let tmp = tempfile::tempdir().unwrap();
    let store = CorpusStore::new(tmp.path().join("store"));
    let mut manifest = DatasetManifest::empty();
    for fx in common::packages() {
        let (file_name, bytes) = fx.archive();
        let src = tmp.path().join(&file_name);
        std::fs::write(&src, &bytes).unwrap();
        let ingested = store.ingest_archive(&src, fx.ecosystem, fx.label).unwrap();
        let (name, version) = fx.name_version();
        assert_eq!((ingested.package.name.as_str(), ingested.package.version.as_str()), (name.as_str(), version.as_str()), "{}", fx.key);
        assert_eq!(ingested.package.content_digest, corpus::sha256_hex(&bytes));
        assert!(ingested.package.archive_path.starts_with(store.root()));

        let tree = store.unpack(&ingested.package).unwrap();
        let md = metadata::parse_manifest(&tree, fx.ecosystem).unwrap_or_else(|e| panic!("{}: {e}", fx.key));
        assert_eq!(md.name, name);
        manifest.add(ingested.package);
    }
    assert_eq!(manifest.counts.malicious(), 10);
    assert_eq!(manifest.counts.legitimate(), 10);

    let path = store.manifest_path();
    manifest.save(&path).unwrap();
    let reloaded = DatasetManifest::load(&path).unwrap();
    assert_eq!(reloaded, manifest);
    assert_eq!(corpus::dedup(&reloaded).entries, manifest.entries);
}

#[test]
fn same_archive_twice_collapses_under_dedup() {
    let tmp = tempfile::tempdir().unwrap();
    let store = CorpusStore::new(tmp.path().join("store"));
    let fx = &common::packages()[0];
    let (file_name, bytes) = fx.archive();
    let src = tmp.path().join(file_name);
    std::fs::write(&src, bytes).unwrap();
    let a = store.ingest_archive(&src, fx.ecosystem, Label::Legitimate).unwrap().package;
    let b = store.ingest_archive(&src, fx.ecosystem, Label::Legitimate).unwrap().package;
    let manifest = DatasetManifest::new(vec![a.clone(), b]);
    assert_eq!(corpus::dedup(&manifest).entries, vec![a]);
}

/// Writes a tar member with an arbitrary raw name, bypassing the builder's
/// own path checks.
fn raw_member(builder: &mut tar::Builder<Vec<u8>>, name: &str, data: &[u8]) {
    let mut header = tar::Header::new_ustar();
    let field = &mut header.as_old_mut().name;
    field[..name.len()].copy_from_slice(name.as_bytes());
    header.set_size(data.len() as u64);
    header.set_mode(0o644);
    header.set_entry_type(tar::EntryType::Regular);
    header.set_cksum();
    builder.append(&header, data).unwrap();
}

#[test]
fn traversal_members_never_leave_the_root() {
    let mut builder = tar::Builder::new(Vec::new());
    raw_member(&mut builder, "package/package.json", br#"{"name":"x","version":"1.0.0"}"#);
    raw_member(&mut builder, "../../evil", b"pwned");
    raw_member(&mut builder, "package/../../evil2", b"pwned");
    raw_member(&mut builder, "/tmp/evil3", b"pwned");
    let tar = builder.into_inner().unwrap();

    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("a/b/work");
    let tree = corpus::unpack_bytes(&tar, fgi_core::Ecosystem::Npm, &root, ExtractionLimits::default()).unwrap();
    let paths: Vec<_> = tree.files.iter().map(|f| f.path.to_string_lossy().into_owned()).collect();
    assert_eq!(paths, vec!["package/package.json"]);
    assert_eq!(tree.warnings.len(), 3, "{:?}", tree.warnings);
    for escaped in [tmp.path().join("a/evil"), tmp.path().join("a/evil2"), tmp.path().join("evil")] {
        assert!(!escaped.exists(), "{}", escaped.display());
    }
    let mut count = BTreeMap::new();
    for entry in walk(tmp.path()) {
        *count.entry(entry.starts_with(&root)).or_insert(0) += 1;
    }
    assert_eq!(count.get(&false), None);
}

fn walk(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap().flatten() {
        let p = e.path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn size_limit_stops_oversized_members() {
    let files = vec![("big.bin".to_string(), vec![7u8; 4096])];
    let tgz = common::tar_gz(&files, "package/");
    let tmp = tempfile::tempdir().unwrap();
    let limits = ExtractionLimits { max_total_bytes: 1024, ..ExtractionLimits::default() };
    let err = corpus::unpack_bytes(&tgz, fgi_core::Ecosystem::Npm, tmp.path(), limits).unwrap_err();
    assert!(matches!(err, corpus::CorpusError::ExtractionLimitExceeded(_)), "{err}");
}
