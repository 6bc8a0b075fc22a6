//! Fixture packages shared by integration tests.
#![allow(dead_code)]

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use fgi_core::{Ecosystem, Label};
use flate2::write::GzEncoder;
use flate2::Compression;

pub mod synthetic;

pub fn fixtures_dir() -> PathBuf {
    // Resolves from either crate so the CLI tests can share these fixtures.
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub dir: PathBuf,
    /// e.g. `py-jsonfetch-1.0.0`
    pub key: String,
    pub ecosystem: Ecosystem,
    pub label: Label,
}

impl Fixture {
    /// Name and version as encoded in the directory key.
    pub fn name_version(&self) -> (String, String) {
        let rest = &self.key[3..];
        let cut = rest.rfind('-').unwrap();
        (rest[..cut].to_string(), rest[cut + 1..].to_string())
    }

    /// Relative path, line, function name for every hand-counted call.
    pub fn expected_calls(&self) -> Vec<(String, u32, String)> {
        let text = fs::read_to_string(self.dir.parent().unwrap().join(format!("{}.calls", self.key))).unwrap();
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let mut parts = l.splitn(3, ':');
                let file = parts.next().unwrap().to_string();
                let line = parts.next().unwrap().parse().unwrap();
                (file, line, parts.next().unwrap().to_string())
            })
            .collect()
    }

    /// Files of the package, relative path and bytes, sorted by path.
    pub fn files(&self) -> Vec<(String, Vec<u8>)> {
        let mut out = Vec::new();
        walk(&self.dir, &self.dir, &mut out);
        out.sort();
        out
    }

    /// Builds the archive a registry would serve: an npm `package/` tarball,
    /// a PyPI sdist, or a `.gem`. Returns the conventional file name too.
    pub fn archive(&self) -> (String, Vec<u8>) {
        let (name, version) = self.name_version();
        match self.ecosystem {
            Ecosystem::Npm => (format!("{name}-{version}.tgz"), tar_gz(&self.files(), "package/")),
            Ecosystem::Pypi => (format!("{name}-{version}.tar.gz"), tar_gz(&self.files(), &format!("{name}-{version}/"))),
            Ecosystem::Rubygems => {
                let files = self.files();
                let metadata = files.iter().find(|(p, _)| p == "metadata.yml").unwrap().1.clone();
                let data: Vec<_> = files.into_iter().filter(|(p, _)| p != "metadata.yml").collect();
                let mut gz = GzEncoder::new(Vec::new(), Compression::default());
                gz.write_all(&metadata).unwrap();
                let outer = tar_bytes(&[("metadata.gz".into(), gz.finish().unwrap()), ("data.tar.gz".into(), tar_gz(&data, ""))], "");
                (format!("{name}-{version}.gem"), outer)
            }
        }
    }
}

fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            walk(root, &path, out);
        } else {
            let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
            out.push((rel, fs::read(&path).unwrap()));
        }
    }
}

pub fn tar_bytes(files: &[(String, Vec<u8>)], prefix: &str) -> Vec<u8> {
    let mut builder = tar::Builder::new(Vec::new());
    for (path, data) in files {
        let mut header = tar::Header::new_gnu();
        header.set_size(data.len() as u64);
        header.set_mode(0o644);
        header.set_mtime(0);
        header.set_cksum();
        builder.append_data(&mut header, format!("{prefix}{path}"), data.as_slice()).unwrap();
    }
    builder.into_inner().unwrap()
}

pub fn tar_gz(files: &[(String, Vec<u8>)], prefix: &str) -> Vec<u8> {
    let mut gz = GzEncoder::new(Vec::new(), Compression::default());
    gz.write_all(&tar_bytes(files, prefix)).unwrap();
    gz.finish().unwrap()
}

pub fn packages() -> Vec<Fixture> {
    let root = fixtures_dir().join("packages");
    let index = fs::read_to_string(root.join("index.csv")).unwrap();
    index
        .lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            Fixture {
                dir: root.join(cols[0]),
                key: cols[0].to_string(),
                ecosystem: cols[1].parse().unwrap(),
                label: cols[2].parse().unwrap(),
            }
        })
        .collect()
}
