use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{CorpusError, PackageId, PackageRef};
use crate::types::{Ecosystem, Label};

/// Per-(ecosystem, label) package counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tallies(BTreeMap<(Ecosystem, Label), usize>);

#[derive(Serialize, Deserialize)]
struct TallyRow {
    ecosystem: Ecosystem,
    label: Label,
    count: usize,
}

impl Serialize for Tallies {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<TallyRow> = self
            .0
            .iter()
            .map(|(&(ecosystem, label), &count)| TallyRow { ecosystem, label, count })
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tallies {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<TallyRow>::deserialize(d)?;
        Ok(Tallies(rows.into_iter().map(|r| ((r.ecosystem, r.label), r.count)).collect()))
    }
}

impl Tallies {
    pub fn of(entries: &[PackageRef]) -> Self {
        let mut map = BTreeMap::new();
        for e in entries {
            *map.entry((e.ecosystem, e.label)).or_insert(0) += 1;
        }
        Tallies(map)
    }

    pub fn get(&self, ecosystem: Ecosystem, label: Label) -> usize {
        self.0.get(&(ecosystem, label)).copied().unwrap_or(0)
    }

    fn total(&self, label: Label) -> usize {
        self.0.iter().filter(|((_, l), _)| *l == label).map(|(_, c)| c).sum()
    }

    /// n₁: malicious packages across ecosystems.
    pub fn malicious(&self) -> usize {
        self.total(Label::Malicious)
    }

    /// n₂: legitimate packages across ecosystems.
    pub fn legitimate(&self) -> usize {
        self.total(Label::Legitimate)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Ecosystem, Label, usize)> + '_ {
        self.0.iter().map(|(&(e, l), &c)| (e, l, c))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub entries: Vec<PackageRef>,
    pub created_at: DateTime<Utc>,
    /// Bumped whenever a label changes; labels are never edited in place.
    pub revision: u32,
    pub counts: Tallies,
}

#[derive(Serialize, Deserialize)]
struct ManifestMeta {
    created_at: DateTime<Utc>,
    revision: u32,
    counts: Tallies,
}

impl DatasetManifest {
    pub fn new(entries: Vec<PackageRef>) -> Self {
        Self::from_entries(entries, Utc::now(), 0)
    }

    pub fn from_entries(entries: Vec<PackageRef>, created_at: DateTime<Utc>, revision: u32) -> Self {
        let counts = Tallies::of(&entries);
        DatasetManifest { entries, created_at, revision, counts }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new())
    }

    pub fn find(&self, id: &PackageId) -> Option<&PackageRef> {
        self.entries.iter().find(|e| e.id() == *id)
    }

    /// Appends a package. Re-adding identical content is a no-op; the same
    /// identity with different content is kept so `dedup` can arbitrate.
    pub fn add(&mut self, package: PackageRef) {
        let already = self
            .entries
            .iter()
            .any(|e| e.id() == package.id() && e.content_digest == package.content_digest);
        if !already {
            self.entries.push(package);
            self.counts = Tallies::of(&self.entries);
        }
    }

    /// New revision with one package's label replaced.
    pub fn relabel(&self, id: &PackageId, label: Label) -> DatasetManifest {
        let entries = self
            .entries
            .iter()
            .map(|e| {
                let mut e = e.clone();
                if e.id() == *id {
                    e.label = label;
                }
                e
            })
            .collect();
        Self::from_entries(entries, Utc::now(), self.revision + 1)
    }

    /// Checks the uniqueness and tally invariants.
    pub fn validate(&self) -> Result<(), CorpusError> {
        let mut seen = BTreeSet::new();
        for e in &self.entries {
            if !seen.insert(e.id()) {
                return Err(CorpusError::DuplicateEntry(e.id().to_string()));
            }
        }
        debug_assert_eq!(self.counts, Tallies::of(&self.entries));
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("package refs serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Vec<PackageRef>, CorpusError> {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l)
                    .map_err(|e| CorpusError::MalformedManifest { line: i + 1, message: e.to_string() })
            })
            .collect()
    }

    fn meta_path(path: &Path) -> PathBuf {
        let mut name = path.file_name().unwrap_or_default().to_os_string();
        name.push(".meta.json");
        path.with_file_name(name)
    }

    /// Writes the JSONL file and its metadata sidecar via rename so readers
    /// never observe a partial manifest.
    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        self.validate()?;
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        write_atomic(path, self.to_jsonl().as_bytes())?;
        let meta = ManifestMeta {
            created_at: self.created_at,
            revision: self.revision,
            counts: self.counts.clone(),
        };
        let meta_json = serde_json::to_vec_pretty(&meta).expect("manifest meta serializes");
        write_atomic(&Self::meta_path(path), &meta_json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<DatasetManifest, CorpusError> {
        let entries = Self::from_jsonl(&fs::read_to_string(path)?)?;
        let meta: Option<ManifestMeta> = fs::read(Self::meta_path(path))
            .ok()
            .and_then(|b| serde_json::from_slice(&b).ok());
        let (created_at, revision) = match meta {
            Some(m) => (m.created_at, m.revision),
            None => (Utc::now(), 0),
        };
        Ok(Self::from_entries(entries, created_at, revision))
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)
}
