//! Token streams, embeddings and fixed-size feature vectors.
//!
//! Descriptions and function sequences are embedded with separate
//! skip-gram models and mean-pooled per package. Vectors are laid out as
//! `[metadata | static | dynamic | presence flags | scalars]`.

pub mod embedding;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamic_trace::DynamicProfile;
use crate::profile::FgiProfile;
use crate::static_analysis::StaticProfile;
use crate::types::Category;

pub use embedding::{train_embedding, Domain, EmbeddingConfig, EmbeddingModel, Vocabulary, UNK};

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("embedding corpus is empty")]
    EmptyCorpus,
    #[error("invalid embedding configuration: {0}")]
    InvalidConfig(String),
    #[error("no {0} model in the bundle")]
    MissingModel(&'static str),
    #[error("corrupt model bundle: {0}")]
    CorruptBundle(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Lowercased runs of alphanumeric characters.
pub fn tokenize_text(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

fn argc_token(argc: usize) -> &'static str {
    match argc {
        0 => "argc:0",
        1 => "argc:1",
        2 => "argc:2",
        _ => "argc:3+",
    }
}

fn push_call(out: &mut Vec<String>, name: &str, category: Category, argc: usize) {
    out.push(name.to_lowercase());
    out.push(category.as_str().to_string());
    out.push(argc_token(argc).to_string());
}

pub fn tokenize_static(profile: &StaticProfile) -> Vec<String> {
    let mut out = Vec::with_capacity(profile.calls.len() * 3);
    for c in &profile.calls {
        push_call(&mut out, &c.function_name, c.category, c.argument_count);
    }
    out
}

/// Number of top-level comma-separated arguments in a raw strace argument
/// string.
pub fn count_trace_arguments(raw: &str) -> usize {
    let raw = raw.trim();
    if raw.is_empty() {
        return 0;
    }
    let (mut depth, mut in_str, mut escaped, mut count) = (0i32, false, false, 1);
    for c in raw.chars() {
        if in_str {
            match (escaped, c) {
                (true, _) => escaped = false,
                (false, '\\') => escaped = true,
                (false, '"') => in_str = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_str = true,
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            ',' if depth == 0 => count += 1,
            _ => {}
        }
    }
    count
}

pub fn tokenize_dynamic(profile: &DynamicProfile) -> Vec<String> {
    let mut out = Vec::with_capacity(profile.events.len() * 3);
    for e in &profile.events {
        push_call(&mut out, &e.function_name, e.category, count_trace_arguments(&e.arguments));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMode {
    Metadata,
    Static,
    Dynamic,
    All,
}

impl FeatureMode {
    pub const ALL_MODES: [FeatureMode; 4] = [FeatureMode::Metadata, FeatureMode::Static, FeatureMode::Dynamic, FeatureMode::All];

    pub fn uses_metadata(self) -> bool {
        matches!(self, FeatureMode::Metadata | FeatureMode::All)
    }

    pub fn uses_static(self) -> bool {
        matches!(self, FeatureMode::Static | FeatureMode::All)
    }

    pub fn uses_dynamic(self) -> bool {
        matches!(self, FeatureMode::Dynamic | FeatureMode::All)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureMode::Metadata => "metadata",
            FeatureMode::Static => "static",
            FeatureMode::Dynamic => "dynamic",
            FeatureMode::All => "all",
        }
    }
}

impl std::str::FromStr for FeatureMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "metadata" => Ok(FeatureMode::Metadata),
            "static" => Ok(FeatureMode::Static),
            "dynamic" => Ok(FeatureMode::Dynamic),
            "all" => Ok(FeatureMode::All),
            other => Err(format!("unknown feature mode `{other}`")),
        }
    }
}

pub const SCALAR_NAMES: [&str; 11] = [
    "description_length",
    "author_maintainer_count",
    "dependency_count",
    "has_url",
    "has_git_url",
    "static_file",
    "static_network",
    "static_process",
    "dynamic_file",
    "dynamic_network",
    "dynamic_process",
];

/// Scalars that belong to each modality, by index into [`SCALAR_NAMES`].
fn scalar_in_mode(index: usize, mode: FeatureMode) -> bool {
    match index {
        0..=4 => mode.uses_metadata(),
        5..=7 => mode.uses_static(),
        _ => mode.uses_dynamic(),
    }
}

/// Raw (unstandardized) scalar features of a profile.
pub fn raw_scalars(profile: &FgiProfile) -> [f64; 11] {
    let f = profile.features_or_empty();
    let s = &profile.static_profile;
    let dyn_count = |c| profile.dynamic_profile.as_ref().map_or(0.0, |d| d.count(c) as f64);
    [
        f.description_length as f64,
        f.author_maintainer_count as f64,
        f.dependency_count as f64,
        f64::from(u8::from(f.has_url)),
        f64::from(u8::from(f.has_git_url)),
        s.count(Category::File) as f64,
        s.count(Category::Network) as f64,
        s.count(Category::Process) as f64,
        dyn_count(Category::File),
        dyn_count(Category::Network),
        dyn_count(Category::Process),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardization {
    /// Population mean and standard deviation per column; a constant
    /// column gets std 1 so it maps to zero.
    pub fn fit(rows: &[[f64; 11]]) -> Standardization {
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; 11];
        let mut std = vec![0.0; 11];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v / n;
            }
        }
        for r in rows {
            for j in 0..11 {
                std[j] += (r[j] - mean[j]).powi(2) / n;
            }
        }
        for s in &mut std {
            *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
        }
        Standardization { mean, std }
    }

    pub fn apply(&self, j: usize, v: f64) -> f64 {
        (v - self.mean[j]) / self.std[j]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub segments: Vec<Segment>,
}

impl Layout {
    pub fn len(&self) -> usize {
        self.segments.last().map_or(0, |s| s.offset + s.len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn segment(&self, name: &str) -> Option<&Segment> {
        self.segments.iter().find(|s| s.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn slice<'a>(&'a self, layout: &Layout, name: &str) -> Option<&'a [f64]> {
        layout.segment(name).map(|s| &self.values[s.offset..s.offset + s.len])
    }
}

/// Trained embeddings plus scalar statistics; everything featurization
/// needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub text: Option<EmbeddingModel>,
    pub functions: Option<EmbeddingModel>,
    pub standardization: Standardization,
    /// Leave scalar features out, keeping only embeddings and flags.
    pub embeddings_only: bool,
    pub dim: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct BundleMeta {
    dim: usize,
    embeddings_only: bool,
    has_text: bool,
    has_functions: bool,
}

impl ModelBundle {
    /// Fits the models needed by `mode` on training profiles only.
    pub fn fit(train: &[&FgiProfile], mode: FeatureMode, config: EmbeddingConfig, embeddings_only: bool) -> Result<ModelBundle, FeatureError> {
        let text = if mode.uses_metadata() {
            let corpus: Vec<Vec<String>> = train
                .iter()
                .filter_map(|p| p.metadata.as_ref())
                .map(|m| tokenize_text(&m.description))
                .filter(|t| !t.is_empty())
                .collect();
            Some(train_embedding(&corpus, Domain::MetadataText, config)?)
        } else {
            None
        };
        let functions = if mode.uses_static() || mode.uses_dynamic() {
            let mut corpus = Vec::new();
            for p in train {
                if mode.uses_static() {
                    corpus.push(tokenize_static(&p.static_profile));
                }
                if let (true, Some(d)) = (mode.uses_dynamic(), &p.dynamic_profile) {
                    corpus.push(tokenize_dynamic(d));
                }
            }
            corpus.retain(|t| !t.is_empty());
            Some(train_embedding(&corpus, Domain::FunctionTokens, config)?)
        } else {
            None
        };
        let rows: Vec<[f64; 11]> = train.iter().map(|p| raw_scalars(p)).collect();
        Ok(ModelBundle { text, functions, standardization: Standardization::fit(&rows), embeddings_only, dim: config.dim })
    }

    pub fn layout(&self) -> Layout {
        let mut segments = Vec::new();
        let mut offset = 0;
        let mut push = |name: &str, len: usize| {
            segments.push(Segment { name: name.to_string(), offset, len });
            offset += len;
        };
        push("metadata", self.dim);
        push("static", self.dim);
        push("dynamic", self.dim);
        push("presence", 3);
        if !self.embeddings_only {
            push("scalars", SCALAR_NAMES.len());
        }
        Layout { segments }
    }

    pub fn save(&self, dir: &Path) -> Result<(), FeatureError> {
        fs::create_dir_all(dir)?;
        if let Some(m) = &self.text {
            m.save(dir, "text")?;
        }
        if let Some(m) = &self.functions {
            m.save(dir, "functions")?;
        }
        let mut w = csv::Writer::from_path(dir.join("standardization.csv"))?;
        w.write_record(["feature", "mean", "std"])?;
        for (j, name) in SCALAR_NAMES.iter().enumerate() {
            w.write_record([name.to_string(), format!("{}", self.standardization.mean[j]), format!("{}", self.standardization.std[j])])?;
        }
        w.flush()?;
        let meta = BundleMeta {
            dim: self.dim,
            embeddings_only: self.embeddings_only,
            has_text: self.text.is_some(),
            has_functions: self.functions.is_some(),
        };
        fs::write(dir.join("bundle.json"), serde_json::to_vec_pretty(&meta)?)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<ModelBundle, FeatureError> {
        let meta: BundleMeta = serde_json::from_slice(&fs::read(dir.join("bundle.json"))?)?;
        let text = meta.has_text.then(|| EmbeddingModel::load(dir, "text")).transpose()?;
        let functions = meta.has_functions.then(|| EmbeddingModel::load(dir, "functions")).transpose()?;
        let mut reader = csv::Reader::from_path(dir.join("standardization.csv"))?;
        let (mut mean, mut std) = (Vec::new(), Vec::new());
        for (row, name) in reader.records().zip(SCALAR_NAMES) {
            let row = row?;
            if &row[0] != name {
                return Err(FeatureError::CorruptBundle(format!("standardization row `{}` where `{name}` expected", &row[0])));
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|e| FeatureError::CorruptBundle(e.to_string()));
            mean.push(parse(&row[1])?);
            std.push(parse(&row[2])?);
        }
        if mean.len() != SCALAR_NAMES.len() {
            return Err(FeatureError::CorruptBundle("standardization table is incomplete".into()));
        }
        Ok(ModelBundle { text, functions, standardization: Standardization { mean, std }, embeddings_only: meta.embeddings_only, dim: meta.dim })
    }
}

/// Builds the feature vector of one package. Segments outside `mode`, and
/// modalities the package lacks, are zero with presence flag 0.
pub fn featurize(profile: &FgiProfile, bundle: &ModelBundle, mode: FeatureMode) -> Result<FeatureVector, FeatureError> {
    let layout = bundle.layout();
    let mut values = vec![0.0; layout.len()];
    let d = bundle.dim;
    let presence = layout.segment("presence").unwrap().offset;

    if mode.uses_metadata() {
        let model = bundle.text.as_ref().ok_or(FeatureError::MissingModel("metadata text"))?;
        if let Some(md) = &profile.metadata {
            values[..d].copy_from_slice(&model.embed_tokens(&tokenize_text(&md.description)));
            values[presence] = 1.0;
        }
    }
    if mode.uses_static() {
        let model = bundle.functions.as_ref().ok_or(FeatureError::MissingModel("function"))?;
        values[d..2 * d].copy_from_slice(&model.embed_tokens(&tokenize_static(&profile.static_profile)));
        values[presence + 1] = 1.0;
    }
    if mode.uses_dynamic() {
        let model = bundle.functions.as_ref().ok_or(FeatureError::MissingModel("function"))?;
        if let Some(dp) = &profile.dynamic_profile {
            values[2 * d..3 * d].copy_from_slice(&model.embed_tokens(&tokenize_dynamic(dp)));
            values[presence + 2] = 1.0;
        }
    }
    if let Some(seg) = layout.segment("scalars") {
        let raw = raw_scalars(profile);
        for (j, v) in raw.iter().enumerate() {
            let present = match j {
                0..=4 => values[presence] == 1.0,
                5..=7 => values[presence + 1] == 1.0,
                _ => values[presence + 2] == 1.0,
            };
            if scalar_in_mode(j, mode) && present {
                values[seg.offset + j] = bundle.standardization.apply(j, *v);
            }
        }
    }
    Ok(FeatureVector { values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_tokens() {
        assert_eq!(tokenize_text("A decent logging system"), vec!["a", "decent", "logging", "system"]);
        assert!(tokenize_text("").is_empty());
        assert_eq!(tokenize_text("HTTP/URL-based!!"), vec!["http", "url", "based"]);
    }

    #[test]
    fn trace_argument_counts() {
        assert_eq!(count_trace_arguments(""), 0);
        assert_eq!(count_trace_arguments("AT_FDCWD, \"/a,b\", O_RDONLY"), 3);
        assert_eq!(count_trace_arguments("3, {sa_family=AF_INET, sin_port=htons(80)}, 16"), 3);
    }
}
