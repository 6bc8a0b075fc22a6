//! Run configuration: TOML file merged with command-line flags.

use std::path::{Path, PathBuf};

use anyhow::Context;
use fgi_core::dynamic_trace::{NetworkPolicy, RunnerConfig};
use fgi_core::features::EmbeddingConfig;
use fgi_core::metadata::registry::RegistryEndpoints;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out: PathBuf,
    pub catalog: Option<PathBuf>,
    pub offline: bool,
    pub seed: u64,
    /// Directory of recorded install traces.
    pub traces: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub extract: Toggles,
    pub registry: RegistryConfig,
    pub embedding: EmbeddingSection,
    pub runner: RunnerSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            out: PathBuf::from("fgi-out"),
            catalog: None,
            offline: false,
            seed: 42,
            traces: None,
            cache_dir: None,
            extract: Toggles::default(),
            registry: RegistryConfig::default(),
            embedding: EmbeddingSection::default(),
            runner: RunnerSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Toggles {
    pub metadata: bool,
    #[serde(rename = "static")]
    pub static_calls: bool,
    pub dynamic: bool,
}

impl Default for Toggles {
    fn default() -> Self {
        Toggles { metadata: true, static_calls: true, dynamic: true }
    }
}

/// Registry lookups fill in metadata when a package has no parseable
/// manifest. Off unless enabled.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegistryConfig {
    pub enabled: bool,
    pub npm: String,
    pub pypi: String,
    pub rubygems: String,
}

impl Default for RegistryConfig {
    fn default() -> Self {
        let d = RegistryEndpoints::default();
        RegistryConfig { enabled: false, npm: d.npm, pypi: d.pypi, rubygems: d.rubygems }
    }
}

impl RegistryConfig {
    pub fn endpoints(&self) -> RegistryEndpoints {
        RegistryEndpoints { npm: self.npm.clone(), pypi: self.pypi.clone(), rubygems: self.rubygems.clone() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingSection {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f32,
}

impl Default for EmbeddingSection {
    fn default() -> Self {
        let d = EmbeddingConfig::default();
        EmbeddingSection { dim: d.dim, window: d.window, negatives: d.negatives, epochs: d.epochs, learning_rate: d.learning_rate }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunnerSection {
    pub command: Vec<String>,
    pub timeout_secs: u64,
    pub network_policy: NetworkPolicy,
    pub writable_roots: Vec<PathBuf>,
}

impl Default for RunnerSection {
    fn default() -> Self {
        RunnerSection { command: Vec::new(), timeout_secs: 300, network_policy: NetworkPolicy::Deny, writable_roots: Vec::new() }
    }
}

impl RunnerSection {
    pub fn runner(&self) -> RunnerConfig {
        RunnerConfig { command: self.command.clone() }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn embedding_config(&self) -> EmbeddingConfig {
        let e = &self.embedding;
        EmbeddingConfig { dim: e.dim, window: e.window, negatives: e.negatives, epochs: e.epochs, learning_rate: e.learning_rate, seed: self.seed }
    }

    /// `FGI_CACHE_DIR` wins over the config file; default under `out`.
    pub fn cache_dir(&self) -> PathBuf {
        std::env::var_os("FGI_CACHE_DIR")
            .map(PathBuf::from)
            .or_else(|| self.cache_dir.clone())
            .unwrap_or_else(|| self.out.join("cache"))
    }

    pub fn corpus_dir(&self) -> PathBuf {
        self.out.join("corpus")
    }

    pub fn profiles_dir(&self) -> PathBuf {
        self.out.join("profiles")
    }

    pub fn report_dir(&self) -> PathBuf {
        self.out.join("report")
    }

    pub fn model_dir(&self) -> PathBuf {
        self.out.join("model")
    }
}
