//! Subcommand implementations.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fgi_core::analytics::{self, report::DescriptionAxis, CountMode, ReportOptions};
use fgi_core::classifiers::{self, Algorithm, BenchmarkOptions, TrainedModel};
use fgi_core::corpus::{self, CorpusStore, DatasetManifest, ExtractionLimits, PackageRef};
use fgi_core::dynamic_trace::{self, SandboxRunSpec, TraceError};
use fgi_core::features::{self, FeatureMode, ModelBundle, SCALAR_NAMES};
use fgi_core::metadata::{self, RegistryClient};
use fgi_core::profile::{self, FgiProfile};
use fgi_core::static_analysis::FunctionCatalog;
use fgi_core::{Ecosystem, Label};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub fn catalog(config: &RunConfig) -> Result<FunctionCatalog> {
    match &config.catalog {
        Some(p) => FunctionCatalog::load(p).with_context(|| format!("loading catalog {}", p.display())),
        None => Ok(FunctionCatalog::builtin()),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn archive_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(p)?.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.is_file()).collect();
            entries.sort();
            out.extend(entries);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

pub fn ingest(config: &RunConfig, paths: &[PathBuf], ecosystem: Ecosystem, label: Label) -> Result<()> {
    let store = CorpusStore::new(config.corpus_dir());
    let manifest_path = store.manifest_path();
    let mut manifest = if manifest_path.exists() { DatasetManifest::load(&manifest_path)? } else { DatasetManifest::empty() };
    let mut failures = 0;
    for path in archive_inputs(paths)? {
        match store.ingest_archive(&path, ecosystem, label) {
            Ok(ingested) => {
                let p = &ingested.package;
                println!("ingested {} ({})", p.id(), &p.content_digest[..12]);
                manifest.add(ingested.package);
            }
            Err(e) => {
                failures += 1;
                eprintln!("failed to ingest {}: {e}", path.display());
            }
        }
    }
    manifest.save(&manifest_path)?;
    println!("manifest: {} packages ({} malicious, {} legitimate)", manifest.entries.len(), manifest.counts.malicious(), manifest.counts.legitimate());
    if failures > 0 {
        bail!("{failures} archive(s) could not be ingested");
    }
    Ok(())
}

fn file_stem(p: &PackageRef) -> String {
    let clean = |s: &str| s.chars().map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') { c } else { '_' }).collect::<String>();
    format!("{}-{}-{}-{}", p.ecosystem, clean(&p.name), clean(&p.version), &p.content_digest[..12])
}

fn find_trace(dir: &Path, p: &PackageRef) -> Option<PathBuf> {
    [format!("{}.log", p.content_digest), format!("{}@{}.log", p.name, p.version), format!("{}-{}.log", p.name, p.version)]
        .into_iter()
        .map(|n| dir.join(n))
        .find(|c| c.is_file())
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct LevelStats {
    pub attempted: usize,
    pub succeeded: usize,
}

impl LevelStats {
    fn rate(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.succeeded as f64 / self.attempted as f64
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct ExtractionSummary {
    pub packages: usize,
    pub failed_packages: Vec<String>,
    pub metadata: LevelStats,
    /// Counted per source file.
    pub static_files: LevelStats,
    pub dynamic: LevelStats,
}

fn trace_for(config: &RunConfig, package: &PackageRef) -> Option<PathBuf> {
    if let Some(found) = config.traces.as_deref().and_then(|d| find_trace(d, package)) {
        return Some(found);
    }
    if config.runner.command.is_empty() {
        return None;
    }
    let spec = SandboxRunSpec {
        package: package.clone(),
        timeout_secs: config.runner.timeout_secs,
        network_policy: config.runner.network_policy,
        writable_roots: config.runner.writable_roots.clone(),
    };
    let workdir = config.out.join("sandbox").join(&package.content_digest);
    match dynamic_trace::run_sandboxed_install(&spec, &config.runner.runner(), &workdir) {
        Ok(outcome) => Some(outcome.log_path),
        Err(TraceError::Timeout { partial_log, .. }) => {
            log::warn!("{}: sandboxed install timed out; using partial log", package.id());
            Some(PathBuf::from(partial_log))
        }
        Err(e) => {
            log::warn!("{}: sandboxed install failed: {e}", package.id());
            None
        }
    }
}

pub fn extract(config: &RunConfig) -> Result<ExtractionSummary> {
    let store = CorpusStore::new(config.corpus_dir());
    let manifest = DatasetManifest::load(&store.manifest_path()).context("no ingested corpus; run `fgi ingest` first")?;
    let manifest = corpus::dedup(&manifest);
    let catalog = catalog(config)?;
    let registry = RegistryClient::new(config.registry.endpoints(), config.cache_dir()).offline(config.offline);
    let out_dir = config.profiles_dir();
    if out_dir.exists() {
        fs::remove_dir_all(&out_dir)?;
    }
    fs::create_dir_all(&out_dir)?;
    let work = config.out.join("work");
    let mut summary = ExtractionSummary { packages: manifest.entries.len(), ..Default::default() };
    for package in &manifest.entries {
        let trace = if config.extract.dynamic { trace_for(config, package) } else { None };
        let mut profile = match profile::extract_profile(package, &work, ExtractionLimits::default(), &catalog, trace.as_deref()) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("{}: extraction failed: {e}", package.id());
                summary.failed_packages.push(package.id().to_string());
                continue;
            }
        };
        if profile.metadata.is_none() && config.registry.enabled {
            match registry.fetch(package.ecosystem, &package.name, &package.version) {
                Ok(md) => {
                    profile.metadata_features = Some(metadata::metadata_features(&md));
                    profile.metadata = Some(md);
                }
                Err(e) => profile.warnings.push(format!("registry: {e}")),
            }
        }
        if !config.extract.metadata {
            profile.metadata = None;
            profile.metadata_features = None;
        }
        if !config.extract.static_calls {
            profile.static_profile = fgi_core::static_analysis::StaticProfile::new(package.id(), Vec::new(), Vec::new());
        }
        summary.metadata.attempted += usize::from(config.extract.metadata);
        summary.metadata.succeeded += usize::from(profile.metadata.is_some());
        if config.extract.static_calls {
            let tree_sources = count_sources(&work.join(&package.content_digest));
            summary.static_files.attempted += tree_sources;
            summary.static_files.succeeded += tree_sources.saturating_sub(profile.static_profile.warnings.len());
        }
        if config.extract.dynamic {
            summary.dynamic.attempted += 1;
            summary.dynamic.succeeded += usize::from(profile.dynamic_profile.as_ref().is_some_and(|d| d.succeeded));
        }
        for w in &profile.warnings {
            log::warn!("{}: {w}", package.id());
        }
        write_json(&out_dir.join(format!("{}.json", file_stem(package))), &profile)?;
    }
    write_json(&out_dir.join("extraction_summary.json"), &summary)?;
    println!("extracted {} of {} packages", summary.packages - summary.failed_packages.len(), summary.packages);
    println!("  metadata: {:.1}% ({}/{})", 100.0 * summary.metadata.rate(), summary.metadata.succeeded, summary.metadata.attempted);
    println!("  static:   {:.1}% of source files ({}/{})", 100.0 * summary.static_files.rate(), summary.static_files.succeeded, summary.static_files.attempted);
    println!("  dynamic:  {:.1}% ({}/{})", 100.0 * summary.dynamic.rate(), summary.dynamic.succeeded, summary.dynamic.attempted);
    Ok(summary)
}

fn count_sources(root: &Path) -> usize {
    fn walk(dir: &Path, n: &mut usize) {
        let Ok(entries) = fs::read_dir(dir) else { return };
        for e in entries.flatten() {
            let p = e.path();
            if p.is_dir() {
                walk(&p, n);
            } else if p.extension().and_then(|x| x.to_str()).and_then(fgi_core::Language::from_extension).is_some() {
                *n += 1;
            }
        }
    }
    let mut n = 0;
    walk(root, &mut n);
    n
}

pub fn load_profiles(dir: &Path) -> Result<Vec<FgiProfile>> {
    if !dir.is_dir() {
        bail!("no profiles at {}; run `fgi extract` first", dir.display());
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && p.file_name().is_some_and(|n| n != "extraction_summary.json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let bytes = fs::read(p)?;
            serde_json::from_slice(&bytes).with_context(|| format!("reading profile {}", p.display()))
        })
        .collect()
}

pub fn analyze(config: &RunConfig, axis: DescriptionAxis, count_mode: CountMode) -> Result<()> {
    let profiles = load_profiles(&config.profiles_dir())?;
    if profiles.iter().all(|p| p.package.label == Label::Unknown) {
        bail!("empty corpus: no labeled profiles to analyze");
    }
    let dir = config.report_dir();
    let written = analytics::write_report(&profiles, ReportOptions { description_axis: axis, count_mode }, &dir)?;
    println!("wrote {} report files to {}", written.len(), dir.display());
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelInfo {
    pub algorithm: Algorithm,
    pub mode: FeatureMode,
    pub seed: u64,
    pub embeddings_only: bool,
    pub training_packages: usize,
    pub hyperparameters: classifiers::Hyperparameters,
}

pub fn train(config: &RunConfig, algorithm: Algorithm, mode: FeatureMode, embeddings_only: bool) -> Result<()> {
    let profiles: Vec<FgiProfile> =
        load_profiles(&config.profiles_dir())?.into_iter().filter(|p| p.package.label != Label::Unknown).collect();
    let all: Vec<usize> = (0..profiles.len()).collect();
    let options = BenchmarkOptions { seed: config.seed, embedding: config.embedding_config(), embeddings_only, ..Default::default() };
    let (bundle, examples) = classifiers::build_examples(&profiles, &all, mode, &options)?;
    let model = classifiers::train(algorithm.default_hyperparameters(), &examples, &bundle.layout(), config.seed)?;
    let dir = config.model_dir();
    if dir.exists() {
        fs::remove_dir_all(&dir)?;
    }
    bundle.save(&dir.join("features"))?;
    model.save(&dir.join("model.bin"))?;
    let info = ModelInfo {
        algorithm,
        mode,
        seed: config.seed,
        embeddings_only,
        training_packages: examples.len(),
        hyperparameters: model.hyperparameters,
    };
    write_json(&dir.join("model.json"), &info)?;
    let training = classifiers::evaluate(&model, &examples)?;
    println!("trained {algorithm} on {} packages ({} features, mode {}); training accuracy {:.3}", examples.len(), bundle.layout().len(), mode.as_str(), training.accuracy);
    Ok(())
}

pub fn benchmark(config: &RunConfig, modes: &[FeatureMode], algorithms: &[Algorithm], embeddings_only: bool, oversample: bool) -> Result<()> {
    let profiles: Vec<FgiProfile> =
        load_profiles(&config.profiles_dir())?.into_iter().filter(|p| p.package.label != Label::Unknown).collect();
    let options = BenchmarkOptions { seed: config.seed, embedding: config.embedding_config(), embeddings_only, oversample, ..Default::default() };
    let rows = classifiers::benchmark(&profiles, modes, algorithms, &options)?;
    let csv = classifiers::benchmark_csv(&rows)?;
    fs::create_dir_all(&config.out)?;
    fs::write(config.out.join("benchmark.csv"), &csv)?;
    write_json(&config.out.join("benchmark.json"), &serde_json::json!({ "seed": config.seed, "embeddings_only": embeddings_only, "oversample": oversample, "rows": rows }))?;
    print!("{csv}");
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Verdict {
    pub package: String,
    pub label: Label,
    pub score: f64,
    /// Scalar features furthest from the training mean, in standard units.
    pub top_features: Vec<(String, f64)>,
}

fn detection_inputs(config: &RunConfig, inputs: &[PathBuf], ecosystem: Option<Ecosystem>, catalog: &FunctionCatalog) -> Result<Vec<FgiProfile>> {
    if inputs.is_empty() {
        let dir = config.profiles_dir();
        return if dir.is_dir() { load_profiles(&dir) } else { Ok(Vec::new()) };
    }
    let mut out = Vec::new();
    for path in archive_inputs(inputs)? {
        if path.extension().is_some_and(|x| x == "json") {
            out.push(serde_json::from_slice(&fs::read(&path)?).with_context(|| format!("reading profile {}", path.display()))?);
            continue;
        }
        let Some(eco) = ecosystem else { bail!("--ecosystem is required to scan archive {}", path.display()) };
        let bytes = fs::read(&path)?;
        let digest = corpus::sha256_hex(&bytes);
        let (name, version) = path
            .file_name()
            .and_then(|n| corpus::parse_archive_file_name(&n.to_string_lossy()))
            .map(|(n, v)| (n, v.unwrap_or_default()))
            .unwrap_or_else(|| (path.display().to_string(), String::new()));
        let package = PackageRef { ecosystem: eco, name, version, label: Label::Unknown, archive_path: path.clone(), content_digest: digest };
        let work = config.out.join("detect-work");
        let mut p = profile::extract_profile(&package, &work, ExtractionLimits::default(), catalog, None)?;
        if let Some(md) = &p.metadata {
            p.package.name = md.name.clone();
            if !md.version.is_empty() {
                p.package.version = md.version.clone();
            }
        }
        out.push(p);
    }
    Ok(out)
}

/// Returns whether any package was judged malicious.
pub fn detect(config: &RunConfig, model_dir: Option<&Path>, inputs: &[PathBuf], ecosystem: Option<Ecosystem>, json: bool) -> Result<bool> {
    let dir = model_dir.map(Path::to_path_buf).unwrap_or_else(|| config.model_dir());
    let model_file = dir.join("model.bin");
    if !model_file.is_file() {
        bail!("missing model: {} not found; run `fgi train` first", model_file.display());
    }
    let model = TrainedModel::load(&model_file)?;
    let bundle = ModelBundle::load(&dir.join("features"))?;
    let info: ModelInfo = serde_json::from_slice(&fs::read(dir.join("model.json"))?)?;
    if bundle.layout() != model.layout {
        bail!("layout mismatch between model and feature bundle");
    }
    let catalog = catalog(config)?;
    let profiles = detection_inputs(config, inputs, ecosystem, &catalog)?;
    let layout = bundle.layout();
    let mut verdicts = Vec::new();
    for p in &profiles {
        let vector = features::featurize(p, &bundle, info.mode)?;
        let (label, score) = model.predict(&vector)?;
        let mut top: Vec<(String, f64)> = vector
            .slice(&layout, "scalars")
            .map(|s| SCALAR_NAMES.iter().zip(s).filter(|(_, v)| **v != 0.0).map(|(n, v)| (n.to_string(), *v)).collect())
            .unwrap_or_default();
        top.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then_with(|| a.0.cmp(&b.0)));
        top.truncate(3);
        verdicts.push(Verdict { package: p.package.id().to_string(), label, score, top_features: top });
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&verdicts)?);
    } else if verdicts.is_empty() {
        println!("no packages to scan");
    } else {
        for v in &verdicts {
            let top: Vec<String> = v.top_features.iter().map(|(n, z)| format!("{n} {z:+.2}")).collect();
            println!("{}\t{}\t{:.3}\t{}", v.package, v.label, v.score, top.join(", "));
        }
    }
    Ok(verdicts.iter().any(|v| v.label == Label::Malicious))
}

/// Collects the text summaries produced so far into `REPORT.md`.
pub fn report(config: &RunConfig) -> Result<()> {
    let mut sections: BTreeMap<&str, String> = BTreeMap::new();
    let summary_path = config.profiles_dir().join("extraction_summary.json");
    if summary_path.is_file() {
        let s: ExtractionSummary = serde_json::from_slice(&fs::read(&summary_path)?)?;
        sections.insert(
            "1 extraction",
            format!(
                "| level | attempted | succeeded | rate |\n|---|---|---|---|\n| metadata | {} | {} | {:.3} |\n| static (files) | {} | {} | {:.3} |\n| dynamic | {} | {} | {:.3} |\n",
                s.metadata.attempted, s.metadata.succeeded, s.metadata.rate(),
                s.static_files.attempted, s.static_files.succeeded, s.static_files.rate(),
                s.dynamic.attempted, s.dynamic.succeeded, s.dynamic.rate(),
            ),
        );
    }
    let analysis = config.report_dir().join("summary.txt");
    if analysis.is_file() {
        sections.insert("2 analysis", format!("```\n{}```\n", fs::read_to_string(&analysis)?));
    }
    let bench = config.out.join("benchmark.csv");
    if bench.is_file() {
        let text = fs::read_to_string(&bench)?;
        let mut table = String::new();
        for (i, line) in text.lines().enumerate() {
            table.push_str(&format!("| {} |\n", line.replace(',', " | ")));
            if i == 0 {
                table.push_str(&format!("|{}\n", "---|".repeat(line.split(',').count())));
            }
        }
        sections.insert("3 benchmark", table);
    }
    if sections.is_empty() {
        bail!("nothing to report yet; run extract, analyze or benchmark first");
    }
    let mut out = format!("# FGI run report\n\nseed: {}\n", config.seed);
    for (title, body) in sections {
        out.push_str(&format!("\n## {}\n\n{body}", &title[2..]));
    }
    fs::write(config.out.join("REPORT.md"), &out)?;
    print!("{out}");
    Ok(())
}
