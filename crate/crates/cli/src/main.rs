mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use fgi_core::analytics::report::DescriptionAxis;
use fgi_core::analytics::CountMode;
use fgi_core::classifiers::Algorithm;
use fgi_core::features::FeatureMode;
use fgi_core::{Ecosystem, Label};

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "fgi", version, about = "Extract package information at three levels and detect malicious packages")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Never touch the network; registry lookups use the cache only.
    #[arg(long, global = true)]
    offline: bool,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for corpus, profiles, reports and models.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Function catalog CSV replacing the built-in one.
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Copy archives into the corpus store and record them in the manifest.
    Ingest {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long)]
        ecosystem: Ecosystem,
        #[arg(long)]
        label: Label,
    },
    /// Build a profile for every ingested package.
    Extract {
        /// Directory of recorded install traces.
        #[arg(long)]
        traces: Option<PathBuf>,
        #[arg(long)]
        no_metadata: bool,
        #[arg(long)]
        no_static: bool,
        #[arg(long)]
        no_dynamic: bool,
    },
    /// Write CDFs, URL tables, function popularity and correlations.
    Analyze {
        /// `tokens` or `characters`.
        #[arg(long, default_value = "tokens")]
        description_axis: String,
        /// `raw` or `distinct` dynamic call counting.
        #[arg(long, default_value = "raw")]
        count_mode: String,
    },
    /// Train one classifier on all labeled profiles.
    Train {
        #[arg(long, default_value = "RF")]
        algorithm: Algorithm,
        #[arg(long, default_value = "all")]
        mode: FeatureMode,
        #[arg(long)]
        embeddings_only: bool,
    },
    /// Evaluate every mode and algorithm on a seeded stratified split.
    Benchmark {
        #[arg(long, value_delimiter = ',')]
        modes: Vec<FeatureMode>,
        #[arg(long, value_delimiter = ',')]
        algorithms: Vec<Algorithm>,
        #[arg(long)]
        embeddings_only: bool,
        #[arg(long)]
        oversample: bool,
    },
    /// Score packages with a trained model. Exits 1 if any is malicious.
    Detect {
        /// Profile JSON files or package archives. Defaults to extracted profiles.
        paths: Vec<PathBuf>,
        /// Ecosystem of archive inputs.
        #[arg(long)]
        ecosystem: Option<Ecosystem>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Summarize extraction, analysis and benchmark outputs into REPORT.md.
    Report,
}

fn parse_axis(s: &str) -> Result<DescriptionAxis> {
    match s {
        "tokens" => Ok(DescriptionAxis::Tokens),
        "characters" | "chars" => Ok(DescriptionAxis::Characters),
        other => bail!("unknown description axis `{other}` (expected tokens or characters)"),
    }
}

fn parse_count_mode(s: &str) -> Result<CountMode> {
    match s {
        "raw" => Ok(CountMode::Raw),
        "distinct" => Ok(CountMode::Distinct),
        other => bail!("unknown count mode `{other}` (expected raw or distinct)"),
    }
}

fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if cli.offline {
        config.offline = true;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.out = out.clone();
    }
    if let Some(catalog) = &cli.catalog {
        config.catalog = Some(catalog.clone());
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut config = resolve_config(&cli)?;
    match cli.command {
        Command::Ingest { paths, ecosystem, label } => commands::ingest(&config, &paths, ecosystem, label)?,
        Command::Extract { traces, no_metadata, no_static, no_dynamic } => {
            if traces.is_some() {
                config.traces = traces;
            }
            config.extract.metadata &= !no_metadata;
            config.extract.static_calls &= !no_static;
            config.extract.dynamic &= !no_dynamic;
            commands::extract(&config)?;
        }
        Command::Analyze { description_axis, count_mode } => {
            commands::analyze(&config, parse_axis(&description_axis)?, parse_count_mode(&count_mode)?)?
        }
        Command::Train { algorithm, mode, embeddings_only } => commands::train(&config, algorithm, mode, embeddings_only)?,
        Command::Benchmark { modes, algorithms, embeddings_only, oversample } => {
            let modes = if modes.is_empty() { FeatureMode::ALL_MODES.to_vec() } else { modes };
            let algorithms = if algorithms.is_empty() { Algorithm::ALL.to_vec() } else { algorithms };
            commands::benchmark(&config, &modes, &algorithms, embeddings_only, oversample)?
        }
        Command::Detect { paths, ecosystem, model, json } => {
            let malicious = commands::detect(&config, model.as_deref(), &paths, ecosystem, json)?;
            return Ok(ExitCode::from(u8::from(malicious)));
        }
        Command::Report => commands::report(&config)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
