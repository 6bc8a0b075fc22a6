//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the report reads top to bottom; exits nonzero on any failure.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use fgi_core::analytics::{cdf, pearson};
use fgi_core::classifiers::{self, Algorithm, BenchmarkOptions, EvalMetrics, Hyperparameters, LabeledExample};
use fgi_core::corpus::{dedup, DatasetManifest, PackageId, PackageRef};
use fgi_core::dynamic_trace::parse_trace_log;
use fgi_core::features::{train_embedding, Domain, EmbeddingConfig, FeatureMode, FeatureVector, Layout, Segment};
use fgi_core::static_analysis::{extract_calls, set_algebra, syntax::decode_source, CallSite, FunctionCatalog, StaticProfile, SyntaxTree};
use fgi_core::{analytics, Category, Ecosystem, Label, Language};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Tolerances and thresholds.
const EXACT: f64 = 1e-12;
const INVARIANCE: f64 = 1e-9;
const RF_METADATA_MIN: f64 = 0.90;
const ALL_LINEAR_MIN: f64 = 0.93;
const ALL_VS_METADATA_SLACK: f64 = 0.01;
/// DKW band at alpha = 0.05.
const DKW_ALPHA: f64 = 0.05;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn pid(name: &str) -> PackageId {
    PackageId { ecosystem: Ecosystem::Npm, name: name.into(), version: "1.0.0".into() }
}

// 1
fn metric_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let layout = Layout { segments: vec![Segment { name: "scalars".into(), offset: 0, len: 1 }] };
    for trial in 0..1000 {
        let n = rng.random_range(1..60);
        let bias = rng.random_range(0.0..1.0);
        let truth: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(bias))).collect();
        let predicted: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.5))).collect();
        // A 1-nearest-neighbour model that reproduces `predicted` exactly:
        // one training point per test point, plus far anchors of both classes.
        let mut x: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64]).collect();
        let mut y = predicted.clone();
        x.extend([vec![-1e6], vec![-1e6 - 1.0]]);
        y.extend([0, 1]);
        let model = classifiers::train_arrays(Hyperparameters::Knn { k: 1 }, &x, &y, &layout, 0).map_err(|e| e.to_string())?;
        let test: Vec<LabeledExample> = (0..n)
            .map(|i| LabeledExample { vector: FeatureVector { values: vec![i as f64] }, label: truth[i], package: pid("t") })
            .collect();
        let got = classifiers::evaluate(&model, &test).map_err(|e| e.to_string())?;

        let (mut tp, mut fp, mut tn, mut fn_) = (0usize, 0usize, 0usize, 0usize);
        for i in 0..n {
            match (truth[i] == 1, predicted[i] == 1) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (false, false) => tn += 1,
                (true, false) => fn_ += 1,
            }
        }
        let accuracy = (tp + tn) as f64 / n as f64;
        let precision = (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64);
        let recall = (tp + fn_ > 0).then(|| tp as f64 / (tp + fn_) as f64);
        let f1 = match (precision, recall) {
            (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
            (Some(_), Some(_)) => Some(0.0),
            _ => None,
        };
        let same = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(a), Some(b)) => (a - b).abs() <= EXACT,
            (None, None) => true,
            _ => false,
        };
        ensure!(
            (got.tp, got.fp, got.tn, got.fn_) == (tp, fp, tn, fn_)
                && (got.accuracy - accuracy).abs() <= EXACT
                && same(got.precision, precision)
                && same(got.recall, recall)
                && same(got.f1, f1),
            "trial {trial}: {got:?} vs tp={tp} fp={fp} tn={tn} fn={fn_}"
        );
    }
    Ok("1000 configurations agree".into())
}

// 2
fn pearson_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let n = rng.random_range(2..=200);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let y: Vec<f64> = (0..n).map(|i| 0.3 * x[i] + rng.random_range(-10.0..10.0)).collect();
        let nf = n as f64;
        let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let sxx: f64 = x.iter().map(|a| a * a).sum();
        let syy: f64 = y.iter().map(|b| b * b).sum();
        let direct = (nf * sxy - sx * sy) / ((nf * sxx - sx * sx).sqrt() * (nf * syy - sy * sy).sqrt());
        let r = pearson(&x, &y).map_err(|e| e.to_string())?;
        worst = worst.max((r - direct).abs());
        ensure!((r - direct).abs() <= EXACT, "trial {trial} (n={n}): {r} vs {direct}");
        ensure!((pearson(&y, &x).unwrap() - r).abs() <= INVARIANCE, "trial {trial}: not symmetric");
        let (a, b) = (rng.random_range(0.1..20.0), rng.random_range(-100.0..100.0));
        let ax: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        ensure!((pearson(&ax, &y).unwrap() - r).abs() <= INVARIANCE, "trial {trial}: not affine invariant");
    }
    Ok(format!("100 pairs, max deviation {worst:.1e}"))
}

// 3
fn static_ground_truth() -> Outcome {
    let catalog = FunctionCatalog::builtin();
    let fixtures = common::packages();
    let (mut hits, mut extracted, mut expected) = (0usize, 0usize, 0usize);
    for fx in &fixtures {
        let mut got: BTreeMap<(String, u32, String), usize> = BTreeMap::new();
        for (path, bytes) in fx.files() {
            let Some(lang) = Path::new(&path).extension().and_then(|e| e.to_str()).and_then(Language::from_extension) else { continue };
            let source = decode_source(&bytes);
            let tree = SyntaxTree::parse(lang, &source).map_err(|e| format!("{}/{path}: {e}", fx.key))?;
            let first: Vec<CallSite> = extract_calls(&tree, &catalog, Path::new(&path));
            for _ in 0..4 {
                let again = SyntaxTree::parse(lang, &source).unwrap();
                ensure!(extract_calls(&again, &catalog, Path::new(&path)) == first, "{}/{path}: traversal differs between runs", fx.key);
            }
            for c in first {
                *got.entry((path.clone(), c.line, c.function_name)).or_default() += 1;
            }
        }
        let mut want: BTreeMap<(String, u32, String), usize> = BTreeMap::new();
        for k in fx.expected_calls() {
            *want.entry(k).or_default() += 1;
        }
        hits += got.iter().map(|(k, n)| *n.min(want.get(k).unwrap_or(&0))).sum::<usize>();
        extracted += got.values().sum::<usize>();
        expected += want.values().sum::<usize>();
    }
    let precision = hits as f64 / extracted as f64;
    let recall = hits as f64 / expected as f64;
    ensure!(precision == 1.0 && recall == 1.0, "precision {precision:.3}, recall {recall:.3} over {} packages", fixtures.len());
    Ok(format!("{} packages, {expected} call-sites, precision 1.000 recall 1.000, 5 identical runs", fixtures.len()))
}

// 4
fn trace_parsing() -> Outcome {
    let log = std::fs::read_to_string(common::fixtures_dir().join("traces/npm-install.strace")).map_err(|e| e.to_string())?;
    ensure!(log.lines().count() == 600, "reference log has {} lines", log.lines().count());
    let parsed = parse_trace_log(log.as_bytes(), &FunctionCatalog::builtin()).map_err(|e| e.to_string())?;
    ensure!(parsed.malformed.is_empty(), "{} malformed lines", parsed.malformed.len());

    // Line-count oracle: classify each call line by its name alone.
    let file = ["openat", "read", "fstat", "close", "getcwd", "statx", "mkdir", "write", "fchmod", "getdents64", "newfstatat", "access"];
    let network = ["socket", "connect", "getsockopt", "setsockopt", "sendto", "recvfrom"];
    let process = ["execve", "clone", "wait4", "exit_group", "prctl", "setsid", "kill"];
    let mut oracle: BTreeMap<Category, usize> = BTreeMap::new();
    let mut resumed = 0;
    for line in log.lines() {
        let body = line.splitn(3, ' ').nth(2).unwrap_or("");
        if body.starts_with("<...") {
            resumed += 1;
            continue;
        }
        let Some(open) = body.find('(') else { continue };
        let name = &body[..open];
        let c = if file.contains(&name) {
            Category::File
        } else if network.contains(&name) {
            Category::Network
        } else if process.contains(&name) {
            Category::Process
        } else {
            continue;
        };
        *oracle.entry(c).or_default() += 1;
    }
    let mut got: BTreeMap<Category, usize> = BTreeMap::new();
    for e in parsed.events.iter().filter(|e| e.category != Category::Other) {
        *got.entry(e.category).or_default() += 1;
    }
    ensure!(got == oracle, "counts {got:?} vs oracle {oracle:?}");
    ensure!(resumed >= 5 && parsed.merged_lines == resumed, "merged {} of {resumed} pairs", parsed.merged_lines);
    let joined = parsed.events.iter().filter(|e| e.function_name == "wait4" && e.return_value.is_some()).count();
    ensure!(joined == 2, "wait4 pairs joined: {joined}");
    Ok(format!(
        "600 lines, 0 malformed, file={} network={} process={}, {resumed} unfinished/resumed pairs merged",
        oracle[&Category::File], oracle[&Category::Network], oracle[&Category::Process]
    ))
}

// 5
fn set_algebra_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..200 {
        let n_packages = rng.random_range(1..=10);
        let universe = rng.random_range(1..=15);
        let mut used: Vec<(Label, BTreeSet<usize>)> = Vec::new();
        for _ in 0..n_packages {
            let label = if rng.random_bool(0.5) { Label::Malicious } else { Label::Legitimate };
            let fs: BTreeSet<usize> = (0..rng.random_range(0..=6)).map(|_| rng.random_range(0..universe)).collect();
            used.push((label, fs));
        }
        let to_profile = |(i, (_, fs)): (usize, &(Label, BTreeSet<usize>))| {
            let calls = fs
                .iter()
                .map(|f| CallSite { function_name: format!("f{f}"), category: Category::Network, file: PathBuf::from("x.js"), line: 1, argument_count: 0 })
                .collect();
            StaticProfile::new(pid(&format!("p{i}")), calls, Vec::new())
        };
        let m: Vec<StaticProfile> = used.iter().enumerate().filter(|(_, (l, _))| *l == Label::Malicious).map(to_profile).collect();
        let r: Vec<StaticProfile> = used.iter().enumerate().filter(|(_, (l, _))| *l == Label::Legitimate).map(to_profile).collect();
        let got = set_algebra(&m, &r).map_err(|e| e.to_string())?;

        let uses = |f: usize, label: Label| used.iter().filter(|(l, fs)| *l == label && fs.contains(&f)).count();
        let build = |pred: &dyn Fn(usize) -> bool| -> BTreeSet<String> { (0..universe).filter(|&f| pred(f)).map(|f| format!("f{f}")).collect() };
        let same = build(&|f| uses(f, Label::Malicious) > 0 && uses(f, Label::Legitimate) > 0);
        let r_minus = build(&|f| uses(f, Label::Legitimate) > 0 && uses(f, Label::Malicious) == 0);
        let m_minus = build(&|f| uses(f, Label::Malicious) > 0 && uses(f, Label::Legitimate) == 0);
        ensure!(got.s_same == same && got.s_r_minus == r_minus && got.s_m_minus == m_minus, "trial {trial}: sets differ");
        ensure!(
            got.s_same.is_disjoint(&got.s_r_minus) && got.s_same.is_disjoint(&got.s_m_minus) && got.s_r_minus.is_disjoint(&got.s_m_minus),
            "trial {trial}: sets overlap"
        );
        for f in 0..universe {
            for label in [Label::Malicious, Label::Legitimate] {
                ensure!(got.package_count(&format!("f{f}"), label) == uses(f, label), "trial {trial}: package count f{f}");
            }
        }
    }
    Ok("200 random corpora agree, sets pairwise disjoint".into())
}

fn eval_pct(m: &EvalMetrics) -> String {
    format!("{:.3}", m.accuracy)
}

// 6
fn synthetic_benchmark() -> Outcome {
    let profiles = common::synthetic::corpus(500, 200, 42);
    let options = BenchmarkOptions::default();
    let rows = classifiers::benchmark(
        &profiles,
        &[FeatureMode::Metadata, FeatureMode::All],
        &[Algorithm::Rf, Algorithm::Lr, Algorithm::SvmLinear],
        &options,
    )
    .map_err(|e| e.to_string())?;
    let acc = |mode: FeatureMode, a: Algorithm| rows.iter().find(|r| r.mode == mode && r.algorithm == a).unwrap().metrics;
    let rf_meta = acc(FeatureMode::Metadata, Algorithm::Rf);
    let lr_all = acc(FeatureMode::All, Algorithm::Lr);
    let svm_all = acc(FeatureMode::All, Algorithm::SvmLinear);
    let summary = format!(
        "RF metadata {} (>= {RF_METADATA_MIN}); all-FGI LR {} SVM {} (>= {ALL_LINEAR_MIN})",
        eval_pct(&rf_meta),
        eval_pct(&lr_all),
        eval_pct(&svm_all)
    );
    ensure!(rf_meta.accuracy >= RF_METADATA_MIN, "{summary}");
    ensure!(lr_all.accuracy >= ALL_LINEAR_MIN && svm_all.accuracy >= ALL_LINEAR_MIN, "{summary}");
    for a in [Algorithm::Rf, Algorithm::Lr, Algorithm::SvmLinear] {
        let (m, all) = (acc(FeatureMode::Metadata, a).accuracy, acc(FeatureMode::All, a).accuracy);
        ensure!(all >= m - ALL_VS_METADATA_SLACK, "{summary}; {a}: all {all:.3} < metadata {m:.3} - {ALL_VS_METADATA_SLACK}");
    }
    Ok(summary)
}

// 7
fn determinism() -> Outcome {
    let profiles = common::synthetic::corpus(90, 40, 7);
    let options = BenchmarkOptions { embedding: EmbeddingConfig { dim: 32, ..EmbeddingConfig::default() }, ..BenchmarkOptions::default() };
    let run = || -> Result<String, String> {
        let rows = classifiers::benchmark(&profiles, &FeatureMode::ALL_MODES, &Algorithm::ALL, &options).map_err(|e| e.to_string())?;
        classifiers::benchmark_csv(&rows).map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    ensure!(a.as_bytes() == b.as_bytes(), "benchmark CSV differs between runs");
    let corpus: Vec<Vec<String>> = profiles.iter().map(|p| fgi_core::features::tokenize_static(&p.static_profile)).collect();
    let e1 = train_embedding(&corpus, Domain::FunctionTokens, EmbeddingConfig::default()).map_err(|e| e.to_string())?;
    let e2 = train_embedding(&corpus, Domain::FunctionTokens, EmbeddingConfig::default()).map_err(|e| e.to_string())?;
    let bits = |m: &fgi_core::features::EmbeddingModel| m.matrix.iter().map(|v| v.to_bits()).collect::<Vec<u32>>();
    ensure!(bits(&e1) == bits(&e2), "embedding matrices differ");
    Ok(format!("{} CSV rows byte-identical, {}x{} embedding bitwise equal", a.lines().count() - 1, e1.vocab.len(), e1.dim))
}

// 8
fn dedup_and_split() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for trial in 0..100 {
        let entries: Vec<PackageRef> = (0..rng.random_range(0..40))
            .map(|_| PackageRef {
                ecosystem: [Ecosystem::Npm, Ecosystem::Pypi, Ecosystem::Rubygems][rng.random_range(0..3)],
                name: format!("p{}", rng.random_range(0..6)),
                version: format!("1.{}", rng.random_range(0..3)),
                label: Label::Legitimate,
                archive_path: PathBuf::from("a"),
                content_digest: format!("{:064x}", rng.random_range(0..8u32)),
            })
            .collect();
        let once = dedup(&DatasetManifest::new(entries.clone()));
        ensure!(dedup(&once).entries == once.entries, "trial {trial}: dedup not idempotent");
        let ids: BTreeSet<PackageId> = entries.iter().map(PackageRef::id).collect();
        ensure!(once.entries.len() == ids.len(), "trial {trial}: duplicates survive");
    }
    for trial in 0..100 {
        let n = rng.random_range(10..300);
        let p = rng.random_range(0.1..0.9);
        let mut labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(p))).collect();
        labels[0] = 0;
        labels[1] = 1;
        let fraction = rng.random_range(0.5..0.9);
        let seed = rng.random();
        let (train, test) = classifiers::split_indices(&labels, fraction, seed).map_err(|e| e.to_string())?;
        let (a, b): (BTreeSet<usize>, BTreeSet<usize>) = (train.iter().copied().collect(), test.iter().copied().collect());
        ensure!(a.is_disjoint(&b), "trial {trial}: overlap");
        ensure!(a.len() + b.len() == n && a.union(&b).count() == n, "trial {trial}: coverage");
        for class in 0..2u8 {
            let total = labels.iter().filter(|&&l| l == class).count() as f64;
            let in_train = train.iter().filter(|&&i| labels[i] == class).count() as f64;
            ensure!((in_train - fraction * total).abs() <= 1.0, "trial {trial}: class {class} has {in_train} of {total} in train");
        }
    }
    Ok("100 manifests idempotent, 100 splits disjoint, covering and stratified".into())
}

// 9
fn cdf_sanity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..100 {
        let mut values: Vec<f64> = (0..rng.random_range(1..200)).map(|_| (rng.random_range(0..50) as f64) * 0.5).collect();
        let c = cdf(&values).map_err(|e| e.to_string())?;
        ensure!(c.cumulative.windows(2).all(|w| w[0] <= w[1]), "trial {trial}: not monotone");
        ensure!(c.sorted_values.windows(2).all(|w| w[0] < w[1]), "trial {trial}: support not increasing");
        ensure!(*c.cumulative.last().unwrap() == 1.0, "trial {trial}: ends at {}", c.cumulative.last().unwrap());
        values.shuffle(&mut rng);
        ensure!(cdf(&values).unwrap() == c, "trial {trial}: depends on input order");
    }
    let n = 1000;
    let sample: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let c = cdf(&sample).map_err(|e| e.to_string())?;
    let mut sup: f64 = 0.0;
    let mut previous = 0.0;
    for (&x, &f) in c.sorted_values.iter().zip(&c.cumulative) {
        sup = sup.max((f - x).abs()).max((previous - x).abs());
        previous = f;
    }
    let band = ((2.0 / DKW_ALPHA).ln() / (2.0 * n as f64)).sqrt();
    ensure!(sup <= band, "sup deviation {sup:.4} exceeds DKW band {band:.4}");
    ensure!((c.eval(0.5) - analytics::cdf(&sample).unwrap().eval(0.5)).abs() == 0.0, "eval not deterministic");
    Ok(format!("100 inputs monotone, end at 1, order free; uniform n=1000 sup {sup:.4} <= {band:.4}"))
}

// 10
fn end_to_end() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = tmp.path();
    let out = root.join("out");
    let fgi = |args: &[&str]| -> Result<std::process::Output, String> {
        Command::new(env!("CARGO_BIN_EXE_fgi"))
            .args(["--offline", "--out", out.to_str().unwrap(), "--seed", "7"])
            .args(args)
            .env("FGI_CACHE_DIR", root.join("cache"))
            .output()
            .map_err(|e| e.to_string())
    };
    let expect_ok = |what: &str, o: std::process::Output| -> Result<(), String> {
        if o.status.code() == Some(0) {
            Ok(())
        } else {
            Err(format!("{what} exited {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr)))
        }
    };

    let fixtures = common::packages();
    let mut groups: BTreeMap<(String, String), Vec<String>> = BTreeMap::new();
    let archives = root.join("archives");
    std::fs::create_dir_all(&archives).unwrap();
    for fx in &fixtures {
        let (name, bytes) = fx.archive();
        let path = archives.join(&name);
        std::fs::write(&path, bytes).unwrap();
        groups.entry((fx.ecosystem.to_string(), fx.label.to_string())).or_default().push(path.display().to_string());
    }
    for ((eco, label), paths) in &groups {
        let mut args = vec!["ingest", "--ecosystem", eco, "--label", label];
        args.extend(paths.iter().map(String::as_str));
        expect_ok("ingest", fgi(&args)?)?;
    }
    let traces = root.join("traces");
    std::fs::create_dir_all(&traces).unwrap();
    std::fs::copy(common::fixtures_dir().join("traces/npm-install.strace"), traces.join("electorn@1.0.0.log")).unwrap();

    expect_ok("extract", fgi(&["extract", "--traces", traces.to_str().unwrap()])?)?;
    expect_ok("analyze", fgi(&["analyze"])?)?;
    expect_ok("train", fgi(&["train", "--algorithm", "RF", "--mode", "all"])?)?;
    let legit = archives.join("left-pad-1.3.0.tgz");
    let detect = fgi(&["detect", "--ecosystem", "npm", legit.to_str().unwrap()])?;
    let verdict = String::from_utf8_lossy(&detect.stdout).into_owned();
    expect_ok("detect", detect)?;
    expect_ok("report", fgi(&["report"])?)?;

    let mut missing = Vec::new();
    let mut expect_file = |p: PathBuf| {
        if !p.is_file() {
            missing.push(p.strip_prefix(&out).unwrap_or(&p).display().to_string());
        }
    };
    expect_file(out.join("corpus/manifest.jsonl"));
    expect_file(out.join("profiles/extraction_summary.json"));
    for f in analytics::report::REPORT_FILES {
        expect_file(out.join("report").join(f));
    }
    for f in ["model.bin", "model.json", "features/bundle.json", "features/standardization.csv"] {
        expect_file(out.join("model").join(f));
    }
    expect_file(out.join("REPORT.md"));
    let profiles = std::fs::read_dir(out.join("profiles")).unwrap().filter(|e| e.as_ref().unwrap().file_name() != "extraction_summary.json").count();
    ensure!(missing.is_empty(), "missing artifacts: {missing:?}");
    ensure!(profiles == fixtures.len(), "{profiles} profile files for {} packages", fixtures.len());
    ensure!(verdict.contains("legitimate"), "detect verdict: {verdict}");
    Ok(format!("ingest, extract, analyze, train, detect, report exit 0; {profiles} profiles and all artifacts present"))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("metric oracle equivalence", Duration::from_secs(5), metric_oracle),
        ("pearson oracle equivalence", Duration::from_secs(5), pearson_oracle),
        ("static extraction ground truth", Duration::from_secs(10), static_ground_truth),
        ("trace parsing", Duration::from_secs(5), trace_parsing),
        ("set algebra", Duration::from_secs(5), set_algebra_oracle),
        ("synthetic-signal benchmark", Duration::from_secs(600), synthetic_benchmark),
        ("determinism", Duration::from_secs(120), determinism),
        ("dedup and split laws", Duration::from_secs(5), dedup_and_split),
        ("cdf sanity", Duration::from_secs(5), cdf_sanity),
        ("end-to-end smoke", Duration::from_secs(60), end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = check();
        let elapsed = started.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *budget => Err(format!("{detail}; took {elapsed:.1?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
