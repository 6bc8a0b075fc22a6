//! The six classifiers, their evaluation and benchmarking.
//!
//! Malicious is the positive class everywhere. Scores are probabilities of
//! the malicious class and the label is `score >= 0.5`.

mod codec;
pub mod linear;
pub mod neighbors;
pub mod network;
pub mod tree;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::PackageId;
use crate::features::{featurize, EmbeddingConfig, FeatureError, FeatureMode, FeatureVector, Layout, ModelBundle};
use crate::profile::FgiProfile;
use crate::types::Label;
use codec::{Decoder, Encoder};
use linear::Linear;
use network::Mlp;
use tree::{Tree, TreeParams};

const MODEL_MAGIC: &[u8; 8] = b"FGIMODEL";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ClassifierError {
    #[error("need at least 10 examples, got {0}")]
    TooFewExamples(usize),
    #[error("dataset contains a single class")]
    SingleClassDataset,
    #[error("non-finite feature value")]
    NonFiniteFeature,
    #[error("vector has {got} values but the model expects {expected}")]
    LayoutMismatch { expected: usize, got: usize },
    #[error("empty test set")]
    EmptyTestSet,
    #[error("example for {0} has no binary label")]
    UnlabeledExample(String),
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "DT")]
    Dt,
    #[serde(rename = "LR")]
    Lr,
    #[serde(rename = "SVM")]
    SvmLinear,
    #[serde(rename = "RF")]
    Rf,
    #[serde(rename = "KNN")]
    Knn,
    #[serde(rename = "NN")]
    Nn,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [Algorithm::Dt, Algorithm::Lr, Algorithm::SvmLinear, Algorithm::Rf, Algorithm::Knn, Algorithm::Nn];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Dt => "DT",
            Algorithm::Lr => "LR",
            Algorithm::SvmLinear => "SVM",
            Algorithm::Rf => "RF",
            Algorithm::Knn => "KNN",
            Algorithm::Nn => "NN",
        }
    }

    fn tag(self) -> u8 {
        Self::ALL.iter().position(|&a| a == self).unwrap() as u8
    }

    fn from_tag(tag: u8) -> Option<Algorithm> {
        Self::ALL.get(tag as usize).copied()
    }

    pub fn default_hyperparameters(self) -> Hyperparameters {
        match self {
            Algorithm::Dt => Hyperparameters::Dt { max_depth: 10, min_samples_split: 5 },
            Algorithm::Lr => Hyperparameters::Lr { c: 0.1 },
            Algorithm::SvmLinear => Hyperparameters::Svm { c: 0.1 },
            Algorithm::Rf => Hyperparameters::Rf { n_estimators: 200, max_depth: 20, min_samples_split: 2 },
            Algorithm::Knn => Hyperparameters::Knn { k: 5 },
            Algorithm::Nn => Hyperparameters::Nn { hidden: 100, epochs: 200, learning_rate: 1e-3 },
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "DT" => Ok(Algorithm::Dt),
            "LR" => Ok(Algorithm::Lr),
            "SVM" | "SVM_LINEAR" => Ok(Algorithm::SvmLinear),
            "RF" => Ok(Algorithm::Rf),
            "KNN" => Ok(Algorithm::Knn),
            "NN" => Ok(Algorithm::Nn),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Hyperparameters {
    Dt { max_depth: usize, min_samples_split: usize },
    Lr { c: f64 },
    Svm { c: f64 },
    Rf { n_estimators: usize, max_depth: usize, min_samples_split: usize },
    Knn { k: usize },
    Nn { hidden: usize, epochs: usize, learning_rate: f64 },
}

impl Hyperparameters {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            Hyperparameters::Dt { .. } => Algorithm::Dt,
            Hyperparameters::Lr { .. } => Algorithm::Lr,
            Hyperparameters::Svm { .. } => Algorithm::SvmLinear,
            Hyperparameters::Rf { .. } => Algorithm::Rf,
            Hyperparameters::Knn { .. } => Algorithm::Knn,
            Hyperparameters::Nn { .. } => Algorithm::Nn,
        }
    }

    fn encode(&self, e: &mut Encoder) {
        match *self {
            Hyperparameters::Dt { max_depth, min_samples_split } => {
                e.usize(max_depth);
                e.usize(min_samples_split);
            }
            Hyperparameters::Lr { c } | Hyperparameters::Svm { c } => e.f64(c),
            Hyperparameters::Rf { n_estimators, max_depth, min_samples_split } => {
                e.usize(n_estimators);
                e.usize(max_depth);
                e.usize(min_samples_split);
            }
            Hyperparameters::Knn { k } => e.usize(k),
            Hyperparameters::Nn { hidden, epochs, learning_rate } => {
                e.usize(hidden);
                e.usize(epochs);
                e.f64(learning_rate);
            }
        }
    }

    fn decode(algorithm: Algorithm, d: &mut Decoder) -> Result<Hyperparameters, ClassifierError> {
        Ok(match algorithm {
            Algorithm::Dt => Hyperparameters::Dt { max_depth: d.usize()?, min_samples_split: d.usize()? },
            Algorithm::Lr => Hyperparameters::Lr { c: d.f64()? },
            Algorithm::SvmLinear => Hyperparameters::Svm { c: d.f64()? },
            Algorithm::Rf => Hyperparameters::Rf { n_estimators: d.usize()?, max_depth: d.usize()?, min_samples_split: d.usize()? },
            Algorithm::Knn => Hyperparameters::Knn { k: d.usize()? },
            Algorithm::Nn => Hyperparameters::Nn { hidden: d.usize()?, epochs: d.usize()?, learning_rate: d.f64()? },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Parameters {
    Tree(Tree),
    Forest(Vec<Tree>),
    Logistic(Linear),
    Svm { linear: Linear, platt_a: f64, platt_b: f64 },
    Knn { x: Vec<Vec<f64>>, y: Vec<u8>, k: usize },
    Nn(Mlp),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub algorithm: Algorithm,
    pub hyperparameters: Hyperparameters,
    pub layout: Layout,
    pub seed: u64,
    pub parameters: Parameters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub vector: FeatureVector,
    /// 0 legitimate, 1 malicious.
    pub label: u8,
    pub package: PackageId,
}

/// Stratified shuffle split. Per class, `round(n_c · fraction)` examples go
/// to training. Index lists come back sorted.
pub fn split_indices(labels: &[u8], train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>), ClassifierError> {
    if labels.len() < 10 {
        return Err(ClassifierError::TooFewExamples(labels.len()));
    }
    if !labels.contains(&0) || !labels.contains(&1) {
        return Err(ClassifierError::SingleClassDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for class in [0u8, 1] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        let cut = (members.len() as f64 * train_fraction).round() as usize;
        train.extend_from_slice(&members[..cut]);
        test.extend_from_slice(&members[cut..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split(dataset: &[LabeledExample], train_fraction: f64, seed: u64) -> Result<(Vec<LabeledExample>, Vec<LabeledExample>), ClassifierError> {
    let labels: Vec<u8> = dataset.iter().map(|e| e.label).collect();
    let (tr, te) = split_indices(&labels, train_fraction, seed)?;
    Ok((tr.iter().map(|&i| dataset[i].clone()).collect(), te.iter().map(|&i| dataset[i].clone()).collect()))
}

/// Duplicates random minority-class examples until both classes are equal.
pub fn oversample_minority(indices: &[usize], labels: &[u8], seed: u64) -> Vec<usize> {
    let pos: Vec<usize> = indices.iter().copied().filter(|&i| labels[i] == 1).collect();
    let neg: Vec<usize> = indices.iter().copied().filter(|&i| labels[i] == 0).collect();
    let (minority, gap) = if pos.len() < neg.len() { (pos.clone(), neg.len() - pos.len()) } else { (neg.clone(), pos.len() - neg.len()) };
    let mut out = indices.to_vec();
    if gap > 0 && !minority.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        out.extend((0..gap).map(|_| *minority.choose(&mut rng).unwrap()));
    }
    out
}

/// Trains one model. `layout` describes the vectors and is stored with the
/// model.
pub fn train(
    hyperparameters: Hyperparameters,
    examples: &[LabeledExample],
    layout: &Layout,
    seed: u64,
) -> Result<TrainedModel, ClassifierError> {
    let x: Vec<Vec<f64>> = examples.iter().map(|e| e.vector.values.clone()).collect();
    let y: Vec<u8> = examples.iter().map(|e| e.label).collect();
    train_arrays(hyperparameters, &x, &y, layout, seed)
}

pub fn train_arrays(hyperparameters: Hyperparameters, x: &[Vec<f64>], y: &[u8], layout: &Layout, seed: u64) -> Result<TrainedModel, ClassifierError> {
    if x.is_empty() || !y.contains(&0) || !y.contains(&1) {
        return Err(ClassifierError::SingleClassDataset);
    }
    for row in x {
        if row.len() != layout.len() {
            return Err(ClassifierError::LayoutMismatch { expected: layout.len(), got: row.len() });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(ClassifierError::NonFiniteFeature);
        }
    }
    let all: Vec<usize> = (0..x.len()).collect();
    let parameters = match hyperparameters {
        Hyperparameters::Dt { max_depth, min_samples_split } => {
            Parameters::Tree(Tree::fit(x, y, &all, &TreeParams { max_depth, min_samples_split, max_features: None }, None))
        }
        Hyperparameters::Rf { n_estimators, max_depth, min_samples_split } => {
            Parameters::Forest(tree::fit_forest(x, y, n_estimators, max_depth, min_samples_split, seed))
        }
        Hyperparameters::Lr { c } => Parameters::Logistic(linear::fit_logistic(x, y, c)),
        Hyperparameters::Svm { c } => {
            let model = linear::fit_svm(x, y, c, seed);
            let decisions: Vec<f64> = x.iter().map(|r| model.decision(r)).collect();
            let (platt_a, platt_b) = linear::fit_platt(&decisions, y);
            Parameters::Svm { linear: model, platt_a, platt_b }
        }
        Hyperparameters::Knn { k } => {
            if k > x.len() {
                log::warn!("k={k} exceeds {} training points; using k={}", x.len(), x.len());
            }
            Parameters::Knn { x: x.to_vec(), y: y.to_vec(), k: k.min(x.len()).max(1) }
        }
        Hyperparameters::Nn { hidden, epochs, learning_rate } => Parameters::Nn(Mlp::fit(x, y, hidden, epochs, learning_rate, seed)),
    };
    Ok(TrainedModel { algorithm: hyperparameters.algorithm(), hyperparameters, layout: layout.clone(), seed, parameters })
}

impl TrainedModel {
    pub fn score_values(&self, v: &[f64]) -> Result<f64, ClassifierError> {
        if v.len() != self.layout.len() {
            return Err(ClassifierError::LayoutMismatch { expected: self.layout.len(), got: v.len() });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(ClassifierError::NonFiniteFeature);
        }
        Ok(match &self.parameters {
            Parameters::Tree(t) => t.score(v),
            Parameters::Forest(trees) => trees.iter().map(|t| t.score(v)).sum::<f64>() / trees.len() as f64,
            Parameters::Logistic(l) => linear::sigmoid(l.decision(v)),
            Parameters::Svm { linear: l, platt_a, platt_b } => linear::sigmoid(-(platt_a * l.decision(v) + platt_b)),
            Parameters::Knn { x, y, k } => neighbors::knn_score(x, y, *k, v),
            Parameters::Nn(net) => net.score(v),
        })
    }

    pub fn predict(&self, vector: &FeatureVector) -> Result<(Label, f64), ClassifierError> {
        let score = self.score_values(&vector.values)?;
        let label = if score >= 0.5 { Label::Malicious } else { Label::Legitimate };
        Ok((label, score))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut e = Encoder::default();
        e.buf.extend_from_slice(MODEL_MAGIC);
        e.u32(MODEL_VERSION);
        e.u8(self.algorithm.tag());
        e.u64(self.seed);
        e.bytes(&serde_json::to_vec(&self.layout).expect("layout serializes"));
        self.hyperparameters.encode(&mut e);
        match &self.parameters {
            Parameters::Tree(t) => t.encode(&mut e),
            Parameters::Forest(trees) => {
                e.usize(trees.len());
                trees.iter().for_each(|t| t.encode(&mut e));
            }
            Parameters::Logistic(l) => {
                e.f64s(&l.weights);
                e.f64(l.bias);
            }
            Parameters::Svm { linear: l, platt_a, platt_b } => {
                e.f64s(&l.weights);
                e.f64(l.bias);
                e.f64(*platt_a);
                e.f64(*platt_b);
            }
            Parameters::Knn { x, y, k } => {
                e.usize(*k);
                e.usize(x.len());
                for (row, label) in x.iter().zip(y) {
                    e.u8(*label);
                    e.f64s(row);
                }
            }
            Parameters::Nn(net) => {
                e.usize(net.inputs);
                e.usize(net.hidden);
                e.f64s(&net.w1);
                e.f64s(&net.b1);
                e.f64s(&net.w2);
                e.f64(net.b2);
            }
        }
        e.buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<TrainedModel, ClassifierError> {
        if bytes.len() < 12 || &bytes[..8] != MODEL_MAGIC {
            return Err(ClassifierError::CorruptModel("bad magic".into()));
        }
        let mut d = Decoder::new(&bytes[8..]);
        let version = d.u32()?;
        if version != MODEL_VERSION {
            return Err(ClassifierError::CorruptModel(format!("unsupported version {version}")));
        }
        let algorithm = Algorithm::from_tag(d.u8()?).ok_or_else(|| ClassifierError::CorruptModel("algorithm tag".into()))?;
        let seed = d.u64()?;
        let layout: Layout = serde_json::from_slice(d.bytes()?).map_err(|e| ClassifierError::CorruptModel(e.to_string()))?;
        let width = layout.len();
        let hyperparameters = Hyperparameters::decode(algorithm, &mut d)?;
        let bad = |what: &str| ClassifierError::CorruptModel(what.to_string());
        let parameters = match algorithm {
            Algorithm::Dt => Parameters::Tree(Tree::decode(&mut d, width)?),
            Algorithm::Rf => {
                let n = d.usize()?;
                if n == 0 || n > bytes.len() {
                    return Err(bad("forest size"));
                }
                Parameters::Forest((0..n).map(|_| Tree::decode(&mut d, width)).collect::<Result<_, _>>()?)
            }
            Algorithm::Lr => {
                let weights = d.f64s()?;
                Parameters::Logistic(Linear { weights, bias: d.f64()? })
            }
            Algorithm::SvmLinear => {
                let weights = d.f64s()?;
                let bias = d.f64()?;
                Parameters::Svm { linear: Linear { weights, bias }, platt_a: d.f64()?, platt_b: d.f64()? }
            }
            Algorithm::Knn => {
                let k = d.usize()?;
                let n = d.usize()?;
                if n == 0 || n > bytes.len() {
                    return Err(bad("neighbor count"));
                }
                let (mut x, mut y) = (Vec::with_capacity(n), Vec::with_capacity(n));
                for _ in 0..n {
                    y.push(d.u8()?);
                    x.push(d.f64s()?);
                }
                if x.iter().any(|r| r.len() != width) || k == 0 || k > n {
                    return Err(bad("neighbor rows"));
                }
                Parameters::Knn { x, y, k }
            }
            Algorithm::Nn => {
                let inputs = d.usize()?;
                let hidden = d.usize()?;
                let net = Mlp { inputs, hidden, w1: d.f64s()?, b1: d.f64s()?, w2: d.f64s()?, b2: d.f64()? };
                if inputs != width || net.w1.len() != inputs * hidden || net.b1.len() != hidden || net.w2.len() != hidden {
                    return Err(bad("network shape"));
                }
                Parameters::Nn(net)
            }
        };
        if let Parameters::Logistic(l) | Parameters::Svm { linear: l, .. } = &parameters {
            if l.weights.len() != width {
                return Err(bad("weight count"));
            }
        }
        if !d.finished() {
            return Err(bad("trailing bytes"));
        }
        Ok(TrainedModel { algorithm, hyperparameters, layout, seed, parameters })
    }

    pub fn save(&self, path: &Path) -> Result<(), ClassifierError> {
        Ok(fs::write(path, self.to_bytes())?)
    }

    pub fn load(path: &Path) -> Result<TrainedModel, ClassifierError> {
        Self::from_bytes(&fs::read(path)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub accuracy: f64,
    /// `None` when nothing was predicted malicious.
    pub precision: Option<f64>,
    /// `None` when the test set has no malicious examples.
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

impl EvalMetrics {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> EvalMetrics {
        let total = tp + fp + tn + fn_;
        let ratio = |a: usize, b: usize| (b > 0).then(|| a as f64 / b as f64);
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = match (precision, recall) {
            (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
            (Some(_), Some(_)) => Some(0.0),
            _ => None,
        };
        EvalMetrics { tp, fp, tn, fn_, accuracy: ratio(tp + tn, total).unwrap_or(0.0), precision, recall, f1 }
    }

    /// Tallies predictions against truth, malicious (1) positive.
    pub fn from_predictions(truth: &[u8], predicted: &[u8]) -> EvalMetrics {
        let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t, p) {
                (1, 1) => tp += 1,
                (0, 1) => fp += 1,
                (0, 0) => tn += 1,
                _ => fn_ += 1,
            }
        }
        Self::from_counts(tp, fp, tn, fn_)
    }
}

pub fn evaluate(model: &TrainedModel, test: &[LabeledExample]) -> Result<EvalMetrics, ClassifierError> {
    if test.is_empty() {
        return Err(ClassifierError::EmptyTestSet);
    }
    let truth: Vec<u8> = test.iter().map(|e| e.label).collect();
    let predicted = test
        .iter()
        .map(|e| model.predict(&e.vector).map(|(l, _)| u8::from(l == Label::Malicious)))
        .collect::<Result<Vec<u8>, _>>()?;
    Ok(EvalMetrics::from_predictions(&truth, &predicted))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub mode: FeatureMode,
    pub algorithm: Algorithm,
    pub metrics: EvalMetrics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkOptions {
    pub train_fraction: f64,
    pub seed: u64,
    pub embedding: EmbeddingConfig,
    pub embeddings_only: bool,
    pub oversample: bool,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        BenchmarkOptions { train_fraction: 0.8, seed: 42, embedding: EmbeddingConfig::default(), embeddings_only: false, oversample: false }
    }
}

pub(crate) fn binary_label(p: &FgiProfile) -> Result<u8, ClassifierError> {
    p.package.label.class_id().ok_or_else(|| ClassifierError::UnlabeledExample(p.package.id().to_string()))
}

/// Featurizes profiles with models fitted on `train` only.
pub fn build_examples(
    profiles: &[FgiProfile],
    train: &[usize],
    mode: FeatureMode,
    options: &BenchmarkOptions,
) -> Result<(ModelBundle, Vec<LabeledExample>), ClassifierError> {
    let train_refs: Vec<&FgiProfile> = train.iter().map(|&i| &profiles[i]).collect();
    let bundle = ModelBundle::fit(&train_refs, mode, options.embedding, options.embeddings_only)?;
    let examples = profiles
        .par_iter()
        .map(|p| {
            Ok(LabeledExample { vector: featurize(p, &bundle, mode)?, label: binary_label(p)?, package: p.package.id() })
        })
        .collect::<Result<Vec<_>, ClassifierError>>()?;
    Ok((bundle, examples))
}

/// Splits once, then for each mode fits features on the training part and
/// trains and evaluates every algorithm.
pub fn benchmark(
    profiles: &[FgiProfile],
    modes: &[FeatureMode],
    algorithms: &[Algorithm],
    options: &BenchmarkOptions,
) -> Result<Vec<BenchmarkRow>, ClassifierError> {
    let labels = profiles.iter().map(binary_label).collect::<Result<Vec<u8>, _>>()?;
    let (train_idx, test_idx) = split_indices(&labels, options.train_fraction, options.seed)?;
    let fit_idx = if options.oversample { oversample_minority(&train_idx, &labels, options.seed) } else { train_idx.clone() };
    let mut rows = Vec::new();
    for &mode in modes {
        let (bundle, examples) = build_examples(profiles, &train_idx, mode, options)?;
        let layout = bundle.layout();
        let train_set: Vec<LabeledExample> = fit_idx.iter().map(|&i| examples[i].clone()).collect();
        let test_set: Vec<LabeledExample> = test_idx.iter().map(|&i| examples[i].clone()).collect();
        let cells = algorithms
            .par_iter()
            .map(|&algorithm| {
                let model = train(algorithm.default_hyperparameters(), &train_set, &layout, options.seed)?;
                Ok(BenchmarkRow { mode, algorithm, metrics: evaluate(&model, &test_set)? })
            })
            .collect::<Result<Vec<_>, ClassifierError>>()?;
        rows.extend(cells);
    }
    Ok(rows)
}

fn metric_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "n/a".into())
}

/// CSV with columns `mode, algorithm, accuracy, precision, recall, f1`.
pub fn benchmark_csv(rows: &[BenchmarkRow]) -> Result<String, ClassifierError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["mode", "algorithm", "accuracy", "precision", "recall", "f1"])?;
    for r in rows {
        w.write_record([
            r.mode.as_str().to_string(),
            r.algorithm.to_string(),
            format!("{:.6}", r.metrics.accuracy),
            metric_cell(r.metrics.precision),
            metric_cell(r.metrics.recall),
            metric_cell(r.metrics.f1),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| ClassifierError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Segment;

    fn layout(n: usize) -> Layout {
        Layout { segments: vec![Segment { name: "x".into(), offset: 0, len: n }] }
    }

    fn toy() -> (Vec<Vec<f64>>, Vec<u8>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..10 {
            let t = i as f64 / 3.0;
            x.push(vec![-2.0 - t, 1.0 + t * 0.5]);
            y.push(0);
            x.push(vec![2.0 + t, -1.0 - t * 0.3]);
            y.push(1);
        }
        (x, y)
    }

    #[test]
    fn every_algorithm_fits_separable_data_and_roundtrips() {
        let (x, y) = toy();
        for alg in Algorithm::ALL {
            let m = train_arrays(alg.default_hyperparameters(), &x, &y, &layout(2), 7).unwrap();
            let errors = x.iter().zip(&y).filter(|(r, &l)| u8::from(m.score_values(r).unwrap() >= 0.5) != l).count();
            assert_eq!(errors, 0, "{alg}");
            let back = TrainedModel::from_bytes(&m.to_bytes()).unwrap();
            assert_eq!(back, m, "{alg}");
            assert!(m.score_values(&[0.0, 0.0]).unwrap().is_finite());
        }
    }

    #[test]
    fn metric_formulas() {
        let m = EvalMetrics::from_counts(1, 1, 0, 0);
        assert_eq!((m.precision, m.recall), (Some(0.5), Some(1.0)));
        assert!((m.f1.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(EvalMetrics::from_counts(0, 0, 3, 2).precision, None);
    }

    #[test]
    fn stratified_split_arithmetic() {
        let labels: Vec<u8> = (0..100).map(|i| u8::from(i < 20)).collect();
        let (tr, te) = split_indices(&labels, 0.8, 1).unwrap();
        assert_eq!(tr.len(), 80);
        assert_eq!(tr.iter().filter(|&&i| labels[i] == 1).count(), 16);
        assert_eq!(te.len(), 20);
        assert_eq!(split_indices(&labels, 0.8, 1).unwrap(), (tr, te));
        assert!(matches!(split_indices(&[0; 20], 0.8, 1), Err(ClassifierError::SingleClassDataset)));
        assert!(matches!(split_indices(&[0, 1], 0.8, 1), Err(ClassifierError::TooFewExamples(2))));
    }

    #[test]
    fn layout_mismatch_is_reported() {
        let (x, y) = toy();
        let m = train_arrays(Hyperparameters::Knn { k: 3 }, &x, &y, &layout(2), 0).unwrap();
        assert!(matches!(m.score_values(&[1.0]), Err(ClassifierError::LayoutMismatch { expected: 2, got: 1 })));
    }
}
