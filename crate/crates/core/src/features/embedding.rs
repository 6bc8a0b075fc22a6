//! Skip-gram embeddings trained with negative sampling.

use std::collections::HashMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FeatureError;

pub const UNK: &str = "⟨UNK⟩";
const MATRIX_MAGIC: &[u8; 8] = b"FGIEMB01";
const NOISE_TABLE_SIZE: usize = 1 << 20;

/// Token ↔ id mapping; id 0 is always [`UNK`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary in first-seen order (min count 1).
    pub fn build<'a, I: IntoIterator<Item = &'a str>>(tokens: I) -> Vocabulary {
        let mut vocab = Vocabulary { tokens: vec![UNK.to_string()], index: HashMap::from([(UNK.to_string(), 0)]) };
        for t in tokens {
            if !vocab.index.contains_key(t) {
                vocab.index.insert(t.to_string(), vocab.tokens.len());
                vocab.tokens.push(t.to_string());
            }
        }
        vocab
    }

    pub fn from_tokens(tokens: Vec<String>) -> Result<Vocabulary, FeatureError> {
        if tokens.first().map(String::as_str) != Some(UNK) {
            return Err(FeatureError::CorruptBundle("vocabulary must start with the unknown token".into()));
        }
        let mut index = HashMap::new();
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(FeatureError::CorruptBundle(format!("duplicate vocabulary token `{t}`")));
            }
        }
        Ok(Vocabulary { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Id of `token`, or the unknown id.
    pub fn id(&self, token: &str) -> usize {
        self.get(token).unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f32,
    pub seed: u64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig { dim: 100, window: 5, negatives: 5, epochs: 5, learning_rate: 0.025, seed: 42 }
    }
}

impl EmbeddingConfig {
    fn validate(&self) -> Result<(), FeatureError> {
        if self.dim == 0 || self.window == 0 || self.epochs == 0 || !(self.learning_rate > 0.0) {
            return Err(FeatureError::InvalidConfig(format!("{self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    MetadataText,
    FunctionTokens,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub vocab: Vocabulary,
    /// Row-major `vocab.len() × dim`.
    pub matrix: Vec<f32>,
    pub dim: usize,
    pub domain: Domain,
    pub config: EmbeddingConfig,
}

#[inline]
fn sigmoid(x: f32) -> f32 {
    if x > 8.0 {
        1.0
    } else if x < -8.0 {
        0.0
    } else {
        1.0 / (1.0 + (-x).exp())
    }
}

/// Trains skip-gram vectors. Single-threaded, so one seed gives one matrix.
pub fn train_embedding(corpus: &[Vec<String>], domain: Domain, config: EmbeddingConfig) -> Result<EmbeddingModel, FeatureError> {
    config.validate()?;
    let total_tokens: usize = corpus.iter().map(Vec::len).sum();
    if total_tokens == 0 {
        return Err(FeatureError::EmptyCorpus);
    }
    let vocab = Vocabulary::build(corpus.iter().flatten().map(String::as_str));
    let sentences: Vec<Vec<usize>> = corpus.iter().map(|s| s.iter().map(|t| vocab.id(t)).collect()).collect();

    let n = vocab.len();
    let d = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut input: Vec<f32> = (0..n * d).map(|_| (rng.random::<f32>() - 0.5) / d as f32).collect();
    let mut output = vec![0f32; n * d];

    // unigram^0.75 noise distribution
    let mut freq = vec![0f64; n];
    for s in &sentences {
        for &t in s {
            freq[t] += 1.0;
        }
    }
    let weights: Vec<f64> = freq.iter().map(|f| f.powf(0.75)).collect();
    let total: f64 = weights.iter().sum();
    let table_len = NOISE_TABLE_SIZE.min(total_tokens * 64).max(n);
    let mut noise = Vec::with_capacity(table_len);
    for (id, w) in weights.iter().enumerate() {
        let slots = (w / total * table_len as f64).round() as usize;
        noise.extend(std::iter::repeat_n(id, slots));
    }
    if noise.is_empty() {
        noise.push(1.min(n - 1));
    }

    let steps_total = (total_tokens * config.epochs) as f32;
    let mut step = 0f32;
    let mut grad = vec![0f32; d];
    for _ in 0..config.epochs {
        for sentence in &sentences {
            for (pos, &center) in sentence.iter().enumerate() {
                let lr = (config.learning_rate * (1.0 - step / steps_total)).max(config.learning_rate * 1e-4);
                step += 1.0;
                let lo = pos.saturating_sub(config.window);
                let hi = (pos + config.window + 1).min(sentence.len());
                for ctx_pos in lo..hi {
                    if ctx_pos == pos {
                        continue;
                    }
                    let context = sentence[ctx_pos];
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    let in_row = context * d;
                    for k in 0..=config.negatives {
                        let (target, label) = if k == 0 {
                            (center, 1.0)
                        } else {
                            let t = noise[rng.random_range(0..noise.len())];
                            if t == center {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let out_row = target * d;
                        let dot: f32 = (0..d).map(|j| input[in_row + j] * output[out_row + j]).sum();
                        let g = (label - sigmoid(dot)) * lr;
                        for j in 0..d {
                            grad[j] += g * output[out_row + j];
                            output[out_row + j] += g * input[in_row + j];
                        }
                    }
                    for j in 0..d {
                        input[in_row + j] += grad[j];
                    }
                }
            }
        }
    }
    // the unknown token never occurs in training; keep it neutral
    input[..d].iter_mut().for_each(|v| *v = 0.0);
    Ok(EmbeddingModel { vocab, matrix: input, dim: d, domain, config })
}

impl EmbeddingModel {
    pub fn row(&self, id: usize) -> &[f32] {
        &self.matrix[id * self.dim..(id + 1) * self.dim]
    }

    /// Vector of a token, or the unknown row.
    pub fn vector(&self, token: &str) -> &[f32] {
        self.row(self.vocab.id(token))
    }

    /// Mean of the token rows; zero vector for no tokens.
    pub fn embed_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<f64> {
        let mut acc = vec![0f64; self.dim];
        if tokens.is_empty() {
            return acc;
        }
        for t in tokens {
            for (a, &v) in acc.iter_mut().zip(self.vector(t.as_ref())) {
                *a += v as f64;
            }
        }
        let n = tokens.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }

    pub fn cosine(&self, a: &str, b: &str) -> f64 {
        let (x, y) = (self.vector(a), self.vector(b));
        let dot: f64 = x.iter().zip(y).map(|(p, q)| *p as f64 * *q as f64).sum();
        let nx: f64 = x.iter().map(|v| (*v as f64).powi(2)).sum::<f64>().sqrt();
        let ny: f64 = y.iter().map(|v| (*v as f64).powi(2)).sum::<f64>().sqrt();
        if nx == 0.0 || ny == 0.0 {
            0.0
        } else {
            dot / (nx * ny)
        }
    }

    /// Writes `<stem>.vocab`, `<stem>.matrix` and `<stem>.json` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<(), FeatureError> {
        let mut vocab = String::new();
        for t in self.vocab.tokens() {
            vocab.push_str(t);
            vocab.push('\n');
        }
        fs::write(dir.join(format!("{stem}.vocab")), vocab)?;
        let mut bin = Vec::with_capacity(16 + self.matrix.len() * 4);
        bin.extend_from_slice(MATRIX_MAGIC);
        bin.extend_from_slice(&(self.vocab.len() as u32).to_le_bytes());
        bin.extend_from_slice(&(self.dim as u32).to_le_bytes());
        for v in &self.matrix {
            bin.extend_from_slice(&v.to_le_bytes());
        }
        fs::File::create(dir.join(format!("{stem}.matrix")))?.write_all(&bin)?;
        let meta = serde_json::json!({ "domain": self.domain, "config": self.config });
        fs::write(dir.join(format!("{stem}.json")), serde_json::to_vec_pretty(&meta)?)?;
        Ok(())
    }

    pub fn load(dir: &Path, stem: &str) -> Result<EmbeddingModel, FeatureError> {
        let tokens: Vec<String> = fs::read_to_string(dir.join(format!("{stem}.vocab")))?.lines().map(str::to_string).collect();
        let vocab = Vocabulary::from_tokens(tokens)?;
        let mut bin = Vec::new();
        fs::File::open(dir.join(format!("{stem}.matrix")))?.read_to_end(&mut bin)?;
        if bin.len() < 16 || &bin[..8] != MATRIX_MAGIC {
            return Err(FeatureError::CorruptBundle(format!("{stem}.matrix: bad header")));
        }
        let rows = u32::from_le_bytes(bin[8..12].try_into().unwrap()) as usize;
        let dim = u32::from_le_bytes(bin[12..16].try_into().unwrap()) as usize;
        if rows != vocab.len() || bin.len() != 16 + rows * dim * 4 {
            return Err(FeatureError::CorruptBundle(format!("{stem}.matrix: size does not match vocabulary")));
        }
        let matrix: Vec<f32> = bin[16..].chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(FeatureError::CorruptBundle(format!("{stem}.matrix: non-finite entry")));
        }
        #[derive(Deserialize)]
        struct Meta {
            domain: Domain,
            config: EmbeddingConfig,
        }
        let meta: Meta = serde_json::from_slice(&fs::read(dir.join(format!("{stem}.json")))?)?;
        Ok(EmbeddingModel { vocab, matrix, dim, domain: meta.domain, config: meta.config })
    }
}
