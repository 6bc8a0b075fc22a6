//! CART trees (Gini impurity) and random forests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::codec::{Decoder, Encoder};
use super::ClassifierError;

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    /// Fraction of malicious training samples reaching the leaf.
    Leaf(f64),
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
    /// Features examined per split; `None` means all.
    pub max_features: Option<usize>,
}

fn gini(pos: f64, n: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    let p = pos / n;
    2.0 * p * (1.0 - p)
}

struct Grower<'a> {
    x: &'a [Vec<f64>],
    y: &'a [u8],
    params: &'a TreeParams,
    rng: Option<ChaCha8Rng>,
    nodes: Vec<TreeNode>,
}

impl Grower<'_> {
    fn leaf(&mut self, idx: &[usize]) -> usize {
        let pos = idx.iter().filter(|&&i| self.y[i] == 1).count();
        self.nodes.push(TreeNode::Leaf(pos as f64 / idx.len().max(1) as f64));
        self.nodes.len() - 1
    }

    /// Best (feature, threshold) by weighted Gini; ties keep the first
    /// candidate in feature then threshold order.
    fn best_split(&mut self, idx: &[usize]) -> Option<(usize, f64)> {
        let n_features = self.x[0].len();
        let mut features: Vec<usize> = (0..n_features).collect();
        if let (Some(k), Some(rng)) = (self.params.max_features, self.rng.as_mut()) {
            features.shuffle(rng);
            features.truncate(k.max(1));
            features.sort_unstable();
        }
        let n = idx.len() as f64;
        let total_pos = idx.iter().filter(|&&i| self.y[i] == 1).count() as f64;
        let parent = gini(total_pos, n);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order: Vec<usize> = idx.to_vec();
        for f in features {
            order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let mut left_pos = 0.0;
            for k in 0..order.len() - 1 {
                left_pos += f64::from(self.y[order[k]]);
                let (lo, hi) = (self.x[order[k]][f], self.x[order[k + 1]][f]);
                if lo == hi {
                    continue;
                }
                let nl = (k + 1) as f64;
                let nr = n - nl;
                let impurity = (nl * gini(left_pos, nl) + nr * gini(total_pos - left_pos, nr)) / n;
                if impurity < parent - 1e-12 && best.is_none_or(|(b, _, _)| impurity < b - 1e-12) {
                    best = Some((impurity, f, lo + (hi - lo) / 2.0));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, idx: &[usize], depth: usize) -> usize {
        let pos = idx.iter().filter(|&&i| self.y[i] == 1).count();
        if depth >= self.params.max_depth || idx.len() < self.params.min_samples_split || pos == 0 || pos == idx.len() {
            return self.leaf(idx);
        }
        let Some((feature, threshold)) = self.best_split(idx) else {
            return self.leaf(idx);
        };
        let (left, right): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.x[i][feature] <= threshold);
        let me = self.nodes.len();
        self.nodes.push(TreeNode::Leaf(0.0));
        let l = self.grow(&left, depth + 1);
        let r = self.grow(&right, depth + 1);
        self.nodes[me] = TreeNode::Split { feature, threshold, left: l, right: r };
        me
    }
}

impl Tree {
    pub fn fit(x: &[Vec<f64>], y: &[u8], idx: &[usize], params: &TreeParams, seed: Option<u64>) -> Tree {
        let mut g = Grower { x, y, params, rng: seed.map(ChaCha8Rng::seed_from_u64), nodes: Vec::new() };
        g.grow(idx, 0);
        Tree { nodes: g.nodes }
    }

    pub fn score(&self, v: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                TreeNode::Leaf(p) => return p,
                TreeNode::Split { feature, threshold, left, right } => {
                    at = if v[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, at: usize) -> usize {
            match t.nodes[at] {
                TreeNode::Leaf(_) => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(t, left).max(walk(t, right)),
            }
        }
        walk(self, 0)
    }

    pub fn encode(&self, e: &mut Encoder) {
        e.usize(self.nodes.len());
        for n in &self.nodes {
            match *n {
                TreeNode::Leaf(p) => {
                    e.u8(0);
                    e.f64(p);
                }
                TreeNode::Split { feature, threshold, left, right } => {
                    e.u8(1);
                    e.usize(feature);
                    e.f64(threshold);
                    e.usize(left);
                    e.usize(right);
                }
            }
        }
    }

    pub fn decode(d: &mut Decoder, n_features: usize) -> Result<Tree, ClassifierError> {
        let len = d.usize()?;
        let mut nodes = Vec::new();
        for _ in 0..len {
            nodes.push(match d.u8()? {
                0 => TreeNode::Leaf(d.f64()?),
                1 => TreeNode::Split { feature: d.usize()?, threshold: d.f64()?, left: d.usize()?, right: d.usize()? },
                t => return Err(ClassifierError::CorruptModel(format!("tree node tag {t}"))),
            });
        }
        let valid = !nodes.is_empty()
            && nodes.iter().enumerate().all(|(i, n)| match *n {
                TreeNode::Leaf(_) => true,
                TreeNode::Split { feature, left, right, .. } => feature < n_features && left > i && right > i && left < len && right < len,
            });
        if !valid {
            return Err(ClassifierError::CorruptModel("tree structure".into()));
        }
        Ok(Tree { nodes })
    }
}

/// Bagged trees with per-split feature subsampling (√p features).
pub fn fit_forest(x: &[Vec<f64>], y: &[u8], n_trees: usize, max_depth: usize, min_samples_split: usize, seed: u64) -> Vec<Tree> {
    let n = x.len();
    let p = x[0].len();
    let params = TreeParams { max_depth, min_samples_split, max_features: Some(((p as f64).sqrt().round() as usize).max(1)) };
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..n_trees).map(|_| master.random()).collect();
    seeds
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            Tree::fit(x, y, &sample, &params, Some(rng.random()))
        })
        .collect()
}
