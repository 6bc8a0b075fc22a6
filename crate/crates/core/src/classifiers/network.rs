//! One-hidden-layer ReLU network with a sigmoid output.
//!
//! Trained full-batch on binary cross-entropy with Adam steps and a small
//! L2 penalty.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::linear::sigmoid;

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub inputs: usize,
    pub hidden: usize,
    /// `hidden × inputs`, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

const L2: f64 = 1e-4;

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    lr: f64,
}

impl Adam {
    fn new(n: usize, lr: f64) -> Adam {
        Adam { m: vec![0.0; n], v: vec![0.0; n], t: 0, lr }
    }

    fn step(&mut self, params: &mut [&mut f64], grads: &[f64]) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        self.t += 1;
        let c1 = 1.0 - B1.powi(self.t);
        let c2 = 1.0 - B2.powi(self.t);
        for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            self.m[k] = B1 * self.m[k] + (1.0 - B1) * g;
            self.v[k] = B2 * self.v[k] + (1.0 - B2) * g * g;
            **p -= self.lr * (self.m[k] / c1) / ((self.v[k] / c2).sqrt() + 1e-8);
        }
    }
}

impl Mlp {
    fn hidden_activations(&self, v: &[f64]) -> Vec<f64> {
        (0..self.hidden)
            .map(|h| {
                let row = &self.w1[h * self.inputs..(h + 1) * self.inputs];
                (row.iter().zip(v).map(|(w, x)| w * x).sum::<f64>() + self.b1[h]).max(0.0)
            })
            .collect()
    }

    pub fn score(&self, v: &[f64]) -> f64 {
        let a = self.hidden_activations(v);
        sigmoid(a.iter().zip(&self.w2).map(|(a, w)| a * w).sum::<f64>() + self.b2)
    }

    pub fn fit(x: &[Vec<f64>], y: &[u8], hidden: usize, epochs: usize, learning_rate: f64, seed: u64) -> Mlp {
        let n = x.len();
        let inputs = x[0].len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Glorot-uniform-like scale through a normal draw
        let s1 = Normal::new(0.0, (2.0 / (inputs + hidden) as f64).sqrt()).unwrap();
        let s2 = Normal::new(0.0, (2.0 / (hidden + 1) as f64).sqrt()).unwrap();
        let mut net = Mlp {
            inputs,
            hidden,
            w1: (0..hidden * inputs).map(|_| s1.sample(&mut rng)).collect(),
            b1: vec![0.0; hidden],
            w2: (0..hidden).map(|_| s2.sample(&mut rng)).collect(),
            b2: 0.0,
        };
        let total = hidden * inputs + hidden + hidden + 1;
        let mut adam = Adam::new(total, learning_rate);
        for _ in 0..epochs {
            let mut gw1 = vec![0.0; hidden * inputs];
            let mut gb1 = vec![0.0; hidden];
            let mut gw2 = vec![0.0; hidden];
            let mut gb2 = 0.0;
            for (row, &label) in x.iter().zip(y) {
                let a = net.hidden_activations(row);
                let out = sigmoid(a.iter().zip(&net.w2).map(|(a, w)| a * w).sum::<f64>() + net.b2);
                let delta = (out - f64::from(label)) / n as f64;
                gb2 += delta;
                for h in 0..hidden {
                    gw2[h] += delta * a[h];
                    if a[h] > 0.0 {
                        let dh = delta * net.w2[h];
                        gb1[h] += dh;
                        let g = &mut gw1[h * inputs..(h + 1) * inputs];
                        for (gj, xj) in g.iter_mut().zip(row) {
                            *gj += dh * xj;
                        }
                    }
                }
            }
            for (g, w) in gw1.iter_mut().zip(&net.w1) {
                *g += L2 * w / n as f64;
            }
            for (g, w) in gw2.iter_mut().zip(&net.w2) {
                *g += L2 * w / n as f64;
            }
            let grads: Vec<f64> = gw1.into_iter().chain(gb1).chain(gw2).chain(std::iter::once(gb2)).collect();
            let Mlp { w1, b1, w2, b2, .. } = &mut net;
            let mut params: Vec<&mut f64> = w1.iter_mut().chain(b1.iter_mut()).chain(w2.iter_mut()).chain(std::iter::once(b2)).collect();
            adam.step(&mut params, &grads);
        }
        net
    }
}
