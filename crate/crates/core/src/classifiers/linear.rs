//! L2-regularized logistic regression and linear SVM.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Linear {
    pub fn decision(&self, v: &[f64]) -> f64 {
        self.weights.iter().zip(v).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }
}

/// Minimizes `½‖w‖² + C·Σ log(1 + exp(−yᵢ(w·xᵢ + b)))` with Newton steps;
/// the intercept is not penalized.
pub fn fit_logistic(x: &[Vec<f64>], y: &[u8], c: f64) -> Linear {
    let n = x.len();
    let p = x[0].len();
    let mut theta = DVector::<f64>::zeros(p + 1);
    let design = DMatrix::from_fn(n, p + 1, |i, j| if j < p { x[i][j] } else { 1.0 });
    let targets = DVector::from_fn(n, |i, _| f64::from(y[i]));
    let objective = |theta: &DVector<f64>| {
        let z = &design * theta;
        let loss: f64 = (0..n)
            .map(|i| {
                let m = if y[i] == 1 { z[i] } else { -z[i] };
                // log(1 + e^-m), stable
                if m > 0.0 { (-m).exp().ln_1p() } else { -m + m.exp().ln_1p() }
            })
            .sum();
        0.5 * theta.rows(0, p).norm_squared() + c * loss
    };
    let mut current = objective(&theta);
    for _ in 0..100 {
        let z = &design * &theta;
        let probs = z.map(sigmoid);
        let mut grad = design.transpose() * (&probs - &targets) * c;
        for j in 0..p {
            grad[j] += theta[j];
        }
        if grad.amax() < 1e-9 {
            break;
        }
        let weights = probs.map(|q| (q * (1.0 - q)).max(1e-12) * c);
        let weighted = DMatrix::from_fn(n, p + 1, |i, j| design[(i, j)] * weights[i]);
        let mut hessian = design.transpose() * weighted;
        for j in 0..p {
            hessian[(j, j)] += 1.0;
        }
        hessian[(p, p)] += 1e-9;
        let Some(chol) = hessian.cholesky() else { break };
        let step = chol.solve(&grad);
        // backtracking keeps the objective monotone
        let mut t = 1.0;
        let mut improved = false;
        while t > 1e-8 {
            let candidate = &theta - &step * t;
            let value = objective(&candidate);
            if value <= current {
                theta = candidate;
                improved = current - value > 1e-12 * current.abs().max(1.0);
                current = value;
                break;
            }
            t /= 2.0;
        }
        if !improved {
            break;
        }
    }
    Linear { weights: theta.rows(0, p).iter().copied().collect(), bias: theta[p] }
}

/// Dual coordinate descent for the hinge-loss SVM
/// `½‖w‖² + C·Σ max(0, 1 − yᵢ(w·xᵢ + b))`, with the bias folded in as a
/// constant feature.
pub fn fit_svm(x: &[Vec<f64>], y: &[u8], c: f64, seed: u64) -> Linear {
    let n = x.len();
    let p = x[0].len();
    let sign: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let q: Vec<f64> = x.iter().map(|r| r.iter().map(|v| v * v).sum::<f64>() + 1.0).collect();
    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; p + 1];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..2000 {
        order.shuffle(&mut rng);
        let mut max_violation: f64 = 0.0;
        for &i in &order {
            let margin = x[i].iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + w[p];
            let g = sign[i] * margin - 1.0;
            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == c {
                g.max(0.0)
            } else {
                g
            };
            max_violation = max_violation.max(pg.abs());
            if pg.abs() > 1e-12 {
                let old = alpha[i];
                alpha[i] = (old - g / q[i]).clamp(0.0, c);
                let delta = (alpha[i] - old) * sign[i];
                for (wj, xj) in w.iter_mut().zip(&x[i]) {
                    *wj += delta * xj;
                }
                w[p] += delta;
            }
        }
        if max_violation < 1e-6 {
            break;
        }
    }
    let bias = w[p];
    w.truncate(p);
    Linear { weights: w, bias }
}

/// Fits `P(y=1 | f) = 1 / (1 + exp(A·f + B))` to decision values with
/// Platt's smoothed targets, by Newton's method with backtracking.
pub fn fit_platt(decisions: &[f64], y: &[u8]) -> (f64, f64) {
    let n_pos = y.iter().filter(|&&l| l == 1).count() as f64;
    let n_neg = y.len() as f64 - n_pos;
    let hi = (n_pos + 1.0) / (n_pos + 2.0);
    let lo = 1.0 / (n_neg + 2.0);
    let t: Vec<f64> = y.iter().map(|&l| if l == 1 { hi } else { lo }).collect();
    let objective = |a: f64, b: f64| -> f64 {
        decisions
            .iter()
            .zip(&t)
            .map(|(f, ti)| {
                let z = f * a + b;
                if z >= 0.0 { ti * z + (-z).exp().ln_1p() } else { (ti - 1.0) * z + z.exp().ln_1p() }
            })
            .sum()
    };
    let (mut a, mut b) = (0.0, ((n_neg + 1.0) / (n_pos + 1.0)).ln());
    let mut value = objective(a, b);
    for _ in 0..100 {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (1e-12, 1e-12, 0.0, 0.0, 0.0);
        for (f, ti) in decisions.iter().zip(&t) {
            let p = sigmoid(-(f * a + b));
            let d2 = p * (1.0 - p);
            h11 += f * f * d2;
            h22 += d2;
            h21 += f * d2;
            let d1 = ti - p;
            g1 += f * d1;
            g2 += d1;
        }
        if g1.abs() < 1e-10 && g2.abs() < 1e-10 {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let mut step = 1.0;
        let mut moved = false;
        while step >= 1e-10 {
            let (na, nb) = (a + step * da, b + step * db);
            let nv = objective(na, nb);
            if nv < value + 1e-4 * step * (g1 * da + g2 * db) {
                a = na;
                b = nb;
                value = nv;
                moved = true;
                break;
            }
            step /= 2.0;
        }
        if !moved {
            break;
        }
    }
    (a, b)
}
