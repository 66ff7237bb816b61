//! Full-batch logistic regression training.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::log_sum_exp;
use crate::model::{BinaryDataset, LogisticRegression};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    /// Coefficient of `0.5 * ||w||^2` over non-bias weights.
    pub l2: f64,
    pub max_epochs: usize,
    /// Gradient norm below which training stops.
    pub tol: f64,
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            l2: 1e-4,
            max_epochs: 20_000,
            tol: 1e-6,
            seed: 0,
        }
    }
}

struct Problem<'a> {
    d: &'a BinaryDataset,
    labels: &'a [usize],
    rows: usize,
    k: usize,
    stride: usize,
    l2: f64,
    total_weight: f64,
}

impl Problem<'_> {
    fn weight(&self, j: usize) -> f64 {
        self.d.weights().map_or(1.0, |w| w[j])
    }

    fn scores(&self, theta: &[f64], x: &[u8]) -> Vec<f64> {
        let mut s = vec![0.0; self.k];
        for r in 0..self.rows {
            let w = &theta[r * self.stride..(r + 1) * self.stride];
            let v = w[0] + x.iter().zip(&w[1..]).filter(|(&b, _)| b == 1).map(|(_, w)| w).sum::<f64>();
            if self.rows == 1 {
                s[1] = v;
            } else {
                s[r] = v;
            }
        }
        s
    }

    fn penalty(&self, theta: &[f64]) -> f64 {
        (0..self.rows)
            .map(|r| theta[r * self.stride + 1..(r + 1) * self.stride].iter().map(|w| w * w).sum::<f64>())
            .sum::<f64>()
            * 0.5
            * self.l2
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let loss: f64 = self
            .d
            .rows()
            .iter()
            .enumerate()
            .map(|(j, x)| {
                let s = self.scores(theta, x);
                self.weight(j) * (log_sum_exp(&s) - s[self.labels[j]])
            })
            .sum();
        loss / self.total_weight + self.penalty(theta)
    }

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; theta.len()];
        for (j, x) in self.d.rows().iter().enumerate() {
            let s = self.scores(theta, x);
            let lse = log_sum_exp(&s);
            let wj = self.weight(j) / self.total_weight;
            for r in 0..self.rows {
                let class = if self.rows == 1 { 1 } else { r };
                let resid = wj * ((s[class] - lse).exp() - (self.labels[j] == class) as u8 as f64);
                let base = r * self.stride;
                g[base] += resid;
                for (i, &b) in x.iter().enumerate() {
                    if b == 1 {
                        g[base + 1 + i] += resid;
                    }
                }
            }
        }
        for r in 0..self.rows {
            for i in 1..self.stride {
                let p = r * self.stride + i;
                g[p] += self.l2 * theta[p];
            }
        }
        g
    }
}

fn setup<'a>(d: &'a BinaryDataset, l2: f64) -> Result<Problem<'a>> {
    let labels = d.labels().ok_or(Error::MissingLabels)?;
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(l2 >= 0.0) {
        return Err(Error::Domain(format!("l2 weight {l2} must be >= 0")));
    }
    let k = d.label_count().max(2);
    let mut present = vec![false; k];
    for &l in labels {
        present[l] = true;
    }
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(Error::Degenerate("training labels contain a single class".into()));
    }
    let total_weight = match d.weights() {
        Some(w) => w.iter().sum(),
        None => d.len() as f64,
    };
    if !(total_weight > 0.0) {
        return Err(Error::Degenerate("training weights sum to zero".into()));
    }
    Ok(Problem {
        d,
        labels,
        rows: if k == 2 { 1 } else { k },
        k,
        stride: d.num_features() + 1,
        l2,
        total_weight,
    })
}

fn unflatten(p: &Problem, theta: &[f64]) -> Result<LogisticRegression> {
    let rows = theta.chunks(p.stride).map(<[f64]>::to_vec).collect();
    LogisticRegression::new(p.k, rows)
}

/// Mean (weighted) negative log-likelihood plus the L2 penalty.
pub fn training_objective(lr: &LogisticRegression, d: &BinaryDataset, l2: f64) -> Result<f64> {
    let p = setup(d, l2)?;
    Ok(p.value(&lr.weights().concat()))
}

/// Gradient of [`training_objective`], laid out like `lr.weights()`
/// flattened row by row.
pub fn training_gradient(lr: &LogisticRegression, d: &BinaryDataset, l2: f64) -> Result<Vec<f64>> {
    let p = setup(d, l2)?;
    Ok(p.gradient(&lr.weights().concat()))
}

/// Deterministic full-batch gradient descent with Barzilai-Borwein step
/// proposals and Armijo backtracking.
pub fn train_lr(d: &BinaryDataset, opts: &TrainOptions) -> Result<LogisticRegression> {
    let p = setup(d, opts.l2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut theta: Vec<f64> = (0..p.rows * p.stride)
        .map(|_| (rng.random::<f64>() - 0.5) * 0.02)
        .collect();
    let mut f = p.value(&theta);
    let mut g = p.gradient(&theta);
    let mut step = 1.0;
    for epoch in 0..opts.max_epochs {
        let gnorm2: f64 = g.iter().map(|v| v * v).sum();
        if gnorm2.sqrt() < opts.tol {
            log::debug!("train_lr converged after {epoch} epochs");
            return unflatten(&p, &theta);
        }
        let mut t = step;
        let (next, f_next) = loop {
            let cand: Vec<f64> = theta.iter().zip(&g).map(|(a, b)| a - t * b).collect();
            let fc = p.value(&cand);
            if fc <= f - 1e-4 * t * gnorm2 {
                break (cand, fc);
            }
            t *= 0.5;
            if t < 1e-20 {
                log::warn!("train_lr line search stalled at epoch {epoch}");
                return unflatten(&p, &theta);
            }
        };
        let g_next = p.gradient(&next);
        let (mut sy, mut ss) = (0.0, 0.0);
        for j in 0..theta.len() {
            let s = next[j] - theta[j];
            sy += s * (g_next[j] - g[j]);
            ss += s * s;
        }
        step = if sy > 0.0 { (ss / sy).clamp(1e-6, 1e6) } else { t * 2.0 };
        theta = next;
        f = f_next;
        g = g_next;
    }
    log::warn!("train_lr hit the epoch cap of {}", opts.max_epochs);
    unflatten(&p, &theta)
}
