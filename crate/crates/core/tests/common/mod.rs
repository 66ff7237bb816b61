#![allow(dead_code)]

use nacl::{BinaryDataset, LogisticRegression, NaiveBayes, PartialObservation};
use rand::Rng;

pub fn toy_lr() -> LogisticRegression {
    LogisticRegression::binary(vec![-1.16, 2.23, -0.20]).unwrap()
}

pub fn p1() -> NaiveBayes {
    NaiveBayes::binary(0.5, vec![0.8, 0.45], vec![0.3, 0.5]).unwrap()
}

pub fn p2() -> NaiveBayes {
    NaiveBayes::binary(0.36, vec![0.6, 0.9], vec![0.14, 0.92]).unwrap()
}

/// LR with weights drawn from `[-scale, scale]`.
pub fn random_lr<R: Rng>(rng: &mut R, n: usize, k: usize, scale: f64) -> LogisticRegression {
    let rows = if k == 2 { 1 } else { k };
    let weights = (0..rows)
        .map(|_| (0..=n).map(|_| rng.random_range(-scale..scale)).collect())
        .collect();
    LogisticRegression::new(k, weights).unwrap()
}

/// NB with class-conditionals in `[lo, 1 - lo]` and a prior bounded away
/// from zero.
pub fn random_nb<R: Rng>(rng: &mut R, n: usize, k: usize, lo: f64) -> NaiveBayes {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let prior = raw.iter().map(|p| p / total).collect();
    let cond = (0..k)
        .map(|_| (0..n).map(|_| rng.random_range(lo..1.0 - lo)).collect())
        .collect();
    NaiveBayes::new(prior, cond).unwrap()
}

pub fn random_bits<R: Rng>(rng: &mut R, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.random_bool(0.5) as u8).collect()
}

/// Each feature of `x` kept with probability `keep`.
pub fn random_partial<R: Rng>(rng: &mut R, n: usize, keep: f64) -> PartialObservation {
    let mut y = PartialObservation::new();
    for i in 0..n {
        if rng.random_bool(keep) {
            y.insert(i, rng.random_bool(0.5) as u8);
        }
    }
    y
}

/// Samples labelled rows from a naive Bayes distribution.
pub fn sample_nb<R: Rng>(rng: &mut R, nb: &NaiveBayes, rows: usize) -> BinaryDataset {
    let mut data = Vec::with_capacity(rows);
    let mut labels = Vec::with_capacity(rows);
    for _ in 0..rows {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut c = nb.num_classes() - 1;
        for (k, &p) in nb.prior().iter().enumerate() {
            acc += p;
            if u < acc {
                c = k;
                break;
            }
        }
        data.push(nb.cond()[c].iter().map(|&p| rng.random_bool(p) as u8).collect());
        labels.push(c);
    }
    BinaryDataset::new(nb.num_features(), data)
        .unwrap()
        .with_labels(labels)
        .unwrap()
}
