//! MCAR masking, metrics, and the missing-feature experiment runner.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{impute, Imputer};
use crate::error::{check_len, Error, Result};
use crate::expectation::expected_prediction;
use crate::math::argmax;
use crate::model::{BinaryDataset, LogisticRegression, NaiveBayes, PartialObservation};

/// Probabilities are floored here before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;

/// Drops each feature independently with probability `rate`.
pub fn mask_mcar<R: Rng + ?Sized>(x: &[u8], rate: f64, rng: &mut R) -> Result<PartialObservation> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::Domain(format!("missing rate {rate} outside [0, 1]")));
    }
    let mut y = PartialObservation::new();
    for (i, &b) in x.iter().enumerate() {
        if rng.random::<f64>() >= rate {
            y.insert(i, b);
        }
    }
    Ok(y)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Random stream for one test row of one repetition. Independent of the
/// order in which rows are processed.
pub fn row_rng(seed: u64, repetition: usize, row: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed ^ splitmix(repetition as u64)));
    rng.set_stream(row as u64);
    rng
}

/// `-sum_k p_ref[k] log p_pred[k]`, with `p_pred` floored at [`PROB_FLOOR`].
pub fn cross_entropy(p_ref: &[f64], p_pred: &[f64]) -> f64 {
    p_ref
        .iter()
        .zip(p_pred)
        .filter(|(&r, _)| r > 0.0)
        .map(|(&r, &q)| -r * q.max(PROB_FLOOR).ln())
        .sum()
}

pub fn entropy(p: &[f64]) -> f64 {
    cross_entropy(p, p)
}

pub fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}

/// Per-class F1 averaged with weights proportional to class support in
/// `truth`.
pub fn weighted_f1(predicted: &[usize], truth: &[usize], num_classes: usize) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let mut tp = vec![0usize; num_classes];
    let mut fp = vec![0usize; num_classes];
    let mut support = vec![0usize; num_classes];
    for (&p, &t) in predicted.iter().zip(truth) {
        support[t] += 1;
        if p == t {
            tp[p] += 1;
        } else if p < num_classes {
            fp[p] += 1;
        }
    }
    let mut total = 0.0;
    for k in 0..num_classes {
        if support[k] == 0 || tp[k] == 0 {
            continue;
        }
        let precision = tp[k] as f64 / (tp[k] + fp[k]) as f64;
        let recall = tp[k] as f64 / support[k] as f64;
        let f1 = 2.0 * precision * recall / (precision + recall);
        total += f1 * support[k] as f64;
    }
    total / truth.len() as f64
}

/// How a method turns a partial observation into a class distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictor {
    /// Expected prediction of the LR under a naive Bayes model that conforms
    /// with it. With nothing missing this is the LR's own output.
    Conformant(NaiveBayes),
    /// `P(C | y)` of a naive Bayes model that need not conform.
    Generative(NaiveBayes),
    /// Impute, then score with the LR.
    Impute(Imputer),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalMethod {
    pub name: String,
    pub predictor: Predictor,
}

impl EvalMethod {
    pub fn new(name: impl Into<String>, predictor: Predictor) -> Self {
        Self {
            name: name.into(),
            predictor,
        }
    }

    fn predict(&self, lr: &LogisticRegression, x: &[u8], y: &PartialObservation) -> Result<Vec<f64>> {
        match &self.predictor {
            Predictor::Conformant(_) if y.len() == x.len() => lr.predict(x),
            Predictor::Conformant(nb) | Predictor::Generative(nb) => expected_prediction(nb, y),
            Predictor::Impute(imp) => lr.predict(&impute(imp, y, x.len())?),
        }
    }

    fn check(&self, lr: &LogisticRegression) -> Result<()> {
        match &self.predictor {
            Predictor::Conformant(nb) | Predictor::Generative(nb) => {
                check_len(lr.num_features(), nb.num_features())?;
                check_len(lr.num_classes(), nb.num_classes())
            }
            Predictor::Impute(imp) => check_len(lr.num_features(), imp.fill().len()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    CrossEntropy,
    Accuracy,
    WeightedF1,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::CrossEntropy => "cross_entropy",
            Metric::Accuracy => "accuracy",
            Metric::WeightedF1 => "weighted_f1",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub lr: LogisticRegression,
    pub methods: Vec<EvalMethod>,
    pub rates: Vec<f64>,
    pub repetitions: usize,
    pub seed: u64,
    pub metrics: Vec<Metric>,
    /// Worker threads; `None` uses rayon's default pool.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub method: String,
    pub rate: f64,
    pub metric: Metric,
    pub mean: f64,
    pub stderr: f64,
    pub repetitions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn get(&self, method: &str, rate: f64, metric: Metric) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.rate == rate && r.metric == metric)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,rate,metric,mean,stderr,repetitions\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.method,
                r.rate,
                r.metric.name(),
                r.mean,
                r.stderr,
                r.repetitions
            )
            .unwrap();
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Mean of `metric` per rate (rows) and method (columns).
    pub fn summary_table(&self, metric: Metric) -> String {
        let mut methods: Vec<&str> = Vec::new();
        let mut rates: Vec<f64> = Vec::new();
        for r in self.rows.iter().filter(|r| r.metric == metric) {
            if !methods.contains(&r.method.as_str()) {
                methods.push(&r.method);
            }
            if !rates.contains(&r.rate) {
                rates.push(r.rate);
            }
        }
        let mut out = format!("{:<8}", "rate");
        for m in &methods {
            write!(out, "{m:>14}").unwrap();
        }
        out.push('\n');
        for &rate in &rates {
            write!(out, "{rate:<8}").unwrap();
            for m in &methods {
                match self.get(m, rate, metric) {
                    Some(r) => write!(out, "{:>14.6}", r.mean).unwrap(),
                    None => write!(out, "{:>14}", "-").unwrap(),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Per-row outcome: cross entropy and predicted label for each method.
type RowOutcome = Vec<(f64, usize)>;

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Masks every test row at every rate, for every repetition, and scores
/// each method against the LR's full-data predictions.
pub fn run_experiment(config: &ExperimentConfig, test: &BinaryDataset) -> Result<ExperimentReport> {
    let lr = &config.lr;
    check_len(lr.num_features(), test.num_features())?;
    for m in &config.methods {
        m.check(lr)?;
    }
    for &rate in &config.rates {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::Domain(format!("missing rate {rate} outside [0, 1]")));
        }
    }
    if config.repetitions == 0 {
        return Err(Error::Domain("need at least one repetition".into()));
    }
    let needs_labels = config.metrics.iter().any(|m| *m != Metric::CrossEntropy);
    let labels = test.labels();
    if needs_labels && labels.is_none() {
        return Err(Error::MissingLabels);
    }
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let references = test
        .rows()
        .iter()
        .map(|x| lr.predict(x))
        .collect::<Result<Vec<_>>>()?;

    let pool = match config.threads {
        Some(t) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Domain(e.to_string()))?,
        ),
        None => None,
    };
    let evaluate = |rate: f64, rep: usize| -> Result<Vec<RowOutcome>> {
        let run = || {
            test.rows()
                .par_iter()
                .enumerate()
                .map(|(j, x)| {
                    let mut rng = row_rng(config.seed, rep, j);
                    let y = mask_mcar(x, rate, &mut rng)?;
                    config
                        .methods
                        .iter()
                        .map(|m| {
                            let p = m.predict(lr, x, &y)?;
                            Ok((cross_entropy(&references[j], &p), argmax(&p)))
                        })
                        .collect::<Result<RowOutcome>>()
                })
                .collect::<Result<Vec<_>>>()
        };
        match &pool {
            Some(p) => p.install(run),
            None => run(),
        }
    };

    let k = lr.num_classes();
    let mut rows = Vec::new();
    for &rate in &config.rates {
        // per method, per metric, one value per repetition
        let mut samples = vec![vec![Vec::with_capacity(config.repetitions); config.metrics.len()]; config.methods.len()];
        for rep in 0..config.repetitions {
            let outcomes = evaluate(rate, rep)?;
            for (mi, per_metric) in samples.iter_mut().enumerate() {
                let predicted: Vec<usize> = outcomes.iter().map(|o| o[mi].1).collect();
                for (si, metric) in config.metrics.iter().enumerate() {
                    let value = match metric {
                        Metric::CrossEntropy => {
                            outcomes.iter().map(|o| o[mi].0).sum::<f64>() / outcomes.len() as f64
                        }
                        Metric::Accuracy => accuracy(&predicted, labels.unwrap()),
                        Metric::WeightedF1 => weighted_f1(&predicted, labels.unwrap(), k),
                    };
                    per_metric[si].push(value);
                }
            }
        }
        for (method, per_metric) in config.methods.iter().zip(&samples) {
            for (metric, values) in config.metrics.iter().zip(per_metric) {
                let (mean, stderr) = mean_and_stderr(values);
                rows.push(ReportRow {
                    method: method.name.clone(),
                    rate,
                    metric: *metric,
                    mean,
                    stderr,
                    repetitions: config.repetitions,
                });
            }
        }
    }
    Ok(ExperimentReport { rows })
}
