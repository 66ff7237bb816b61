//! Classifier, distribution, observation and dataset types.
//!
//! Probabilities are stored in linear space. Every inference routine works
//! with log-probabilities internally so that models with hundreds of
//! features do not underflow.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::math::{log_sum_exp, sigmoid, softmax};

/// A (multinomial) logistic regression classifier.
///
/// Column 0 of every weight row is the bias. A binary model stores a single
/// row whose score is the log-odds of class 1 against class 0; a model with
/// `K > 2` classes stores `K` rows and predicts with a softmax.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticRegression {
    num_features: usize,
    num_classes: usize,
    weights: Vec<Vec<f64>>,
}

impl LogisticRegression {
    pub fn new(num_classes: usize, weights: Vec<Vec<f64>>) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::Domain(format!(
                "need at least 2 classes, got {num_classes}"
            )));
        }
        let rows = if num_classes == 2 { 1 } else { num_classes };
        check_len(rows, weights.len())?;
        let width = weights[0].len();
        if width < 2 {
            return Err(Error::Domain("need at least one feature".into()));
        }
        for row in &weights {
            check_len(width, row.len())?;
            if row.iter().any(|w| !w.is_finite()) {
                return Err(Error::Domain("weights must be finite".into()));
            }
        }
        Ok(Self {
            num_features: width - 1,
            num_classes,
            weights,
        })
    }

    /// Binary model from `(w0, w1, .., wn)`.
    pub fn binary(weights: Vec<f64>) -> Result<Self> {
        Self::new(2, vec![weights])
    }

    pub fn zeros(num_features: usize, num_classes: usize) -> Result<Self> {
        let rows = if num_classes == 2 { 1 } else { num_classes };
        Self::new(num_classes, vec![vec![0.0; num_features + 1]; rows])
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn is_binary(&self) -> bool {
        self.num_classes == 2
    }

    /// Stored weight rows (one row for binary models).
    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// One weight row per class. Binary models get an all-zero row for
    /// class 0 in front of the stored row.
    pub fn class_weights(&self) -> Vec<Vec<f64>> {
        if self.is_binary() {
            vec![vec![0.0; self.num_features + 1], self.weights[0].clone()]
        } else {
            self.weights.clone()
        }
    }

    /// Per-class linear scores `W_k . (1, x)`.
    pub fn scores<T: Copy + Into<f64>>(&self, x: &[T]) -> Result<Vec<f64>> {
        check_len(self.num_features, x.len())?;
        let dot = |row: &[f64]| {
            row[0]
                + row[1..]
                    .iter()
                    .zip(x)
                    .map(|(w, &v)| w * v.into())
                    .sum::<f64>()
        };
        Ok(if self.is_binary() {
            vec![0.0, dot(&self.weights[0])]
        } else {
            self.weights.iter().map(|r| dot(r)).collect()
        })
    }

    /// Class distribution for a total input. Fractional inputs are accepted
    /// so that imputed vectors can be scored.
    pub fn predict<T: Copy + Into<f64>>(&self, x: &[T]) -> Result<Vec<f64>> {
        let scores = self.scores(x)?;
        Ok(if self.is_binary() {
            vec![sigmoid(-scores[1]), sigmoid(scores[1])]
        } else {
            softmax(&scores)
        })
    }
}

/// A naive Bayes distribution over binary features and a class variable.
///
/// `cond[k][i]` is `P(X_i = 1 | C = k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NaiveBayes {
    prior: Vec<f64>,
    cond: Vec<Vec<f64>>,
}

/// One broken probability invariant found by [`NaiveBayes::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

impl NaiveBayes {
    /// Builds a model after checking shapes. Probability ranges are checked
    /// separately by [`validate`](Self::validate).
    pub fn new(prior: Vec<f64>, cond: Vec<Vec<f64>>) -> Result<Self> {
        if prior.len() < 2 {
            return Err(Error::Domain("need at least 2 classes".into()));
        }
        check_len(prior.len(), cond.len())?;
        let n = cond[0].len();
        if n == 0 {
            return Err(Error::Domain("need at least one feature".into()));
        }
        for row in &cond {
            check_len(n, row.len())?;
        }
        Ok(Self { prior, cond })
    }

    /// Binary model from `P(c)` and per-feature `P(x_i | c)`, `P(x_i | c̄)`.
    pub fn binary(p_positive: f64, cond_positive: Vec<f64>, cond_negative: Vec<f64>) -> Result<Self> {
        Self::new(
            vec![1.0 - p_positive, p_positive],
            vec![cond_negative, cond_positive],
        )
    }

    /// Two-class model whose class-conditionals are identical, i.e. a fully
    /// factorized feature distribution with Bernoulli means `means`.
    pub fn independent(means: &[f64]) -> Result<Self> {
        Self::new(vec![0.5, 0.5], vec![means.to_vec(), means.to_vec()])
    }

    pub fn num_features(&self) -> usize {
        self.cond[0].len()
    }

    pub fn num_classes(&self) -> usize {
        self.prior.len()
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn cond(&self) -> &[Vec<f64>] {
        &self.cond
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let sum: f64 = self.prior.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            out.push(Violation {
                location: "prior".into(),
                message: format!("prior sums to {sum}"),
            });
        }
        let mut check = |location: String, p: f64| {
            if !(0.0..=1.0).contains(&p) {
                out.push(Violation {
                    location,
                    message: format!("{p} is not a probability"),
                });
            } else if p == 0.0 || p == 1.0 {
                out.push(Violation {
                    location,
                    message: "parameter at closed boundary".into(),
                });
            }
        };
        for (k, &p) in self.prior.iter().enumerate() {
            check(format!("prior[{k}]"), p);
        }
        for (k, row) in self.cond.iter().enumerate() {
            for (i, &p) in row.iter().enumerate() {
                check(format!("cond[{k}][{i}]"), p);
            }
        }
        out
    }

    fn log_cond(&self, k: usize, i: usize, bit: u8) -> f64 {
        let p = self.cond[k][i];
        if bit == 0 {
            (-p).ln_1p()
        } else {
            p.ln()
        }
    }

    /// `log P(y, c_k)` for every class, over the observed features only.
    pub fn log_joint_partial(&self, y: &PartialObservation) -> Result<Vec<f64>> {
        y.check(self.num_features())?;
        Ok((0..self.num_classes())
            .map(|k| {
                self.prior[k].ln()
                    + y.iter().map(|(i, b)| self.log_cond(k, i, b)).sum::<f64>()
            })
            .collect())
    }

    /// `log P(x, c_k)` for every class.
    pub fn log_joint(&self, x: &[u8]) -> Result<Vec<f64>> {
        check_len(self.num_features(), x.len())?;
        Ok((0..self.num_classes())
            .map(|k| {
                self.prior[k].ln()
                    + x.iter()
                        .enumerate()
                        .map(|(i, &b)| self.log_cond(k, i, b))
                        .sum::<f64>()
            })
            .collect())
    }

    /// `P(C | x)` for a total input.
    pub fn posterior(&self, x: &[u8]) -> Result<Vec<f64>> {
        Ok(softmax(&self.log_joint(x)?))
    }

    pub fn log_marginal(&self, y: &PartialObservation) -> Result<f64> {
        Ok(log_sum_exp(&self.log_joint_partial(y)?))
    }

    /// `P(y) = sum_k P(c_k) prod_{i in y} P(y_i | c_k)`.
    pub fn marginal(&self, y: &PartialObservation) -> Result<f64> {
        Ok(self.log_marginal(y)?.exp())
    }
}

/// An assignment of bits to a subset of the features.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct PartialObservation {
    assignments: BTreeMap<usize, u8>,
}

impl PartialObservation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_total(x: &[u8]) -> Self {
        x.iter().copied().enumerate().collect()
    }

    pub fn insert(&mut self, index: usize, bit: u8) {
        self.assignments.insert(index, (bit != 0) as u8);
    }

    pub fn remove(&mut self, index: usize) -> Option<u8> {
        self.assignments.remove(&index)
    }

    pub fn with(&self, index: usize, bit: u8) -> Self {
        let mut out = self.clone();
        out.insert(index, bit);
        out
    }

    pub fn without(&self, index: usize) -> Self {
        let mut out = self.clone();
        out.remove(index);
        out
    }

    pub fn get(&self, index: usize) -> Option<u8> {
        self.assignments.get(&index).copied()
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Observed `(index, bit)` pairs in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u8)> + '_ {
        self.assignments.iter().map(|(&i, &b)| (i, b))
    }

    /// Indices in `0..n` that are not observed.
    pub fn missing(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|i| !self.assignments.contains_key(i)).collect()
    }

    pub fn is_total(&self, n: usize) -> bool {
        self.len() == n && self.check(n).is_ok()
    }

    /// Errors if any index is `>= num_features`.
    pub fn check(&self, num_features: usize) -> Result<()> {
        match self.assignments.keys().next_back() {
            Some(&index) if index >= num_features => Err(Error::IndexOutOfRange {
                index,
                num_features,
            }),
            _ => Ok(()),
        }
    }
}

impl FromIterator<(usize, u8)> for PartialObservation {
    fn from_iter<I: IntoIterator<Item = (usize, u8)>>(iter: I) -> Self {
        let mut out = Self::new();
        for (i, b) in iter {
            out.insert(i, b);
        }
        out
    }
}

/// Rows of bits with optional class labels and per-row weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryDataset {
    num_features: usize,
    rows: Vec<Vec<u8>>,
    labels: Option<Vec<usize>>,
    weights: Option<Vec<f64>>,
}

impl BinaryDataset {
    pub fn new(num_features: usize, rows: Vec<Vec<u8>>) -> Result<Self> {
        for row in &rows {
            check_len(num_features, row.len())?;
            if row.iter().any(|&b| b > 1) {
                return Err(Error::Domain("dataset rows must be 0/1".into()));
            }
        }
        Ok(Self {
            num_features,
            rows,
            labels: None,
            weights: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        check_len(self.rows.len(), labels.len())?;
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        check_len(self.rows.len(), weights.len())?;
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::Domain("row weights must be finite and >= 0".into()));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Largest label + 1, or 0 without labels.
    pub fn label_count(&self) -> usize {
        self.labels
            .as_ref()
            .and_then(|l| l.iter().max())
            .map_or(0, |m| m + 1)
    }

    /// Distinct rows with their multiplicities `n(x)`, in lexicographic order.
    pub fn counts(&self) -> Vec<(Vec<u8>, usize)> {
        let mut map: BTreeMap<&[u8], usize> = BTreeMap::new();
        for row in &self.rows {
            *map.entry(row.as_slice()).or_default() += 1;
        }
        map.into_iter().map(|(r, c)| (r.to_vec(), c)).collect()
    }
}
