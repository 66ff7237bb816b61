//! Expected predictions under missing features.
//!
//! For a naive Bayes distribution the expectation of its own classifier over
//! the missing features is just `P(C | y)`, which only touches the observed
//! features. [`brute_force_expectation`] computes the same kind of quantity
//! for an arbitrary classifier by enumerating completions.

use crate::error::{check_len, Error, Result};
use crate::math::softmax;
use crate::model::{NaiveBayes, PartialObservation};

/// Largest number of missing features [`brute_force_expectation`] accepts.
pub const MAX_ENUMERATED_MISSING: usize = 20;

/// `P(C | y)` in time linear in `|y| + K`.
pub fn expected_prediction(nb: &NaiveBayes, y: &PartialObservation) -> Result<Vec<f64>> {
    Ok(softmax(&nb.log_joint_partial(y)?))
}

/// `sum_m f(y, m) P(m | y)` by enumerating every completion `m` of the
/// missing features.
pub fn brute_force_expectation<F>(f: F, p: &NaiveBayes, y: &PartialObservation) -> Result<Vec<f64>>
where
    F: Fn(&[u8]) -> Vec<f64>,
{
    let n = p.num_features();
    y.check(n)?;
    let missing = y.missing(n);
    if missing.len() > MAX_ENUMERATED_MISSING {
        return Err(Error::TooLarge {
            what: "brute-force expectation",
            size: missing.len(),
            limit: MAX_ENUMERATED_MISSING,
        });
    }
    let log_py = p.log_marginal(y)?;
    let mut x = vec![0u8; n];
    for (i, b) in y.iter() {
        x[i] = b;
    }
    let mut acc: Option<Vec<f64>> = None;
    for mask in 0u64..(1u64 << missing.len()) {
        for (j, &i) in missing.iter().enumerate() {
            x[i] = ((mask >> j) & 1) as u8;
        }
        let weight = (p.log_marginal(&PartialObservation::from_total(&x))? - log_py).exp();
        let value = f(&x);
        match acc.as_mut() {
            None => acc = Some(value.iter().map(|v| v * weight).collect()),
            Some(a) => {
                check_len(a.len(), value.len())?;
                for (a, v) in a.iter_mut().zip(&value) {
                    *a += v * weight;
                }
            }
        }
    }
    Ok(acc.unwrap_or_default())
}

/// Expected linear score `w0 + sum_i w_i x_i` when every missing feature is
/// an independent Bernoulli with mean `means[i]`. This is exactly the score
/// obtained by mean imputation.
pub fn linear_expected_prediction(
    weights: &[f64],
    means: &[f64],
    y: &PartialObservation,
) -> Result<f64> {
    check_len(means.len() + 1, weights.len())?;
    y.check(means.len())?;
    if let Some(&m) = means.iter().find(|&&m| !(0.0..=1.0).contains(&m)) {
        return Err(Error::Domain(format!("mean {m} outside [0, 1]")));
    }
    Ok(weights[0]
        + means
            .iter()
            .enumerate()
            .map(|(i, &mu)| {
                let x = y.get(i).map_or(mu, f64::from);
                weights[i + 1] * x
            })
            .sum::<f64>())
}
