//! Exact translations between naive Bayes and logistic regression.
//!
//! Every naive Bayes model induces exactly one logistic regression on total
//! inputs. Going the other way, a logistic regression plus one free
//! parameter per feature determines a unique naive Bayes model that
//! conforms with it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::math::{logit, sigmoid, softmax, softplus};
use crate::model::{LogisticRegression, NaiveBayes};

/// Parameters closer than this to 0 or 1 are rejected by [`nb_to_lr`].
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Largest feature count for exhaustive conformance checks.
pub const MAX_EXHAUSTIVE_FEATURES: usize = 20;

/// Class whose feature parameters are the free ones in [`lr_to_nb`]:
/// the positive class for binary models, class 0 otherwise.
pub fn reference_class(num_classes: usize) -> usize {
    if num_classes == 2 {
        1
    } else {
        0
    }
}

fn check_open(name: impl FnOnce() -> String, p: f64) -> Result<()> {
    if (BOUNDARY_TOL..=1.0 - BOUNDARY_TOL).contains(&p) {
        Ok(())
    } else {
        Err(Error::InfiniteWeight { name: name(), value: p })
    }
}

/// Logistic regression that agrees with `nb` on every total input.
///
/// Multiclass weights are returned in the gauge where class 0's row is zero.
pub fn nb_to_lr(nb: &NaiveBayes) -> Result<LogisticRegression> {
    for (k, &p) in nb.prior().iter().enumerate() {
        check_open(|| format!("prior[{k}]"), p)?;
    }
    for (k, row) in nb.cond().iter().enumerate() {
        for (i, &p) in row.iter().enumerate() {
            check_open(|| format!("cond[{k}][{i}]"), p)?;
        }
    }
    let n = nb.num_features();
    let prior = nb.prior();
    let cond = nb.cond();
    // log-odds of class k against class 0
    let row_against_zero = |k: usize| {
        let mut row = vec![0.0; n + 1];
        row[0] = prior[k].ln() - prior[0].ln();
        for i in 0..n {
            let (pk, p0) = (cond[k][i], cond[0][i]);
            let neg = (-pk).ln_1p() - (-p0).ln_1p();
            row[0] += neg;
            row[i + 1] = pk.ln() - p0.ln() - neg;
        }
        row
    };
    if nb.num_classes() == 2 {
        LogisticRegression::binary(row_against_zero(1))
    } else {
        let rows = (0..nb.num_classes())
            .map(|k| {
                if k == 0 {
                    vec![0.0; n + 1]
                } else {
                    row_against_zero(k)
                }
            })
            .collect();
        LogisticRegression::new(nb.num_classes(), rows)
    }
}

/// Relative weight rows `W_k - W_ref` for every class.
pub(crate) fn relative_weights(lr: &LogisticRegression, reference: usize) -> Vec<Vec<f64>> {
    let rows = lr.class_weights();
    rows.iter()
        .map(|r| r.iter().zip(&rows[reference]).map(|(a, b)| a - b).collect())
        .collect()
}

/// Conformant family parameterized by the reference class's feature
/// logits. Shared by [`lr_to_nb`] and the reduced NaCL optimizer.
pub(crate) struct ConformantFamily {
    pub reference: usize,
    /// `W_k - W_ref`, bias in column 0.
    pub delta: Vec<Vec<f64>>,
}

impl ConformantFamily {
    pub fn new(lr: &LogisticRegression) -> Self {
        let reference = reference_class(lr.num_classes());
        Self {
            reference,
            delta: relative_weights(lr, reference),
        }
    }

    pub fn num_classes(&self) -> usize {
        self.delta.len()
    }

    /// `P(x_i = 1 | c_k)` given the reference logit `z_i`.
    pub fn cond(&self, k: usize, i: usize, z: f64) -> f64 {
        if k == self.reference {
            sigmoid(z)
        } else {
            sigmoid(z + self.delta[k][i + 1])
        }
    }

    /// Unnormalized log prior `log P(c_k) / P(c_ref)`.
    pub fn log_prior_ratios(&self, z: &[f64]) -> Vec<f64> {
        (0..self.num_classes())
            .map(|k| {
                if k == self.reference {
                    return 0.0;
                }
                let d = &self.delta[k];
                d[0] + z
                    .iter()
                    .enumerate()
                    .map(|(i, &zi)| softplus(zi + d[i + 1]) - softplus(zi))
                    .sum::<f64>()
            })
            .collect()
    }

    pub fn model(&self, z: &[f64]) -> Result<NaiveBayes> {
        let prior = softmax(&self.log_prior_ratios(z));
        let cond = (0..self.num_classes())
            .map(|k| z.iter().enumerate().map(|(i, &zi)| self.cond(k, i, zi)).collect())
            .collect();
        NaiveBayes::new(prior, cond)
    }
}

/// The unique naive Bayes model conforming with `lr` whose reference-class
/// feature probabilities equal `theta`. The reference class is the positive
/// class for binary models and class 0 for multiclass ones.
pub fn lr_to_nb(lr: &LogisticRegression, theta: &[f64]) -> Result<NaiveBayes> {
    check_len(lr.num_features(), theta.len())?;
    if let Some(&t) = theta.iter().find(|&&t| !(t > 0.0 && t < 1.0)) {
        return Err(Error::Domain(format!("theta entry {t} outside (0, 1)")));
    }
    let family = ConformantFamily::new(lr);
    let z: Vec<f64> = theta.iter().map(|&t| logit(t)).collect();
    let mut nb = family.model(&z)?;
    // keep the fixed parameters exactly as given
    let mut cond = nb.cond().to_vec();
    cond[family.reference].copy_from_slice(theta);
    nb = NaiveBayes::new(nb.prior().to_vec(), cond)?;
    Ok(nb)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformanceReport {
    pub conforms: bool,
    pub max_deviation: f64,
}

fn deviation_at(nb: &NaiveBayes, lr: &LogisticRegression, x: &[u8]) -> Result<f64> {
    let p = nb.posterior(x)?;
    let q = lr.predict(x)?;
    Ok(p.iter().zip(&q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

fn check_shapes(nb: &NaiveBayes, lr: &LogisticRegression) -> Result<()> {
    check_len(lr.num_features(), nb.num_features())?;
    check_len(lr.num_classes(), nb.num_classes())
}

/// Exhaustive check over all `2^n` total inputs.
pub fn check_conformance(
    nb: &NaiveBayes,
    lr: &LogisticRegression,
    tol: f64,
) -> Result<ConformanceReport> {
    check_shapes(nb, lr)?;
    let n = nb.num_features();
    if n > MAX_EXHAUSTIVE_FEATURES {
        return Err(Error::TooLarge {
            what: "conformance check",
            size: n,
            limit: MAX_EXHAUSTIVE_FEATURES,
        });
    }
    let mut x = vec![0u8; n];
    let mut max_deviation: f64 = 0.0;
    for mask in 0u64..(1u64 << n) {
        for (i, b) in x.iter_mut().enumerate() {
            *b = ((mask >> i) & 1) as u8;
        }
        max_deviation = max_deviation.max(deviation_at(nb, lr, &x)?);
    }
    Ok(ConformanceReport {
        conforms: max_deviation <= tol,
        max_deviation,
    })
}

/// Check on `samples` uniformly random total inputs, for models too wide to
/// enumerate.
pub fn check_conformance_sampled(
    nb: &NaiveBayes,
    lr: &LogisticRegression,
    tol: f64,
    samples: usize,
    seed: u64,
) -> Result<ConformanceReport> {
    check_shapes(nb, lr)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_deviation: f64 = 0.0;
    let mut x = vec![0u8; nb.num_features()];
    for _ in 0..samples {
        for b in x.iter_mut() {
            *b = rng.random_bool(0.5) as u8;
        }
        max_deviation = max_deviation.max(deviation_at(nb, lr, &x)?);
    }
    Ok(ConformanceReport {
        conforms: max_deviation <= tol,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1() -> NaiveBayes {
        NaiveBayes::binary(0.5, vec![0.8, 0.45], vec![0.3, 0.5]).unwrap()
    }

    fn p2() -> NaiveBayes {
        NaiveBayes::binary(0.36, vec![0.6, 0.9], vec![0.14, 0.92]).unwrap()
    }

    fn toy_lr() -> LogisticRegression {
        LogisticRegression::binary(vec![-1.16, 2.23, -0.20]).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn toy_models_translate_to_toy_weights() {
        let want = [-1.16, 2.23, -0.20];
        let lr = nb_to_lr(&p1()).unwrap();
        assert!(close(&lr.weights()[0], &want, 0.005), "{:?}", lr.weights());
        // P2 is listed with two-digit parameters, which moves its weights a little
        let lr = nb_to_lr(&p2()).unwrap();
        assert!(close(&lr.weights()[0], &want, 0.05), "{:?}", lr.weights());
    }

    #[test]
    fn symmetric_nb_gives_zero_weights() {
        let nb = NaiveBayes::independent(&[0.2, 0.7, 0.4]).unwrap();
        assert!(close(&nb_to_lr(&nb).unwrap().weights()[0], &[0.0; 4], 1e-15));
    }

    #[test]
    fn boundary_parameters_are_rejected() {
        let nb = NaiveBayes::binary(0.5, vec![1.0, 0.5], vec![0.3, 0.5]).unwrap();
        assert!(matches!(nb_to_lr(&nb), Err(Error::InfiniteWeight { .. })));
    }

    #[test]
    fn lr_to_nb_recovers_toy_models() {
        let lr = toy_lr();
        for (theta, nb) in [([0.8, 0.45], p1()), ([0.6, 0.9], p2())] {
            let got = lr_to_nb(&lr, &theta).unwrap();
            assert!(close(got.prior(), nb.prior(), 0.005));
            for k in 0..2 {
                assert!(close(&got.cond()[k], &nb.cond()[k], 0.005), "{got:?}");
            }
        }
        let got = lr_to_nb(&lr, &[0.6, 0.9]).unwrap();
        assert!((got.cond()[0][0] - 0.14).abs() < 0.005);
        assert!((got.prior()[1] - 0.36).abs() < 0.005);
    }

    #[test]
    fn zero_lr_and_half_theta_gives_uniform_nb() {
        let lr = LogisticRegression::zeros(3, 2).unwrap();
        let nb = lr_to_nb(&lr, &[0.5; 3]).unwrap();
        assert!(close(nb.prior(), &[0.5, 0.5], 1e-15));
        assert!(nb.cond().iter().all(|r| close(r, &[0.5; 3], 1e-15)));
    }

    #[test]
    fn lr_to_nb_rejects_closed_theta() {
        let lr = toy_lr();
        assert!(matches!(lr_to_nb(&lr, &[0.0, 0.5]), Err(Error::Domain(_))));
        assert!(matches!(lr_to_nb(&lr, &[0.5, 1.0]), Err(Error::Domain(_))));
        assert!(matches!(lr_to_nb(&lr, &[0.5]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn conformance_checks() {
        let exact = nb_to_lr(&p1()).unwrap();
        assert!(check_conformance(&p1(), &exact, 1e-9).unwrap().conforms);

        let perturbed = NaiveBayes::binary(0.4, vec![0.8, 0.45], vec![0.3, 0.5]).unwrap();
        let r = check_conformance(&perturbed, &exact, 1e-3).unwrap();
        assert!(!r.conforms && r.max_deviation > 1e-3);

        let uniform = NaiveBayes::independent(&[0.5, 0.5]).unwrap();
        let zero = LogisticRegression::zeros(2, 2).unwrap();
        let r = check_conformance(&uniform, &zero, 0.0).unwrap();
        assert!(r.conforms);
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn conformance_refuses_wide_models() {
        let nb = NaiveBayes::independent(&[0.5; 21]).unwrap();
        let lr = LogisticRegression::zeros(21, 2).unwrap();
        assert!(matches!(check_conformance(&nb, &lr, 1e-9), Err(Error::TooLarge { .. })));
        assert!(check_conformance_sampled(&nb, &lr, 1e-9, 64, 7).unwrap().conforms);
    }

    #[test]
    fn multiclass_round_trip() {
        let lr = LogisticRegression::new(
            3,
            vec![vec![0.0, 0.0, 0.0], vec![0.4, -1.2, 2.0], vec![-0.3, 0.7, 0.1]],
        )
        .unwrap();
        let nb = lr_to_nb(&lr, &[0.3, 0.6]).unwrap();
        assert!(nb.validate().is_empty());
        assert_eq!(nb.cond()[0], vec![0.3, 0.6]);
        assert!(check_conformance(&nb, &lr, 1e-12).unwrap().conforms);
        let back = nb_to_lr(&nb).unwrap();
        for (a, b) in back.weights().iter().zip(lr.weights()) {
            assert!(close(a, b, 1e-12));
        }
    }
}
