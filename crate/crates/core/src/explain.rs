//! Support features, sufficient explanations, and grid rendering.
//!
//! An explanation of a binary classification `F(x)` is a subset `e` of the
//! support features such that keeping only `e` and the opposing features
//! observed still yields the same decision in expectation.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::expectation::expected_prediction;
use crate::model::{LogisticRegression, NaiveBayes, PartialObservation};

/// Expectations this close to `F(x)` count as equal when partitioning.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Default size cap for exhaustive search.
pub const DEFAULT_EXACT_CAP: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub support: Vec<usize>,
    pub opposing: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Search {
    /// Every subset of the support set up to the given size, smallest first.
    Exact { cap: usize },
    #[default]
    Greedy,
}

impl Search {
    /// Parses `greedy`, `exact`, or `exact:N`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Self::Greedy),
            "exact" => Ok(Self::Exact {
                cap: DEFAULT_EXACT_CAP,
            }),
            _ => s
                .strip_prefix("exact:")
                .and_then(|n| n.parse().ok())
                .map(|cap| Self::Exact { cap })
                .ok_or_else(|| Error::Parse(format!("unknown search '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExplanationStatus {
    Found,
    /// No subset within the search regime flips the decision back; the
    /// explanation holds the best candidate seen.
    NotFound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    pub features: Vec<usize>,
    pub status: ExplanationStatus,
    /// `P(positive | e ∪ x_-)` for the returned features.
    pub expectation: f64,
    /// Classifier output `F(x)` on the full instance.
    pub prediction: f64,
    pub partition: Partition,
}

fn check_binary(lr: &LogisticRegression, nb: &NaiveBayes, x: &[u8]) -> Result<()> {
    if !lr.is_binary() || nb.num_classes() != 2 {
        return Err(Error::Unsupported(
            "explanations are defined for binary classifiers".into(),
        ));
    }
    check_len(lr.num_features(), nb.num_features())?;
    check_len(lr.num_features(), x.len())?;
    PartialObservation::from_total(x).check(x.len())
}

fn positive(p: f64) -> bool {
    p >= 0.5
}

fn side(p: f64) -> std::cmp::Ordering {
    p.total_cmp(&0.5)
}

struct Context<'a> {
    nb: &'a NaiveBayes,
    x: &'a [u8],
    base: PartialObservation,
}

impl Context<'_> {
    fn expectation(&self, extra: &[usize]) -> Result<f64> {
        let mut y = self.base.clone();
        for &i in extra {
            y.insert(i, self.x[i]);
        }
        Ok(expected_prediction(self.nb, &y)?[1])
    }
}

/// Splits the features of `x` into those that push towards the decision
/// `F(x)` and those that push against it.
pub fn partition_support(lr: &LogisticRegression, nb: &NaiveBayes, x: &[u8]) -> Result<Partition> {
    check_binary(lr, nb, x)?;
    let f = lr.predict(x)?[1];
    let full = PartialObservation::from_total(x);
    let mut support = Vec::new();
    let mut opposing = Vec::new();
    for i in 0..x.len() {
        let e = expected_prediction(nb, &full.without(i))?[1];
        let is_support = if positive(f) {
            e <= f + TIE_TOLERANCE
        } else {
            e > f + TIE_TOLERANCE
        };
        if is_support {
            support.push(i);
        } else {
            opposing.push(i);
        }
    }
    Ok(Partition { support, opposing })
}

fn combinations(items: &[usize], size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..size).collect();
    if size > items.len() {
        return out;
    }
    loop {
        out.push(idx.iter().map(|&j| items[j]).collect());
        let Some(pos) = (0..size).rev().find(|&p| idx[p] != p + items.len() - size) else {
            return out;
        };
        idx[pos] += 1;
        for q in pos + 1..size {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Smallest subset of the support features that, observed together with
/// the opposing features, keeps the classifier's decision.
///
/// Exact search returns the lexicographically smallest subset of minimum
/// size. Greedy search adds support features by their individual pull
/// towards the decision, then drops any that turn out to be unnecessary.
pub fn sufficient_explanation(
    lr: &LogisticRegression,
    nb: &NaiveBayes,
    x: &[u8],
    search: Search,
) -> Result<Explanation> {
    let partition = partition_support(lr, nb, x)?;
    let prediction = lr.predict(x)?[1];
    let target = side(prediction);
    let ctx = Context {
        nb,
        x,
        base: partition.opposing.iter().map(|&i| (i, x[i])).collect(),
    };
    // how far a candidate expectation sits on the decision's side of 0.5
    let margin = |e: f64| if positive(prediction) { e - 0.5 } else { 0.5 - e };
    let holds = |e: f64| side(e) == target;

    let (features, expectation, found) = match search {
        Search::Exact { cap } => {
            let mut best: Option<(Vec<usize>, f64)> = None;
            let mut winner = None;
            for size in 0..=cap.min(partition.support.len()) {
                let candidates = combinations(&partition.support, size);
                let scored = candidates
                    .into_par_iter()
                    .map(|c| ctx.expectation(&c).map(|e| (c, e)))
                    .collect::<Result<Vec<_>>>()?;
                if let Some((c, e)) = scored.iter().find(|(_, e)| holds(*e)) {
                    winner = Some((c.clone(), *e));
                    break;
                }
                for (c, e) in scored {
                    if best.as_ref().is_none_or(|(_, b)| margin(e) > margin(*b)) {
                        best = Some((c, e));
                    }
                }
            }
            match winner {
                Some((c, e)) => (c, e, true),
                None => {
                    let (c, e) = best.expect("the empty subset is always scored");
                    (c, e, false)
                }
            }
        }
        Search::Greedy => {
            let e0 = ctx.expectation(&[])?;
            let mut order = partition
                .support
                .iter()
                .map(|&f| Ok((f, margin(ctx.expectation(&[f])?) - margin(e0))))
                .collect::<Result<Vec<_>>>()?;
            order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let mut chosen: Vec<usize> = Vec::new();
            let mut e = e0;
            for &(f, _) in &order {
                if holds(e) {
                    break;
                }
                chosen.push(f);
                e = ctx.expectation(&chosen)?;
            }
            if holds(e) {
                for j in (0..chosen.len()).rev() {
                    let mut trial = chosen.clone();
                    trial.remove(j);
                    let et = ctx.expectation(&trial)?;
                    if holds(et) {
                        chosen = trial;
                        e = et;
                    }
                }
                chosen.sort_unstable();
                (chosen, e, true)
            } else {
                chosen.sort_unstable();
                (chosen, e, false)
            }
        }
    };
    Ok(Explanation {
        features,
        status: if found {
            ExplanationStatus::Found
        } else {
            ExplanationStatus::NotFound
        },
        expectation,
        prediction,
        partition,
    })
}

/// The `k` support features whose weights pull hardest towards the
/// decision, in increasing index order.
pub fn top_k_by_weight(lr: &LogisticRegression, x: &[u8], support: &[usize], k: usize) -> Result<Vec<usize>> {
    if !lr.is_binary() {
        return Err(Error::Unsupported("top-k by weight needs a binary classifier".into()));
    }
    check_len(lr.num_features(), x.len())?;
    let w = &lr.weights()[0];
    let direction = if positive(lr.predict(x)?[1]) { 1.0 } else { -1.0 };
    let mut scored: Vec<(usize, f64)> = support
        .iter()
        .map(|&i| {
            let sign = if x[i] == 1 { 1.0 } else { -1.0 };
            (i, direction * sign * w[i + 1])
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut out: Vec<usize> = scored.into_iter().take(k).map(|(i, _)| i).collect();
    out.sort_unstable();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    /// Row-major pixel values.
    pub pixels: Vec<u8>,
}

/// Chosen features show their true colour (1 white, 0 black); everything
/// else is mid-grey.
pub fn render_grid(x: &[u8], highlight: &[usize], width: usize, height: usize) -> Result<GrayImage> {
    check_len(width * height, x.len())?;
    let mut pixels = vec![128u8; x.len()];
    for &i in highlight {
        if i >= x.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                num_features: x.len(),
            });
        }
        pixels[i] = if x[i] == 1 { 255 } else { 0 };
    }
    Ok(GrayImage {
        width,
        height,
        pixels,
    })
}

impl GrayImage {
    /// Binary PGM (`P5`, maxval 255).
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_pgm())?;
        Ok(())
    }
}
