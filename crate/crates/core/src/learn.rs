//! Naive conformant learning: the maximum-likelihood naive Bayes model among
//! those that conform with a given logistic regression.
//!
//! Two routes are provided. [`Method::Gp`] builds the geometric program over
//! all naive Bayes parameters (objective on the class-completed dataset,
//! conformance as monomial equalities, relaxed sum-to-one inequalities) and
//! hands it to [`crate::gp::solve_gp`]. [`Method::Reduced`] walks the
//! conformant family directly through its free parameters and maximizes the
//! marginal likelihood with projected gradient ascent. Both should land on
//! the same model; the test suites hold them to it.

use serde::Serialize;

use crate::conformance::{
    check_conformance, check_conformance_sampled, lr_to_nb, ConformantFamily,
    MAX_EXHAUSTIVE_FEATURES,
};
use crate::error::{check_len, Error, Result};
use crate::gp::{
    eval_posynomial, solve_gp, GeometricProgram, InitialPoint, Monomial, Posynomial,
    SolveStatus, SolverOptions, VarId,
};
use crate::math::{log_sum_exp, logit, sigmoid, softmax};
use crate::model::{BinaryDataset, LogisticRegression, NaiveBayes, PartialObservation};

/// How each row's mass is split over the classes in the completed dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlphaPolicy {
    /// `alpha_{j,c} = F_c(x_j)`.
    #[default]
    LrPosterior,
    /// `alpha_{j,c} = 1/K`.
    Uniform,
}

impl AlphaPolicy {
    pub fn name(self) -> &'static str {
        match self {
            Self::LrPosterior => "posterior",
            Self::Uniform => "uniform",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "posterior" => Ok(Self::LrPosterior),
            "uniform" => Ok(Self::Uniform),
            _ => Err(Error::Parse(format!("unknown alpha policy '{s}'"))),
        }
    }

    fn weights(self, lr: &LogisticRegression, x: &[u8]) -> Result<Vec<f64>> {
        match self {
            Self::LrPosterior => lr.predict(x),
            Self::Uniform => Ok(vec![1.0 / lr.num_classes() as f64; lr.num_classes()]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    Gp,
    #[default]
    Reduced,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gp => "gp",
            Self::Reduced => "reduced",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gp" => Ok(Self::Gp),
            "reduced" => Ok(Self::Reduced),
            _ => Err(Error::Parse(format!("unknown method '{s}'"))),
        }
    }
}

/// Every row of `d` paired with every class, weighted by `alpha`.
pub fn completed_dataset(
    d: &BinaryDataset,
    lr: &LogisticRegression,
    policy: AlphaPolicy,
) -> Result<BinaryDataset> {
    check_len(lr.num_features(), d.num_features())?;
    let k = lr.num_classes();
    let mut rows = Vec::with_capacity(d.len() * k);
    let mut labels = Vec::with_capacity(d.len() * k);
    let mut weights = Vec::with_capacity(d.len() * k);
    for x in d.rows() {
        for (c, a) in policy.weights(lr, x)?.into_iter().enumerate() {
            rows.push(x.clone());
            labels.push(c);
            weights.push(a);
        }
    }
    BinaryDataset::new(d.num_features(), rows)?
        .with_labels(labels)?
        .with_weights(weights)
}

/// GP variable ids for each naive Bayes parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamLayout {
    /// `theta_{c_k}`
    pub prior: Vec<VarId>,
    /// `theta_{x_i | c_k}`, indexed `[k][i]`
    pub pos: Vec<Vec<VarId>>,
    /// `theta_{x̄_i | c_k}`, indexed `[k][i]`
    pub neg: Vec<Vec<VarId>>,
}

impl ParamLayout {
    fn all(&self) -> impl Iterator<Item = VarId> + '_ {
        self.prior
            .iter()
            .chain(self.pos.iter().flatten())
            .chain(self.neg.iter().flatten())
            .copied()
    }

    /// Normalized naive Bayes model read off a GP solution.
    pub fn read_model(&self, values: &[f64]) -> Result<NaiveBayes> {
        let prior_raw: Vec<f64> = self.prior.iter().map(|v| values[v.0]).collect();
        let total: f64 = prior_raw.iter().sum();
        let prior = prior_raw.iter().map(|p| p / total).collect();
        let cond = self
            .pos
            .iter()
            .zip(&self.neg)
            .map(|(pos, neg)| {
                pos.iter()
                    .zip(neg)
                    .map(|(p, q)| values[p.0] / (values[p.0] + values[q.0]))
                    .collect()
            })
            .collect();
        NaiveBayes::new(prior, cond)
    }

    /// Values for a naive Bayes model, in variable order.
    pub fn values_of(&self, nb: &NaiveBayes) -> Vec<f64> {
        let count = self.prior.len() * (1 + 2 * self.pos[0].len());
        let mut out = vec![0.0; count];
        for (k, v) in self.prior.iter().enumerate() {
            out[v.0] = nb.prior()[k];
        }
        for (k, row) in nb.cond().iter().enumerate() {
            for (i, &p) in row.iter().enumerate() {
                out[self.pos[k][i].0] = p;
                out[self.neg[k][i].0] = 1.0 - p;
            }
        }
        out
    }
}

/// A NaCL geometric program and the map from its variables to parameters.
#[derive(Debug, Clone)]
pub struct NaclProgram {
    pub gp: GeometricProgram,
    pub layout: ParamLayout,
    /// Number of sum-to-one inequalities; they come first in `gp`.
    pub sum_constraints: usize,
}

/// Geometric program whose optimum is the conformant naive Bayes model of
/// maximum likelihood on `d`.
pub fn build_nacl_program(
    lr: &LogisticRegression,
    d: &BinaryDataset,
    policy: AlphaPolicy,
) -> Result<NaclProgram> {
    check_len(lr.num_features(), d.num_features())?;
    let n = lr.num_features();
    let k = lr.num_classes();
    let mut gp = GeometricProgram::new();
    let prior: Vec<VarId> = (0..k).map(|c| gp.add_variable(format!("p{c}"))).collect();
    let pos: Vec<Vec<VarId>> = (0..k)
        .map(|c| (0..n).map(|i| gp.add_variable(format!("x{i}|{c}"))).collect())
        .collect();
    let neg: Vec<Vec<VarId>> = (0..k)
        .map(|c| (0..n).map(|i| gp.add_variable(format!("~x{i}|{c}"))).collect())
        .collect();

    // objective: prod over completed rows of (theta_c prod theta_{x|c})^{-alpha}
    let mut prior_exp = vec![0.0; k];
    let mut pos_exp = vec![vec![0.0; n]; k];
    let mut neg_exp = vec![vec![0.0; n]; k];
    for (x, count) in d.counts() {
        let alpha = policy.weights(lr, &x)?;
        for c in 0..k {
            let w = alpha[c] * count as f64;
            prior_exp[c] -= w;
            for (i, &b) in x.iter().enumerate() {
                if b == 1 {
                    pos_exp[c][i] -= w;
                } else {
                    neg_exp[c][i] -= w;
                }
            }
        }
    }
    let mut objective = Monomial::new(1.0)?;
    for c in 0..k {
        objective = objective.pow(prior[c], prior_exp[c]);
        for i in 0..n {
            objective = objective.pow(pos[c][i], pos_exp[c][i]).pow(neg[c][i], neg_exp[c][i]);
        }
    }
    gp.set_objective(objective);

    let sum = |a: VarId, b: VarId| Posynomial::new(vec![Monomial::var(a), Monomial::var(b)]);
    gp.add_inequality(
        Posynomial::new(prior.iter().map(|&v| Monomial::var(v)).collect())?,
        "sum prior",
    );
    for c in 0..k {
        for i in 0..n {
            gp.add_inequality(sum(pos[c][i], neg[c][i])?, format!("sum x{i}|{c}"));
        }
    }
    let sum_constraints = 1 + k * n;

    // conformance: log-odds of class c against class 0 must match the LR
    let w = lr.class_weights();
    for c in 1..k {
        let delta: Vec<f64> = w[c].iter().zip(&w[0]).map(|(a, b)| a - b).collect();
        let mut bias = Monomial::from_log_coefficient(delta[0])?
            .pow(prior[c], -1.0)
            .pow(prior[0], 1.0);
        for (&mine, &base) in neg[c].iter().zip(&neg[0]) {
            bias = bias.pow(mine, -1.0).pow(base, 1.0);
        }
        gp.add_equality(bias, format!("w{c},0"));
        for i in 0..n {
            let m = Monomial::from_log_coefficient(delta[i + 1])?
                .pow(pos[c][i], -1.0)
                .pow(neg[c][i], 1.0)
                .pow(pos[0][i], 1.0)
                .pow(neg[0][i], -1.0);
            gp.add_equality(m, format!("w{c},{}", i + 1));
        }
    }

    Ok(NaclProgram {
        gp,
        layout: ParamLayout { prior, pos, neg },
        sum_constraints,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub method: Method,
    pub alpha_policy: AlphaPolicy,
    /// Every parameter is kept inside `[clamp_eps, 1 - clamp_eps]`.
    pub clamp_eps: f64,
    pub solver: SolverOptions,
    /// Iteration cap for the reduced optimizer.
    pub max_iter: usize,
    /// Projected-gradient tolerance for the reduced optimizer, on the
    /// per-row log-likelihood.
    pub tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            method: Method::Reduced,
            alpha_policy: AlphaPolicy::LrPosterior,
            clamp_eps: 1e-4,
            solver: SolverOptions::default(),
            max_iter: 10_000,
            tol: 1e-10,
        }
    }
}

/// [`build_nacl_program`] plus the lower bound `clamp_eps` on every
/// variable, as solved by [`Method::Gp`].
pub fn clamped_nacl_program(lr: &LogisticRegression, d: &BinaryDataset, opts: &FitOptions) -> Result<NaclProgram> {
    let mut program = build_nacl_program(lr, d, opts.alpha_policy)?;
    let vars: Vec<VarId> = program.layout.all().collect();
    for v in vars {
        program
            .gp
            .add_inequality(Monomial::new(opts.clamp_eps)?.pow(v, -1.0), "clamp");
    }
    Ok(program)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub method: &'static str,
    pub alpha_policy: &'static str,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub conformance_max_dev: f64,
    pub active_inequalities: bool,
}

impl FitReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaclFit {
    pub model: NaiveBayes,
    pub report: FitReport,
}

/// `sum_x n(x) log P(x)` over the rows of `d`.
pub fn log_likelihood(nb: &NaiveBayes, d: &BinaryDataset) -> Result<f64> {
    let mut total = 0.0;
    for (x, count) in d.counts() {
        total += count as f64 * nb.log_marginal(&PartialObservation::from_total(&x))?;
    }
    Ok(total)
}

fn conformance_dev(nb: &NaiveBayes, lr: &LogisticRegression) -> Result<f64> {
    let report = if nb.num_features() <= MAX_EXHAUSTIVE_FEATURES {
        check_conformance(nb, lr, 0.0)?
    } else {
        check_conformance_sampled(nb, lr, 0.0, 4096, 0)?
    };
    Ok(report.max_deviation)
}

/// Learns the maximum-likelihood naive Bayes model conforming with `lr`.
pub fn fit_nacl(lr: &LogisticRegression, d: &BinaryDataset, opts: &FitOptions) -> Result<NaclFit> {
    check_len(lr.num_features(), d.num_features())?;
    if !(opts.clamp_eps > 0.0 && opts.clamp_eps < 0.5) {
        return Err(Error::Domain(format!("clamp_eps {} outside (0, 0.5)", opts.clamp_eps)));
    }
    if d.is_empty() {
        log::warn!("empty dataset; returning the conformant model with all free parameters at 0.5");
        let model = lr_to_nb(lr, &vec![0.5; lr.num_features()])?;
        let conformance_max_dev = conformance_dev(&model, lr)?;
        return Ok(NaclFit {
            model,
            report: FitReport {
                method: opts.method.name(),
                alpha_policy: opts.alpha_policy.name(),
                log_likelihood: 0.0,
                iterations: 0,
                conformance_max_dev,
                active_inequalities: true,
            },
        });
    }
    let (model, iterations, active) = match opts.method {
        Method::Reduced => {
            let (model, iterations) = fit_reduced(lr, d, opts)?;
            (model, iterations, true)
        }
        Method::Gp => fit_gp(lr, d, opts)?,
    };
    let log_likelihood = log_likelihood(&model, d)?;
    let conformance_max_dev = conformance_dev(&model, lr)?;
    Ok(NaclFit {
        model,
        report: FitReport {
            method: opts.method.name(),
            alpha_policy: opts.alpha_policy.name(),
            log_likelihood,
            iterations,
            conformance_max_dev,
            active_inequalities: active,
        },
    })
}

fn fit_gp(
    lr: &LogisticRegression,
    d: &BinaryDataset,
    opts: &FitOptions,
) -> Result<(NaiveBayes, usize, bool)> {
    let NaclProgram {
        gp,
        layout,
        sum_constraints,
    } = clamped_nacl_program(lr, d, opts)?;
    // strictly feasible start from the conformant family, scaled inward
    let seed_model = lr_to_nb(lr, &vec![0.5; lr.num_features()])?;
    let seed: Vec<f64> = layout.values_of(&seed_model).iter().map(|v| v * 0.999).collect();
    let solver = SolverOptions {
        initial: InitialPoint::Seed(seed),
        ..opts.solver.clone()
    };
    let sol = solve_gp(&gp, &solver)?;
    if sol.status != SolveStatus::Optimal {
        let best = if sol.values.iter().all(|v| v.is_finite() && *v > 0.0) {
            layout.read_model(&sol.values).ok().map(Box::new)
        } else {
            None
        };
        return Err(Error::Solver {
            status: sol.status,
            best,
        });
    }
    let mut active = true;
    for (p, _) in &gp.inequalities()[..sum_constraints] {
        if eval_posynomial(p, &sol.values)? < 1.0 - 1e-6 {
            active = false;
        }
    }
    Ok((layout.read_model(&sol.values)?, sol.iterations, active))
}

/// Box on the free logits that keeps every class-conditional parameter in
/// `[eps, 1 - eps]`.
fn reduced_box(family: &ConformantFamily, n: usize, eps: f64) -> Vec<(f64, f64)> {
    let lo0 = logit(eps);
    let hi0 = -lo0;
    (0..n)
        .map(|i| {
            let (mut lo, mut hi) = (lo0, hi0);
            for k in 0..family.num_classes() {
                if k == family.reference {
                    continue;
                }
                let off = family.delta[k][i + 1];
                lo = lo.max(lo0 - off);
                hi = hi.min(hi0 - off);
            }
            if lo > hi {
                log::warn!(
                    "feature {i}: weight spread too large for clamp {eps}; pinning its free parameter"
                );
                let mid = 0.5 * (lo + hi);
                (mid, mid)
            } else {
                (lo, hi)
            }
        })
        .collect()
}

/// Per-row log-likelihood (up to a constant fixed by the LR) and its
/// gradient and diagonal curvature with respect to the free logits.
struct ReducedObjective<'a> {
    family: &'a ConformantFamily,
    /// Fraction of rows with `x_i = 1`.
    freq: Vec<f64>,
}

impl ReducedObjective<'_> {
    fn value(&self, z: &[f64]) -> f64 {
        let log_ref_prior = -log_sum_exp(&self.family.log_prior_ratios(z));
        log_ref_prior
            + z.iter()
                .zip(&self.freq)
                .map(|(&zi, &f)| f * log_sigmoid(zi) + (1.0 - f) * log_sigmoid(-zi))
                .sum::<f64>()
    }

    /// Gradient `f_i - P(x_i = 1)` and curvature scale `P(x_i=1) P(x_i=0)`.
    fn gradient(&self, z: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let prior = softmax(&self.family.log_prior_ratios(z));
        let mut grad = Vec::with_capacity(z.len());
        let mut scale = Vec::with_capacity(z.len());
        for (i, &zi) in z.iter().enumerate() {
            let marginal: f64 = prior
                .iter()
                .enumerate()
                .map(|(k, &p)| p * self.family.cond(k, i, zi))
                .sum();
            grad.push(self.freq[i] - marginal);
            scale.push((marginal * (1.0 - marginal)).max(1e-12));
        }
        (grad, scale)
    }
}

fn log_sigmoid(x: f64) -> f64 {
    -crate::math::softplus(-x)
}

fn project(z: &mut [f64], bounds: &[(f64, f64)]) {
    for (zi, &(lo, hi)) in z.iter_mut().zip(bounds) {
        *zi = zi.clamp(lo, hi);
    }
}

/// Projected, diagonally scaled gradient ascent with Armijo backtracking.
///
/// Through the conformance identity `P(x) = P(x, c_ref) / F_ref(x)` the
/// marginal log-likelihood depends on the data only through the per-feature
/// frequencies, and is concave in the free logits.
fn fit_reduced(
    lr: &LogisticRegression,
    d: &BinaryDataset,
    opts: &FitOptions,
) -> Result<(NaiveBayes, usize)> {
    let n = lr.num_features();
    let family = ConformantFamily::new(lr);
    let rows = d.len() as f64;
    let freq: Vec<f64> = (0..n)
        .map(|i| d.rows().iter().filter(|r| r[i] == 1).count() as f64 / rows)
        .collect();
    let bounds = reduced_box(&family, n, opts.clamp_eps);
    let obj = ReducedObjective {
        family: &family,
        freq,
    };
    let mut z: Vec<f64> = obj
        .freq
        .iter()
        .map(|&f| logit(f.clamp(opts.clamp_eps, 1.0 - opts.clamp_eps)))
        .collect();
    project(&mut z, &bounds);
    let mut value = obj.value(&z);
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let (grad, scale) = obj.gradient(&z);
        let mut probe = z.clone();
        for (p, g) in probe.iter_mut().zip(&grad) {
            *p += g;
        }
        project(&mut probe, &bounds);
        let stationarity = probe
            .iter()
            .zip(&z)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if stationarity < opts.tol {
            break;
        }
        let mut alpha = 1.0;
        let mut moved = false;
        while alpha > 1e-16 {
            let mut cand: Vec<f64> = z
                .iter()
                .zip(grad.iter().zip(&scale))
                .map(|(zi, (g, s))| zi + alpha * g / s)
                .collect();
            project(&mut cand, &bounds);
            let ascent: f64 = cand
                .iter()
                .zip(&z)
                .zip(&grad)
                .map(|((c, zi), g)| g * (c - zi))
                .sum();
            let cand_value = obj.value(&cand);
            if cand_value >= value + 1e-4 * ascent {
                moved = cand_value > value || ascent > 0.0;
                z = cand;
                value = cand_value;
                break;
            }
            alpha *= 0.5;
        }
        iterations += 1;
        if !moved {
            break;
        }
    }
    let mut model = family.model(&z)?;
    // the reference row is exactly sigmoid(z); recompute the rest from it
    let theta: Vec<f64> = z.iter().map(|&zi| sigmoid(zi)).collect();
    if theta.iter().all(|&t| t > 0.0 && t < 1.0) {
        model = lr_to_nb(lr, &theta)?;
    }
    Ok((model, iterations))
}
