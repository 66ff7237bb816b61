//! Geometric programs and a log-barrier solver for them.
//!
//! A geometric program minimizes a posynomial subject to posynomial
//! inequalities `f(x) <= 1` and monomial equalities `g(x) = 1` over positive
//! variables. Substituting `u = log x` turns monomials into affine functions
//! and posynomials into log-sum-exp of affine functions, which gives a convex
//! program. [`solve_gp`] eliminates the (affine) equalities with a null-space
//! basis and runs a barrier method with damped Newton centering on what is
//! left.
//!
//! The [`Display`](std::fmt::Display) impl of [`GeometricProgram`] prints
//! one line per objective or constraint:
//!
//! ```text
//! minimize: 1*t^-3 * f^-1
//! ineq[sum t]: 1*t + 1*f <= 1
//! eq[w1]: 2.718281828459045*a^-1 * b = 1
//! ```

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{Cholesky, DMatrix, DVector, SVD};

use crate::error::{Error, Result};
use crate::math::{log_sum_exp, softmax};

/// Index of a GP variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// `b * prod x_v^{a_v}` with `b > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    coefficient: f64,
    exponents: BTreeMap<VarId, f64>,
}

impl Monomial {
    pub fn new(coefficient: f64) -> Result<Self> {
        if !(coefficient > 0.0 && coefficient.is_finite()) {
            return Err(Error::Domain(format!(
                "monomial coefficient must be positive and finite, got {coefficient}"
            )));
        }
        Ok(Self {
            coefficient,
            exponents: BTreeMap::new(),
        })
    }

    /// Monomial `e^{log_coefficient}`, convenient when the coefficient would
    /// overflow in linear space.
    pub fn from_log_coefficient(log_coefficient: f64) -> Result<Self> {
        Self::new(log_coefficient.exp())
    }

    pub fn var(v: VarId) -> Self {
        Self::new(1.0).unwrap().pow(v, 1.0)
    }

    /// Multiplies by `x_v^exponent`. Exponents of the same variable add up.
    pub fn pow(mut self, v: VarId, exponent: f64) -> Self {
        *self.exponents.entry(v).or_insert(0.0) += exponent;
        self
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn exponents(&self) -> &BTreeMap<VarId, f64> {
        &self.exponents
    }

    fn log_eval(&self, values: &[f64]) -> Result<f64> {
        let mut acc = self.coefficient.ln();
        for (&VarId(i), &a) in &self.exponents {
            let x = *values.get(i).ok_or_else(|| {
                Error::Domain(format!("variable {i} has no value"))
            })?;
            if !(x > 0.0) {
                return Err(Error::Domain(format!("variable {i} = {x} is not positive")));
            }
            acc += a * x.ln();
        }
        Ok(acc)
    }

    pub fn eval(&self, values: &[f64]) -> Result<f64> {
        Ok(self.log_eval(values)?.exp())
    }

    fn affine(&self) -> AffineTerm {
        AffineTerm {
            coeffs: self
                .exponents
                .iter()
                .filter(|(_, &a)| a != 0.0)
                .map(|(&VarId(i), &a)| (i, a))
                .collect(),
            offset: self.coefficient.ln(),
        }
    }
}

/// A nonempty sum of monomials.
#[derive(Debug, Clone, PartialEq)]
pub struct Posynomial {
    terms: Vec<Monomial>,
}

impl Posynomial {
    pub fn new(terms: Vec<Monomial>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Domain("posynomial needs at least one term".into()));
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn log_eval(&self, values: &[f64]) -> Result<f64> {
        let logs = self
            .terms
            .iter()
            .map(|m| m.log_eval(values))
            .collect::<Result<Vec<_>>>()?;
        Ok(log_sum_exp(&logs))
    }
}

impl From<Monomial> for Posynomial {
    fn from(m: Monomial) -> Self {
        Self { terms: vec![m] }
    }
}

/// Value of `p` at `values` (indexed by [`VarId`]).
pub fn eval_posynomial(p: &Posynomial, values: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for m in &p.terms {
        total += m.eval(values)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometricProgram {
    names: Vec<String>,
    objective: Posynomial,
    inequalities: Vec<(Posynomial, String)>,
    equalities: Vec<(Monomial, String)>,
}

impl Default for GeometricProgram {
    fn default() -> Self {
        Self::new()
    }
}

impl GeometricProgram {
    /// Empty program with the constant objective 1.
    pub fn new() -> Self {
        Self {
            names: Vec::new(),
            objective: Monomial::new(1.0).unwrap().into(),
            inequalities: Vec::new(),
            equalities: Vec::new(),
        }
    }

    pub fn add_variable(&mut self, name: impl Into<String>) -> VarId {
        self.names.push(name.into());
        VarId(self.names.len() - 1)
    }

    pub fn set_objective(&mut self, objective: impl Into<Posynomial>) {
        self.objective = objective.into();
    }

    /// Adds `p(x) <= 1`.
    pub fn add_inequality(&mut self, p: impl Into<Posynomial>, label: impl Into<String>) {
        self.inequalities.push((p.into(), label.into()));
    }

    /// Adds `m(x) = 1`.
    pub fn add_equality(&mut self, m: Monomial, label: impl Into<String>) {
        self.equalities.push((m, label.into()));
    }

    pub fn num_variables(&self) -> usize {
        self.names.len()
    }

    pub fn variable_names(&self) -> &[String] {
        &self.names
    }

    pub fn objective(&self) -> &Posynomial {
        &self.objective
    }

    pub fn inequalities(&self) -> &[(Posynomial, String)] {
        &self.inequalities
    }

    pub fn equalities(&self) -> &[(Monomial, String)] {
        &self.equalities
    }

    /// Errors if any monomial references an undeclared variable.
    pub fn validate(&self) -> Result<()> {
        let n = self.names.len();
        let monomials = self
            .objective
            .terms
            .iter()
            .chain(self.inequalities.iter().flat_map(|(p, _)| p.terms.iter()))
            .chain(self.equalities.iter().map(|(m, _)| m));
        for m in monomials {
            if let Some((&VarId(i), _)) = m.exponents.iter().next_back() {
                if i >= n {
                    return Err(Error::Domain(format!("variable {i} is not declared")));
                }
            }
        }
        Ok(())
    }

    fn fmt_monomial(&self, m: &Monomial) -> String {
        let mut s = format!("{}", m.coefficient);
        for (&VarId(i), &a) in &m.exponents {
            let name = self.names.get(i).map_or("?", String::as_str);
            if a == 1.0 {
                s.push_str(&format!("*{name}"));
            } else {
                s.push_str(&format!("*{name}^{a}"));
            }
        }
        s
    }

    fn fmt_posynomial(&self, p: &Posynomial) -> String {
        let terms: Vec<String> = p.terms.iter().map(|m| self.fmt_monomial(m)).collect();
        terms.join(" + ")
    }
}

impl fmt::Display for GeometricProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "minimize: {}", self.fmt_posynomial(&self.objective))?;
        for (p, label) in &self.inequalities {
            writeln!(f, "ineq[{label}]: {} <= 1", self.fmt_posynomial(p))?;
        }
        for (m, label) in &self.equalities {
            writeln!(f, "eq[{label}]: {} = 1", self.fmt_monomial(m))?;
        }
        Ok(())
    }
}

/// `offset + sum coeff * u_var`, the log of a monomial.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineTerm {
    pub coeffs: Vec<(usize, f64)>,
    pub offset: f64,
}

impl AffineTerm {
    pub fn eval(&self, u: &[f64]) -> f64 {
        self.offset + self.coeffs.iter().map(|&(i, a)| a * u[i]).sum::<f64>()
    }
}

/// `log sum_t exp(term_t(u))`, the log of a posynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSumExp {
    pub terms: Vec<AffineTerm>,
    pub label: String,
}

impl LogSumExp {
    pub fn eval(&self, u: &[f64]) -> f64 {
        if self.terms.len() == 1 {
            return self.terms[0].eval(u);
        }
        let ys: Vec<f64> = self.terms.iter().map(|t| t.eval(u)).collect();
        log_sum_exp(&ys)
    }

    /// Value, softmax weights of the terms, and dense gradient.
    fn eval_with_gradient(&self, u: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let ys: Vec<f64> = self.terms.iter().map(|t| t.eval(u)).collect();
        let value = if ys.len() == 1 { ys[0] } else { log_sum_exp(&ys) };
        let weights = softmax(&ys);
        let mut grad = vec![0.0; u.len()];
        for (t, &p) in self.terms.iter().zip(&weights) {
            for &(i, a) in &t.coeffs {
                grad[i] += p * a;
            }
        }
        (value, weights, grad)
    }

    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        self.eval_with_gradient(u).2
    }
}

/// The convex program obtained from a GP by `u = log x`:
///
/// minimize `objective(u)` subject to `inequalities[j](u) <= 0` and
/// `eq_matrix * u = eq_rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogConvexProgram {
    pub num_vars: usize,
    pub objective: LogSumExp,
    pub inequalities: Vec<LogSumExp>,
    pub eq_matrix: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
    pub eq_labels: Vec<String>,
}

pub fn to_log_convex(gp: &GeometricProgram) -> LogConvexProgram {
    let lse = |p: &Posynomial, label: &str| LogSumExp {
        terms: p.terms.iter().map(Monomial::affine).collect(),
        label: label.to_string(),
    };
    let n = gp.num_variables();
    let mut eq_matrix = Vec::with_capacity(gp.equalities.len());
    let mut eq_rhs = Vec::with_capacity(gp.equalities.len());
    for (m, _) in &gp.equalities {
        let mut row = vec![0.0; n];
        for (&VarId(i), &a) in &m.exponents {
            row[i] += a;
        }
        eq_matrix.push(row);
        eq_rhs.push(-m.coefficient.ln());
    }
    LogConvexProgram {
        num_vars: n,
        objective: lse(&gp.objective, "objective"),
        inequalities: gp.inequalities.iter().map(|(p, l)| lse(p, l)).collect(),
        eq_matrix,
        eq_rhs,
        eq_labels: gp.equalities.iter().map(|(_, l)| l.clone()).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialPoint {
    /// Least-norm point on the equality set, followed by a phase-I search
    /// when it violates an inequality.
    Auto,
    /// Positive starting values. Projected onto the equality set; phase I
    /// runs only if the projection is not strictly feasible.
    Seed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Cap on the total number of Newton steps.
    pub max_iter: usize,
    /// Target for the duality-gap bound `m * mu`.
    pub tol: f64,
    /// Initial barrier weight.
    pub mu0: f64,
    /// Barrier weight is divided by this after each centering.
    pub mu_factor: f64,
    pub initial: InitialPoint,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            tol: 1e-8,
            mu0: 1.0,
            mu_factor: 10.0,
            initial: InitialPoint::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KktResiduals {
    /// Infinity norm of the reduced Lagrangian gradient.
    pub stationarity: f64,
    /// `sum_j lambda_j * (-h_j)`, equal to `m * mu` on the central path.
    pub duality_gap: f64,
    /// Largest `f_j(x) - 1` over the inequalities, floored at 0.
    pub primal_inequality: f64,
    /// Largest `|log g_j(x)|` over the equalities.
    pub primal_equality: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpSolution {
    pub values: Vec<f64>,
    pub objective: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub kkt: KktResiduals,
    /// Multiplier estimates for the inequalities.
    pub duals: Vec<f64>,
}

/// Affine parameterization `u = base + basis * v` of the equality set.
struct Frame {
    base: DVector<f64>,
    basis: DMatrix<f64>,
}

impl Frame {
    fn point(&self, v: &DVector<f64>) -> Vec<f64> {
        (&self.base + &self.basis * v).as_slice().to_vec()
    }
}

/// Builds the null-space frame for `A u = b`, anchored at the projection of
/// `anchor` onto the equality set. Returns `None` when `A u = b` has no
/// solution.
fn equality_frame(prog: &LogConvexProgram, anchor: &[f64]) -> Option<Frame> {
    let m = prog.num_vars;
    let p = prog.eq_matrix.len();
    let anchor = DVector::from_column_slice(anchor);
    if p == 0 {
        return Some(Frame {
            base: anchor,
            basis: DMatrix::identity(m, m),
        });
    }
    let rows = p.max(m);
    let mut a = DMatrix::zeros(rows, m);
    let mut b = DVector::zeros(rows);
    for (r, row) in prog.eq_matrix.iter().enumerate() {
        for (c, &val) in row.iter().enumerate() {
            a[(r, c)] = val;
        }
        b[r] = prog.eq_rhs[r];
    }
    let svd = SVD::new(a.clone(), true, true);
    let smax = svd.singular_values.max().max(1.0);
    let thresh = 1e-10 * smax;
    let residual = &a * &anchor - &b;
    let correction = svd.solve(&residual, thresh).ok()?;
    let base = anchor - correction;
    let scale = 1.0 + b.amax();
    if (&a * &base - &b).amax() > 1e-8 * scale {
        return None;
    }
    let v_t = svd.v_t.as_ref()?;
    let null: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= thresh)
        .collect();
    let mut basis = DMatrix::zeros(m, null.len());
    for (c, &i) in null.iter().enumerate() {
        for r in 0..m {
            basis[(r, c)] = v_t[(i, r)];
        }
    }
    Some(Frame { base, basis })
}

enum BarrierEnd {
    Converged,
    Stopped,
    Unbounded,
    MaxIter,
}

struct BarrierRun {
    v: DVector<f64>,
    mu: f64,
    end: BarrierEnd,
}

/// Newton decrement `lambda^2 / 2` below which a centering step stops.
const CENTERING_TOL: f64 = 1e-10;
/// Accepted steps this small relative to the iterate end centering.
const STEP_FLOOR: f64 = 1e-14;

/// Log-barrier method for `min c.u  s.t. h_j(u) <= 0, u = base + N v`,
/// started from a strictly feasible `v`.
fn barrier(
    c: &[f64],
    cons: &[LogSumExp],
    frame: &Frame,
    mut v: DVector<f64>,
    opts: &SolverOptions,
    iterations: &mut usize,
    stop: &dyn Fn(&[f64]) -> bool,
) -> BarrierRun {
    let d = frame.basis.ncols();
    let m_full = frame.base.len();
    let cvec = DVector::from_column_slice(c);
    let c_red = frame.basis.tr_mul(&cvec);
    let mcons = cons.len();
    if mcons == 0 {
        let end = if c_red.amax() > 1e-12 {
            BarrierEnd::Unbounded
        } else {
            BarrierEnd::Converged
        };
        return BarrierRun { v, mu: 0.0, end };
    }
    if d == 0 {
        return BarrierRun {
            v,
            mu: 0.0,
            end: BarrierEnd::Converged,
        };
    }

    let mut mu = opts.mu0;
    loop {
        let t = 1.0 / mu;
        // Newton centering
        loop {
            let u = frame.point(&v);
            let mut grad_u = cvec.scale(t);
            let mut hess_u = DMatrix::<f64>::zeros(m_full, m_full);
            for con in cons {
                let (h, weights, g) = con.eval_with_gradient(&u);
                let s = -h;
                for (i, gi) in g.iter().enumerate() {
                    grad_u[i] += gi / s;
                }
                // sum_t p_t a_t a_t^T / s
                for (term, &p) in con.terms.iter().zip(&weights) {
                    if p == 0.0 {
                        continue;
                    }
                    for &(i, ai) in &term.coeffs {
                        for &(j, aj) in &term.coeffs {
                            hess_u[(i, j)] += p * ai * aj / s;
                        }
                    }
                }
                // - g g^T / s + g g^T / s^2
                let nz: Vec<(usize, f64)> = g
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0.0)
                    .map(|(i, &x)| (i, x))
                    .collect();
                let w = 1.0 / (s * s) - 1.0 / s;
                for &(i, gi) in &nz {
                    for &(j, gj) in &nz {
                        hess_u[(i, j)] += w * gi * gj;
                    }
                }
            }
            let g = frame.basis.tr_mul(&grad_u);
            let h = frame.basis.tr_mul(&(&hess_u * &frame.basis));
            let step = match newton_step(&h, &g) {
                Some(s) => s,
                None => break,
            };
            let slope = g.dot(&step);
            if -slope / 2.0 <= CENTERING_TOL {
                break;
            }
            let old: Vec<f64> = cons.iter().map(|con| con.eval(&u)).collect();
            let c_step = c_red.dot(&step);
            let mut alpha = 1.0;
            let mut accepted = false;
            let mut negligible = false;
            while alpha > 1e-20 {
                let cand = &v + step.scale(alpha);
                let uc = frame.point(&cand);
                let mut delta = t * alpha * c_step;
                let mut feasible = true;
                for (con, &h_old) in cons.iter().zip(&old) {
                    let h_new = con.eval(&uc);
                    if !(h_new < 0.0) {
                        feasible = false;
                        break;
                    }
                    delta += (-h_old).ln() - (-h_new).ln();
                }
                if feasible && delta <= 0.25 * alpha * slope {
                    accepted = cand != v;
                    negligible = alpha * step.amax() <= STEP_FLOOR * (1.0 + v.amax());
                    v = cand;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
            *iterations += 1;
            if negligible {
                break;
            }
            let u = frame.point(&v);
            if u.iter().any(|x| x.abs() > 700.0) {
                return BarrierRun {
                    v,
                    mu,
                    end: BarrierEnd::Unbounded,
                };
            }
            if stop(&u) {
                return BarrierRun {
                    v,
                    mu,
                    end: BarrierEnd::Stopped,
                };
            }
            if *iterations >= opts.max_iter {
                return BarrierRun {
                    v,
                    mu,
                    end: BarrierEnd::MaxIter,
                };
            }
        }
        log::trace!("barrier: centered at mu {mu:e} after {} Newton steps", *iterations);
        if mcons as f64 * mu < opts.tol {
            return BarrierRun {
                v,
                mu,
                end: BarrierEnd::Converged,
            };
        }
        mu /= opts.mu_factor;
    }
}

/// Solves `H step = -g`, regularizing `H` when it is not positive definite.
fn newton_step(h: &DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    let diag_max = h.diagonal().amax().max(1e-300);
    let mut reg = 0.0;
    for _ in 0..30 {
        let mut hr = h.clone();
        if reg > 0.0 {
            for i in 0..hr.nrows() {
                hr[(i, i)] += reg;
            }
        }
        if let Some(ch) = Cholesky::new(hr) {
            let step = -ch.solve(g);
            if step.iter().all(|x| x.is_finite()) {
                return Some(step);
            }
        }
        reg = if reg == 0.0 { 1e-12 * diag_max } else { reg * 10.0 };
    }
    None
}

/// Finds a strictly feasible reduced point for `cons` via the phase-I
/// program `min s  s.t. h_j(u) <= s, s >= -1`.
fn phase_one(
    cons: &[LogSumExp],
    frame: &Frame,
    v0: DVector<f64>,
    opts: &SolverOptions,
    iterations: &mut usize,
) -> Option<DVector<f64>> {
    let m = frame.base.len();
    let d = frame.basis.ncols();
    let u0 = frame.point(&v0);
    let worst = cons
        .iter()
        .map(|c| c.eval(&u0))
        .fold(f64::NEG_INFINITY, f64::max);
    let margin = -1e-9;
    if worst < margin {
        return Some(v0);
    }
    let mut aug_cons: Vec<LogSumExp> = cons
        .iter()
        .map(|c| LogSumExp {
            terms: c
                .terms
                .iter()
                .map(|t| {
                    let mut coeffs = t.coeffs.clone();
                    coeffs.push((m, -1.0));
                    AffineTerm {
                        coeffs,
                        offset: t.offset,
                    }
                })
                .collect(),
            label: c.label.clone(),
        })
        .collect();
    aug_cons.push(LogSumExp {
        terms: vec![AffineTerm {
            coeffs: vec![(m, -1.0)],
            offset: -1.0,
        }],
        label: "phase-one bound".into(),
    });
    let mut base = frame.base.clone().insert_row(m, 0.0);
    base[m] = 0.0;
    let mut basis = DMatrix::zeros(m + 1, d + 1);
    basis.view_mut((0, 0), (m, d)).copy_from(&frame.basis);
    basis[(m, d)] = 1.0;
    let aug = Frame { base, basis };
    let mut c = vec![0.0; m + 1];
    c[m] = 1.0;
    let mut v = v0.clone().insert_row(d, 0.0);
    v[d] = worst.max(0.0) + 1.0;
    let stop = |u: &[f64]| {
        cons.iter()
            .map(|con| con.eval(&u[..m]))
            .fold(f64::NEG_INFINITY, f64::max)
            < margin
    };
    let run = barrier(&c, &aug_cons, &aug, v, opts, iterations, &stop);
    match run.end {
        BarrierEnd::Stopped => Some(run.v.rows(0, d).into_owned()),
        _ => None,
    }
}

/// Solves `gp` to a duality gap below `opts.tol`.
///
/// Infeasibility, unboundedness and the iteration cap are reported through
/// [`GpSolution::status`]; only malformed programs produce `Err`.
pub fn solve_gp(gp: &GeometricProgram, opts: &SolverOptions) -> Result<GpSolution> {
    gp.validate()?;
    let mut prog = to_log_convex(gp);
    let n = prog.num_vars;

    // Linear objective, via an epigraph variable for multi-term objectives.
    let (c, cons, total_vars) = if prog.objective.terms.len() == 1 {
        let mut c = vec![0.0; n];
        for &(i, a) in &prog.objective.terms[0].coeffs {
            c[i] += a;
        }
        (c, prog.inequalities.clone(), n)
    } else {
        let mut cons = prog.inequalities.clone();
        cons.push(LogSumExp {
            terms: prog
                .objective
                .terms
                .iter()
                .map(|t| {
                    let mut coeffs = t.coeffs.clone();
                    coeffs.push((n, -1.0));
                    AffineTerm {
                        coeffs,
                        offset: t.offset,
                    }
                })
                .collect(),
            label: "epigraph".into(),
        });
        for row in prog.eq_matrix.iter_mut() {
            row.push(0.0);
        }
        prog.num_vars = n + 1;
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0;
        (c, cons, n + 1)
    };

    let mut anchor = match &opts.initial {
        InitialPoint::Auto => vec![0.0; n],
        InitialPoint::Seed(seed) => {
            if seed.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: seed.len(),
                });
            }
            if let Some(&x) = seed.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
                return Err(Error::Domain(format!("seed value {x} is not positive")));
            }
            seed.iter().map(|x| x.ln()).collect()
        }
    };
    if total_vars > n {
        // start the epigraph variable above the objective
        let obj = prog.objective.eval(&anchor[..n]);
        anchor.push(obj + 1.0);
    }

    let infeasible = |iterations| GpSolution {
        values: vec![f64::NAN; n],
        objective: f64::NAN,
        status: SolveStatus::Infeasible,
        iterations,
        kkt: KktResiduals::default(),
        duals: vec![],
    };
    let Some(frame) = equality_frame(&prog, &anchor) else {
        return Ok(infeasible(0));
    };
    let mut iterations = 0;
    let v0 = DVector::zeros(frame.basis.ncols());
    let Some(v0) = phase_one(&cons, &frame, v0, opts, &mut iterations) else {
        return Ok(infeasible(iterations));
    };
    let run = barrier(&c, &cons, &frame, v0, opts, &mut iterations, &|_| false);
    let status = match run.end {
        BarrierEnd::Converged | BarrierEnd::Stopped => SolveStatus::Optimal,
        BarrierEnd::Unbounded => SolveStatus::Unbounded,
        BarrierEnd::MaxIter => SolveStatus::MaxIter,
    };
    let u = frame.point(&run.v);

    // KKT diagnostics in the reduced space
    let mut lagr = DVector::from_column_slice(&c);
    let mut duals = Vec::with_capacity(cons.len());
    let mut gap = 0.0;
    let mut primal_inequality: f64 = 0.0;
    for con in &cons {
        let (h, _, g) = con.eval_with_gradient(&u);
        let lambda = run.mu / (-h);
        gap += lambda * (-h);
        primal_inequality = primal_inequality.max(h.exp() - 1.0);
        for (i, gi) in g.iter().enumerate() {
            lagr[i] += lambda * gi;
        }
        duals.push(lambda);
    }
    let stationarity = if frame.basis.ncols() == 0 {
        0.0
    } else {
        frame.basis.tr_mul(&lagr).amax()
    };
    let primal_equality = prog
        .eq_matrix
        .iter()
        .zip(&prog.eq_rhs)
        .map(|(row, &b)| (row.iter().zip(&u).map(|(a, x)| a * x).sum::<f64>() - b).abs())
        .fold(0.0, f64::max);
    duals.truncate(prog.inequalities.len());

    let values: Vec<f64> = u[..n].iter().map(|x| x.exp()).collect();
    let objective = prog.objective.eval(&u[..n]).exp();
    Ok(GpSolution {
        values,
        objective,
        status,
        iterations,
        kkt: KktResiduals {
            stationarity,
            duality_gap: gap,
            primal_inequality: primal_inequality.max(0.0),
            primal_equality,
        },
        duals,
    })
}
