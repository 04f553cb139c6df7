//! Per-class estimation for a fixed feature subset.
//!
//! The sequential logit likelihood separates over classes: subproblem `k`
//! only involves rows with `psi_ik != 0`, each contributing
//! `g(psi_ik (w_k . x_i + b_k))`. This module minimizes that sum for the
//! exact logistic loss, its quadratic surrogate and the tangent-line
//! underestimator.

mod likelihood;
pub mod lp;
mod newton;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, OrdinalEncoding};
use crate::error::{Error, Result};
use crate::loss::{pwl_loss, TangentSet};

pub use likelihood::{log_likelihood, log_likelihood_product, predict_proba, SeqLogitParams};
pub use lp::{solve_lp, LpProblem, LpRow, LpSolution, LpStatus, RowKind};

/// Box on every coefficient and intercept, shared by all three fits.
pub const PARAM_BOX: f64 = 100.0;

/// Relative agreement required between the LP objective and the primal
/// recomputation in [`fit_pwl`].
pub const PWL_REL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    Exact,
    Quad,
    Pwl,
}

impl FitMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            FitMethod::Exact => "exact",
            FitMethod::Quad => "quad",
            FitMethod::Pwl => "pwl",
        }
    }
}

/// One binary subproblem restricted to a set of active features.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassProblem {
    k: usize,
    rows: Vec<usize>,
    signs: Vec<f64>,
    features: Vec<usize>,
    /// Active feature columns followed by an intercept column of ones.
    design: DMatrix<f64>,
    /// `design` with each row multiplied by its sign.
    signed: DMatrix<f64>,
}

impl ClassProblem {
    pub fn new(
        k: usize,
        rows: Vec<usize>,
        signs: Vec<f64>,
        features: Vec<usize>,
        design: DMatrix<f64>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidDataset(format!("class {} has no active rows", k + 1)));
        }
        if signs.len() != rows.len() || design.nrows() != rows.len() {
            return Err(Error::InvalidDataset("row count mismatch in class problem".into()));
        }
        if design.ncols() != features.len() + 1 {
            return Err(Error::InvalidDataset("design must hold features plus intercept".into()));
        }
        if signs.iter().any(|&s| s != 1.0 && s != -1.0) {
            return Err(Error::InvalidDataset("signs must be +1 or -1".into()));
        }
        let signed = DMatrix::from_fn(design.nrows(), design.ncols(), |i, j| signs[i] * design[(i, j)]);
        Ok(Self {
            k,
            rows,
            signs,
            features,
            design,
            signed,
        })
    }

    /// Builds subproblem `k` (0-based) on the given features, which are used
    /// in ascending index order.
    pub fn build(data: &Dataset, enc: &OrdinalEncoding, k: usize, features: &[usize]) -> Result<Self> {
        let (rows, signs) = enc.active_rows(k);
        Self::from_rows(data.x(), k, rows, signs, features)
    }

    pub(crate) fn from_rows(
        x: &DMatrix<f64>,
        k: usize,
        rows: Vec<usize>,
        signs: Vec<f64>,
        features: &[usize],
    ) -> Result<Self> {
        let mut features = features.to_vec();
        features.sort_unstable();
        features.dedup();
        if let Some(&bad) = features.iter().find(|&&j| j >= x.ncols()) {
            return Err(Error::InvalidDataset(format!("feature index {bad} out of range")));
        }
        let q = features.len();
        let design = DMatrix::from_fn(rows.len(), q + 1, |i, c| {
            if c == q {
                1.0
            } else {
                x[(rows[i], features[c])]
            }
        });
        Self::new(k, rows, signs, features, design)
    }

    /// Intercept-only problem with the given signs, handy for closed forms.
    pub fn intercept_only(signs: Vec<f64>) -> Result<Self> {
        let n = signs.len();
        Self::new(0, (0..n).collect(), signs, Vec::new(), DMatrix::from_element(n, 1, 1.0))
    }

    pub fn class_index(&self) -> usize {
        self.k
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    pub fn features(&self) -> &[usize] {
        &self.features
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    /// Number of parameters, features plus intercept.
    pub fn dim(&self) -> usize {
        self.design.ncols()
    }

    /// Signed margins `psi_i (w . x_i + b)` for a parameter vector laid out
    /// as `[w..., b]`.
    pub fn margins(&self, theta: &[f64]) -> Vec<f64> {
        let t = DVector::from_column_slice(theta);
        (&self.signed * t).iter().copied().collect()
    }

    pub fn exact_loss(&self, theta: &[f64]) -> f64 {
        self.margins(theta).into_iter().map(crate::loss::logistic_loss).sum()
    }

    pub fn quad_loss(&self, theta: &[f64]) -> f64 {
        self.margins(theta).into_iter().map(crate::loss::quad_loss).sum()
    }

    pub fn pwl_loss(&self, tset: &TangentSet, theta: &[f64]) -> f64 {
        self.margins(theta).into_iter().map(|u| pwl_loss(tset, u)).sum()
    }

    /// Gradient of the exact loss with respect to `[w..., b]`.
    pub fn exact_grad(&self, theta: &[f64]) -> Vec<f64> {
        let u = DVector::from_vec(self.margins(theta));
        self.signed
            .tr_mul(&u.map(crate::loss::logistic_loss_grad))
            .iter()
            .copied()
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub method: FitMethod,
    /// Coefficients over the problem's active features, in ascending index order.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// Attained value of the method's own loss.
    pub loss: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Some parameter sits on the `PARAM_BOX` boundary.
    pub box_active: bool,
}

impl FitResult {
    fn from_theta(method: FitMethod, theta: &[f64], loss: f64, converged: bool, iterations: usize) -> Self {
        let (w, b) = theta.split_at(theta.len() - 1);
        Self {
            method,
            coefficients: w.to_vec(),
            intercept: b[0],
            loss,
            converged,
            iterations,
            box_active: theta.iter().any(|v| v.abs() >= PARAM_BOX),
        }
    }

    pub fn theta(&self) -> Vec<f64> {
        let mut t = self.coefficients.clone();
        t.push(self.intercept);
        t
    }
}

/// Maximum likelihood for one subproblem by box-constrained damped Newton.
pub fn fit_exact(prob: &ClassProblem) -> Result<FitResult> {
    let out = newton::projected_newton::<newton::Logistic>(&prob.signed, PARAM_BOX)?;
    let theta: Vec<f64> = out.theta.iter().copied().collect();
    let mut fit = FitResult::from_theta(FitMethod::Exact, &theta, out.loss, out.converged, out.iterations);
    fit.box_active = out.box_active;
    Ok(fit)
}

/// Minimizer of the quadratic surrogate. Because `psi^2 = 1` on active rows
/// this is least squares of the design against targets `2 psi`.
pub fn fit_quad(prob: &ClassProblem) -> Result<FitResult> {
    let out = newton::projected_newton::<newton::Quadratic>(&prob.signed, PARAM_BOX)?;
    let theta: Vec<f64> = out.theta.iter().copied().collect();
    let mut fit = FitResult::from_theta(FitMethod::Quad, &theta, out.loss, out.converged, out.iterations);
    fit.box_active = out.box_active;
    Ok(fit)
}

/// Minimizer of the tangent-line underestimator; see [`fit_pwl_from`].
/// Tangent-line fit, simplex seeded from the exact fit. Starting near the
/// optimum saves most of the segment bound flips a cold start needs.
pub fn fit_pwl(prob: &ClassProblem, tset: &TangentSet) -> Result<FitResult> {
    match fit_exact(prob) {
        Ok(exact) => fit_pwl_from(prob, tset, Some(&exact.theta())),
        Err(_) => fit_pwl_from(prob, tset, None),
    }
}

/// The LP
///
/// ```text
/// min sum_i t_i   s.t.  t_i >= a_l u_i + c_l,  u_i = psi_i (w . x_i + b),  |w|, |b| <= 100
/// ```
///
/// is solved through its dual, which has one equality row per parameter
/// instead of one row per (sample, tangent) pair. Dual variable `e_il` is the
/// portion of slope segment `[a_l, a_{l+1}]` taken by sample `i`; the
/// parameters are the row multipliers of the optimal basis. `start`, when
/// given, seeds the segment variables from the margins at that point.
pub fn fit_pwl_from(prob: &ClassProblem, tset: &TangentSet, start: Option<&[f64]>) -> Result<FitResult> {
    let (lp, layout) = pwl_dual_lp(prob, tset, start)?;
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::InvalidLp("tangent LP reported infeasible".into()));
    }
    let theta: Vec<f64> = sol.duals.iter().map(|y| y.clamp(-PARAM_BOX, PARAM_BOX)).collect();
    let loss = prob.pwl_loss(tset, &theta);
    let dual_value = layout.constant - sol.objective;
    let gap = (loss - dual_value).abs();
    if gap > PWL_REL_TOL * (1.0 + loss.abs()) {
        return Err(Error::InvalidLp(format!(
            "tangent LP duality gap {gap:e} (primal {loss}, dual {dual_value})"
        )));
    }
    Ok(FitResult::from_theta(FitMethod::Pwl, &theta, loss, true, sol.iterations))
}

struct PwlLayout {
    constant: f64,
}

fn pwl_dual_lp(prob: &ClassProblem, tset: &TangentSet, start: Option<&[f64]>) -> Result<(LpProblem, PwlLayout)> {
    let lines = tset.lines();
    if lines.len() < 2 {
        return Err(Error::InvalidTangents("need at least two lines".into()));
    }
    let a = &prob.signed;
    let (n, d) = (a.nrows(), a.ncols());
    let segs = lines.len() - 1;
    let kinks = tset.kinks();
    let a0 = lines[0].slope;
    let a_span = lines[0].slope.abs().max(lines[segs].slope.abs());

    // columns: [pi+_0, pi-_0, ..., pi+_{d-1}, pi-_{d-1}, e_00, e_01, ...]
    let n_vars = 2 * d + n * segs;
    let mut lp = LpProblem::new(n_vars);
    let mut start_up = vec![false; n_vars];
    let margins = start.map(|t| prob.margins(t));
    for j in 0..d {
        let col_abs: f64 = (0..n).map(|i| a[(i, j)].abs()).sum();
        let cap = col_abs * a_span + 1.0;
        for s in 0..2 {
            lp.objective[2 * j + s] = PARAM_BOX;
            lp.set_bounds(2 * j + s, 0.0, cap);
        }
    }
    for i in 0..n {
        for l in 0..segs {
            let col = 2 * d + i * segs + l;
            lp.objective[col] = kinks[l];
            lp.set_bounds(col, 0.0, lines[l + 1].slope - lines[l].slope);
            start_up[col] = match &margins {
                Some(u) => u[i] >= kinks[l],
                None => 0.0 >= kinks[l],
            };
        }
    }
    for j in 0..d {
        let mut coeffs = Vec::with_capacity(2 + n * segs);
        coeffs.push((2 * j, 1.0));
        coeffs.push((2 * j + 1, -1.0));
        let mut col_sum = 0.0;
        for i in 0..n {
            let aij = a[(i, j)];
            col_sum += aij;
            if aij != 0.0 {
                for l in 0..segs {
                    coeffs.push((2 * d + i * segs + l, aij));
                }
            }
        }
        lp.add_row(coeffs, RowKind::Eq, -a0 * col_sum);
    }
    lp.start_at_upper = Some(start_up);
    let constant = n as f64 * lines[0].offset;
    Ok((lp, PwlLayout { constant }))
}

/// The primal tangent LP with explicit `t_i` variables and one row per
/// (sample, line) pair. Variables are `[w..., b, t_0, ..., t_{n-1}]`. Used to
/// cross-check [`fit_pwl`] on small problems.
pub fn pwl_primal_lp(prob: &ClassProblem, tset: &TangentSet) -> LpProblem {
    let a = &prob.signed;
    let (n, d) = (a.nrows(), a.ncols());
    let mut lp = LpProblem::new(d + n);
    for j in 0..d {
        lp.set_bounds(j, -PARAM_BOX, PARAM_BOX);
    }
    // every line is bounded on the box, so this cap is never active
    let row_cap: Vec<f64> = (0..n)
        .map(|i| (0..d).map(|j| a[(i, j)].abs()).sum::<f64>() * PARAM_BOX + 10.0)
        .collect();
    for i in 0..n {
        lp.objective[d + i] = 1.0;
        lp.set_bounds(d + i, -row_cap[i], row_cap[i]);
        for line in tset.lines() {
            let mut coeffs = vec![(d + i, 1.0)];
            for j in 0..d {
                if a[(i, j)] != 0.0 {
                    coeffs.push((j, -line.slope * a[(i, j)]));
                }
            }
            lp.add_row(coeffs, RowKind::Ge, line.offset);
        }
    }
    lp
}

/// Fits every class on the same feature subset.
pub fn fit_all(
    data: &Dataset,
    enc: &OrdinalEncoding,
    features: &[usize],
    method: FitMethod,
    tset: Option<&TangentSet>,
) -> Result<Vec<FitResult>> {
    (0..enc.m())
        .map(|k| {
            let prob = ClassProblem::build(data, enc, k, features)?;
            match method {
                FitMethod::Exact => fit_exact(&prob),
                FitMethod::Quad => fit_quad(&prob),
                FitMethod::Pwl => {
                    let t = tset.ok_or_else(|| Error::InvalidOption("pwl fit needs a tangent set".into()))?;
                    fit_pwl(&prob, t)
                }
            }
        })
        .collect()
}
