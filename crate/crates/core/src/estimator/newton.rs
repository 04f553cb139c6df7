use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::loss;

/// A smooth convex per-row loss `g(u)`.
pub(crate) trait SmoothLoss {
    fn value(u: f64) -> f64;
    fn grad(u: f64) -> f64;
    fn curv(u: f64) -> f64;
}

pub(crate) struct Logistic;

impl SmoothLoss for Logistic {
    fn value(u: f64) -> f64 {
        loss::logistic_loss(u)
    }
    fn grad(u: f64) -> f64 {
        loss::logistic_loss_grad(u)
    }
    fn curv(u: f64) -> f64 {
        loss::logistic_loss_curv(u)
    }
}

pub(crate) struct Quadratic;

impl SmoothLoss for Quadratic {
    fn value(u: f64) -> f64 {
        loss::quad_loss(u)
    }
    fn grad(u: f64) -> f64 {
        loss::quad_loss_grad(u)
    }
    fn curv(_: f64) -> f64 {
        loss::QUAD_LOSS_CURV
    }
}

pub(crate) const MAX_ITER: usize = 100;
pub(crate) const GRAD_TOL: f64 = 1e-8;
const STEP_TOL: f64 = 1e-6;
const ARMIJO: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;
pub(crate) const RIDGE: f64 = 1e-10;

pub(crate) struct NewtonOutcome {
    pub theta: DVector<f64>,
    pub loss: f64,
    pub iterations: usize,
    pub converged: bool,
    pub box_active: bool,
}

pub(crate) fn total_loss<L: SmoothLoss>(u: &DVector<f64>) -> f64 {
    u.iter().map(|&v| L::value(v)).sum()
}

/// Solves `h d = rhs` by Cholesky, retrying once with a relative ridge.
pub(crate) fn spd_solve(h: DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(ch) = h.clone().cholesky() {
        return Ok(ch.solve(rhs));
    }
    let dim = h.nrows();
    let diag = h.diagonal();
    let max_diag = diag.iter().fold(0.0f64, |a, &b| a.max(b));
    let min_diag = diag.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let mut jittered = h;
    let ridge = RIDGE * max_diag.max(1.0);
    for i in 0..dim {
        jittered[(i, i)] += ridge;
    }
    jittered
        .cholesky()
        .map(|ch| ch.solve(rhs))
        .ok_or(Error::LinearSolve {
            dim,
            min_diag,
            max_diag,
        })
}

/// Box-constrained damped Newton on `sum_i g(a_i . theta)`, starting at 0.
///
/// Coordinates resting on a bound with the gradient pointing outward are
/// held fixed for the step. Termination requires both a projected gradient
/// below `GRAD_TOL` and a Newton step below `STEP_TOL`, so on separable data
/// the iterate keeps moving out until it reaches the box.
pub(crate) fn projected_newton<L: SmoothLoss>(a: &DMatrix<f64>, bound: f64) -> Result<NewtonOutcome> {
    let d = a.ncols();
    let mut theta = DVector::<f64>::zeros(d);
    let mut u = a * &theta;
    let mut loss = total_loss::<L>(&u);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < MAX_ITER {
        let g = a.tr_mul(&u.map(L::grad));
        let free: Vec<usize> = (0..d)
            .filter(|&j| {
                let at_low = theta[j] <= -bound && g[j] > 0.0;
                let at_high = theta[j] >= bound && g[j] < 0.0;
                !(at_low || at_high)
            })
            .collect();
        let pg = free.iter().fold(0.0f64, |acc, &j| acc.max(g[j].abs()));

        let mut step = DVector::<f64>::zeros(d);
        if !free.is_empty() {
            let w = u.map(L::curv);
            let af = DMatrix::from_fn(a.nrows(), free.len(), |i, c| a[(i, free[c])]);
            let weighted = DMatrix::from_fn(af.nrows(), af.ncols(), |i, c| af[(i, c)] * w[i]);
            let h = af.tr_mul(&weighted);
            let gf = DVector::from_iterator(free.len(), free.iter().map(|&j| -g[j]));
            let df = spd_solve(h, &gf)?;
            for (c, &j) in free.iter().enumerate() {
                step[j] = df[c];
            }
        }
        let step_norm = step.amax();
        if pg <= GRAD_TOL && step_norm <= STEP_TOL {
            converged = true;
            break;
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial = (&theta + &step * alpha).map(|v| v.clamp(-bound, bound));
            let delta = &trial - &theta;
            if delta.amax() == 0.0 {
                break;
            }
            let ut = a * &trial;
            let lt = total_loss::<L>(&ut);
            if lt <= loss + ARMIJO * g.dot(&delta) {
                accepted = Some((trial, ut, lt));
                break;
            }
            alpha *= BACKTRACK;
        }
        match accepted {
            Some((t, ut, lt)) => {
                theta = t;
                u = ut;
                loss = lt;
                iterations += 1;
            }
            None => {
                // no representable decrease left
                converged = pg <= GRAD_TOL;
                break;
            }
        }
    }

    let box_active = theta.iter().any(|v| v.abs() >= bound);
    Ok(NewtonOutcome {
        theta,
        loss,
        iterations,
        converged: converged && !box_active,
        box_active,
    })
}
