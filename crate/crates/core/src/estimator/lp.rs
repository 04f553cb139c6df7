//! Dense bounded-variable primal simplex.
//!
//! Problems have the form `min c'x` subject to linear rows (`<=`, `>=`, `=`)
//! and `lower <= x <= upper` with finite bounds on every structural
//! variable. Nonbasic variables sit at one of their bounds; the ratio test
//! includes bound flips of the entering variable. Pricing is Dantzig's
//! largest reduced cost with ties going to the lowest index, and the solver
//! falls back to Bland's rule after a run of degenerate pivots.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;
const DEGENERATE_RUN: usize = 50;
const MAX_TABLEAU_ENTRIES: usize = 25_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub kind: RowKind,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<LpRow>,
    /// Optional starting point: nonbasic variables flagged `true` start at
    /// their upper bound instead of the lower one.
    pub start_at_upper: Option<Vec<bool>>,
}

impl LpProblem {
    /// `n` variables with zero cost and bounds `[0, 0]`.
    pub fn new(n: usize) -> Self {
        Self {
            objective: vec![0.0; n],
            lower: vec![0.0; n],
            upper: vec![0.0; n],
            rows: Vec::new(),
            start_at_upper: None,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lower[j] = lower;
        self.upper[j] = upper;
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, kind: RowKind, rhs: f64) {
        self.rows.push(LpRow { coeffs, kind, rhs });
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let viol = match row.kind {
                RowKind::Le => lhs - row.rhs,
                RowKind::Ge => row.rhs - lhs,
                RowKind::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::InvalidLp("bound vectors do not match the variable count".into()));
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if !l.is_finite() || !u.is_finite() {
                return Err(Error::InvalidLp(format!("variable {j} has a non-finite bound")));
            }
            if !self.objective[j].is_finite() {
                return Err(Error::InvalidLp(format!("variable {j} has a non-finite cost")));
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() || row.coeffs.iter().any(|&(j, a)| j >= n || !a.is_finite()) {
                return Err(Error::InvalidLp(format!("row {r} is malformed")));
            }
        }
        if let Some(start) = &self.start_at_upper {
            if start.len() != n {
                return Err(Error::InvalidLp("start vector length mismatch".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Structural variable values.
    pub values: Vec<f64>,
    pub objective: f64,
    /// Row multipliers `y` with reduced costs `c - A'y`.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `B^-1 A`, row-major.
    t: Vec<f64>,
    /// Original standard-form matrix, column-major, for the final refactor.
    a: Vec<f64>,
    rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    value: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    first_artificial: usize,
    iterations: usize,
    max_iterations: usize,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.cols + j]
    }

    fn build(lp: &LpProblem) -> Result<Self> {
        let n = lp.n_vars();
        let m = lp.rows.len();
        let n_slack = lp.rows.iter().filter(|r| r.kind != RowKind::Eq).count();
        // worst case one artificial per row
        let max_cols = n + n_slack + m;
        if m.saturating_mul(max_cols) > MAX_TABLEAU_ENTRIES {
            return Err(Error::DimensionOverflow {
                rows: m,
                cols: max_cols,
            });
        }

        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        let mut value: Vec<f64> = Vec::with_capacity(max_cols);
        let mut state = Vec::with_capacity(max_cols);
        for j in 0..n {
            let up = lp.start_at_upper.as_ref().is_some_and(|s| s[j]);
            if up {
                value.push(upper[j]);
                state.push(VarState::AtUpper);
            } else {
                value.push(lower[j]);
                state.push(VarState::AtLower);
            }
        }

        // dense rows of the structural part
        let mut dense = vec![0.0; m * n];
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                dense[i * n + j] += a;
            }
        }
        // column occupancy for singleton detection
        let mut nnz_col = vec![0usize; n];
        for i in 0..m {
            for j in 0..n {
                if dense[i * n + j] != 0.0 {
                    nnz_col[j] += 1;
                }
            }
        }

        // slack columns
        let mut extra_cols: Vec<(usize, f64)> = Vec::new();
        let mut slack_of_row = vec![None; m];
        for (i, row) in lp.rows.iter().enumerate() {
            let sign = match row.kind {
                RowKind::Le => 1.0,
                RowKind::Ge => -1.0,
                RowKind::Eq => continue,
            };
            slack_of_row[i] = Some(n + extra_cols.len());
            extra_cols.push((i, sign));
            lower.push(0.0);
            upper.push(f64::INFINITY);
            value.push(0.0);
            state.push(VarState::AtLower);
        }

        let mut basis = vec![usize::MAX; m];
        let mut pivot_coef = vec![0.0; m];
        let mut singleton_used = vec![false; n];
        let mut artificial_rows = Vec::new();
        for (i, row) in lp.rows.iter().enumerate() {
            let lhs: f64 = (0..n).map(|j| dense[i * n + j] * value[j]).sum();
            let r = row.rhs - lhs;
            if let Some(s) = slack_of_row[i] {
                let sign = extra_cols[s - n].1;
                if r * sign >= 0.0 {
                    basis[i] = s;
                    pivot_coef[i] = sign;
                    value[s] = r * sign;
                    state[s] = VarState::Basic;
                    continue;
                }
            }
            let crash = (0..n).find(|&j| {
                let a = dense[i * n + j];
                if a == 0.0 || nnz_col[j] != 1 || singleton_used[j] {
                    return false;
                }
                let v = value[j] + r / a;
                v >= lower[j] - 1e-12 && v <= upper[j] + 1e-12
            });
            if let Some(j) = crash {
                let a = dense[i * n + j];
                singleton_used[j] = true;
                basis[i] = j;
                pivot_coef[i] = a;
                value[j] = (value[j] + r / a).clamp(lower[j], upper[j]);
                state[j] = VarState::Basic;
                continue;
            }
            artificial_rows.push((i, r));
        }
        let first_artificial = n + extra_cols.len();
        for &(i, r) in &artificial_rows {
            let sign = if r >= 0.0 { 1.0 } else { -1.0 };
            let col = n + extra_cols.len();
            extra_cols.push((i, sign));
            lower.push(0.0);
            upper.push(f64::INFINITY);
            value.push(r.abs());
            state.push(VarState::Basic);
            basis[i] = col;
            pivot_coef[i] = sign;
        }

        let cols = n + extra_cols.len();
        let mut a = vec![0.0; m * cols];
        for i in 0..m {
            for j in 0..n {
                a[j * m + i] = dense[i * n + j];
            }
        }
        for (k, &(i, sign)) in extra_cols.iter().enumerate() {
            a[(n + k) * m + i] = sign;
        }
        let mut t = vec![0.0; m * cols];
        for i in 0..m {
            let inv = 1.0 / pivot_coef[i];
            for j in 0..cols {
                t[i * cols + j] = a[j * m + i] * inv;
            }
        }

        Ok(Self {
            rows: m,
            cols,
            t,
            a,
            rhs: lp.rows.iter().map(|r| r.rhs).collect(),
            lower,
            upper,
            value,
            state,
            basis,
            first_artificial,
            iterations: 0,
            max_iterations: 10_000 + 50 * (m + cols),
        })
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[i * self.cols..(i + 1) * self.cols];
            for (dj, tij) in d.iter_mut().zip(row) {
                *dj -= cb * tij;
            }
        }
        d
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let cols = self.cols;
        let piv = self.t[r * cols + q];
        let inv = 1.0 / piv;
        for j in 0..cols {
            self.t[r * cols + j] *= inv;
        }
        let (before, rest) = self.t.split_at_mut(r * cols);
        let (prow, after) = rest.split_at_mut(cols);
        for chunk in before.chunks_exact_mut(cols).chain(after.chunks_exact_mut(cols)) {
            let f = chunk[q];
            if f != 0.0 {
                for (c, p) in chunk.iter_mut().zip(prow.iter()) {
                    *c -= f * p;
                }
                chunk[q] = 0.0;
            }
        }
        let leaving = self.basis[r];
        self.basis[r] = q;
        self.state[q] = VarState::Basic;
        // the caller has already placed `leaving` at a bound value
        let lv = self.value[leaving];
        self.state[leaving] = if (lv - self.upper[leaving]).abs() <= (lv - self.lower[leaving]).abs() {
            VarState::AtUpper
        } else {
            VarState::AtLower
        };
    }

    /// Runs simplex iterations on `cost` until optimal. Columns flagged in
    /// `frozen` never enter.
    fn optimize(&mut self, cost: &[f64], frozen: &[bool]) -> Result<()> {
        let mut degenerate = 0usize;
        let mut d = self.reduced_costs(cost);
        loop {
            if self.iterations >= self.max_iterations {
                return Err(Error::CyclingGuard {
                    iterations: self.iterations,
                });
            }
            let bland = degenerate > DEGENERATE_RUN;
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.cols {
                if frozen[j] || self.lower[j] == self.upper[j] {
                    continue;
                }
                let score = match self.state[j] {
                    VarState::Basic => continue,
                    VarState::AtLower if d[j] < -DUAL_TOL => -d[j],
                    VarState::AtUpper if d[j] > DUAL_TOL => d[j],
                    _ => continue,
                };
                match entering {
                    None => entering = Some((j, score)),
                    Some((_, best)) if !bland && score > best => entering = Some((j, score)),
                    _ => {}
                }
                if bland && entering.is_some() {
                    break;
                }
            }
            let Some((q, _)) = entering else {
                return Ok(());
            };
            self.iterations += 1;
            let dir = if self.state[q] == VarState::AtLower {
                1.0
            } else {
                -1.0
            };

            // ratio test
            let mut step = self.upper[q] - self.lower[q];
            let mut leave: Option<(usize, bool)> = None;
            let mut leave_alpha = 0.0f64;
            for i in 0..self.rows {
                let alpha = self.at(i, q);
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let b = self.basis[i];
                let rate = -dir * alpha;
                let (limit, to_upper) = if rate < 0.0 {
                    (((self.value[b] - self.lower[b]) / -rate).max(0.0), false)
                } else if self.upper[b].is_finite() {
                    (((self.upper[b] - self.value[b]) / rate).max(0.0), true)
                } else {
                    continue;
                };
                let better = match leave {
                    _ if limit < step - 1e-12 => true,
                    None => false,
                    Some((r, _)) if limit <= step + 1e-12 => {
                        if bland {
                            b < self.basis[r]
                        } else {
                            alpha.abs() > leave_alpha.abs()
                                || (alpha.abs() == leave_alpha.abs() && b < self.basis[r])
                        }
                    }
                    _ => false,
                };
                if better {
                    step = step.min(limit);
                    leave = Some((i, to_upper));
                    leave_alpha = alpha;
                }
            }
            if !step.is_finite() {
                return Err(Error::InvalidLp("problem is unbounded".into()));
            }
            if step <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }

            for i in 0..self.rows {
                let alpha = self.at(i, q);
                if alpha != 0.0 {
                    let b = self.basis[i];
                    self.value[b] -= dir * alpha * step;
                }
            }
            match leave {
                None => {
                    // bound flip, basis unchanged
                    if dir > 0.0 {
                        self.value[q] = self.upper[q];
                        self.state[q] = VarState::AtUpper;
                    } else {
                        self.value[q] = self.lower[q];
                        self.state[q] = VarState::AtLower;
                    }
                }
                Some((r, to_upper)) => {
                    self.value[q] += dir * step;
                    let b = self.basis[r];
                    self.value[b] = if to_upper { self.upper[b] } else { self.lower[b] };
                    self.pivot(r, q);
                    d = self.reduced_costs(cost);
                }
            }
        }
    }

    fn basis_matrix(&self) -> DMatrix<f64> {
        let m = self.rows;
        DMatrix::from_fn(m, m, |i, k| self.a[self.basis[k] * m + i])
    }

    /// Recomputes basic values and row duals from the original matrix.
    fn refactor(&mut self, cost: &[f64]) -> Vec<f64> {
        let m = self.rows;
        if m == 0 {
            return Vec::new();
        }
        let b = self.basis_matrix();
        let lu = b.clone().lu();
        let mut rhs = DVector::from_vec(self.rhs.clone());
        for j in 0..self.cols {
            if self.state[j] != VarState::Basic && self.value[j] != 0.0 {
                for i in 0..m {
                    rhs[i] -= self.a[j * m + i] * self.value[j];
                }
            }
        }
        if let Some(xb) = lu.solve(&rhs) {
            for (i, &bv) in self.basis.iter().enumerate() {
                self.value[bv] = xb[i];
            }
        }
        let cb = DVector::from_iterator(m, self.basis.iter().map(|&j| cost[j]));
        b.transpose()
            .lu()
            .solve(&cb)
            .map(|y| y.iter().copied().collect())
            .unwrap_or_else(|| vec![0.0; m])
    }
}

/// Solves `lp` to optimality or proves it infeasible.
pub fn solve_lp(lp: &LpProblem) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.n_vars();
    let mut tab = Tableau::build(lp)?;
    let cols = tab.cols;

    let mut frozen = vec![false; cols];
    if tab.first_artificial < cols {
        let mut phase1 = vec![0.0; cols];
        phase1[tab.first_artificial..].iter_mut().for_each(|c| *c = 1.0);
        tab.optimize(&phase1, &frozen)?;
        let infeasibility: f64 = (tab.first_artificial..cols).map(|j| tab.value[j]).sum();
        let scale = 1.0 + tab.rhs.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        if infeasibility > FEAS_TOL * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                values: tab.value[..n].to_vec(),
                objective: f64::NAN,
                duals: vec![0.0; tab.rows],
                iterations: tab.iterations,
            });
        }
        // drive zero-valued artificials out of the basis where possible
        for r in 0..tab.rows {
            if tab.basis[r] < tab.first_artificial {
                continue;
            }
            let q = (0..tab.first_artificial)
                .filter(|&j| tab.state[j] != VarState::Basic && tab.lower[j] < tab.upper[j])
                .find(|&j| tab.at(r, j).abs() > 1e-7);
            if let Some(q) = q {
                let leaving = tab.basis[r];
                tab.value[leaving] = 0.0;
                tab.pivot(r, q);
                tab.state[leaving] = VarState::AtLower;
            }
        }
        for j in tab.first_artificial..cols {
            tab.upper[j] = 0.0;
            frozen[j] = true;
            if tab.state[j] != VarState::Basic {
                tab.value[j] = 0.0;
            }
        }
    }

    let mut cost = lp.objective.clone();
    cost.resize(cols, 0.0);
    tab.optimize(&cost, &frozen)?;
    let duals = tab.refactor(&cost);
    let values = tab.value[..n].to_vec();
    let objective = lp.objective_at(&values);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        values,
        objective,
        duals,
        iterations: tab.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sentinel_only_geometry() {
        // min t  s.t. t >= -v, t >= 0, v in [-100, 100]
        let mut lp = LpProblem::new(2);
        lp.objective = vec![1.0, 0.0];
        lp.set_bounds(0, -1e4, 1e4);
        lp.set_bounds(1, -100.0, 100.0);
        lp.add_row(vec![(0, 1.0), (1, 1.0)], RowKind::Ge, 0.0);
        lp.add_row(vec![(0, 1.0)], RowKind::Ge, 0.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_abs_diff_eq!(sol.objective, 0.0, epsilon = 1e-12);
        assert!(lp.max_violation(&sol.values) <= 1e-9);
    }

    /// Brute-force vertex enumeration for a 3-variable LP with box bounds.
    fn enumerate_vertices(lp: &LpProblem) -> f64 {
        // planes: rows as equalities plus the six box faces
        let mut planes: Vec<([f64; 3], f64)> = Vec::new();
        for row in &lp.rows {
            let mut a = [0.0; 3];
            for &(j, c) in &row.coeffs {
                a[j] += c;
            }
            planes.push((a, row.rhs));
        }
        for j in 0..3 {
            let mut a = [0.0; 3];
            a[j] = 1.0;
            planes.push((a, lp.lower[j]));
            planes.push((a, lp.upper[j]));
        }
        let mut best = f64::INFINITY;
        let k = planes.len();
        for a in 0..k {
            for b in a + 1..k {
                for c in b + 1..k {
                    let m = DMatrix::from_row_slice(
                        3,
                        3,
                        &[
                            planes[a].0[0], planes[a].0[1], planes[a].0[2],
                            planes[b].0[0], planes[b].0[1], planes[b].0[2],
                            planes[c].0[0], planes[c].0[1], planes[c].0[2],
                        ],
                    );
                    let rhs = DVector::from_vec(vec![planes[a].1, planes[b].1, planes[c].1]);
                    if m.determinant().abs() < 1e-12 {
                        continue;
                    }
                    let x = m.lu().solve(&rhs).unwrap();
                    let x = [x[0], x[1], x[2]];
                    if lp.max_violation(&x) <= 1e-9 {
                        best = best.min(lp.objective_at(&x));
                    }
                }
            }
        }
        best
    }

    #[test]
    fn three_variable_vertex() {
        // max 3x + 2y + 4z  s.t. x + y + 2z <= 4, 2x + z <= 5, x + 3y >= 1
        let mut lp = LpProblem::new(3);
        lp.objective = vec![-3.0, -2.0, -4.0];
        for j in 0..3 {
            lp.set_bounds(j, 0.0, 10.0);
        }
        lp.add_row(vec![(0, 1.0), (1, 1.0), (2, 2.0)], RowKind::Le, 4.0);
        lp.add_row(vec![(0, 2.0), (2, 1.0)], RowKind::Le, 5.0);
        lp.add_row(vec![(0, 1.0), (1, 3.0)], RowKind::Ge, 1.0);
        let sol = solve_lp(&lp).unwrap();
        let oracle = enumerate_vertices(&lp);
        // vertex (2.5, 1.5, 0): objective -10.5
        assert_abs_diff_eq!(oracle, -10.5, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.objective, oracle, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.values[0], 2.5, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.values[1], 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.values[2], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn equality_rows_and_duals() {
        // min x + 2y s.t. x + y = 3, x - y <= 1, 0 <= x,y <= 5
        let mut lp = LpProblem::new(2);
        lp.objective = vec![1.0, 2.0];
        lp.set_bounds(0, 0.0, 5.0);
        lp.set_bounds(1, 0.0, 5.0);
        lp.add_row(vec![(0, 1.0), (1, 1.0)], RowKind::Eq, 3.0);
        lp.add_row(vec![(0, 1.0), (1, -1.0)], RowKind::Le, 1.0);
        let sol = solve_lp(&lp).unwrap();
        assert_abs_diff_eq!(sol.values[0], 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.values[1], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.objective, 4.0, epsilon = 1e-9);
        // strong duality: b'y plus bound terms; here no bound is active
        let dual_obj = 3.0 * sol.duals[0] + 1.0 * sol.duals[1];
        assert_abs_diff_eq!(dual_obj, 4.0, epsilon = 1e-9);
    }

    #[test]
    fn contradictory_bounds_infeasible() {
        let mut lp = LpProblem::new(2);
        lp.objective = vec![1.0, 1.0];
        lp.set_bounds(0, 1.0, 1.0);
        lp.set_bounds(1, 2.0, 2.0);
        lp.add_row(vec![(0, 1.0), (1, 1.0)], RowKind::Eq, 5.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn rejects_infinite_bounds() {
        let mut lp = LpProblem::new(1);
        lp.set_bounds(0, 0.0, f64::INFINITY);
        assert!(matches!(solve_lp(&lp), Err(Error::InvalidLp(_))));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LpProblem::new(2);
        lp.objective = vec![1.0, -1.0];
        lp.set_bounds(0, 0.0, 4.0);
        lp.set_bounds(1, 0.0, 4.0);
        lp.add_row(vec![(0, 1.0), (1, 1.0)], RowKind::Eq, 4.0);
        lp.add_row(vec![(0, 2.0), (1, 2.0)], RowKind::Eq, 8.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_abs_diff_eq!(sol.objective, -4.0, epsilon = 1e-9);
    }

    #[test]
    fn deterministic() {
        let mut lp = LpProblem::new(3);
        lp.objective = vec![1.0, 1.0, 1.0];
        for j in 0..3 {
            lp.set_bounds(j, -3.0, 3.0);
        }
        lp.add_row(vec![(0, 1.0), (1, 1.0)], RowKind::Ge, 1.0);
        lp.add_row(vec![(1, 1.0), (2, 1.0)], RowKind::Ge, 1.0);
        lp.add_row(vec![(0, 1.0), (2, 1.0)], RowKind::Ge, 1.0);
        let a = solve_lp(&lp).unwrap();
        let b = solve_lp(&lp).unwrap();
        assert_eq!(a, b);
        assert_abs_diff_eq!(a.objective, 1.5, epsilon = 1e-9);
    }
}
