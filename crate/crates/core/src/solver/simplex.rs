//! Bounded-variable primal simplex on a dense tableau.
//!
//! The input program is rewritten as `max c.z, A z = b, 0 <= z <= u, b >= 0`
//! (shifting, flipping or splitting variables as their bounds require). Rows
//! whose slack cannot start basic get an artificial column and a phase-one pass.

use super::linalg::lu_solve;
use super::{LinearProgram, LpSolver, Relation, SolveResult, SolveStatus};
use crate::error::Result;
use crate::num::Real;

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Absolute primal feasibility tolerance.
    pub feasibility_tol: f64,
    /// Reduced-cost tolerance, relative to the largest objective coefficient.
    pub optimality_tol: f64,
    /// Pivot cap; `None` means `10 * (rows + columns)`.
    pub max_pivots: Option<usize>,
    /// Consecutive degenerate pivots after which pricing switches to Bland's rule.
    pub degenerate_streak: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { feasibility_tol: 1e-8, optimality_tol: 1e-9, max_pivots: None, degenerate_streak: 32 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Simplex {
    pub options: SimplexOptions,
}

impl Simplex {
    pub fn new(options: SimplexOptions) -> Self {
        Self { options }
    }
}

impl<T: Real> LpSolver<T> for Simplex {
    fn solve_lp(&mut self, lp: &LinearProgram<T>) -> Result<SolveResult<T>> {
        lp.validate()?;
        Ok(solve(lp, &self.options))
    }
}

/// How an original variable maps onto standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap<T> {
    /// `x = lo + z`
    Shift(usize, T),
    /// `x = hi - z`
    Flip(usize, T),
    /// `x = z_pos - z_neg`
    Split(usize, usize),
}

struct Tableau<T> {
    rows: usize,
    cols: usize,
    /// Row-major `rows x cols`, holds `B^-1 A`.
    t: Vec<T>,
    /// Original standard-form matrix, kept for the final basic-value refinement.
    a: Vec<T>,
    b: Vec<T>,
    upper: Vec<T>,
    x: Vec<T>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    at_upper: Vec<bool>,
    artificial_from: usize,
    d: Vec<T>,
}

impl<T: Real> Tableau<T> {
    fn reduced_costs(&mut self, cost: &[T]) {
        self.d.copy_from_slice(cost);
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb == T::zero() {
                continue;
            }
            let row = &self.t[i * self.cols..(i + 1) * self.cols];
            for (dj, &tij) in self.d.iter_mut().zip(row) {
                *dj -= cb * tij;
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let cols = self.cols;
        let p = self.t[r * cols + q];
        {
            let row = &mut self.t[r * cols..(r + 1) * cols];
            row.iter_mut().for_each(|v| *v /= p);
            row[q] = T::one();
        }
        let pivot_row: Vec<T> = self.t[r * cols..(r + 1) * cols].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.t[i * cols + q];
            if f == T::zero() {
                continue;
            }
            let row = &mut self.t[i * cols..(i + 1) * cols];
            for (v, &pr) in row.iter_mut().zip(&pivot_row) {
                if pr != T::zero() {
                    *v -= f * pr;
                }
            }
            row[q] = T::zero();
        }
        let f = self.d[q];
        if f != T::zero() {
            for (v, &pr) in self.d.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            self.d[q] = T::zero();
        }
        let leaving = self.basis[r];
        self.is_basic[leaving] = false;
        self.is_basic[q] = true;
        self.at_upper[q] = false;
        self.basis[r] = q;
    }

    /// Runs primal simplex iterations for the reduced costs currently in `d`.
    fn iterate(&mut self, opts: &SimplexOptions, dual_tol: T, budget: &mut usize) -> SolveStatus {
        let feas = T::tol(opts.feasibility_tol);
        let piv_tol = T::tol(1e-11);
        let mut degenerate = 0usize;
        loop {
            // Pricing: Dantzig's largest reduced cost until a degenerate streak,
            // then Bland's lowest index. Ties always go to the lowest index.
            let bland = degenerate >= opts.degenerate_streak;
            let mut enter: Option<(usize, T)> = None;
            for j in 0..self.cols {
                if self.is_basic[j] || j >= self.artificial_from || self.upper[j] == T::zero() {
                    continue;
                }
                let dj = self.d[j];
                let score = if self.at_upper[j] { -dj } else { dj };
                if score > dual_tol && enter.is_none_or(|(_, s)| score > s) {
                    enter = Some((j, score));
                    if bland {
                        break;
                    }
                }
            }
            let Some((q, _)) = enter else {
                return SolveStatus::Optimal;
            };
            if *budget == 0 {
                return SolveStatus::IterationLimit;
            }
            *budget -= 1;

            let dir = if self.at_upper[q] { -T::one() } else { T::one() };
            let mut theta = self.upper[q];
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.rows {
                let delta = dir * self.t[i * self.cols + q];
                let bv = self.basis[i];
                let lim = if delta > piv_tol {
                    (self.x[bv].max(T::zero())) / delta
                } else if delta < -piv_tol && self.upper[bv].is_finite() {
                    (self.upper[bv] - self.x[bv]).max(T::zero()) / -delta
                } else {
                    continue;
                };
                let better = match leave {
                    None => lim < theta,
                    Some((r, _)) => {
                        let cur = delta.abs();
                        let prev = self.t[r * self.cols + q].abs();
                        if lim < theta - feas * T::lit(1e-3) {
                            true
                        } else if lim <= theta + feas * T::lit(1e-3) {
                            if bland {
                                bv < self.basis[r]
                            } else {
                                cur > prev
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    theta = lim;
                    leave = Some((i, delta));
                }
            }
            if !theta.is_finite() {
                return SolveStatus::Unbounded;
            }
            if theta <= feas {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            for i in 0..self.rows {
                let tq = self.t[i * self.cols + q];
                if tq != T::zero() {
                    let bv = self.basis[i];
                    self.x[bv] -= dir * tq * theta;
                }
            }
            self.x[q] += dir * theta;
            match leave {
                None => {
                    self.at_upper[q] = !self.at_upper[q];
                    self.x[q] = if self.at_upper[q] { self.upper[q] } else { T::zero() };
                }
                Some((r, delta)) => {
                    let lv = self.basis[r];
                    if delta > T::zero() {
                        self.x[lv] = T::zero();
                        self.pivot(r, q);
                        self.at_upper[lv] = false;
                    } else {
                        self.x[lv] = self.upper[lv];
                        self.pivot(r, q);
                        self.at_upper[lv] = true;
                    }
                }
            }
        }
    }

    /// Recomputes basic values from the original matrix for the current basis.
    fn refine(&mut self) {
        let m = self.rows;
        let mut bm = vec![T::zero(); m * m];
        let mut rhs = self.b.clone();
        for j in 0..self.cols {
            if self.is_basic[j] || self.x[j] == T::zero() {
                continue;
            }
            for i in 0..m {
                let a = self.a[i * self.cols + j];
                rhs[i] -= a * self.x[j];
            }
        }
        for (k, &bv) in self.basis.iter().enumerate() {
            for i in 0..m {
                bm[i * m + k] = self.a[i * self.cols + bv];
            }
        }
        if let Some(xb) = lu_solve(&bm, m, &rhs) {
            for (k, &bv) in self.basis.iter().enumerate() {
                self.x[bv] = xb[k];
            }
        }
    }
}

fn solve<T: Real>(lp: &LinearProgram<T>, opts: &SimplexOptions) -> SolveResult<T> {
    let n = lp.num_vars();
    let mut maps = Vec::with_capacity(n);
    let mut upper = Vec::new();
    for &(lo, hi) in &lp.bounds {
        if lo > hi {
            return infeasible(n);
        }
        let col = upper.len();
        if lo.is_finite() {
            maps.push(VarMap::Shift(col, lo));
            upper.push(hi - lo);
        } else if hi.is_finite() {
            maps.push(VarMap::Flip(col, hi));
            upper.push(T::infinity());
        } else {
            maps.push(VarMap::Split(col, col + 1));
            upper.push(T::infinity());
            upper.push(T::infinity());
        }
    }
    let structural = upper.len();
    let m = lp.constraints.len();

    // Row data in standard-form structural columns.
    let mut rows: Vec<(Vec<(usize, T)>, T, bool)> = Vec::with_capacity(m);
    for c in &lp.constraints {
        let mut terms = Vec::with_capacity(c.terms.len());
        let mut rhs = c.rhs;
        for &(j, a) in &c.terms {
            match maps[j] {
                VarMap::Shift(k, lo) => {
                    terms.push((k, a));
                    rhs -= a * lo;
                }
                VarMap::Flip(k, hi) => {
                    terms.push((k, -a));
                    rhs -= a * hi;
                }
                VarMap::Split(p, q) => {
                    terms.push((p, a));
                    terms.push((q, -a));
                }
            }
        }
        rows.push((terms, rhs, c.relation == Relation::Le));
    }
    let slacks = rows.iter().filter(|r| r.2).count();
    let artificials = rows.iter().filter(|r| !r.2 || r.1 < T::zero()).count();
    let cols = structural + slacks + artificials;
    let artificial_from = structural + slacks;
    upper.extend(std::iter::repeat_n(T::infinity(), slacks + artificials));

    let mut a = vec![T::zero(); m * cols];
    let mut b = vec![T::zero(); m];
    let mut basis = vec![0usize; m];
    let (mut next_slack, mut next_art) = (structural, artificial_from);
    for (i, (terms, rhs, is_le)) in rows.iter().enumerate() {
        let sign = if *rhs < T::zero() { -T::one() } else { T::one() };
        for &(k, v) in terms {
            a[i * cols + k] += sign * v;
        }
        b[i] = sign * *rhs;
        if *is_le {
            a[i * cols + next_slack] = sign;
            if sign > T::zero() {
                basis[i] = next_slack;
            }
            next_slack += 1;
        }
        if !*is_le || sign < T::zero() {
            a[i * cols + next_art] = T::one();
            basis[i] = next_art;
            next_art += 1;
        }
    }

    let mut cost = vec![T::zero(); cols];
    for (j, map) in maps.iter().enumerate() {
        match *map {
            VarMap::Shift(k, _) => cost[k] = lp.objective[j],
            VarMap::Flip(k, _) => cost[k] = -lp.objective[j],
            VarMap::Split(p, q) => {
                cost[p] = lp.objective[j];
                cost[q] = -lp.objective[j];
            }
        }
    }

    let mut x = vec![T::zero(); cols];
    let mut is_basic = vec![false; cols];
    for (i, &bv) in basis.iter().enumerate() {
        x[bv] = b[i];
        is_basic[bv] = true;
    }
    let mut tab = Tableau {
        rows: m,
        cols,
        t: a.clone(),
        a,
        b,
        upper,
        x,
        basis,
        is_basic,
        at_upper: vec![false; cols],
        artificial_from,
        d: vec![T::zero(); cols],
    };
    let mut budget = opts.max_pivots.unwrap_or(10 * (m + cols));
    let budget_total = budget;
    let feas = T::tol(opts.feasibility_tol);
    let b_scale = tab.b.iter().fold(T::one(), |acc, v| acc.max(v.abs()));

    if artificials > 0 {
        let mut phase1 = vec![T::zero(); cols];
        phase1[artificial_from..].iter_mut().for_each(|c| *c = -T::one());
        tab.reduced_costs(&phase1);
        // Artificials may enter during phase one.
        tab.artificial_from = cols;
        let status = tab.iterate(opts, T::tol(opts.optimality_tol), &mut budget);
        tab.artificial_from = artificial_from;
        if status == SolveStatus::IterationLimit {
            return finish(lp, &maps, tab, SolveStatus::IterationLimit, budget_total - budget);
        }
        let infeas = tab.x[artificial_from..].iter().fold(T::zero(), |acc, &v| acc + v);
        if infeas > feas * b_scale {
            return infeasible(n);
        }
        for j in artificial_from..cols {
            tab.upper[j] = T::zero();
            if !tab.is_basic[j] {
                tab.x[j] = T::zero();
            }
        }
        // Drive zero-level artificials out of the basis where a replacement exists.
        for r in 0..m {
            if tab.basis[r] < artificial_from {
                continue;
            }
            let q = (0..artificial_from)
                .filter(|&j| !tab.is_basic[j])
                .max_by(|&i, &j| {
                    let (vi, vj) = (tab.t[r * cols + i].abs(), tab.t[r * cols + j].abs());
                    vi.partial_cmp(&vj).unwrap().then(j.cmp(&i))
                })
                .filter(|&j| tab.t[r * cols + j].abs() > T::tol(1e-9));
            if let Some(q) = q {
                let av = tab.basis[r];
                tab.pivot(r, q);
                tab.x[av] = T::zero();
            }
        }
    }

    let c_scale = cost.iter().fold(T::one(), |acc, v| acc.max(v.abs()));
    tab.reduced_costs(&cost);
    let status = tab.iterate(opts, T::tol(opts.optimality_tol) * c_scale, &mut budget);
    finish(lp, &maps, tab, status, budget_total - budget)
}

fn infeasible<T: Real>(n: usize) -> SolveResult<T> {
    SolveResult {
        status: SolveStatus::Infeasible,
        x: vec![T::zero(); n],
        objective_value: T::neg_infinity(),
        kkt_residual: T::infinity(),
        iterations: 0,
    }
}

fn finish<T: Real>(
    lp: &LinearProgram<T>,
    maps: &[VarMap<T>],
    mut tab: Tableau<T>,
    status: SolveStatus,
    iterations: usize,
) -> SolveResult<T> {
    tab.refine();
    let x: Vec<T> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shift(k, lo) => lo + tab.x[k],
            VarMap::Flip(k, hi) => hi - tab.x[k],
            VarMap::Split(p, q) => tab.x[p] - tab.x[q],
        })
        .collect();
    let dual_infeas = (0..tab.cols)
        .filter(|&j| !tab.is_basic[j] && j < tab.artificial_from && tab.upper[j] > T::zero())
        .map(|j| if tab.at_upper[j] { -tab.d[j] } else { tab.d[j] })
        .fold(T::zero(), T::max);
    let primal_infeas = lp.max_violation(&x);
    SolveResult {
        status,
        objective_value: lp.objective_value(&x),
        kkt_residual: primal_infeas.max(dual_infeas),
        x,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::super::{solve_lp, LinearConstraint};
    use super::*;

    #[test]
    fn single_bounded_variable() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.push(LinearConstraint::le(vec![(0, 1.0)], 5.0));
        let r = solve_lp(&lp, 1e-8).unwrap();
        assert!(r.is_optimal());
        assert!((r.x[0] - 5.0f64).abs() < 1e-12);
    }

    #[test]
    fn degenerate_optimum_has_unique_value() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.push(LinearConstraint::le(vec![(0, 1.0), (1, 1.0)], 1.0));
        let r = solve_lp(&lp, 1e-8).unwrap();
        assert!(r.is_optimal());
        assert!((r.objective_value - 1.0f64).abs() < 1e-12);
    }

    #[test]
    fn equality_rows_and_free_variables() {
        // max x - y, x + y = 2, x - y <= 1, y free, x in [0, 10]
        let mut lp = LinearProgram::new(vec![1.0, -1.0]);
        lp.bounds = vec![(0.0, 10.0), (f64::NEG_INFINITY, f64::INFINITY)];
        lp.push(LinearConstraint::eq(vec![(0, 1.0), (1, 1.0)], 2.0));
        lp.push(LinearConstraint::le(vec![(0, 1.0), (1, -1.0)], 1.0));
        let r = solve_lp(&lp, 1e-8).unwrap();
        assert!(r.is_optimal());
        assert!((r.objective_value - 1.0f64).abs() < 1e-10);
        assert!((r.x[0] + r.x[1] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn upper_bounded_and_flipped_variables() {
        // max 2x + y, x <= 3 via bound, y in (-inf, 4], x + y <= 5
        let mut lp = LinearProgram::new(vec![2.0, 1.0]);
        lp.bounds = vec![(0.0, 3.0), (f64::NEG_INFINITY, 4.0)];
        lp.push(LinearConstraint::le(vec![(0, 1.0), (1, 1.0)], 5.0));
        let r = solve_lp(&lp, 1e-8).unwrap();
        assert!(r.is_optimal());
        assert!((r.x[0] - 3.0f64).abs() < 1e-12 && (r.x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_requires_phase_one() {
        // max -x, x >= 2 written as -x <= -2
        let mut lp = LinearProgram::new(vec![-1.0]);
        lp.push(LinearConstraint::le(vec![(0, -1.0)], -2.0));
        let r = solve_lp(&lp, 1e-8).unwrap();
        assert!(r.is_optimal());
        assert!((r.x[0] - 2.0f64).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.push(LinearConstraint::le(vec![(0, 1.0)], 1.0));
        lp.push(LinearConstraint::le(vec![(0, -1.0)], -2.0));
        assert_eq!(solve_lp(&lp, 1e-8).unwrap().status, SolveStatus::Infeasible);

        let lp = LinearProgram::new(vec![1.0f64]);
        assert_eq!(solve_lp(&lp, 1e-8).unwrap().status, SolveStatus::Unbounded);

        let mut lp = LinearProgram::new(vec![1.0f64]);
        lp.bounds[0] = (2.0, 1.0);
        assert_eq!(solve_lp(&lp, 1e-8).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn pivot_cap_reports_iteration_limit() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0, 1.0]);
        for j in 0..3 {
            lp.push(LinearConstraint::le(vec![(j, 1.0)], 1.0));
        }
        let mut s = Simplex::new(SimplexOptions { max_pivots: Some(1), ..Default::default() });
        let r: SolveResult<f64> = s.solve_lp(&lp).unwrap();
        assert_eq!(r.status, SolveStatus::IterationLimit);
    }

    #[test]
    fn single_precision_instance() {
        let mut lp = LinearProgram::new(vec![3.0f32, 2.0]);
        lp.push(LinearConstraint::le(vec![(0, 1.0), (1, 1.0)], 4.0));
        lp.push(LinearConstraint::le(vec![(0, 1.0), (1, 3.0)], 6.0));
        lp.bounds[0].1 = 3.0;
        let r = solve_lp(&lp, 1e-6).unwrap();
        assert!(r.is_optimal());
        assert!((r.objective_value - 11.0).abs() < 1e-4);
    }
}
