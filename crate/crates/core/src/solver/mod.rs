//! Small dense convex solvers: a bounded-variable primal simplex for linear
//! programs and a log-barrier interior-point method for convex quadratically
//! constrained programs.
//!
//! Both are reached through [`LpSolver`] / [`QcpSolver`] so that another
//! implementation honouring the same result contract can be dropped in.

mod barrier;
mod linalg;
mod simplex;

pub use barrier::{Barrier, BarrierOptions};
pub use simplex::{Simplex, SimplexOptions};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
}

/// Sparse row `sum(coeffs) (<= | =) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint<T> {
    pub terms: Vec<(usize, T)>,
    pub relation: Relation,
    pub rhs: T,
}

impl<T: Real> LinearConstraint<T> {
    pub fn le(terms: Vec<(usize, T)>, rhs: T) -> Self {
        Self { terms, relation: Relation::Le, rhs }
    }

    pub fn eq(terms: Vec<(usize, T)>, rhs: T) -> Self {
        Self { terms, relation: Relation::Eq, rhs }
    }

    pub fn eval(&self, x: &[T]) -> T {
        self.terms.iter().fold(T::zero(), |acc, &(j, a)| acc + a * x[j])
    }

    /// Amount by which `x` violates the row (zero when satisfied).
    pub fn violation(&self, x: &[T]) -> T {
        let lhs = self.eval(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(T::zero()),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// `maximize c.x` subject to sparse rows and per-variable bounds (infinite allowed).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T> {
    pub objective: Vec<T>,
    pub constraints: Vec<LinearConstraint<T>>,
    pub bounds: Vec<(T, T)>,
}

impl<T: Real> LinearProgram<T> {
    /// A program over `n` variables, all non-negative.
    pub fn new(objective: Vec<T>) -> Self {
        let n = objective.len();
        Self { objective, constraints: Vec::new(), bounds: vec![(T::zero(), T::infinity()); n] }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn push(&mut self, c: LinearConstraint<T>) {
        self.constraints.push(c);
    }

    pub fn objective_value(&self, x: &[T]) -> T {
        self.objective.iter().zip(x).fold(T::zero(), |acc, (&c, &v)| acc + c * v)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(Error::validation(format!(
                "LP has {n} objective coefficients but {} bounds",
                self.bounds.len()
            )));
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if let Some(&(j, _)) = row.terms.iter().find(|(j, _)| *j >= n) {
                return Err(Error::validation(format!("row {i} references variable {j} >= {n}")));
            }
            if !row.rhs.is_finite() || row.terms.iter().any(|(_, a)| !a.is_finite()) {
                return Err(Error::validation(format!("row {i} has non-finite data")));
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::validation("objective has non-finite coefficients"));
        }
        Ok(())
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[T]) -> T {
        let rows = self.constraints.iter().map(|c| c.violation(x));
        let bounds = self
            .bounds
            .iter()
            .zip(x)
            .map(|(&(lo, hi), &v)| (lo - v).max(v - hi).max(T::zero()));
        rows.chain(bounds).fold(T::zero(), T::max)
    }
}

/// `x' Q x + q.x <= rhs` with `Q` positive semidefinite, stored as sparse
/// entries: the form evaluates to `sum(v * x[i] * x[j])` over `quad`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadConstraint<T> {
    pub quad: Vec<(usize, usize, T)>,
    pub linear: Vec<(usize, T)>,
    pub rhs: T,
}

impl<T: Real> QuadConstraint<T> {
    /// `sum_k w_k (a_k . x + b_k)^2 + linear <= rhs`, expanded into quadratic form.
    /// Nonnegative weights keep the form positive semidefinite.
    pub fn sum_of_squares(
        squares: &[(T, Vec<(usize, T)>, T)],
        linear: Vec<(usize, T)>,
        rhs: T,
    ) -> Self {
        let mut quad = Vec::new();
        let mut lin: Vec<(usize, T)> = linear;
        let mut rhs = rhs;
        let two = T::lit(2.0);
        for (w, terms, b) in squares {
            debug_assert!(*w >= T::zero());
            for (p, &(i, ai)) in terms.iter().enumerate() {
                quad.push((i, i, *w * ai * ai));
                for &(j, aj) in &terms[p + 1..] {
                    quad.push((i, j, two * *w * ai * aj));
                }
                lin.push((i, two * *w * ai * *b));
            }
            rhs -= *w * *b * *b;
        }
        let mut c = Self { quad, linear: lin, rhs };
        c.compact();
        c
    }

    /// Merges duplicate entries.
    pub fn compact(&mut self) {
        self.quad.iter_mut().for_each(|e| {
            if e.0 > e.1 {
                *e = (e.1, e.0, e.2)
            }
        });
        self.quad.sort_by_key(|e| (e.0, e.1));
        self.quad.dedup_by(|b, a| {
            if (a.0, a.1) == (b.0, b.1) {
                a.2 += b.2;
                true
            } else {
                false
            }
        });
        self.linear.sort_by_key(|e| e.0);
        self.linear.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
    }

    /// Constraint function `x'Qx + q.x - rhs` (feasible when <= 0).
    pub fn eval(&self, x: &[T]) -> T {
        let q = self.quad.iter().fold(T::zero(), |acc, &(i, j, v)| acc + v * x[i] * x[j]);
        let l = self.linear.iter().fold(T::zero(), |acc, &(j, a)| acc + a * x[j]);
        q + l - self.rhs
    }
}

/// A linear program extended with convex quadratic inequality rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexQcp<T> {
    pub lp: LinearProgram<T>,
    pub quad_constraints: Vec<QuadConstraint<T>>,
}

impl<T: Real> ConvexQcp<T> {
    pub fn new(lp: LinearProgram<T>) -> Self {
        Self { lp, quad_constraints: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        self.lp.validate()?;
        let n = self.lp.num_vars();
        for (k, qc) in self.quad_constraints.iter().enumerate() {
            let bad = qc.quad.iter().any(|&(i, j, v)| i >= n || j >= n || !v.is_finite())
                || qc.linear.iter().any(|&(j, a)| j >= n || !a.is_finite())
                || !qc.rhs.is_finite();
            if bad {
                return Err(Error::validation(format!("quadratic row {k} is malformed")));
            }
        }
        Ok(())
    }

    pub fn max_violation(&self, x: &[T]) -> T {
        self.quad_constraints
            .iter()
            .map(|q| q.eval(x).max(T::zero()))
            .fold(self.lp.max_violation(x), T::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<T> {
    pub status: SolveStatus,
    pub x: Vec<T>,
    pub objective_value: T,
    /// Larger of the primal/dual infeasibility and the optimality gap measure
    /// reported by the solver that produced this result.
    pub kkt_residual: T,
    pub iterations: usize,
}

impl<T: Real> SolveResult<T> {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// Contract for linear program solvers.
pub trait LpSolver<T: Real> {
    fn solve_lp(&mut self, lp: &LinearProgram<T>) -> Result<SolveResult<T>>;
}

/// Contract for convex QCP solvers. `start` should be a Slater point; solvers
/// may repair it when it is not strictly feasible.
pub trait QcpSolver<T: Real> {
    fn solve_qcp(&mut self, qcp: &ConvexQcp<T>, start: &[T]) -> Result<SolveResult<T>>;
}

/// Solves `lp` with the default simplex at feasibility tolerance `tol`.
pub fn solve_lp<T: Real>(lp: &LinearProgram<T>, tol: f64) -> Result<SolveResult<T>> {
    Simplex::new(SimplexOptions { feasibility_tol: tol, ..Default::default() }).solve_lp(lp)
}

/// Solves `qcp` with the default barrier method at relative optimality tolerance `tol`.
pub fn solve_qcp<T: Real>(qcp: &ConvexQcp<T>, start: &[T], tol: f64) -> Result<SolveResult<T>> {
    Barrier::new(BarrierOptions { tol, ..Default::default() }).solve_qcp(qcp, start)
}
