//! Log-barrier interior-point method for convex QCPs.
//!
//! Minimizes `t * (-c.x) - sum(log(-f_i(x)))` with damped Newton steps for an
//! increasing sequence of `t`, keeping equality rows satisfied throughout.
//! A phase-one problem `min s, f_i(x) <= s` repairs starts that are not
//! strictly feasible.

use super::linalg::{cholesky_solve, lu_solve};
use super::{ConvexQcp, QcpSolver, Relation, SolveResult, SolveStatus};
use crate::error::Result;
use crate::num::Real;

#[derive(Debug, Clone, Copy)]
pub struct BarrierOptions {
    /// Relative duality-gap tolerance.
    pub tol: f64,
    /// Cap on Newton steps across all centering rounds.
    pub max_newton: usize,
    /// Factor by which `t` grows between centering rounds.
    pub mu: f64,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        Self { tol: 1e-7, max_newton: 200, mu: 20.0 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Barrier {
    pub options: BarrierOptions,
}

impl Barrier {
    pub fn new(options: BarrierOptions) -> Self {
        Self { options }
    }
}

impl<T: Real> QcpSolver<T> for Barrier {
    fn solve_qcp(&mut self, qcp: &ConvexQcp<T>, start: &[T]) -> Result<SolveResult<T>> {
        qcp.validate()?;
        Ok(solve(qcp, start, &self.options))
    }
}

/// One inequality `f(x) <= 0` over a small variable support.
#[derive(Debug, Clone)]
struct Ineq<T> {
    quad: Vec<(usize, usize, T)>,
    linear: Vec<(usize, T)>,
    constant: T,
    support: Vec<usize>,
}

impl<T: Real> Ineq<T> {
    fn new(quad: Vec<(usize, usize, T)>, linear: Vec<(usize, T)>, constant: T) -> Self {
        let mut support: Vec<usize> = quad
            .iter()
            .flat_map(|&(i, j, _)| [i, j])
            .chain(linear.iter().map(|&(j, _)| j))
            .collect();
        support.sort_unstable();
        support.dedup();
        Self { quad, linear, constant, support }
    }

    fn eval(&self, x: &[T]) -> T {
        let q = self.quad.iter().fold(T::zero(), |acc, &(i, j, v)| acc + v * x[i] * x[j]);
        self.linear.iter().fold(q + self.constant, |acc, &(j, a)| acc + a * x[j])
    }

    /// Directional change `f(x + s*dx) - f(x)` is exact for quadratics, so only
    /// `eval` is needed for the line search; this returns the gradient into `g`
    /// (entries outside `support` are left untouched).
    fn gradient(&self, x: &[T], g: &mut [T]) {
        for &k in &self.support {
            g[k] = T::zero();
        }
        for &(i, j, v) in &self.quad {
            g[i] += v * x[j];
            g[j] += v * x[i];
        }
        for &(j, a) in &self.linear {
            g[j] += a;
        }
    }
}

struct Problem<T> {
    n: usize,
    /// Minimization objective (negated `c`).
    cost: Vec<T>,
    ineqs: Vec<Ineq<T>>,
    eq_rows: Vec<(Vec<(usize, T)>, T)>,
}

enum Outcome {
    Converged,
    Stopped,
    IterationLimit,
    Stalled,
}

struct Run<T> {
    x: Vec<T>,
    t: T,
    nu: Vec<T>,
    newton_steps: usize,
    outcome: Outcome,
}

impl<T: Real> Problem<T> {
    fn max_ineq(&self, x: &[T]) -> T {
        self.ineqs.iter().map(|f| f.eval(x)).fold(T::neg_infinity(), T::max)
    }

    fn cost_value(&self, x: &[T]) -> T {
        self.cost.iter().zip(x).fold(T::zero(), |acc, (&c, &v)| acc + c * v)
    }

    /// `t * cost + barrier`, or `None` outside the strict interior.
    fn merit(&self, x: &[T], t: T) -> Option<T> {
        let mut phi = T::zero();
        for f in &self.ineqs {
            let v = f.eval(x);
            if !(v < T::zero()) {
                return None;
            }
            phi -= (-v).ln();
        }
        Some(t * self.cost_value(x) + phi)
    }

    /// Newton direction for the centering problem at `x`; returns (dx, w, decrement²).
    fn newton(&self, x: &[T], t: T) -> Option<(Vec<T>, Vec<T>, T)> {
        let n = self.n;
        let mut grad: Vec<T> = self.cost.iter().map(|&c| t * c).collect();
        let mut hess = vec![T::zero(); n * n];
        let mut gi = vec![T::zero(); n];
        for f in &self.ineqs {
            let v = f.eval(x);
            let inv = -T::one() / v;
            f.gradient(x, &mut gi);
            let inv2 = inv * inv;
            for &a in &f.support {
                grad[a] += inv * gi[a];
                for &b in &f.support {
                    hess[a * n + b] += inv2 * gi[a] * gi[b];
                }
            }
            for &(i, j, q) in &f.quad {
                hess[i * n + j] += inv * q;
                hess[j * n + i] += inv * q;
            }
        }
        let rhs: Vec<T> = grad.iter().map(|&g| -g).collect();
        let (dx, w) = if self.eq_rows.is_empty() {
            (solve_spd(&mut hess, n, &rhs)?, Vec::new())
        } else {
            let p = self.eq_rows.len();
            let k = n + p;
            let mut kkt = vec![T::zero(); k * k];
            for i in 0..n {
                kkt[i * k..i * k + n].copy_from_slice(&hess[i * n..(i + 1) * n]);
            }
            for (r, (terms, _)) in self.eq_rows.iter().enumerate() {
                for &(j, a) in terms {
                    kkt[(n + r) * k + j] += a;
                    kkt[j * k + n + r] += a;
                }
            }
            let mut full = rhs.clone();
            full.extend(std::iter::repeat_n(T::zero(), p));
            let sol = lu_solve(&kkt, k, &full).or_else(|| {
                let reg = diag_scale(&hess, n) * T::tol(1e-12);
                for i in 0..n {
                    kkt[i * k + i] += reg;
                }
                lu_solve(&kkt, k, &full)
            })?;
            (sol[..n].to_vec(), sol[n..].to_vec())
        };
        let dec = -grad.iter().zip(&dx).fold(T::zero(), |acc, (&g, &d)| acc + g * d);
        Some((dx, w, dec))
    }

    fn run(
        &self,
        mut x: Vec<T>,
        mut t: T,
        opts: &BarrierOptions,
        gap_tol: impl Fn(&[T]) -> T,
        stop: impl Fn(&[T]) -> bool,
        newton_budget: &mut usize,
    ) -> Run<T> {
        let m = T::from_usize(self.ineqs.len().max(1)).unwrap();
        let mu = T::lit(opts.mu);
        let center_tol = T::tol(1e-10);
        let mut nu = vec![T::zero(); self.eq_rows.len()];
        let mut steps = 0usize;
        loop {
            // Centering.
            loop {
                if stop(&x) {
                    return Run { x, t, nu, newton_steps: steps, outcome: Outcome::Stopped };
                }
                if *newton_budget == 0 {
                    return Run { x, t, nu, newton_steps: steps, outcome: Outcome::IterationLimit };
                }
                let Some((dx, w, dec)) = self.newton(&x, t) else {
                    return Run { x, t, nu, newton_steps: steps, outcome: Outcome::Stalled };
                };
                nu = w.iter().map(|&v| v / t).collect();
                if dec * T::lit(0.5) <= center_tol {
                    break;
                }
                *newton_budget -= 1;
                steps += 1;
                let f0 = self.merit(&x, t).expect("iterate left the interior");
                let mut step = T::one();
                let mut trial: Vec<T>;
                let mut accepted = false;
                for _ in 0..80 {
                    trial = x.iter().zip(&dx).map(|(&xi, &di)| xi + step * di).collect();
                    if let Some(f1) = self.merit(&trial, t) {
                        if f1 <= f0 - T::lit(0.01) * step * dec {
                            x = trial;
                            accepted = true;
                            break;
                        }
                    }
                    step *= T::lit(0.5);
                }
                if !accepted {
                    // No further progress representable at this t.
                    break;
                }
            }
            if m / t <= gap_tol(&x) {
                return Run { x, t, nu, newton_steps: steps, outcome: Outcome::Converged };
            }
            t *= mu;
        }
    }
}

fn diag_scale<T: Real>(h: &[T], n: usize) -> T {
    (0..n).map(|i| h[i * n + i].abs()).fold(T::one(), T::max)
}

fn solve_spd<T: Real>(h: &mut [T], n: usize, rhs: &[T]) -> Option<Vec<T>> {
    if let Some(x) = cholesky_solve(h, n, rhs) {
        return Some(x);
    }
    let scale = diag_scale(h, n);
    let mut reg = scale * T::tol(1e-14);
    for _ in 0..12 {
        for i in 0..n {
            h[i * n + i] += reg;
        }
        if let Some(x) = cholesky_solve(h, n, rhs) {
            return Some(x);
        }
        reg *= T::lit(100.0);
    }
    lu_solve(h, n, rhs)
}

fn build<T: Real>(qcp: &ConvexQcp<T>) -> Problem<T> {
    let lp = &qcp.lp;
    let n = lp.num_vars();
    let mut ineqs = Vec::new();
    let mut eq_rows = Vec::new();
    for row in &lp.constraints {
        match row.relation {
            Relation::Le => ineqs.push(Ineq::new(Vec::new(), row.terms.clone(), -row.rhs)),
            Relation::Eq => eq_rows.push((row.terms.clone(), row.rhs)),
        }
    }
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        if lo == hi {
            eq_rows.push((vec![(j, T::one())], lo));
            continue;
        }
        if lo.is_finite() {
            ineqs.push(Ineq::new(Vec::new(), vec![(j, -T::one())], lo));
        }
        if hi.is_finite() {
            ineqs.push(Ineq::new(Vec::new(), vec![(j, T::one())], -hi));
        }
    }
    for q in &qcp.quad_constraints {
        ineqs.push(Ineq::new(q.quad.clone(), q.linear.clone(), -q.rhs));
    }
    Problem { n, cost: lp.objective.iter().map(|&c| -c).collect(), ineqs, eq_rows }
}

/// Least-norm correction of `x` onto `{x : A x = b}`.
fn project_equalities<T: Real>(p: &Problem<T>, x: &mut [T]) -> bool {
    let k = p.eq_rows.len();
    if k == 0 {
        return true;
    }
    let resid: Vec<T> = p
        .eq_rows
        .iter()
        .map(|(terms, b)| *b - terms.iter().fold(T::zero(), |acc, &(j, a)| acc + a * x[j]))
        .collect();
    let mut gram = vec![T::zero(); k * k];
    for (r, (tr, _)) in p.eq_rows.iter().enumerate() {
        for (s, (ts, _)) in p.eq_rows.iter().enumerate() {
            let mut v = T::zero();
            for &(i, a) in tr {
                for &(j, b) in ts {
                    if i == j {
                        v += a * b;
                    }
                }
            }
            gram[r * k + s] = v;
        }
    }
    let Some(y) = lu_solve(&gram, k, &resid) else {
        return false;
    };
    for (r, (terms, _)) in p.eq_rows.iter().enumerate() {
        for &(j, a) in terms {
            x[j] += a * y[r];
        }
    }
    true
}

fn solve<T: Real>(qcp: &ConvexQcp<T>, start: &[T], opts: &BarrierOptions) -> SolveResult<T> {
    let prob = build(qcp);
    let n = prob.n;
    let tol = T::tol(opts.tol);
    let mut x: Vec<T> = start.iter().copied().chain(std::iter::repeat(T::zero())).take(n).collect();
    let mut budget = opts.max_newton;
    let mut total_steps = 0usize;

    let infeasible = |x: Vec<T>, steps| SolveResult {
        status: SolveStatus::Infeasible,
        objective_value: T::neg_infinity(),
        kkt_residual: T::infinity(),
        x,
        iterations: steps,
    };

    if !project_equalities(&prob, &mut x) {
        return infeasible(x, 0);
    }

    let worst = prob.max_ineq(&x);
    if !(worst < T::zero()) {
        // Phase one over (x, s): minimize s subject to f_i(x) <= s and s >= -1.
        let s_idx = n;
        let mut ineqs: Vec<Ineq<T>> = prob
            .ineqs
            .iter()
            .map(|f| {
                let mut lin = f.linear.clone();
                lin.push((s_idx, -T::one()));
                Ineq::new(f.quad.clone(), lin, f.constant)
            })
            .collect();
        ineqs.push(Ineq::new(Vec::new(), vec![(s_idx, -T::one())], -T::one()));
        let mut cost = vec![T::zero(); n + 1];
        cost[s_idx] = T::one();
        let phase1 = Problem { n: n + 1, cost, ineqs, eq_rows: prob.eq_rows.clone() };
        let mut x1 = x.clone();
        x1.push(worst.max(T::zero()) + T::one());
        let margin = T::tol(1e-9);
        let run = phase1.run(
            x1,
            T::one(),
            opts,
            |_| tol,
            |z| z[s_idx] < -margin && prob.max_ineq(&z[..n]) < T::zero(),
            &mut budget,
        );
        total_steps += run.newton_steps;
        let mut z = run.x;
        let s = z.pop().unwrap();
        if !(s < T::zero()) || !(prob.max_ineq(&z) < T::zero()) {
            return match run.outcome {
                Outcome::IterationLimit => SolveResult {
                    status: SolveStatus::IterationLimit,
                    objective_value: qcp.lp.objective_value(&z),
                    kkt_residual: T::infinity(),
                    x: z,
                    iterations: total_steps,
                },
                _ => infeasible(z, total_steps),
            };
        }
        x = z;
    }

    let m = T::from_usize(prob.ineqs.len().max(1)).unwrap();
    let obj0 = -prob.cost_value(&x);
    let t0 = (m / obj0.abs().max(T::one())).max(T::lit(1e-3)).min(T::one());
    let run = prob.run(
        x,
        t0,
        opts,
        |x| tol * prob.cost_value(x).abs().max(T::one()),
        |_| false,
        &mut budget,
    );
    total_steps += run.newton_steps;
    let x = run.x;
    let objective = qcp.lp.objective_value(&x);

    // Dual estimates lambda_i = 1 / (-t f_i) give the stationarity residual.
    let mut station: Vec<T> = prob.cost.clone();
    let mut gi = vec![T::zero(); n];
    for f in &prob.ineqs {
        let lam = -T::one() / (run.t * f.eval(&x));
        f.gradient(&x, &mut gi);
        for &a in &f.support {
            station[a] += lam * gi[a];
        }
    }
    for ((terms, _), &nu) in prob.eq_rows.iter().zip(&run.nu) {
        for &(j, a) in terms {
            station[j] += a * nu;
        }
    }
    let c_scale = prob.cost.iter().fold(T::one(), |acc, v| acc.max(v.abs()));
    let stationarity = station.iter().fold(T::zero(), |acc, v| acc.max(v.abs())) / c_scale;
    let gap = m / run.t / objective.abs().max(T::one());
    let kkt = stationarity.max(gap).max(qcp.max_violation(&x));
    let status = match run.outcome {
        Outcome::Converged if kkt <= tol => SolveStatus::Optimal,
        Outcome::Converged | Outcome::Stalled | Outcome::IterationLimit | Outcome::Stopped => {
            SolveStatus::IterationLimit
        }
    };
    SolveResult { status, x, objective_value: objective, kkt_residual: kkt, iterations: total_steps }
}
