use serde::{Deserialize, Serialize};

use super::{BinarySchedule, SlotBounds};
use crate::channel::{spectral_efficiency, LinkConstants, LinkRates, SqDistances};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::scenario::{slot_angle, Scenario, Trajectory};
use crate::solver::{
    Barrier, BarrierOptions, ConvexQcp, LinearConstraint, LinearProgram, QcpSolver, QuadConstraint,
    SolveStatus,
};

/// `d/dd log2(1 + a / d)`.
pub fn se_derivative<T: Real>(a: T, d: T) -> T {
    -a / (T::LN_2() * d * (d + a))
}

/// First-order expansion of `log2(1 + a / d)` around `d_ref`; a global lower
/// bound because the rate is convex in `d`.
pub fn se_surrogate<T: Real>(a: T, d_ref: T, d: T) -> T {
    spectral_efficiency(a, d_ref) + se_derivative(a, d_ref) * (d - d_ref)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct ScaOptions {
    pub rel_tol: f64,
    pub max_iters: usize,
    #[serde(skip)]
    pub solver: BarrierOptions,
}

impl Default for ScaOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-4, max_iters: 50, solver: BarrierOptions::default() }
    }
}

#[derive(Debug, Clone)]
pub struct ScaOutcome<T> {
    pub trajectory: Trajectory<T>,
    pub bounds: SlotBounds<T>,
    pub objective: T,
    /// True objective after each accepted iterate, starting with the initial one.
    pub trace: Vec<T>,
}

/// The convexified trajectory subproblem around a reference circle.
///
/// Variables are `(c_x, c_y, r, eta_1..eta_N)` with lengths scaled by the
/// flight altitude. Each slot contributes
/// `eta_n <= (alpha/M) sum_g [SE_g(d0) + SE_g'(d0) (d_g(c, r) - d0)]` and the
/// analogous relay-to-base row; both are convex quadratic in `(c_x, c_y, r)`.
#[derive(Debug, Clone)]
pub struct TrajectoryProblem<T> {
    pub qcp: ConvexQcp<T>,
    /// Length unit in metres.
    pub scale: T,
    min_radius_m: T,
}

impl<T: Real> TrajectoryProblem<T> {
    pub fn new(
        scenario: &Scenario<T>,
        alpha: T,
        schedule: &BinarySchedule,
        reference: &Trajectory<T>,
    ) -> Self {
        let n = scenario.num_slots;
        let scale = scenario.altitude_m;
        let scale_sq = scale * scale;
        let links = LinkConstants::new(scenario);
        let a_g = links.a_g / scale_sq;
        let a_b = links.a_b / scale_sq;
        let dist = SqDistances::new(scenario, reference);
        let m = T::from_usize(scenario.users_per_slot).unwrap();
        let h = reference.altitude_m / scale;
        let bs = scenario.bs_position.map(|v| v / scale);
        let nf = T::from_usize(n).unwrap();

        let mut objective = vec![T::zero(); 3 + n];
        objective[3..].iter_mut().for_each(|c| *c = T::one() / nf);
        let mut lp = LinearProgram::new(objective);
        let inf = T::infinity();
        lp.bounds[0] = (-inf, inf);
        lp.bounds[1] = (-inf, inf);
        lp.bounds[2] = (scenario.min_radius_m / scale, inf);
        for s in 0..n {
            lp.bounds[3 + s] = (-inf, inf);
        }
        let mut qcp = ConvexQcp::new(lp);

        // Squared distance from the slot-`s` waypoint to `(px, py, pz)` as a
        // sum of squares, with the vertical term folded into the constant.
        let offsets = |s: usize, p: [T; 3]| {
            let theta: T = slot_angle(s + 1, n);
            let squares = vec![
                (vec![(0, T::one()), (2, theta.cos())], -p[0]),
                (vec![(1, T::one()), (2, theta.sin())], -p[1]),
            ];
            (squares, (h - p[2]) * (h - p[2]))
        };

        for s in 0..n {
            let users: Vec<usize> = schedule.slot_users(s).collect();
            if users.is_empty() || alpha <= T::zero() {
                qcp.lp.push(LinearConstraint::le(vec![(3 + s, T::one())], T::zero()));
            } else {
                let share = alpha / m;
                let mut squares = Vec::new();
                let mut rhs = T::zero();
                for g in users {
                    let d0 = dist.gv(g, s) / scale_sq;
                    let w = -se_derivative(a_g, d0);
                    let u = scenario.users[g].map(|v| v / scale);
                    let (sq, vert) = offsets(s, u);
                    rhs += share * (spectral_efficiency(a_g, d0) + w * d0 - w * vert);
                    squares.extend(sq.into_iter().map(|(t, b)| (share * w, t, b)));
                }
                qcp.quad_constraints.push(QuadConstraint::sum_of_squares(
                    &squares,
                    vec![(3 + s, T::one())],
                    rhs,
                ));
            }
            let share = T::one() - alpha;
            if share <= T::zero() {
                qcp.lp.push(LinearConstraint::le(vec![(3 + s, T::one())], T::zero()));
            } else {
                let d0 = dist.vb(s) / scale_sq;
                let w = -se_derivative(a_b, d0);
                let (sq, vert) = offsets(s, bs);
                let rhs = share * (spectral_efficiency(a_b, d0) + w * d0 - w * vert);
                let squares: Vec<_> = sq.into_iter().map(|(t, b)| (share * w, t, b)).collect();
                qcp.quad_constraints.push(QuadConstraint::sum_of_squares(
                    &squares,
                    vec![(3 + s, T::one())],
                    rhs,
                ));
            }
        }
        Self { qcp, scale, min_radius_m: scenario.min_radius_m }
    }

    /// Strictly feasible start at `traj`: radius nudged off its bound and each
    /// `eta_n` one unit below its tightest surrogate row.
    pub fn start_point(&self, traj: &Trajectory<T>) -> Vec<T> {
        let n = self.qcp.lp.num_vars() - 3;
        let r_lo = self.qcp.lp.bounds[2].0;
        let mut x = vec![T::zero(); 3 + n];
        x[0] = traj.center_xy[0] / self.scale;
        x[1] = traj.center_xy[1] / self.scale;
        x[2] = (traj.radius_m / self.scale).max(r_lo + T::lit(1e-4));
        let mut limit = vec![T::infinity(); n];
        for c in &self.qcp.quad_constraints {
            let s = c.linear.iter().find(|&&(j, _)| j >= 3).map(|&(j, _)| j - 3).unwrap();
            // Row value with eta_s = 0 gives -(slack available for eta_s).
            limit[s] = limit[s].min(-c.eval(&x));
        }
        for c in &self.qcp.lp.constraints {
            let s = c.terms[0].0 - 3;
            limit[s] = limit[s].min(c.rhs);
        }
        for s in 0..n {
            x[3 + s] = limit[s] - T::one();
        }
        x
    }

    /// Maps a solver point back to a trajectory at the given altitude.
    pub fn trajectory(&self, x: &[T], altitude_m: T) -> Trajectory<T> {
        let r = (x[2] * self.scale).max(self.min_radius_m);
        Trajectory::new([x[0] * self.scale, x[1] * self.scale], r, altitude_m)
    }
}

/// Successive convex approximation over the circle's center and radius for a
/// fixed timeshare and schedule.
///
/// Each round solves the surrogate problem around the incumbent and accepts
/// the result only if the true objective does not decrease. Stops once the
/// surrogate gain falls below `rel_tol` or after `max_iters` rounds.
pub fn sca_trajectory<T: Real>(
    scenario: &Scenario<T>,
    alpha: T,
    schedule: &BinarySchedule,
    init: &Trajectory<T>,
    options: &ScaOptions,
) -> Result<ScaOutcome<T>> {
    let evaluate = |traj: &Trajectory<T>| {
        let rates = LinkRates::new(scenario, traj);
        let bounds = SlotBounds::tight(&rates, alpha, schedule);
        let objective = bounds.mean();
        (bounds, objective)
    };
    let mut current = *init;
    if current.radius_m < scenario.min_radius_m {
        current.radius_m = scenario.min_radius_m;
    }
    let (mut bounds, mut objective) = evaluate(&current);
    let mut trace = vec![objective];
    if alpha <= T::zero() || alpha >= T::one() {
        return Ok(ScaOutcome { trajectory: current, bounds, objective, trace });
    }
    let mut solver = Barrier::new(options.solver);
    for _ in 0..options.max_iters {
        let problem = TrajectoryProblem::new(scenario, alpha, schedule, &current);
        let start = problem.start_point(&current);
        let res = solver.solve_qcp(&problem.qcp, &start)?;
        if res.status == SolveStatus::Infeasible || res.status == SolveStatus::Unbounded {
            return Err(Error::Solver(format!("trajectory subproblem ended with {:?}", res.status)));
        }
        let candidate = problem.trajectory(&res.x, current.altitude_m);
        let (cand_bounds, cand_objective) = evaluate(&candidate);
        if !(cand_objective >= objective) {
            break;
        }
        let gain = res.objective_value - objective;
        current = candidate;
        bounds = cand_bounds;
        let improved = cand_objective - objective;
        objective = cand_objective;
        trace.push(objective);
        let scale = objective.abs().max(T::min_positive_value());
        if gain.max(improved) <= T::lit(options.rel_tol) * scale {
            break;
        }
    }
    Ok(ScaOutcome { trajectory: current, bounds, objective, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::fixtures::scenario;

    #[test]
    fn derivative_matches_finite_difference() {
        for &(a, d) in &[(1.0, 1.0), (2e6, 1.5e6), (3.7e8, 2.2e7), (0.3, 5.0)] {
            let h = d * 1e-6;
            let fd = (spectral_efficiency(a, d + h) - spectral_efficiency(a, d - h)) / (2.0 * h);
            let an: f64 = se_derivative(a, d);
            assert!((fd - an).abs() <= 1e-6 * an.abs(), "a={a} d={d}: {fd} vs {an}");
        }
    }

    #[test]
    fn surrogate_is_tangent() {
        let (a, d0) = (5.0e7, 2.0e6);
        assert_eq!(se_surrogate(a, d0, d0), spectral_efficiency(a, d0));
        for k in 1..50 {
            let d = d0 * (0.05 * k as f64);
            assert!(se_surrogate(a, d0, d) <= spectral_efficiency(a, d) + 1e-12);
        }
    }

    #[test]
    fn symmetric_user_keeps_center_on_axis() {
        let s = scenario(vec![[5000.0, 0.0, 0.0]], 1, 32);
        let init = Trajectory::new([2500.0, 0.0], 500.0, 1000.0);
        let sched = BinarySchedule::full(1, 32);
        let out = sca_trajectory(&s, 0.5, &sched, &init, &ScaOptions::default()).unwrap();
        assert!(out.trajectory.center_xy[1].abs() <= 1e-3 * out.trajectory.radius_m);
        assert!(out.trace.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        assert!(out.trajectory.radius_m >= 500.0);
    }

    #[test]
    fn start_point_is_strictly_feasible() {
        let s = scenario(vec![[9000.0, 1000.0, 0.0], [11000.0, -500.0, 0.0]], 1, 16);
        let init = Trajectory::over_dead_zone(&s);
        let sched = BinarySchedule::round_robin(2, 16, 1, 8);
        let p = TrajectoryProblem::new(&s, 0.4, &sched, &init);
        let x = p.start_point(&init);
        assert!(p.qcp.quad_constraints.iter().all(|c| c.eval(&x) < 0.0));
    }

    #[test]
    fn extreme_timeshare_skips() {
        let s = scenario(vec![[9000.0, 0.0, 0.0]], 1, 8);
        let init = Trajectory::over_dead_zone(&s);
        let sched = BinarySchedule::full(1, 8);
        for a in [0.0, 1.0] {
            let out = sca_trajectory(&s, a, &sched, &init, &ScaOptions::default()).unwrap();
            assert_eq!(out.trajectory, init);
            assert_eq!(out.trace.len(), 1);
        }
    }
}
