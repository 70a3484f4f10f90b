//! Comparison systems: per-user hovering upper bound and the static circle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{spectral_efficiency, LinkConstants};
use crate::error::Result;
use crate::num::{sq, Real};
use crate::orchestrator::evaluate_objective;
use crate::scenario::{Scenario, Trajectory};
use crate::subproblems::{round_schedule, BinarySchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaselineKind {
    UpperBound,
    Static,
}

/// Hover point and equalizing timeshare for one user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoverPoint<T> {
    pub user: usize,
    /// Fraction of the way from the user towards the base station.
    pub t: T,
    pub position: [T; 3],
    pub alpha: T,
    pub se_gv: T,
    pub se_vb: T,
    pub se: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum BaselineDetails<T> {
    UpperBound { hover_points: Vec<HoverPoint<T>> },
    Static { trajectory: Trajectory<T>, alpha: T, schedule: BinarySchedule },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult<T> {
    pub kind: BaselineKind,
    pub objective: T,
    pub details: BaselineDetails<T>,
}

/// Relay SE `SE1 * SE2 / (SE1 + SE2)` of a two-hop link with equalizing timeshare.
pub fn equalized_se<T: Real>(se1: T, se2: T) -> T {
    let sum = se1 + se2;
    if sum > T::zero() {
        se1 * se2 / sum
    } else {
        T::zero()
    }
}

/// Equalizing timeshare `SE2 / (SE1 + SE2)`.
pub fn equalizing_alpha<T: Real>(se1: T, se2: T) -> T {
    let sum = se1 + se2;
    if sum > T::zero() {
        se2 / sum
    } else {
        T::lit(0.5)
    }
}

/// Timeshare of a single virtual user at the dead-zone center served from
/// directly above the circle's center.
pub fn static_alpha<T: Real>(scenario: &Scenario<T>, traj: &Trajectory<T>) -> T {
    let links = LinkConstants::new(scenario);
    let se1 = spectral_efficiency(links.a_g, sq(traj.altitude_m));
    let b = scenario.bs_position;
    let d2 = sq(traj.center_xy[0] - b[0]) + sq(traj.center_xy[1] - b[1]) + sq(traj.altitude_m - b[2]);
    let se2 = spectral_efficiency(links.a_b, d2);
    equalizing_alpha(se1, se2)
}

/// Uniformly random cap-respecting schedule drawn from `seed`.
pub fn random_schedule(
    num_users: usize,
    num_slots: usize,
    per_slot: usize,
    cap: usize,
    seed: u64,
) -> BinarySchedule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scores: Vec<f64> = (0..num_users * num_slots).map(|_| rng.random()).collect();
    round_schedule(num_users, num_slots, per_slot, cap, |g, s| scores[g * num_slots + s])
}

/// Fixed circle over the dead zone at minimum radius with a random schedule.
pub fn static_baseline<T: Real>(scenario: &Scenario<T>, seed: u64) -> Result<BaselineResult<T>> {
    scenario.validate()?;
    let trajectory = Trajectory::over_dead_zone(scenario);
    let alpha = static_alpha(scenario, &trajectory);
    let schedule = random_schedule(
        scenario.num_users(),
        scenario.num_slots,
        scenario.users_per_slot,
        scenario.per_user_cap(),
        seed,
    );
    let objective = evaluate_objective(scenario, alpha, &trajectory, &schedule);
    Ok(BaselineResult {
        kind: BaselineKind::Static,
        objective,
        details: BaselineDetails::Static { trajectory, alpha, schedule },
    })
}

/// Per-user ideal hovering: each user is served from the best point on the
/// segment towards the base station at the flight altitude, with the same
/// per-user bandwidth share as the circling relay.
pub fn upper_bound<T: Real>(scenario: &Scenario<T>) -> Result<BaselineResult<T>> {
    scenario.validate()?;
    let links = LinkConstants::new(scenario);
    let h = scenario.altitude_m;
    let b = scenario.bs_position;
    let hover_points: Vec<HoverPoint<T>> = scenario
        .users
        .iter()
        .enumerate()
        .map(|(user, u)| {
            let at = |t: T| {
                let p = [u[0] + t * (b[0] - u[0]), u[1] + t * (b[1] - u[1]), h];
                let se1 = spectral_efficiency(links.a_g, sq(p[0] - u[0]) + sq(p[1] - u[1]) + sq(h - u[2]));
                let se2 = spectral_efficiency(links.a_b, sq(p[0] - b[0]) + sq(p[1] - b[1]) + sq(h - b[2]));
                (p, se1, se2)
            };
            let t = maximize_on_unit(|t| {
                let (_, se1, se2) = at(t);
                equalized_se(se1, se2)
            });
            let (position, se_gv, se_vb) = at(t);
            HoverPoint {
                user,
                t,
                position,
                alpha: equalizing_alpha(se_gv, se_vb),
                se_gv,
                se_vb,
                se: equalized_se(se_gv, se_vb),
            }
        })
        .collect();
    let n = T::from_usize(hover_points.len()).unwrap();
    let objective = hover_points.iter().fold(T::zero(), |acc, p| acc + p.se) / n;
    Ok(BaselineResult { kind: BaselineKind::UpperBound, objective, details: BaselineDetails::UpperBound { hover_points } })
}

/// Coarse scan over `[0, 1]` followed by golden-section refinement around the
/// best sample.
fn maximize_on_unit<T: Real>(f: impl Fn(T) -> T) -> T {
    const SAMPLES: usize = 64;
    let step = T::one() / T::from_usize(SAMPLES).unwrap();
    let mut best = (T::zero(), f(T::zero()));
    for k in 1..=SAMPLES {
        let t = step * T::from_usize(k).unwrap();
        let v = f(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    let mut lo = (best.0 - step).max(T::zero());
    let mut hi = (best.0 + step).min(T::one());
    let ratio = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let tol = T::tol(1e-9);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
    }
    let mid = (lo + hi) / T::lit(2.0);
    [mid, best.0].into_iter().fold((mid, f(mid)), |acc, t| {
        let v = f(t);
        if v > acc.1 {
            (t, v)
        } else {
            acc
        }
    }).0
}
