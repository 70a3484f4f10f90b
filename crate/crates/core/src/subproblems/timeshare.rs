use super::{BinarySchedule, SlotBounds};
use crate::channel::LinkRates;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::scenario::{Scenario, Trajectory};
use crate::solver::{LinearConstraint, LinearProgram, LpSolver, Simplex, SimplexOptions, SolveStatus};

#[derive(Debug, Clone)]
pub struct TimeshareOutcome<T> {
    pub alpha: T,
    pub bounds: SlotBounds<T>,
    pub objective: T,
}

/// Timeshare LP: `max mean(eta)` over `alpha in [0, 1]` with
/// `eta_n <= alpha * SE_gv_n` and `eta_n <= (1 - alpha) * SE_vb_n`.
pub fn optimize_timeshare<T: Real>(
    scenario: &Scenario<T>,
    traj: &Trajectory<T>,
    schedule: &BinarySchedule,
) -> Result<TimeshareOutcome<T>> {
    let rates = LinkRates::new(scenario, traj);
    optimize_timeshare_with_rates(&rates, schedule)
}

pub(crate) fn optimize_timeshare_with_rates<T: Real>(
    rates: &LinkRates<T>,
    schedule: &BinarySchedule,
) -> Result<TimeshareOutcome<T>> {
    let gv: Vec<T> = (0..rates.num_slots()).map(|s| rates.slot_gv(schedule, s)).collect();
    let vb: Vec<T> = (0..rates.num_slots()).map(|s| rates.vb(s)).collect();
    let alpha = timeshare_from_rates(&gv, &vb)?;
    let bounds = SlotBounds::tight(rates, alpha, schedule);
    let objective = bounds.mean();
    Ok(TimeshareOutcome { alpha, bounds, objective })
}

/// Solves the timeshare LP for per-slot link efficiencies and returns `alpha`.
pub fn timeshare_from_rates<T: Real>(gv: &[T], vb: &[T]) -> Result<T> {
    let n = gv.len();
    let nf = T::from_usize(n.max(1)).unwrap();
    let mut objective = vec![T::one() / nf; n + 1];
    objective[0] = T::zero();
    let mut lp = LinearProgram::new(objective);
    lp.bounds[0] = (T::zero(), T::one());
    for s in 0..n {
        lp.push(LinearConstraint::le(vec![(s + 1, T::one()), (0, -gv[s])], T::zero()));
        lp.push(LinearConstraint::le(vec![(s + 1, T::one()), (0, vb[s])], vb[s]));
    }
    let res = Simplex::new(SimplexOptions::default()).solve_lp(&lp)?;
    if res.status != SolveStatus::Optimal {
        return Err(Error::Solver(format!("timeshare LP ended with {:?}", res.status)));
    }
    Ok(res.x[0].max(T::zero()).min(T::one()))
}
