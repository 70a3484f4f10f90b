//! The three block updates of the relay optimization: timeshare LP,
//! scheduling LP with cap-aware rounding, and SCA over the circular path.

mod schedule;
mod timeshare;
mod trajectory;

pub use schedule::{optimize_schedule, round_schedule, BinarySchedule, Schedule, ScheduleOutcome};
pub use timeshare::{optimize_timeshare, timeshare_from_rates, TimeshareOutcome};
pub use trajectory::{
    sca_trajectory, se_derivative, se_surrogate, ScaOptions, ScaOutcome, TrajectoryProblem,
};

use serde::{Deserialize, Serialize};

use crate::channel::LinkRates;
use crate::num::Real;

/// Per-slot lower bounds `eta_n` on the achievable spectral efficiency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotBounds<T> {
    pub eta: Vec<T>,
}

impl<T: Real> SlotBounds<T> {
    /// Tight bounds `min(alpha * SE_gv, (1 - alpha) * SE_vb)` for a binary schedule.
    pub fn tight(rates: &LinkRates<T>, alpha: T, schedule: &BinarySchedule) -> Self {
        let eta = (0..rates.num_slots())
            .map(|s| (alpha * rates.slot_gv(schedule, s)).min((T::one() - alpha) * rates.vb(s)))
            .collect();
        Self { eta }
    }

    pub fn mean(&self) -> T {
        let n = T::from_usize(self.eta.len().max(1)).unwrap();
        self.eta.iter().fold(T::zero(), |acc, &v| acc + v) / n
    }
}
