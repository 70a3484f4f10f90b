use serde::{Deserialize, Serialize};

use super::SlotBounds;
use crate::channel::LinkRates;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::scenario::{Scenario, Trajectory};
use crate::solver::{LinearConstraint, LinearProgram, LpSolver, Simplex, SimplexOptions, SolveStatus};

/// Binary user-to-slot assignment, stored as the sorted user list of each slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinarySchedule {
    num_users: usize,
    slots: Vec<Vec<usize>>,
}

impl BinarySchedule {
    pub fn empty(num_users: usize, num_slots: usize) -> Self {
        Self { num_users, slots: vec![Vec::new(); num_slots] }
    }

    /// Every user in every slot.
    pub fn full(num_users: usize, num_slots: usize) -> Self {
        Self { num_users, slots: vec![(0..num_users).collect(); num_slots] }
    }

    pub fn from_slots(num_users: usize, mut slots: Vec<Vec<usize>>) -> Self {
        for s in &mut slots {
            s.sort_unstable();
            s.dedup();
        }
        Self { num_users, slots }
    }

    /// Round-robin assignment: slot `s` takes users `(s*M + k) mod G`, subject to the cap.
    pub fn round_robin(num_users: usize, num_slots: usize, per_slot: usize, cap: usize) -> Self {
        round_schedule(num_users, num_slots, per_slot, cap, |g, s| {
            let offset = (g + num_users - (s * per_slot) % num_users) % num_users;
            if offset < per_slot {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn get(&self, user: usize, slot: usize) -> bool {
        self.slots[slot].binary_search(&user).is_ok()
    }

    pub fn set(&mut self, user: usize, slot: usize, on: bool) {
        let list = &mut self.slots[slot];
        match (list.binary_search(&user), on) {
            (Err(pos), true) => list.insert(pos, user),
            (Ok(pos), false) => {
                list.remove(pos);
            }
            _ => {}
        }
    }

    pub fn slot_users(&self, slot: usize) -> impl Iterator<Item = usize> + '_ {
        self.slots[slot].iter().copied()
    }

    pub fn column_sum(&self, slot: usize) -> usize {
        self.slots[slot].len()
    }

    pub fn row_sum(&self, user: usize) -> usize {
        self.slots.iter().filter(|s| s.binary_search(&user).is_ok()).count()
    }

    /// Dense `G x N` 0/1 matrix.
    pub fn to_matrix(&self) -> Vec<Vec<u8>> {
        (0..self.num_users)
            .map(|g| (0..self.num_slots()).map(|s| self.get(g, s) as u8).collect())
            .collect()
    }

    /// Checks `column sums <= M`, `row sums <= cap`, and that every slot is full
    /// whenever the caps leave enough room (`G * cap >= N * M`).
    pub fn validate(&self, per_slot: usize, cap: usize) -> Result<()> {
        let full_possible = self.num_users * cap >= self.num_slots() * per_slot;
        for (s, users) in self.slots.iter().enumerate() {
            if users.len() > per_slot || (full_possible && users.len() != per_slot) {
                return Err(Error::validation(format!(
                    "slot {s} schedules {} users, expected {per_slot}",
                    users.len()
                )));
            }
            if users.iter().any(|&g| g >= self.num_users) {
                return Err(Error::validation(format!("slot {s} references an unknown user")));
            }
        }
        for g in 0..self.num_users {
            let r = self.row_sum(g);
            if r > cap {
                return Err(Error::validation(format!("user {g} scheduled {r} times, cap is {cap}")));
            }
        }
        Ok(())
    }
}

/// Greedy top-`M` rounding of per-slot scores under a per-user cap.
///
/// Slots are processed in order; each takes the highest-scoring users that
/// still have cap left (ties to the lower index). A pick is deferred to a
/// user with more remaining cap only when taking it would leave later slots
/// unfillable, i.e. when it would break `sum_g min(cap_g, R) >= R * M` for the
/// `R` slots that remain.
pub fn round_schedule<S: PartialOrd + Copy>(
    num_users: usize,
    num_slots: usize,
    per_slot: usize,
    cap: usize,
    score: impl Fn(usize, usize) -> S,
) -> BinarySchedule {
    let mut remaining = vec![cap; num_users];
    let mut slots = Vec::with_capacity(num_slots);
    let mut order: Vec<usize> = Vec::with_capacity(num_users);
    for s in 0..num_slots {
        let after = num_slots - s - 1;
        order.clear();
        order.extend((0..num_users).filter(|&g| remaining[g] > 0));
        order.sort_by(|&a, &b| {
            score(b, s)
                .partial_cmp(&score(a, s))
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let room: usize = remaining.iter().map(|&c| c.min(after)).sum();
        let mut slack = room as isize - (after * per_slot) as isize;
        let mut picked = Vec::with_capacity(per_slot);
        for &g in &order {
            if picked.len() == per_slot {
                break;
            }
            let free = remaining[g] > after;
            if free || slack > 0 {
                if !free {
                    slack -= 1;
                }
                picked.push(g);
            }
        }
        // Fill any shortfall (only reachable when the caps cannot fill every slot).
        for &g in &order {
            if picked.len() == per_slot {
                break;
            }
            if !picked.contains(&g) {
                picked.push(g);
            }
        }
        for &g in &picked {
            remaining[g] -= 1;
        }
        slots.push(picked);
    }
    BinarySchedule::from_slots(num_users, slots)
}

/// Relaxed and rounded scheduling variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule<T> {
    /// `relaxed[g][s]` in `[0, 1]`.
    pub relaxed: Vec<Vec<T>>,
    pub binary: BinarySchedule,
}

impl<T: Real> Schedule<T> {
    /// A schedule whose relaxation is its own 0/1 indicator matrix.
    pub fn from_binary(binary: BinarySchedule) -> Self {
        let relaxed = binary
            .to_matrix()
            .into_iter()
            .map(|row| row.into_iter().map(|v| T::from_u8(v).unwrap()).collect())
            .collect();
        Self { relaxed, binary }
    }
}

#[derive(Debug, Clone)]
pub struct ScheduleOutcome<T> {
    pub schedule: Schedule<T>,
    pub bounds: SlotBounds<T>,
    /// Average SE of the rounded schedule.
    pub objective: T,
    /// Optimum of the LP relaxation; never below `objective`.
    pub relaxed_objective: T,
}

/// Scheduling LP over relaxed indicators, followed by cap-aware top-`M` rounding.
pub fn optimize_schedule<T: Real>(
    scenario: &Scenario<T>,
    traj: &Trajectory<T>,
    alpha: T,
) -> Result<ScheduleOutcome<T>> {
    let rates = LinkRates::new(scenario, traj);
    optimize_schedule_with_rates(scenario, &rates, alpha)
}

pub(crate) fn optimize_schedule_with_rates<T: Real>(
    scenario: &Scenario<T>,
    rates: &LinkRates<T>,
    alpha: T,
) -> Result<ScheduleOutcome<T>> {
    if !(alpha >= T::zero() && alpha <= T::one()) {
        return Err(Error::validation(format!("timeshare {alpha} outside [0, 1]")));
    }
    let g_count = scenario.num_users();
    let n = scenario.num_slots;
    let m = scenario.users_per_slot;
    let cap = scenario.per_user_cap();
    let mf = T::from_usize(m).unwrap();
    let nf = T::from_usize(n).unwrap();
    let x = |g: usize, s: usize| g * n + s;
    let eta = |s: usize| g_count * n + s;

    let mut objective = vec![T::zero(); g_count * n + n];
    objective[g_count * n..].iter_mut().for_each(|c| *c = T::one() / nf);
    let mut lp = LinearProgram::new(objective);
    for g in 0..g_count {
        for s in 0..n {
            lp.bounds[x(g, s)] = (T::zero(), T::one());
        }
    }
    for s in 0..n {
        lp.bounds[eta(s)] = (T::zero(), (T::one() - alpha) * rates.vb(s));
        let mut terms = vec![(eta(s), T::one())];
        terms.extend((0..g_count).map(|g| (x(g, s), -alpha / mf * rates.gv(g, s))));
        lp.push(LinearConstraint::le(terms, T::zero()));
    }
    for s in 0..n {
        lp.push(LinearConstraint::le((0..g_count).map(|g| (x(g, s), T::one())).collect(), mf));
    }
    let capf = T::from_usize(cap).unwrap();
    for g in 0..g_count {
        lp.push(LinearConstraint::le((0..n).map(|s| (x(g, s), T::one())).collect(), capf));
    }

    let res = Simplex::new(SimplexOptions::default()).solve_lp(&lp)?;
    if res.status != SolveStatus::Optimal {
        return Err(Error::Solver(format!("scheduling LP ended with {:?}", res.status)));
    }
    let relaxed: Vec<Vec<T>> = (0..g_count)
        .map(|g| (0..n).map(|s| res.x[x(g, s)].max(T::zero()).min(T::one())).collect())
        .collect();
    let binary = round_schedule(g_count, n, m, cap, |g, s| relaxed[g][s]);
    let bounds = SlotBounds::tight(rates, alpha, &binary);
    let objective = bounds.mean();
    debug_assert!(
        res.objective_value >= objective - T::tol(1e-7) * objective.max(T::one()),
        "rounded objective {objective} exceeds LP relaxation {}",
        res.objective_value
    );
    Ok(ScheduleOutcome {
        schedule: Schedule { relaxed, binary },
        bounds,
        objective,
        relaxed_objective: res.objective_value,
    })
}
