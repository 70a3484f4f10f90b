//! Free-space link budget for the ground-to-UAV (GV) and UAV-to-BS (VB) hops.
//!
//! Slot arguments here are zero-based array indices: slot `s` is flown at
//! `Trajectory::position(s + 1, N)`.

use serde::{Deserialize, Serialize};

use crate::num::Real;
use crate::scenario::{dist_sq, Scenario, Trajectory};
use crate::subproblems::BinarySchedule;

/// SNR constants scaled by squared distance: `SNR = a / d` with `d` in m².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkConstants<T> {
    /// Per-user GV constant, including the band split across `M` users.
    pub a_g: T,
    pub a_b: T,
}

impl<T: Real> LinkConstants<T> {
    pub fn new(scenario: &Scenario<T>) -> Self {
        let r = &scenario.radio;
        let m = T::from_usize(scenario.users_per_slot).unwrap();
        let noise = r.noise_psd_w_per_hz * r.bandwidth_hz;
        let path = free_space_factor(r.wavelength_m) * r.antenna_gain_tx * r.antenna_gain_rx;
        Self {
            a_g: r.user_tx_power_w * path * m / noise,
            a_b: r.uav_tx_power_w * path / noise,
        }
    }
}

/// `(lambda / 4 pi)^2`
fn free_space_factor<T: Real>(wavelength: T) -> T {
    let f = wavelength / (T::lit(4.0) * T::PI());
    f * f
}

/// Free-space received power at squared distance `d_sq`.
pub fn received_power<T: Real>(tx_power: T, gain_tx: T, gain_rx: T, wavelength: T, d_sq: T) -> T {
    tx_power * gain_tx * gain_rx * free_space_factor(wavelength) / d_sq
}

/// `log2(1 + a / d)`: spectral efficiency at squared distance `d`.
pub fn spectral_efficiency<T: Real>(a: T, d: T) -> T {
    (a / d).ln_1p() / T::LN_2()
}

/// `log2(1 + snr)`
pub fn se_from_snr<T: Real>(snr: T) -> T {
    snr.ln_1p() / T::LN_2()
}

pub fn rx_power_gv<T: Real>(scenario: &Scenario<T>, traj: &Trajectory<T>, user: usize, slot: usize) -> T {
    let p = traj.position(slot + 1, scenario.num_slots);
    let r = &scenario.radio;
    received_power(
        r.user_tx_power_w,
        r.antenna_gain_tx,
        r.antenna_gain_rx,
        r.wavelength_m,
        dist_sq(&p, &scenario.users[user]),
    )
}

pub fn rx_power_vb<T: Real>(scenario: &Scenario<T>, traj: &Trajectory<T>, slot: usize) -> T {
    let p = traj.position(slot + 1, scenario.num_slots);
    let r = &scenario.radio;
    received_power(
        r.uav_tx_power_w,
        r.antenna_gain_tx,
        r.antenna_gain_rx,
        r.wavelength_m,
        dist_sq(&p, &scenario.bs_position),
    )
}

/// Per-user GV spectral efficiency; each of the `M` users sees noise `N0 B / M`.
pub fn se_gv_user<T: Real>(scenario: &Scenario<T>, traj: &Trajectory<T>, user: usize, slot: usize) -> T {
    let r = &scenario.radio;
    let m = T::from_usize(scenario.users_per_slot).unwrap();
    let noise = r.noise_psd_w_per_hz * r.bandwidth_hz / m;
    se_from_snr(rx_power_gv(scenario, traj, user, slot) / noise)
}

pub fn se_vb<T: Real>(scenario: &Scenario<T>, traj: &Trajectory<T>, slot: usize) -> T {
    let r = &scenario.radio;
    se_from_snr(rx_power_vb(scenario, traj, slot) / (r.noise_psd_w_per_hz * r.bandwidth_hz))
}

/// Mean GV spectral efficiency over the users scheduled in `slot`, divided by `M`.
pub fn se_gv_slot<T: Real>(
    scenario: &Scenario<T>,
    traj: &Trajectory<T>,
    schedule: &BinarySchedule,
    slot: usize,
) -> T {
    let sum = schedule
        .slot_users(slot)
        .fold(T::zero(), |acc, g| acc + se_gv_user(scenario, traj, g, slot));
    sum / T::from_usize(scenario.users_per_slot).unwrap()
}

/// Squared distances from every slot position to every user and to the BS.
#[derive(Debug, Clone, PartialEq)]
pub struct SqDistances<T> {
    num_users: usize,
    /// `d_gv[s * G + g]`
    d_gv: Vec<T>,
    d_vb: Vec<T>,
}

impl<T: Real> SqDistances<T> {
    pub fn new(scenario: &Scenario<T>, traj: &Trajectory<T>) -> Self {
        let g_count = scenario.num_users();
        let positions = traj.positions(scenario.num_slots);
        let mut d_gv = Vec::with_capacity(g_count * positions.len());
        let mut d_vb = Vec::with_capacity(positions.len());
        for p in &positions {
            d_gv.extend(scenario.users.iter().map(|u| dist_sq(p, u)));
            d_vb.push(dist_sq(p, &scenario.bs_position));
        }
        Self { num_users: g_count, d_gv, d_vb }
    }

    pub fn gv(&self, user: usize, slot: usize) -> T {
        self.d_gv[slot * self.num_users + user]
    }

    pub fn vb(&self, slot: usize) -> T {
        self.d_vb[slot]
    }

    pub fn num_slots(&self) -> usize {
        self.d_vb.len()
    }
}

/// Spectral efficiencies of every GV pair and every VB slot for one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkRates<T> {
    num_users: usize,
    users_per_slot: usize,
    gv: Vec<T>,
    vb: Vec<T>,
}

impl<T: Real> LinkRates<T> {
    pub fn new(scenario: &Scenario<T>, traj: &Trajectory<T>) -> Self {
        Self::from_distances(scenario, &SqDistances::new(scenario, traj))
    }

    pub fn from_distances(scenario: &Scenario<T>, d: &SqDistances<T>) -> Self {
        let k = LinkConstants::new(scenario);
        Self {
            num_users: d.num_users,
            users_per_slot: scenario.users_per_slot,
            gv: d.d_gv.iter().map(|&x| spectral_efficiency(k.a_g, x)).collect(),
            vb: d.d_vb.iter().map(|&x| spectral_efficiency(k.a_b, x)).collect(),
        }
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_slots(&self) -> usize {
        self.vb.len()
    }

    pub fn gv(&self, user: usize, slot: usize) -> T {
        self.gv[slot * self.num_users + user]
    }

    pub fn vb(&self, slot: usize) -> T {
        self.vb[slot]
    }

    pub fn slot_gv(&self, schedule: &BinarySchedule, slot: usize) -> T {
        let sum = schedule.slot_users(slot).fold(T::zero(), |acc, g| acc + self.gv(g, slot));
        sum / T::from_usize(self.users_per_slot).unwrap()
    }
}
