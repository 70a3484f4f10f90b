#![allow(dead_code)]

use std::f64::consts::PI;

use uav_relay::{BinarySchedule, Scenario64, ScenarioConfig, Trajectory64};

/// Desk-default scenario with users drawn from `seed`.
pub fn desk_scenario(seed: u64) -> Scenario64 {
    let mut c = ScenarioConfig::desk();
    c.distribution_mut().unwrap().seed = seed;
    c.to_scenario().unwrap()
}

/// UAV waypoint for 0-based slot `s`, written out from the circle definition.
pub fn waypoint(t: &Trajectory64, s: usize, n: usize) -> [f64; 3] {
    let theta = 2.0 * PI * ((s + 1) as f64) / n as f64;
    [t.center_xy[0] + t.radius_m * theta.cos(), t.center_xy[1] + t.radius_m * theta.sin(), t.altitude_m]
}

fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

/// Link-budget SNR: received free-space power over the noise in the user's sub-band.
pub fn snr(tx: f64, gains: f64, lambda: f64, noise_psd: f64, band: f64, d2: f64) -> f64 {
    let pr = tx * gains * (lambda / (4.0 * PI * d2.sqrt())).powi(2);
    pr / (noise_psd * band)
}

pub fn se_user(sc: &Scenario64, t: &Trajectory64, g: usize, s: usize) -> f64 {
    let r = &sc.radio;
    let d2 = dist2(sc.users[g], waypoint(t, s, sc.num_slots));
    let band = r.bandwidth_hz / sc.users_per_slot as f64;
    (1.0 + snr(r.user_tx_power_w, r.antenna_gain_tx * r.antenna_gain_rx, r.wavelength_m, r.noise_psd_w_per_hz, band, d2))
        .log2()
}

pub fn se_relay(sc: &Scenario64, t: &Trajectory64, s: usize) -> f64 {
    let r = &sc.radio;
    let d2 = dist2(sc.bs_position, waypoint(t, s, sc.num_slots));
    (1.0 + snr(r.uav_tx_power_w, r.antenna_gain_tx * r.antenna_gain_rx, r.wavelength_m, r.noise_psd_w_per_hz, r.bandwidth_hz, d2))
        .log2()
}

/// Per-slot (GV, VB) efficiencies for a schedule.
pub fn slot_rates(sc: &Scenario64, t: &Trajectory64, b: &BinarySchedule) -> Vec<(f64, f64)> {
    (0..sc.num_slots)
        .map(|s| {
            let gv = b.slot_users(s).map(|g| se_user(sc, t, g, s)).sum::<f64>() / sc.users_per_slot as f64;
            (gv, se_relay(sc, t, s))
        })
        .collect()
}

pub fn objective_from_rates(rates: &[(f64, f64)], alpha: f64) -> f64 {
    rates.iter().map(|&(gv, vb)| (alpha * gv).min((1.0 - alpha) * vb)).sum::<f64>() / rates.len() as f64
}

pub fn objective(sc: &Scenario64, alpha: f64, t: &Trajectory64, b: &BinarySchedule) -> f64 {
    objective_from_rates(&slot_rates(sc, t, b), alpha)
}
