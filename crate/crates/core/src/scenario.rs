//! Problem instance: geometry, radio constants and slot structure, plus the
//! circular flight path and the per-slot UAV positions it induces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{sq, Real};

/// Transmit powers, antenna gains and noise parameters, all in linear units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "T: Real"))]
pub struct RadioConfig<T> {
    /// Ground user transmit power (W).
    #[serde(rename = "user_tx_power_W")]
    pub user_tx_power_w: T,
    /// UAV transmit power (W).
    #[serde(rename = "uav_tx_power_W")]
    pub uav_tx_power_w: T,
    pub wavelength_m: T,
    pub antenna_gain_tx: T,
    pub antenna_gain_rx: T,
    #[serde(rename = "bandwidth_Hz")]
    pub bandwidth_hz: T,
    /// Noise power spectral density (W/Hz).
    #[serde(rename = "noise_psd_W_per_Hz")]
    pub noise_psd_w_per_hz: T,
}

impl<T: Real> Default for RadioConfig<T> {
    /// 10 mW users, 10 W UAV, 2 GHz carrier, 1 MHz band, -174 dBm/Hz noise, unit gains.
    fn default() -> Self {
        Self {
            user_tx_power_w: T::lit(0.01),
            uav_tx_power_w: T::lit(10.0),
            wavelength_m: T::lit(0.15),
            antenna_gain_tx: T::one(),
            antenna_gain_rx: T::one(),
            bandwidth_hz: T::lit(1e6),
            noise_psd_w_per_hz: T::lit(4e-21),
        }
    }
}

impl<T: Real> RadioConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("user_tx_power_W", self.user_tx_power_w),
            ("uav_tx_power_W", self.uav_tx_power_w),
            ("wavelength_m", self.wavelength_m),
            ("antenna_gain_tx", self.antenna_gain_tx),
            ("antenna_gain_rx", self.antenna_gain_rx),
            ("bandwidth_Hz", self.bandwidth_hz),
            ("noise_psd_W_per_Hz", self.noise_psd_w_per_hz),
        ];
        for (name, v) in fields {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::validation(format!(
                    "radio.{name} must be strictly positive and finite (got {v})"
                )));
            }
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> RadioConfig<U> {
        let c = |v: T| U::lit(v.as_f64());
        RadioConfig {
            user_tx_power_w: c(self.user_tx_power_w),
            uav_tx_power_w: c(self.uav_tx_power_w),
            wavelength_m: c(self.wavelength_m),
            antenna_gain_tx: c(self.antenna_gain_tx),
            antenna_gain_rx: c(self.antenna_gain_rx),
            bandwidth_hz: c(self.bandwidth_hz),
            noise_psd_w_per_hz: c(self.noise_psd_w_per_hz),
        }
    }
}

/// A validated relay problem instance.
///
/// Users sit on the ground (`z = 0`), the UAV flies at a constant altitude and
/// serves `users_per_slot` users per slot over `num_slots` slots per revolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct Scenario<T> {
    pub bs_position: [T; 3],
    pub users: Vec<[T; 3]>,
    pub users_per_slot: usize,
    pub num_slots: usize,
    pub slot_duration_s: T,
    pub altitude_m: T,
    pub min_radius_m: T,
    pub speed_min_mps: T,
    pub speed_max_mps: T,
    pub radio: RadioConfig<T>,
    /// Mean of the distribution the users were drawn from, when they were sampled.
    #[serde(default)]
    pub distribution_mean: Option<[T; 2]>,
}

impl<T: Real> Scenario<T> {
    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    /// Maximum number of slots any single user may be scheduled in: `floor(N*M/G)`.
    pub fn per_user_cap(&self) -> usize {
        self.num_slots * self.users_per_slot / self.num_users().max(1)
    }

    /// Ground-plane centre of the dead zone: the sampling mean when known,
    /// otherwise the empirical user centroid.
    pub fn dead_zone_center(&self) -> [T; 2] {
        if let Some(mean) = self.distribution_mean {
            return mean;
        }
        let g = T::from_usize(self.num_users().max(1)).unwrap();
        let (sx, sy) = self
            .users
            .iter()
            .fold((T::zero(), T::zero()), |(x, y), u| (x + u[0], y + u[1]));
        [sx / g, sy / g]
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.num_users();
        let m = self.users_per_slot;
        if m < 1 {
            return Err(Error::validation("users_per_slot (M) must be at least 1"));
        }
        if g < m {
            return Err(Error::validation(format!(
                "number of users G={g} must be at least users_per_slot M={m}"
            )));
        }
        if self.num_slots < 1 {
            return Err(Error::validation("slot count N must be at least 1"));
        }
        if self.per_user_cap() < 1 {
            return Err(Error::validation(format!(
                "per-user cap floor(N*M/G) is zero for N={}, M={m}, G={g}",
                self.num_slots
            )));
        }
        for (i, u) in self.users.iter().enumerate() {
            if u[2] != T::zero() {
                return Err(Error::validation(format!(
                    "user {i} has z={} but users must be at ground level (z=0)",
                    u[2]
                )));
            }
            if !(u[0].is_finite() && u[1].is_finite()) {
                return Err(Error::validation(format!("user {i} has a non-finite coordinate")));
            }
        }
        if !self.bs_position.iter().all(|v| v.is_finite()) {
            return Err(Error::validation("bs position must be finite"));
        }
        let positive = [
            ("uav.altitude_m", self.altitude_m),
            ("uav.min_radius_m", self.min_radius_m),
            ("slots.duration_s", self.slot_duration_s),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::validation(format!("{name} must be strictly positive (got {v})")));
            }
        }
        if self.speed_min_mps < T::zero() || self.speed_max_mps < self.speed_min_mps {
            return Err(Error::validation(
                "uav speeds must satisfy 0 <= speed_min_mps <= speed_max_mps",
            ));
        }
        if self.altitude_m <= self.bs_position[2] {
            return Err(Error::validation(format!(
                "uav altitude {} must exceed the BS height {}",
                self.altitude_m, self.bs_position[2]
            )));
        }
        self.radio.validate()
    }

    /// The same scenario in another scalar type.
    pub fn cast<U: Real>(&self) -> Scenario<U> {
        let c = |v: T| U::lit(v.as_f64());
        Scenario {
            bs_position: self.bs_position.map(c),
            users: self.users.iter().map(|u| u.map(c)).collect(),
            users_per_slot: self.users_per_slot,
            num_slots: self.num_slots,
            slot_duration_s: c(self.slot_duration_s),
            altitude_m: c(self.altitude_m),
            min_radius_m: c(self.min_radius_m),
            speed_min_mps: c(self.speed_min_mps),
            speed_max_mps: c(self.speed_max_mps),
            radio: self.radio.cast(),
            distribution_mean: self.distribution_mean.map(|m| m.map(c)),
        }
    }
}

/// Circular flight path at constant altitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub center_xy: [T; 2],
    pub radius_m: T,
    pub altitude_m: T,
}

impl<T: Real> Trajectory<T> {
    pub fn new(center_xy: [T; 2], radius_m: T, altitude_m: T) -> Self {
        Self { center_xy, radius_m, altitude_m }
    }

    /// Circle at minimum radius over the dead-zone centre.
    pub fn over_dead_zone(scenario: &Scenario<T>) -> Self {
        Self::new(scenario.dead_zone_center(), scenario.min_radius_m, scenario.altitude_m)
    }

    pub fn validate(&self, scenario: &Scenario<T>) -> Result<()> {
        if !(self.radius_m >= scenario.min_radius_m) {
            return Err(Error::validation(format!(
                "trajectory radius {} is below the minimum {}",
                self.radius_m, scenario.min_radius_m
            )));
        }
        if !(self.altitude_m > T::zero()) {
            return Err(Error::validation("trajectory altitude must be positive"));
        }
        Ok(())
    }

    /// UAV position in slot `slot` (1-based; any integer is accepted, the path is periodic).
    pub fn position(&self, slot: usize, num_slots: usize) -> [T; 3] {
        let (sin, cos) = slot_angle::<T>(slot, num_slots).sin_cos();
        [
            self.center_xy[0] + self.radius_m * cos,
            self.center_xy[1] + self.radius_m * sin,
            self.altitude_m,
        ]
    }

    /// Positions for slots `1..=num_slots`, in order.
    pub fn positions(&self, num_slots: usize) -> Vec<[T; 3]> {
        (1..=num_slots).map(|n| self.position(n, num_slots)).collect()
    }
}

/// Angle `2*pi*n/N` of slot `n`, reduced modulo a full turn.
pub fn slot_angle<T: Real>(slot: usize, num_slots: usize) -> T {
    let k = slot % num_slots;
    T::TAU() * T::from_usize(k).unwrap() / T::from_usize(num_slots).unwrap()
}

pub fn uav_position<T: Real>(traj: &Trajectory<T>, slot: usize, num_slots: usize) -> [T; 3] {
    traj.position(slot, num_slots)
}

/// Ground speed needed to complete one revolution in `N * T_s` seconds.
///
/// Logs a warning when the result falls outside the airframe's speed envelope;
/// speed never constrains the optimization.
pub fn implied_speed<T: Real>(traj: &Trajectory<T>, scenario: &Scenario<T>) -> T {
    let period = T::from_usize(scenario.num_slots).unwrap() * scenario.slot_duration_s;
    let v = T::TAU() * traj.radius_m / period;
    if v < scenario.speed_min_mps || v > scenario.speed_max_mps {
        log::warn!(
            "implied flight speed {v:.3} m/s is outside [{}, {}] m/s",
            scenario.speed_min_mps,
            scenario.speed_max_mps
        );
    }
    v
}

pub(crate) fn dist_sq<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    sq(a[0] - b[0]) + sq(a[1] - b[1]) + sq(a[2] - b[2])
}
