//! On-disk scenario description and dotted-path overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::experiments::sample_users;
use crate::num::Real;
use crate::scenario::{RadioConfig, Scenario};

/// Bivariate normal user placement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Distribution {
    pub mean_x: f64,
    pub mean_y: f64,
    pub std_x: f64,
    pub std_y: f64,
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UsersConfig {
    Explicit(Vec<[f64; 3]>),
    Sampled { distribution: Distribution },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UavConfig {
    pub altitude_m: f64,
    pub min_radius_m: f64,
    pub speed_min_mps: f64,
    pub speed_max_mps: f64,
}

impl Default for UavConfig {
    fn default() -> Self {
        Self { altitude_m: 1000.0, min_radius_m: 500.0, speed_min_mps: 30.0, speed_max_mps: 100.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SlotsConfig {
    pub count: usize,
    pub duration_s: f64,
    pub users_per_slot: usize,
}

impl Default for SlotsConfig {
    fn default() -> Self {
        Self { count: 64, duration_s: 1.0, users_per_slot: 2 }
    }
}

/// Top-level config file. Missing sections take the desk-scale defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub bs: [f64; 3],
    pub users: UsersConfig,
    pub uav: UavConfig,
    pub slots: SlotsConfig,
    pub radio: RadioConfig<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl ScenarioConfig {
    /// 10 users around (10 km, 0) with 2 km spread, 64 one-second slots, 2 users per slot.
    pub fn desk() -> Self {
        Self {
            bs: [0.0; 3],
            users: UsersConfig::Sampled {
                distribution: Distribution {
                    mean_x: 10_000.0,
                    mean_y: 0.0,
                    std_x: 2000.0,
                    std_y: 2000.0,
                    count: 10,
                    seed: 0,
                },
            },
            uav: UavConfig::default(),
            slots: SlotsConfig::default(),
            radio: RadioConfig::default(),
        }
    }

    /// 20 users, 500 slots of 0.1 s.
    pub fn full_scale() -> Self {
        let mut c = Self::desk();
        if let UsersConfig::Sampled { distribution } = &mut c.users {
            distribution.count = 20;
        }
        c.slots = SlotsConfig { count: 500, duration_s: 0.1, users_per_slot: 2 };
        c
    }

    pub fn distribution(&self) -> Option<&Distribution> {
        match &self.users {
            UsersConfig::Sampled { distribution } => Some(distribution),
            UsersConfig::Explicit(_) => None,
        }
    }

    pub fn distribution_mut(&mut self) -> Option<&mut Distribution> {
        match &mut self.users {
            UsersConfig::Sampled { distribution } => Some(distribution),
            UsersConfig::Explicit(_) => None,
        }
    }

    pub fn from_json_str(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut value: Value = serde_json::from_str(text)?;
        for (key, raw) in overrides {
            apply_override(&mut value, key, raw)?;
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn load(path: impl AsRef<Path>, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text, overrides)
    }

    /// Builds and validates the scenario, sampling users when a distribution is given.
    pub fn to_scenario<T: Real>(&self) -> Result<Scenario<T>> {
        let (users, distribution_mean) = match &self.users {
            UsersConfig::Explicit(list) => (list.iter().map(|u| u.map(T::lit)).collect(), None),
            UsersConfig::Sampled { distribution: d } => (
                sample_users([d.mean_x, d.mean_y], [d.std_x, d.std_y], d.count, d.seed)?,
                Some([T::lit(d.mean_x), T::lit(d.mean_y)]),
            ),
        };
        let scenario = Scenario {
            bs_position: self.bs.map(T::lit),
            users,
            users_per_slot: self.slots.users_per_slot,
            num_slots: self.slots.count,
            slot_duration_s: T::lit(self.slots.duration_s),
            altitude_m: T::lit(self.uav.altitude_m),
            min_radius_m: T::lit(self.uav.min_radius_m),
            speed_min_mps: T::lit(self.uav.speed_min_mps),
            speed_max_mps: T::lit(self.uav.speed_max_mps),
            radio: self.radio.cast(),
            distribution_mean,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

/// Reads a config file, applies `key=value` overrides and returns the validated scenario.
pub fn load_scenario(path: impl AsRef<Path>, overrides: &[(String, String)]) -> Result<Scenario<f64>> {
    ScenarioConfig::load(path, overrides)?.to_scenario()
}

/// Splits `a.b.c=value` into its key and value.
pub fn parse_override(arg: &str) -> Result<(String, String)> {
    let (k, v) = arg
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("override `{arg}` is not of the form key=value")))?;
    if k.is_empty() {
        return Err(Error::Parse(format!("override `{arg}` has an empty key")));
    }
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Sets a dotted path in a JSON tree. The value is parsed as JSON and falls
/// back to a plain string.
fn apply_override(root: &mut Value, key: &str, raw: &str) -> Result<()> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(part.to_string(), value);
                    return Ok(());
                }
                map.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| Error::Parse(format!("override `{key}`: `{part}` is not an index")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| Error::Parse(format!("override `{key}`: index {idx} out of range ({len})")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(Error::Parse(format!("override `{key}`: `{part}` is not inside an object"))),
        };
    }
    Ok(())
}
