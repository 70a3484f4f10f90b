//! Fixed-wing UAV relay optimization for ground users in a coverage hole.
//!
//! The relay circles at a fixed altitude and serves `M` users per slot over
//! FDMA before forwarding to the base station. [`optimize`] maximizes the
//! average relay spectral efficiency by block-coordinate ascent over the
//! timeshare, the user schedule, and the circle's center and radius.
//!
//! All numeric code is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below are the usual entry points.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod channel;
pub mod config;
pub mod error;
pub mod experiments;
pub mod num;
pub mod orchestrator;
pub mod scenario;
pub mod solver;
pub mod subproblems;

pub use baselines::{static_baseline, upper_bound, BaselineKind, BaselineResult};
pub use config::{load_scenario, ScenarioConfig};
pub use error::{Error, Result};
pub use experiments::{emit_results, run_sweep, sample_users, ExperimentResult, SweepKind, SweepSpec};
pub use num::Real;
pub use orchestrator::{evaluate_objective, optimize, optimize_from, OuterOptions, RelaySolution};
pub use scenario::{RadioConfig, Scenario, Trajectory};
pub use subproblems::{BinarySchedule, ScaOptions, Schedule, SlotBounds};

pub type Scenario64 = Scenario<f64>;
pub type Scenario32 = Scenario<f32>;
pub type Trajectory64 = Trajectory<f64>;
pub type Trajectory32 = Trajectory<f32>;
pub type RelaySolution64 = RelaySolution<f64>;
pub type RelaySolution32 = RelaySolution<f32>;
pub type BaselineResult64 = BaselineResult<f64>;
