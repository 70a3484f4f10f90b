//! Seeded Monte Carlo sweeps over user spread, relay power, altitude and
//! distance, with CSV/JSON output.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{static_baseline, upper_bound};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::orchestrator::{optimize, OuterOptions};

/// Independent ground positions with `x ~ N(mean_x, std_x^2)`, `y ~ N(mean_y, std_y^2)`, `z = 0`.
pub fn sample_users<T: Real>(mean: [f64; 2], std: [f64; 2], count: usize, seed: u64) -> Result<Vec<[T; 3]>> {
    let normal = |m: f64, s: f64, axis: &str| {
        if !(s >= 0.0) {
            return Err(Error::validation(format!("user spread along {axis} must be non-negative (got {s})")));
        }
        Normal::new(m, s).map_err(|e| Error::validation(format!("user spread along {axis}: {e} (std {s})")))
    };
    let nx = normal(mean[0], std[0], "x")?;
    let ny = normal(mean[1], std[1], "y")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let x = nx.sample(&mut rng);
            let y = ny.sample(&mut rng);
            [T::lit(x), T::lit(y), T::zero()]
        })
        .collect())
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-run seed, independent of execution order: the master seed, point index
/// and run index are folded in one SplitMix64 round each.
pub fn run_seed(master: u64, point: usize, run: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ point as u64) ^ run as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    Stddev,
    Txpower,
    RadiusVsPower,
    AltDistGrid,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Stddev => "stddev",
            Self::Txpower => "txpower",
            Self::RadiusVsPower => "radius-vs-power",
            Self::AltDistGrid => "alt-dist-grid",
        }
    }

    /// Grid points used when none are given.
    pub fn default_grid(self) -> Vec<GridPoint> {
        const STDS: [f64; 3] = [1000.0, 2000.0, 3000.0];
        const POWERS: [f64; 4] = [0.1, 1.0, 10.0, 100.0];
        match self {
            Self::Stddev => STDS.iter().map(|&s| GridPoint::new(vec![(Param::StdM, s)])).collect(),
            Self::Txpower => POWERS.iter().map(|&p| GridPoint::new(vec![(Param::UavTxPowerW, p)])).collect(),
            Self::RadiusVsPower => STDS
                .iter()
                .flat_map(|&s| POWERS.iter().map(move |&p| GridPoint::new(vec![(Param::StdM, s), (Param::UavTxPowerW, p)])))
                .collect(),
            Self::AltDistGrid => [500.0, 1000.0, 2000.0]
                .iter()
                .flat_map(|&h| {
                    [5000.0, 10000.0, 15000.0]
                        .iter()
                        .map(move |&d| GridPoint::new(vec![(Param::AltitudeM, h), (Param::CentroidDistanceM, d)]))
                })
                .collect(),
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Self::Stddev, Self::Txpower, Self::RadiusVsPower, Self::AltDistGrid]
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown sweep kind `{s}`")))
    }
}

/// A scenario parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Param {
    /// Standard deviation of both user coordinates.
    #[serde(rename = "std_m")]
    StdM,
    #[serde(rename = "uav_tx_power_W")]
    UavTxPowerW,
    #[serde(rename = "altitude_m")]
    AltitudeM,
    /// User mean placed at `(d, 0)` from a base station at the origin.
    #[serde(rename = "centroid_distance_m")]
    CentroidDistanceM,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Self::StdM => "std_m",
            Self::UavTxPowerW => "uav_tx_power_W",
            Self::AltitudeM => "altitude_m",
            Self::CentroidDistanceM => "centroid_distance_m",
        }
    }

    fn apply(self, config: &mut ScenarioConfig, value: f64) -> Result<()> {
        match self {
            Self::UavTxPowerW => config.radio.uav_tx_power_w = value,
            Self::AltitudeM => config.uav.altitude_m = value,
            Self::StdM | Self::CentroidDistanceM => {
                let d = config
                    .distribution_mut()
                    .ok_or_else(|| Error::validation(format!("sweeping {} needs sampled users", self.name())))?;
                if self == Self::StdM {
                    d.std_x = value;
                    d.std_y = value;
                } else {
                    d.mean_x = value;
                    d.mean_y = 0.0;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub params: Vec<(Param, f64)>,
}

impl GridPoint {
    pub fn new(params: Vec<(Param, f64)>) -> Self {
        Self { params }
    }

    /// Parameter names joined by `;`.
    pub fn names(&self) -> String {
        self.params.iter().map(|(p, _)| p.name()).collect::<Vec<_>>().join(";")
    }

    /// Parameter values joined by `;`.
    pub fn values(&self) -> String {
        self.params.iter().map(|(_, v)| v.to_string()).collect::<Vec<_>>().join(";")
    }

    pub fn get(&self, param: Param) -> Option<f64> {
        self.params.iter().find(|(p, _)| *p == param).map(|&(_, v)| v)
    }

    pub fn apply(&self, config: &mut ScenarioConfig) -> Result<()> {
        self.params.iter().try_for_each(|&(p, v)| p.apply(config, v))
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub grid: Vec<GridPoint>,
    pub runs_per_point: usize,
    /// Template scenario; users must be sampled from a distribution.
    pub base: ScenarioConfig,
    pub master_seed: u64,
    pub options: OuterOptions,
}

impl SweepSpec {
    pub fn new(kind: SweepKind, base: ScenarioConfig, runs_per_point: usize, master_seed: u64) -> Self {
        Self { kind, grid: kind.default_grid(), runs_per_point, base, master_seed, options: OuterOptions::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs_per_point == 0 {
            return Err(Error::validation("runs_per_point must be at least 1"));
        }
        if self.grid.is_empty() {
            return Err(Error::validation("sweep grid is empty"));
        }
        if self.base.distribution().is_none() {
            return Err(Error::validation("sweeps need users sampled from a distribution"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub point_index: usize,
    pub params: Vec<(Param, f64)>,
    pub run_index: usize,
    pub seed: u64,
    pub se_optimized: f64,
    pub se_static: f64,
    pub se_upper: f64,
    pub radius_opt_m: f64,
    pub alpha: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub point_index: usize,
    pub run_index: usize,
    pub seed: u64,
    pub error: String,
}

/// Mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std_err: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: f64::NAN, std_err: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std_err = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, std_err }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointAggregate {
    pub point_index: usize,
    pub params: Vec<(Param, f64)>,
    pub runs: usize,
    pub failures: usize,
    pub se_optimized: Stat,
    pub se_static: Stat,
    pub se_upper: Stat,
    /// Optimized minus static.
    pub gain: Stat,
    pub radius_opt_m: Stat,
    pub alpha: Stat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub sweep_kind: SweepKind,
    /// Sorted by `(point_index, run_index)`.
    pub records: Vec<RunRecord>,
    pub failures: Vec<RunFailure>,
    pub aggregates: Vec<PointAggregate>,
}

impl ExperimentResult {
    pub fn aggregate(&self, point_index: usize) -> Option<&PointAggregate> {
        self.aggregates.iter().find(|a| a.point_index == point_index)
    }
}

/// One Monte Carlo run: sample users, optimize, and evaluate both baselines.
pub fn run_single(spec: &SweepSpec, point_index: usize, run_index: usize) -> Result<RunRecord> {
    let point = &spec.grid[point_index];
    let seed = run_seed(spec.master_seed, point_index, run_index);
    let mut config = spec.base.clone();
    point.apply(&mut config)?;
    if let Some(d) = config.distribution_mut() {
        d.seed = seed;
    }
    let scenario = config.to_scenario::<f64>()?;
    let start = Instant::now();
    let options = OuterOptions { init_seed: Some(seed), ..spec.options };
    let solution = optimize(&scenario, &options)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let stat = static_baseline(&scenario, seed)?;
    let upper = upper_bound(&scenario)?;
    Ok(RunRecord {
        point_index,
        params: point.params.clone(),
        run_index,
        seed,
        se_optimized: solution.objective,
        se_static: stat.objective,
        se_upper: upper.objective,
        radius_opt_m: solution.trajectory.radius_m,
        alpha: solution.alpha,
        wall_ms,
    })
}

/// Runs every `(point, run)` pair on up to `parallelism` threads.
///
/// Failed runs are collected in `failures` and left out of the aggregates.
pub fn run_sweep(spec: &SweepSpec, parallelism: usize) -> Result<ExperimentResult> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let jobs: Vec<(usize, usize)> = (0..spec.grid.len())
        .flat_map(|p| (0..spec.runs_per_point).map(move |r| (p, r)))
        .collect();
    let outcomes: Vec<((usize, usize), Result<RunRecord>)> =
        pool.install(|| jobs.par_iter().map(|&(p, r)| ((p, r), run_single(spec, p, r))).collect());

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for ((p, r), outcome) in outcomes {
        match outcome {
            Ok(rec) => records.push(rec),
            Err(e) => {
                log::warn!("run {r} at point {p} failed: {e}");
                failures.push(RunFailure {
                    point_index: p,
                    run_index: r,
                    seed: run_seed(spec.master_seed, p, r),
                    error: e.to_string(),
                })
            }
        }
    }
    records.sort_by_key(|r| (r.point_index, r.run_index));
    failures.sort_by_key(|f| (f.point_index, f.run_index));

    let aggregates = spec
        .grid
        .iter()
        .enumerate()
        .map(|(p, point)| {
            let rows: Vec<&RunRecord> = records.iter().filter(|r| r.point_index == p).collect();
            let stat = |f: fn(&RunRecord) -> f64| Stat::of(&rows.iter().map(|r| f(r)).collect::<Vec<_>>());
            PointAggregate {
                point_index: p,
                params: point.params.clone(),
                runs: rows.len(),
                failures: failures.iter().filter(|f| f.point_index == p).count(),
                se_optimized: stat(|r| r.se_optimized),
                se_static: stat(|r| r.se_static),
                se_upper: stat(|r| r.se_upper),
                gain: stat(|r| r.se_optimized - r.se_static),
                radius_opt_m: stat(|r| r.radius_opt_m),
                alpha: stat(|r| r.alpha),
            }
        })
        .collect();
    Ok(ExperimentResult { sweep_kind: spec.kind, records, failures, aggregates })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::Parse(format!("unknown output format `{s}`"))),
        }
    }
}

pub const CSV_COLUMNS: [&str; 11] = [
    "sweep_kind",
    "point_param_name",
    "point_param_value",
    "run_index",
    "seed",
    "se_optimized",
    "se_static",
    "se_upper",
    "radius_opt_m",
    "alpha",
    "wall_ms",
];

#[derive(Debug, Clone, Copy)]
pub struct EmitOptions {
    /// Write measured wall times; when false every `wall_ms` is 0 so that
    /// output depends only on the spec.
    pub timing: bool,
}

impl Default for EmitOptions {
    fn default() -> Self {
        Self { timing: true }
    }
}

pub fn write_csv<W: std::io::Write>(result: &ExperimentResult, out: W, options: EmitOptions) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in &result.records {
        let point = GridPoint::new(r.params.clone());
        let wall = if options.timing { r.wall_ms } else { 0.0 };
        w.write_record([
            result.sweep_kind.as_str().to_string(),
            point.names(),
            point.values(),
            r.run_index.to_string(),
            r.seed.to_string(),
            r.se_optimized.to_string(),
            r.se_static.to_string(),
            r.se_upper.to_string(),
            r.radius_opt_m.to_string(),
            r.alpha.to_string(),
            wall.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: std::io::Write>(result: &ExperimentResult, out: W, options: EmitOptions) -> Result<()> {
    if options.timing {
        serde_json::to_writer_pretty(out, result)?;
    } else {
        let mut copy = result.clone();
        copy.records.iter_mut().for_each(|r| r.wall_ms = 0.0);
        serde_json::to_writer_pretty(out, &copy)?;
    }
    Ok(())
}

pub fn emit_results(result: &ExperimentResult, path: impl AsRef<Path>, format: OutputFormat, options: EmitOptions) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    match format {
        OutputFormat::Csv => write_csv(result, file, options),
        OutputFormat::Json => write_json(result, file, options),
    }
}
