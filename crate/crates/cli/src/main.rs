use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use uav_relay::config::parse_override;
use uav_relay::experiments::{emit_results, EmitOptions, OutputFormat};
use uav_relay::scenario::implied_speed;
use uav_relay::{
    optimize, run_sweep, static_baseline, upper_bound, Error, OuterOptions, Result, Scenario64, ScenarioConfig,
    SweepKind, SweepSpec,
};

#[derive(Parser)]
#[command(name = "uav-relay", version, about = "Fixed-wing UAV relay optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize one scenario and compare against both baselines.
    Optimize {
        #[arg(long)]
        scenario: PathBuf,
        /// Override a config value by dotted path, e.g. `uav.altitude_m=500`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Output format; inferred from the file extension when omitted.
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Seed for the static baseline's schedule, which is also the starting schedule.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte Carlo sweep over one of the study grids.
    Sweep {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Template scenario; users must use a `distribution`. Desk defaults when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; all cores when omitted.
        #[arg(long)]
        parallelism: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Write 0 for wall times so output is byte-reproducible.
        #[arg(long)]
        no_timing: bool,
    },
    /// Evaluate a single baseline and print it as JSON.
    Baseline {
        #[arg(long, value_enum)]
        kind: BaselineArg,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Stddev,
    Txpower,
    RadiusVsPower,
    AltDistGrid,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineArg {
    Upper,
    Static,
}

impl From<Kind> for SweepKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Stddev => SweepKind::Stddev,
            Kind::Txpower => SweepKind::Txpower,
            Kind::RadiusVsPower => SweepKind::RadiusVsPower,
            Kind::AltDistGrid => SweepKind::AltDistGrid,
        }
    }
}

fn output_format(explicit: Option<Format>, path: &Path) -> OutputFormat {
    match explicit {
        Some(Format::Csv) => OutputFormat::Csv,
        Some(Format::Json) => OutputFormat::Json,
        None if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => OutputFormat::Csv,
        None => OutputFormat::Json,
    }
}

fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<ScenarioConfig> {
    let overrides = overrides.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>>>()?;
    match path {
        Some(p) => ScenarioConfig::load(p, &overrides),
        None => {
            let text = serde_json::to_string(&ScenarioConfig::desk())?;
            ScenarioConfig::from_json_str(&text, &overrides)
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(Error::from)
}

fn run_optimize(scenario: &Scenario64, out: &Path, format: OutputFormat, seed: u64) -> Result<()> {
    let solution = optimize(scenario, &OuterOptions { init_seed: Some(seed), ..Default::default() })?;
    let stat = static_baseline(scenario, seed)?;
    let upper = upper_bound(scenario)?;
    let speed = implied_speed(&solution.trajectory, scenario);
    println!("optimized SE     {:.6} bits/s/Hz", solution.objective);
    println!("static baseline  {:.6} bits/s/Hz", stat.objective);
    println!("upper bound      {:.6} bits/s/Hz", upper.objective);
    println!(
        "circle center ({:.1}, {:.1}) m, radius {:.1} m, alpha {:.4}, speed {:.2} m/s, {} outer iterations",
        solution.trajectory.center_xy[0],
        solution.trajectory.center_xy[1],
        solution.trajectory.radius_m,
        solution.alpha,
        speed,
        solution.outer_trace.len() - 1
    );
    match format {
        OutputFormat::Json => {
            let doc = json!({
                "scenario": scenario,
                "solution": solution,
                "implied_speed_mps": speed,
                "static": stat,
                "upper": upper,
            });
            write_file(out, &serde_json::to_string_pretty(&doc)?)
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_path(out)?;
            w.write_record([
                "se_optimized",
                "se_static",
                "se_upper",
                "alpha",
                "center_x_m",
                "center_y_m",
                "radius_m",
                "implied_speed_mps",
                "outer_iterations",
            ])?;
            w.write_record([
                solution.objective.to_string(),
                stat.objective.to_string(),
                upper.objective.to_string(),
                solution.alpha.to_string(),
                solution.trajectory.center_xy[0].to_string(),
                solution.trajectory.center_xy[1].to_string(),
                solution.trajectory.radius_m.to_string(),
                speed.to_string(),
                (solution.outer_trace.len() - 1).to_string(),
            ])?;
            w.flush()?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Optimize { scenario, overrides, out, format, seed } => {
            let sc = load_config(Some(&scenario), &overrides)?.to_scenario()?;
            run_optimize(&sc, &out, output_format(format, &out), seed)
        }
        Command::Sweep { kind, scenario, overrides, runs, seed, parallelism, out, format, no_timing } => {
            let base = load_config(scenario.as_deref(), &overrides)?;
            let spec = SweepSpec::new(kind.into(), base, runs, seed);
            let threads = parallelism
                .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
            let result = run_sweep(&spec, threads)?;
            emit_results(&result, &out, output_format(format, &out), EmitOptions { timing: !no_timing })?;
            println!(
                "{} sweep: {} records, {} failures written to {}",
                result.sweep_kind,
                result.records.len(),
                result.failures.len(),
                out.display()
            );
            for a in &result.aggregates {
                let point = uav_relay::experiments::GridPoint::new(a.params.clone());
                println!(
                    "  {}={}: optimized {:.4} (+/- {:.4}), static {:.4}, upper {:.4}, radius {:.0} m",
                    point.names(),
                    point.values(),
                    a.se_optimized.mean,
                    a.se_optimized.std_err,
                    a.se_static.mean,
                    a.se_upper.mean,
                    a.radius_opt_m.mean
                );
            }
            Ok(())
        }
        Command::Baseline { kind, scenario, overrides, seed, out } => {
            let sc: Scenario64 = load_config(Some(&scenario), &overrides)?.to_scenario()?;
            let result = match kind {
                BaselineArg::Upper => upper_bound(&sc)?,
                BaselineArg::Static => static_baseline(&sc, seed)?,
            };
            let text = serde_json::to_string_pretty(&result)?;
            match out {
                Some(path) => write_file(&path, &text),
                None => {
                    println!("{text}");
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
