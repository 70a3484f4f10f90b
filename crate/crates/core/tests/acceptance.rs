//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uav_relay::experiments::{write_csv, EmitOptions, GridPoint, Param};
use uav_relay::subproblems::{optimize_schedule, se_surrogate, timeshare_from_rates};
use uav_relay::{
    optimize, run_sweep, static_baseline, upper_bound, BinarySchedule, ExperimentResult, OuterOptions,
    ScenarioConfig, SweepKind, SweepSpec, Trajectory64,
};

struct Outcome {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn parallelism() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn surrogate_validity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_tangent = 0.0f64;
    let mut worst_bound = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let a = 10f64.powf(rng.random_range(-2.0..10.0));
        let d = 10f64.powf(rng.random_range(0.0..9.0));
        let d0 = 10f64.powf(rng.random_range(0.0..9.0));
        let exact = |x: f64| (1.0 + a / x).log2();
        worst_tangent = worst_tangent.max((se_surrogate(a, d0, d0) - exact(d0)).abs());
        worst_bound = worst_bound.max(se_surrogate(a, d0, d) - exact(d));
    }
    check(
        worst_tangent <= 1e-12 && worst_bound <= 1e-12,
        format!("max tangency error {worst_tangent:.2e}, max surrogate excess {worst_bound:.2e}"),
    )
}

fn timeshare_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(1..=32);
        let rates: Vec<(f64, f64)> = (0..n).map(|_| (rng.random_range(0.0..4.0), rng.random_range(0.0..4.0))).collect();
        let (gv, vb): (Vec<f64>, Vec<f64>) = rates.iter().copied().unzip();
        let alpha = timeshare_from_rates(&gv, &vb).unwrap();
        let lp = common::objective_from_rates(&rates, alpha);
        let steps = 1_000_000;
        let grid = (0..=steps)
            .map(|k| common::objective_from_rates(&rates, k as f64 / steps as f64))
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max((lp - grid).abs());
    }
    check(worst <= 2e-6, format!("max |LP - grid| = {worst:.2e}"))
}

/// Best binary schedule with at most one user per slot and each user used at most once.
fn exhaustive(sc: &uav_relay::Scenario64, alpha: f64, t: &Trajectory64) -> f64 {
    let mut best = 0.0f64;
    for code in 0..5usize.pow(4) {
        let picks: Vec<usize> = (0..4).map(|s| code / 5usize.pow(s as u32) % 5).collect();
        let mut used = [0; 4];
        let mut b = BinarySchedule::empty(4, 4);
        for (s, &p) in picks.iter().enumerate() {
            if p > 0 {
                used[p - 1] += 1;
                b.set(p - 1, s, true);
            }
        }
        if used.iter().all(|&u| u <= 1) {
            best = best.max(common::objective(sc, alpha, t, &b));
        }
    }
    best
}

fn scheduling_sandwich() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut violations = 0;
    let mut good = 0;
    for i in 0..20u64 {
        let mut c = ScenarioConfig::desk();
        let d = c.distribution_mut().unwrap();
        d.count = 4;
        d.seed = 100 + i;
        c.slots.count = 4;
        c.slots.users_per_slot = 1;
        let sc = c.to_scenario::<f64>().unwrap();
        let t = Trajectory64::new(
            [rng.random_range(8000.0..12000.0), rng.random_range(-2000.0..2000.0)],
            rng.random_range(500.0..3000.0),
            1000.0,
        );
        let alpha = rng.random_range(0.2..0.8);
        let out = optimize_schedule(&sc, &t, alpha).unwrap();
        let rounded = common::objective(&sc, alpha, &t, &out.schedule.binary);
        let best = exhaustive(&sc, alpha, &t);
        if rounded > best + 1e-12 || out.relaxed_objective < best - 1e-9 {
            violations += 1;
        }
        if rounded >= 0.9 * best {
            good += 1;
        }
    }
    check(violations == 0 && good >= 16, format!("sandwich violations {violations}, rounding within 90% on {good}/20"))
}

struct Ascent {
    monotone: Outcome,
    ordering: Outcome,
}

fn ascent_and_ordering() -> Ascent {
    let mut trace_breaks = 0;
    let mut infeasible = 0;
    let mut order_breaks = 0;
    let mut min_margin_static = f64::INFINITY;
    let mut min_margin_upper = f64::INFINITY;
    for seed in 0..25u64 {
        let sc = common::desk_scenario(1000 + seed);
        let sol = optimize(&sc, &OuterOptions { init_seed: Some(seed), ..Default::default() }).unwrap();
        let mono = |tr: &[f64]| tr.windows(2).all(|w| w[1] >= w[0] - 1e-9);
        if !mono(&sol.outer_trace) || !sol.sca_traces.iter().all(|t| mono(t)) {
            trace_breaks += 1;
        }
        let rates = common::slot_rates(&sc, &sol.trajectory, &sol.schedule.binary);
        let a = sol.alpha;
        let eta_ok = sol
            .eta
            .eta
            .iter()
            .zip(&rates)
            .all(|(&e, &(gv, vb))| e <= a * gv + 1e-6 && e <= (1.0 - a) * vb + 1e-6 && e >= -1e-6);
        let relaxed_ok = sol.schedule.relaxed.iter().flatten().all(|&x| (-1e-6..=1.0 + 1e-6).contains(&x));
        let feasible = sol.schedule.binary.validate(sc.users_per_slot, sc.per_user_cap()).is_ok()
            && (0.0..=1.0).contains(&a)
            && sol.trajectory.radius_m >= sc.min_radius_m - 1e-6
            && eta_ok
            && relaxed_ok
            && (common::objective_from_rates(&rates, a) - sol.objective).abs() <= 1e-6;
        if !feasible {
            infeasible += 1;
        }
        let st = static_baseline(&sc, seed).unwrap().objective;
        let ub = upper_bound(&sc).unwrap().objective;
        min_margin_static = min_margin_static.min(sol.objective - st);
        min_margin_upper = min_margin_upper.min(ub - sol.objective);
        if !(ub >= sol.objective && sol.objective >= st - 1e-6) {
            order_breaks += 1;
        }
    }
    Ascent {
        monotone: check(
            trace_breaks == 0 && infeasible == 0,
            format!("{trace_breaks} non-monotone traces, {infeasible} infeasible solutions over 25 scenarios"),
        ),
        ordering: check(
            order_breaks == 0,
            format!(
                "{order_breaks} ordering violations; min(opt - static) = {min_margin_static:.4}, min(upper - opt) = {min_margin_upper:.4}"
            ),
        ),
    }
}

fn sweep(kind: SweepKind, grid: Option<Vec<GridPoint>>, runs: usize, seed: u64) -> ExperimentResult {
    let mut spec = SweepSpec::new(kind, ScenarioConfig::desk(), runs, seed);
    if let Some(g) = grid {
        spec.grid = g;
    }
    let res = run_sweep(&spec, parallelism()).unwrap();
    assert!(res.failures.is_empty(), "sweep failures: {:?}", res.failures);
    res
}

fn means(res: &ExperimentResult, f: impl Fn(&uav_relay::experiments::PointAggregate) -> f64) -> Vec<f64> {
    res.aggregates.iter().map(f).collect()
}

fn fmt(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ")
}

fn stddev_trend() -> Outcome {
    let res = sweep(SweepKind::Stddev, None, 100, 6);
    let opt = means(&res, |a| a.se_optimized.mean);
    let gain = means(&res, |a| a.gain.mean);
    let ub = means(&res, |a| a.se_upper.mean);
    let non_inc = opt.windows(2).all(|w| w[1] <= w[0]);
    let non_dec = gain.windows(2).all(|w| w[1] >= w[0]);
    let lo = ub.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ub.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = (hi - lo) / lo;
    check(
        non_inc && non_dec && spread < 0.05,
        format!("optimized [{}], gain [{}], upper spread {:.2}%", fmt(&opt), fmt(&gain), spread * 100.0),
    )
}

fn power_trend() -> Outcome {
    let res = sweep(SweepKind::Txpower, None, 100, 7);
    let opt = means(&res, |a| a.se_optimized.mean);
    let gain = means(&res, |a| a.gain.mean);
    let non_dec = opt.windows(2).all(|w| w[1] >= w[0]);
    let saturating = opt[3] - opt[2] < opt[1] - opt[0];
    check(
        non_dec && saturating && gain[3] > gain[0],
        format!("optimized [{}], gain [{}]", fmt(&opt), fmt(&gain)),
    )
}

fn radius_trend() -> Outcome {
    let powers = [0.1, 1.0, 10.0, 100.0];
    let grid = [1000.0, 3000.0]
        .iter()
        .flat_map(|&s| powers.iter().map(move |&p| GridPoint::new(vec![(Param::StdM, s), (Param::UavTxPowerW, p)])))
        .collect();
    let res = sweep(SweepKind::RadiusVsPower, Some(grid), 100, 8);
    let radius = means(&res, |a| a.radius_opt_m.mean);
    let (narrow, wide) = radius.split_at(4);
    let non_dec = wide.windows(2).all(|w| w[1] >= w[0]);
    check(
        non_dec && wide[3] >= narrow[3],
        format!("radius sigma=1000 [{}], sigma=3000 [{}]", fmt(narrow), fmt(wide)),
    )
}

fn altitude_trend() -> Outcome {
    let res = sweep(SweepKind::AltDistGrid, None, 50, 9);
    // Row-major: altitude {500, 1000, 2000} x distance {5, 10, 15} km.
    let gain = means(&res, |a| a.gain.mean);
    let at = |h: usize, d: usize| gain[h * 3 + d];
    let low_beats_high = (0..3).all(|d| at(0, d) > at(2, d));
    let spread = |v: [f64; 3]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min);
    let max_across_distance = (0..3).map(|h| spread([at(h, 0), at(h, 1), at(h, 2)])).fold(0.0, f64::max);
    let min_across_altitude = (0..3).map(|d| spread([at(0, d), at(1, d), at(2, d)])).fold(f64::INFINITY, f64::min);
    check(
        low_beats_high && max_across_distance < min_across_altitude,
        format!(
            "gain rows by altitude [{}] / [{}] / [{}]; max spread over distance {max_across_distance:.4} vs min spread over altitude {min_across_altitude:.4}",
            fmt(&gain[0..3]),
            fmt(&gain[3..6]),
            fmt(&gain[6..9])
        ),
    )
}

fn determinism() -> Outcome {
    let csv_for = |parallelism: usize| {
        let spec = SweepSpec::new(SweepKind::Stddev, ScenarioConfig::desk(), 4, 10);
        let res = run_sweep(&spec, parallelism).unwrap();
        let mut buf = Vec::new();
        write_csv(&res, &mut buf, EmitOptions { timing: false }).unwrap();
        buf
    };
    let a = csv_for(1);
    let b = csv_for(4);
    let c = csv_for(1);
    check(a == b && a == c && !a.is_empty(), format!("{} bytes, parallelism 1 vs 4 identical: {}", a.len(), a == b))
}

fn main() {
    let mut failed = 0;
    let mut report = |id: usize, name: &str, budget: Duration, run: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let ok = out.ok && took <= budget;
        if !ok {
            failed += 1;
        }
        println!(
            "[{}] criterion {id:>2} {name}: {} ({:.1}s, budget {}s)",
            if ok { "PASS" } else { "FAIL" },
            out.detail,
            took.as_secs_f64(),
            budget.as_secs()
        );
    };
    let min = |m: u64| Duration::from_secs(60 * m);
    report(1, "surrogate validity", Duration::from_secs(1), &mut surrogate_validity);
    report(2, "timeshare LP vs grid", Duration::from_secs(10), &mut timeshare_oracle);
    report(3, "scheduling sandwich", Duration::from_secs(30), &mut scheduling_sandwich);
    let mut ascent = None;
    report(4, "monotone ascent", min(5), &mut || {
        let a = ascent_and_ordering();
        let m = Outcome { ok: a.monotone.ok, detail: a.monotone.detail.clone() };
        ascent = Some(a);
        m
    });
    let ordering = ascent.take().map(|a| a.ordering).unwrap();
    report(5, "baseline ordering", min(5), &mut || Outcome { ok: ordering.ok, detail: ordering.detail.clone() });
    report(6, "spread sweep trend", min(20), &mut stddev_trend);
    report(7, "relay power trend", min(20), &mut power_trend);
    report(8, "radius vs power trend", min(20), &mut radius_trend);
    report(9, "altitude vs distance trend", min(30), &mut altitude_trend);
    report(10, "determinism", min(5), &mut determinism);
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
