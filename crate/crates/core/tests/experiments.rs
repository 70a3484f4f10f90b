use uav_relay::experiments::{
    run_seed, write_csv, write_json, EmitOptions, ExperimentResult, GridPoint, Param, CSV_COLUMNS,
};
use uav_relay::{run_sweep, sample_users, ScenarioConfig, SweepKind, SweepSpec};

fn small_spec(kind: SweepKind, runs: usize) -> SweepSpec {
    let mut base = ScenarioConfig::desk();
    base.slots.count = 16;
    base.distribution_mut().unwrap().count = 4;
    SweepSpec::new(kind, base, runs, 42)
}

#[test]
fn sample_mean_is_within_three_standard_errors() {
    let n = 100_000;
    let users: Vec<[f64; 3]> = sample_users([1500.0, -700.0], [2000.0, 500.0], n, 3).unwrap();
    let mx = users.iter().map(|u| u[0]).sum::<f64>() / n as f64;
    let my = users.iter().map(|u| u[1]).sum::<f64>() / n as f64;
    assert!((mx - 1500.0).abs() <= 3.0 * 2000.0 / (n as f64).sqrt());
    assert!((my + 700.0).abs() <= 3.0 * 500.0 / (n as f64).sqrt());
    assert!(users.iter().all(|u| u[2] == 0.0));
    assert_eq!(users[..10], sample_users::<f64>([1500.0, -700.0], [2000.0, 500.0], 10, 3).unwrap()[..]);
}

#[test]
fn one_point_one_run_gives_one_record() {
    let mut spec = small_spec(SweepKind::Stddev, 1);
    spec.grid = vec![GridPoint::new(vec![(Param::StdM, 1500.0)])];
    let res = run_sweep(&spec, 1).unwrap();
    assert_eq!(res.records.len(), 1);
    assert_eq!(res.records[0].seed, run_seed(42, 0, 0));
    assert_eq!(res.aggregates[0].runs, 1);
    assert!(res.failures.is_empty());
}

#[test]
fn record_count_and_order() {
    let spec = small_spec(SweepKind::AltDistGrid, 2);
    let res = run_sweep(&spec, 2).unwrap();
    assert_eq!(res.records.len(), 9 * 2);
    let keys: Vec<_> = res.records.iter().map(|r| (r.point_index, r.run_index)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    for r in &res.records {
        assert!(r.se_upper >= r.se_optimized && r.se_optimized >= r.se_static - 1e-6);
    }
}

#[test]
fn identical_specs_give_identical_results() {
    let spec = small_spec(SweepKind::Txpower, 2);
    let mut a = run_sweep(&spec, 1).unwrap();
    let mut b = run_sweep(&spec, 3).unwrap();
    for r in a.records.iter_mut().chain(b.records.iter_mut()) {
        r.wall_ms = 0.0;
    }
    assert_eq!(a.records, b.records);
}

#[test]
fn failures_are_counted_not_dropped() {
    let mut spec = small_spec(SweepKind::Stddev, 2);
    spec.grid = vec![GridPoint::new(vec![(Param::StdM, 1000.0)]), GridPoint::new(vec![(Param::AltitudeM, -5.0)])];
    let res = run_sweep(&spec, 1).unwrap();
    assert_eq!(res.records.len(), 2);
    assert_eq!(res.failures.len(), 2);
    assert_eq!(res.aggregates[1].failures, 2);
    assert_eq!(res.aggregates[1].runs, 0);
}

#[test]
fn csv_layout() {
    let empty = ExperimentResult { sweep_kind: SweepKind::Stddev, records: vec![], failures: vec![], aggregates: vec![] };
    let mut buf = Vec::new();
    write_csv(&empty, &mut buf, EmitOptions::default()).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().trim_end(), CSV_COLUMNS.join(","));

    let res = run_sweep(&small_spec(SweepKind::RadiusVsPower, 1), 1).unwrap();
    let mut buf = Vec::new();
    write_csv(&res, &mut buf, EmitOptions { timing: false }).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), res.records.len() + 1);
    let second = text.lines().nth(1).unwrap();
    assert!(second.starts_with("radius-vs-power,std_m;uav_tx_power_W,1000;0.1,0,"), "{second}");
    assert!(second.ends_with(",0"));
}

#[test]
fn json_round_trip_is_exact() {
    let res = run_sweep(&small_spec(SweepKind::Stddev, 2), 1).unwrap();
    let mut buf = Vec::new();
    write_json(&res, &mut buf, EmitOptions::default()).unwrap();
    let back: ExperimentResult = serde_json::from_slice(&buf).unwrap();
    assert_eq!(back, res);
    for (a, b) in back.records.iter().zip(&res.records) {
        assert_eq!(a.se_optimized.to_bits(), b.se_optimized.to_bits());
        assert_eq!(a.radius_opt_m.to_bits(), b.radius_opt_m.to_bits());
    }
}
