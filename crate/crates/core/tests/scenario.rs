use proptest::prelude::*;
use uav_relay::config::parse_override;
use uav_relay::{load_scenario, Scenario64, ScenarioConfig};

#[test]
fn loads_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(
        &path,
        r#"{"users": [[9000, 0, 0], [11000, 500, 0], [10000, -800, 0]], "slots": {"count": 30, "users_per_slot": 1}}"#,
    )
    .unwrap();
    let s = load_scenario(&path, &[parse_override("uav.altitude_m=750").unwrap()]).unwrap();
    assert_eq!(s.altitude_m, 750.0);
    assert_eq!(s.per_user_cap(), 10);
    assert_eq!(s.distribution_mean, None);
    assert_eq!(s.dead_zone_center(), [10_000.0, -100.0]);
    let err = load_scenario(dir.path().join("missing.json"), &[]).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn full_scale_defaults() {
    let s: Scenario64 = ScenarioConfig::full_scale().to_scenario().unwrap();
    assert_eq!((s.num_users(), s.num_slots, s.users_per_slot), (20, 500, 2));
    assert_eq!(s.slot_duration_s, 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn loaded_scenarios_round_trip(seed in any::<u64>(), count in 2usize..12, std in 0.0f64..4000.0) {
        let mut c = ScenarioConfig::desk();
        let d = c.distribution_mut().unwrap();
        d.seed = seed;
        d.count = count;
        d.std_x = std;
        let s: Scenario64 = c.to_scenario().unwrap();
        let back: Scenario64 = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        prop_assert_eq!(back, s);
        let cfg_back: ScenarioConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        prop_assert_eq!(cfg_back, c);
    }
}
