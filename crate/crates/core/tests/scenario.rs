use hsbnet_core::scenario::{
    generate_scenario, load_scenario, parse_scenario, save_scenario, scenario_to_json, B2mTemplate, GenerationConfig,
};
use hsbnet_core::Error;
use proptest::prelude::*;

fn small(seed: u64) -> GenerationConfig {
    GenerationConfig {
        num_users: 12,
        num_stations: 3,
        seed,
        ..Default::default()
    }
}

#[test]
fn save_then_load_roundtrips() {
    let s = generate_scenario(&small(3)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    save_scenario(&s, &path).unwrap();
    assert_eq!(load_scenario(&path).unwrap(), s);
}

#[test]
fn serialization_is_byte_stable() {
    let a = scenario_to_json(&generate_scenario(&small(8)).unwrap());
    let b = scenario_to_json(&generate_scenario(&small(8)).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, scenario_to_json(&generate_scenario(&small(9)).unwrap()));
}

fn mutate(edit: impl FnOnce(&mut serde_json::Value)) -> String {
    let s = generate_scenario(&small(1)).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&scenario_to_json(&s)).unwrap();
    edit(&mut v);
    v.to_string()
}

#[test]
fn mu_match_below_mu_mismatch_is_named() {
    let text = mutate(|v| v["users"][2]["mu_match"] = 900.0.into());
    match parse_scenario(&text) {
        Err(Error::Validation { field, .. }) => assert_eq!(field, "users[2].mu_match"),
        other => panic!("expected validation error, got {other:?}"),
    }
}

#[test]
fn loss_budget_out_of_range_is_rejected() {
    let text = mutate(|v| v["system"]["loss_budget"] = 1.5.into());
    let err = parse_scenario(&text).unwrap_err();
    assert!(err.to_string().contains("loss_budget"), "{err}");
}

#[test]
fn mismatched_link_shape_is_rejected() {
    let text = mutate(|v| {
        v["links"][0].as_array_mut().unwrap().pop();
    });
    let err = parse_scenario(&text).unwrap_err();
    assert!(err.to_string().contains("links[0]"), "{err}");
}

#[test]
fn unknown_keys_are_rejected() {
    let text = mutate(|v| v["users"][0]["arrival_rte"] = 10.0.into());
    let err = parse_scenario(&text).unwrap_err();
    assert!(err.to_string().contains("arrival_rte"), "{err}");
    let text = mutate(|v| v["optimizer"] = serde_json::json!({ "max_iterations": 5 }));
    assert_eq!(parse_scenario(&text).unwrap().optimizer.unwrap().max_iterations, 5);
}

#[test]
fn malformed_json_reports_position() {
    let err = parse_scenario("{\n  \"system\": {\n    \"slot_length_s\": ,\n").unwrap_err();
    match err {
        Error::Parse { line, .. } => assert_eq!(line, 3),
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn station_subset_keeps_link_statistics() {
    let s = generate_scenario(&GenerationConfig { num_users: 6, num_stations: 4, ..Default::default() }).unwrap();
    let sub = s.with_stations(2).unwrap();
    sub.validate().unwrap();
    for i in 0..6 {
        assert_eq!(sub.links[i][..], s.links[i][..2]);
    }
    assert!(s.with_stations(0).is_err() && s.with_stations(5).is_err());
}

#[test]
fn matching_degree_shift_hits_target_mean() {
    let s = generate_scenario(&small(4)).unwrap();
    for target in [0.3, 0.6, 0.8, 0.95, 1.0] {
        let t = s.with_mean_matching_degree(target).unwrap();
        let mean = t.users.iter().map(|u| u.matching_degree).sum::<f64>() / t.users.len() as f64;
        assert!((mean - target).abs() < 1e-9, "{mean} vs {target}");
        assert!(t.users.iter().all(|u| (0.0..=1.0).contains(&u.matching_degree)));
        t.validate().unwrap();
    }
}

fn config_strategy() -> impl Strategy<Value = GenerationConfig> {
    (
        1usize..15,
        1usize..5,
        1.0f64..2000.0,
        0.0f64..0.1,
        (0.0f64..1.0, 0.0f64..1.0),
        (1e-6f64..1e-3, 1.0f64..2.0),
        any::<bool>(),
        any::<u64>(),
    )
        .prop_map(|(u, j, radius, kappa, (t0, t1), (slope, knee_gap), linear, seed)| GenerationConfig {
            num_users: u,
            num_stations: j,
            radius_m: radius,
            interference_factor: kappa,
            tau_range: [t0.min(t1), t0.max(t1)],
            b2m: if linear {
                B2mTemplate::Linear { slope_range: [slope, slope * 2.0] }
            } else {
                B2mTemplate::PiecewiseLinear {
                    slope_range: [slope, slope * 2.0],
                    knees: vec![1e6, 1e6 * (1.0 + knee_gap)],
                    decay: 0.5,
                }
            },
            seed,
            ..Default::default()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn generated_scenarios_satisfy_invariants(cfg in config_strategy()) {
        let s = generate_scenario(&cfg).unwrap();
        s.validate().unwrap();
        prop_assert_eq!(s.num_users(), cfg.num_users);
        prop_assert_eq!(s.num_stations(), cfg.num_stations);
        for u in &s.users {
            prop_assert!(u.matching_degree >= cfg.tau_range[0] && u.matching_degree <= cfg.tau_range[1]);
            prop_assert!(u.position[0].hypot(u.position[1]) <= cfg.radius_m * (1.0 + 1e-12));
        }
        prop_assert!(s.links.iter().flatten().all(|l| l.mean_sinr_db.is_finite()));
    }
}
