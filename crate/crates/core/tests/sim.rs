use hsbnet_core::queueing::{ArrivalSpec, DepartureSpec};
use hsbnet_core::scenario::{B2mFunction, LinkModel, MobileUser, SystemConfig};
use hsbnet_core::sim::{
    ptq_step, simulate_ptq, simulate_ptq_replication, simulate_scq, validate_link, SimConfig, Slack,
};
use hsbnet_core::Mode;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn user(lambda: f64, tau: f64) -> MobileUser {
    MobileUser {
        id: 0,
        position: [0.0, 0.0],
        arrival_rate: lambda,
        matching_degree: tau,
        mu_match: 1250.0,
        mu_mismatch: 1000.0,
        min_rate: 50.0,
        transmit_power_dbm: 20.0,
        beta_std: 0.0,
    }
}

fn link(mean_db: f64, std_db: f64) -> LinkModel {
    LinkModel {
        mu_id: 0,
        bs_id: 0,
        mean_sinr_db: mean_db,
        sinr_std_db: std_db,
        b2m: B2mFunction::Linear { slope: 2e-4 },
        rho: 1e-4,
    }
}

fn departure(z: f64) -> DepartureSpec {
    DepartureSpec {
        bandwidth_hz: z,
        mean_sinr_db: 0.0,
        sinr_std_db: 4.0,
        slot_length: 1e-3,
        packet_bits: 800.0,
    }
}

#[test]
fn light_scq_load_approaches_mean_service_time() {
    let u = MobileUser { arrival_rate: 1e-3, ..user(1.0, 0.5) };
    let est = simulate_scq(&u, &SimConfig::new(200_000, 4, 1)).unwrap();
    let mean_service = 0.5 / 1250.0 + 0.5 / 1000.0;
    assert!((est.mean - mean_service).abs() < 0.01 * mean_service, "{}", est.mean);
}

#[test]
fn full_matching_scq_matches_mm1() {
    let est = simulate_scq(&user(1000.0, 1.0), &SimConfig::new(1_000_000, 10, 7)).unwrap();
    assert!(est.contains(4e-3, 0.0), "{est:?}");
}

#[test]
fn unstable_scq_is_rejected() {
    assert!(simulate_scq(&user(1300.0, 1.0), &SimConfig::new(1000, 2, 0)).is_err());
}

#[test]
fn replications_are_reproducible_and_distinct() {
    let a = ArrivalSpec::new(1125.0, 1e-3).unwrap();
    let cfg = SimConfig::new(50_000, 3, 99);
    let r0 = simulate_ptq_replication(&a, &departure(1.2e6), 20, &cfg, 0).unwrap();
    let again = simulate_ptq_replication(&a, &departure(1.2e6), 20, &cfg, 0).unwrap();
    let r1 = simulate_ptq_replication(&a, &departure(1.2e6), 20, &cfg, 1).unwrap();
    assert_eq!(r0, again);
    assert_ne!(r0, r1);
    let s1 = simulate_ptq(&a, &departure(1.2e6), 20, &cfg).unwrap();
    let s2 = simulate_ptq(&a, &departure(1.2e6), 20, &cfg).unwrap();
    assert_eq!(s1, s2);
}

#[test]
fn zero_bandwidth_fills_the_buffer() {
    let a = ArrivalSpec::new(1000.0, 1e-3).unwrap();
    let r = simulate_ptq_replication(&a, &departure(0.0), 20, &SimConfig::new(10_000, 1, 3), 0).unwrap();
    assert_eq!(r.departures, 0);
    assert_eq!(r.final_queue, 20);
    assert_eq!(r.arrivals, r.drops + 20);
}

#[test]
fn link_validation_agrees_at_full_matching() {
    let sys = SystemConfig::default();
    let cfg = SimConfig::new(200_000, 10, 2024);
    for mode in [Mode::SemCom, Mode::BitCom] {
        let r = validate_link(&user(1000.0, 1.0), &link(0.0, 4.0), 1.55e6, mode, &sys, &cfg, Slack::default()).unwrap();
        assert!(r.pass(), "{mode:?}: {r:?}");
    }
}

#[test]
fn lossless_link_validates() {
    let sys = SystemConfig::default();
    let cfg = SimConfig::new(50_000, 5, 8);
    let r = validate_link(&user(800.0, 0.7), &link(10.0, 2.0), 20e6, Mode::BitCom, &sys, &cfg, Slack::default()).unwrap();
    assert!(r.analytic_loss < 1e-9);
    assert!(r.pass(), "{r:?}");
}

#[test]
fn random_links_mostly_validate() {
    let sys = SystemConfig::default();
    let cfg = SimConfig::new(200_000, 10, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut passed = 0;
    for _ in 0..10 {
        let u = user(rng.random_range(300.0..1100.0), rng.random_range(0.0..=1.0));
        let l = link(rng.random_range(-3.0..8.0), rng.random_range(1.0..6.0));
        let mode = if rng.random_bool(0.5) { Mode::SemCom } else { Mode::BitCom };
        let z = rng.random_range(0.8e6..3e6);
        if validate_link(&u, &l, z, mode, &sys, &cfg, Slack::default()).unwrap().pass() {
            passed += 1;
        }
    }
    assert!(passed >= 9, "{passed}/10");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn packets_are_conserved(
        lambda in 10.0f64..4000.0,
        z in 0.0f64..4e6,
        buffer in 1usize..=20,
        seed in any::<u64>(),
    ) {
        let a = ArrivalSpec::new(lambda, 1e-3).unwrap();
        let r = simulate_ptq_replication(&a, &departure(z), buffer, &SimConfig::new(5_000, 1, seed), 0).unwrap();
        prop_assert_eq!(r.arrivals, r.departures + r.drops + r.final_queue);
        prop_assert!(r.final_queue <= buffer as u64);
    }

    #[test]
    fn step_respects_buffer(q in 0u64..=20, d in 0u64..50, a in 0u64..50, f in 1u64..=20) {
        let q = q.min(f);
        let (next, drops) = ptq_step(q, d, a, f);
        prop_assert!(next <= f);
        prop_assert_eq!(next + drops, q.saturating_sub(d) + a);
    }
}
