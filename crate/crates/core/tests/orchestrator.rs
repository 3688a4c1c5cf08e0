//! Control-loop invariants across policies.

use lab_core::actor::Actor;
use lab_core::env::Environment;
use lab_core::orchestrator::{allocate, run_experiment, PolicyKind, Runner};
use lab_core::rng::SeedTree;
use lab_core::{DegradationAction, SlotObservation, SlotState, SystemConfig};
use proptest::prelude::*;

fn short(n: usize, a: usize, horizon: usize) -> SystemConfig {
    let mut cfg = SystemConfig::homogeneous(n, a);
    cfg.horizon = horizon;
    cfg
}

#[test]
fn same_seed_same_trajectory() {
    let cfg = short(3, 4, 60);
    for policy in PolicyKind::ALL {
        let a = run_experiment(&cfg, policy, 7).unwrap();
        let b = run_experiment(&cfg, policy, 7).unwrap();
        for (x, y) in a.slots.iter().zip(&b.slots) {
            assert_eq!(x.record, y.record, "{policy} t={}", x.record.t);
            assert_eq!((x.k_t, x.k_star), (y.k_t, y.k_star));
        }
    }
}

#[test]
fn ideal_dominates_every_policy_slot_by_slot() {
    let cfg = short(3, 4, 80);
    let ideal = run_experiment(&cfg, PolicyKind::Ideal, 3).unwrap();
    for policy in PolicyKind::ALL.into_iter().filter(|p| *p != PolicyKind::Ideal) {
        let other = run_experiment(&cfg, policy, 3).unwrap();
        for (i, o) in ideal.slots.iter().zip(&other.slots) {
            assert!(
                i.record.total_utility >= o.record.total_utility - 1e-12,
                "{policy} beats IDEAL at t={}",
                i.record.t
            );
        }
    }
}

#[test]
fn ideal_matches_independent_enumeration_single_device() {
    let cfg = short(1, 4, 40);
    let run = run_experiment(&cfg, PolicyKind::Ideal, 11).unwrap();
    let mut env = Environment::new(cfg.clone(), SeedTree::new(11)).unwrap();
    for s in &run.slots {
        let t = s.record.t;
        let gains = env.channel(t).unwrap().to_vec();
        let best = (0..4)
            .map(|a| {
                let act = DegradationAction::new(vec![a], 4).unwrap();
                let alloc = allocate(&cfg, &act, &gains).unwrap();
                env.execute_slot(&act, &alloc.b, t).unwrap().total_utility
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((best - s.record.total_utility).abs() < 1e-12, "t={t}");
        assert!((s.record.bandwidth[0] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn random_policy_levels_are_uniform() {
    let cfg = short(2, 4, 4000);
    let run = run_experiment(&cfg, PolicyKind::Random, 5).unwrap();
    let mut counts = [0usize; 4];
    for s in &run.slots {
        for &a in &s.record.action {
            counts[a] += 1;
        }
    }
    let total = (2 * 4000) as f64;
    for c in counts {
        // 4 sd of a binomial(8000, 1/4) proportion is about 0.019
        assert!((c as f64 / total - 0.25).abs() < 0.02, "{counts:?}");
    }
}

#[test]
fn fixed_policies_pick_their_level() {
    let cfg = short(3, 4, 10);
    let obli = run_experiment(&cfg, PolicyKind::DelayObli, 1).unwrap();
    let min = run_experiment(&cfg, PolicyKind::DelayMin, 1).unwrap();
    assert!(obli.slots.iter().all(|s| s.record.action == vec![0; 3]));
    assert!(min.slots.iter().all(|s| s.record.action == vec![3; 3]));
    // the top level sends the least data, hence the shortest upload
    for (o, m) in obli.slots.iter().zip(&min.slots) {
        assert!(m.record.tau_o.iter().sum::<f64>() < o.record.tau_o.iter().sum::<f64>());
    }
}

#[test]
fn one_slot_aggregates_equal_the_slot() {
    let cfg = short(3, 4, 1);
    for policy in PolicyKind::ALL {
        let r = run_experiment(&cfg, policy, 2).unwrap();
        assert_eq!(r.slots.len(), 1);
        let s = &r.slots[0].record;
        assert_eq!(r.aggregates.utility, s.total_utility);
        assert!((r.aggregates.latency - s.latencies().iter().sum::<f64>()).abs() < 1e-15);
        assert!((r.aggregates.accuracy - s.accuracy.iter().sum::<f64>()).abs() < 1e-15);
        assert!((s.total_utility - s.utility.iter().sum::<f64>()).abs() < 1e-12);
    }
}

#[test]
fn lab_fills_cache_and_memory() {
    let cfg = short(3, 4, 30);
    let mut r = Runner::new(&cfg, PolicyKind::Lab, 4).unwrap();
    let mut last_k = cfg.actor.k_initial;
    for t in 1..=30 {
        let log = r.step().unwrap();
        assert_eq!(log.record.t, t);
        assert!(log.k_star >= 1 && log.k_star <= log.k_t);
        assert!(log.k_t <= cfg.actor.k_initial);
        if t == 1 {
            assert_eq!(log.k_t, cfg.actor.k_initial);
        }
        last_k = log.k_t.min(last_k);
        assert!((log.record.bandwidth.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert_eq!(r.cache_len(), Some(t.min(cfg.critic.cache_size)));
        assert_eq!(r.replay_len(), Some(t.min(cfg.actor.memory_size)));
    }
    assert!(r.kernel_params().is_some());
}

#[test]
fn training_fires_on_schedule_once_memory_is_half_full() {
    let mut cfg = short(2, 3, 1);
    cfg.actor.memory_size = 40;
    cfg.actor.batch_size = 8;
    cfg.actor.k_initial = 9;
    let mut actor = Actor::new(&cfg, &SeedTree::new(1)).unwrap();
    let mut fired = Vec::new();
    for t in 1..=100 {
        let obs = SlotObservation { channel_gains: vec![1e-9 * t as f64, 2e-9], slot_index: t, ..SlotObservation::zero(2) };
        let state = SlotState::from_recent(&[obs], 1, 2);
        actor.remember(&state, &DegradationAction::new(vec![t % 3, 1], 3).unwrap()).unwrap();
        if actor.maybe_train(t).unwrap().is_some() {
            fired.push(t);
        }
    }
    // memory reaches ceil(40/2) = 20 entries at t = 20
    assert_eq!(fired, vec![20, 40, 60, 80, 100]);
}

#[test]
fn enumeration_cap_rejects_large_spaces() {
    let mut cfg = short(3, 4, 1);
    cfg.enumeration_cap = 63;
    assert!(Runner::new(&cfg, PolicyKind::Ideal, 1).is_err());
    assert!(Runner::new(&cfg, PolicyKind::FullBo, 1).is_err());
    assert!(Runner::new(&cfg, PolicyKind::Lab, 1).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn allocation_fills_band(levels in proptest::collection::vec(0usize..4, 1..6), scale in proptest::collection::vec(0.01f64..4.0, 6)) {
        let n = levels.len();
        let cfg = SystemConfig::homogeneous(n, 4);
        let gains: Vec<f64> = scale.iter().take(n).map(|s| s * 5e-9).collect();
        let act = DegradationAction::new(levels, 4).unwrap();
        let alloc = allocate(&cfg, &act, &gains).unwrap();
        prop_assert!((alloc.b.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(alloc.b.iter().all(|&b| b > 0.0));
        prop_assert!(alloc.tau_o.iter().all(|t| t.is_finite() && *t > 0.0));
    }

    #[test]
    fn zero_weights_still_allocate(zero_mask in proptest::collection::vec(any::<bool>(), 3)) {
        let mut cfg = SystemConfig::homogeneous(3, 4);
        cfg.latency_weight = zero_mask.iter().map(|&z| if z { 0.0 } else { 1.5 }).collect();
        let act = DegradationAction::new(vec![0, 1, 2], 4).unwrap();
        let alloc = allocate(&cfg, &act, &[4e-9, 1e-9, 7e-9]).unwrap();
        prop_assert!((alloc.b.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn slot_utilities_are_finite(seed in 0u64..1000, policy in 0usize..6) {
        let cfg = short(2, 3, 3);
        let r = run_experiment(&cfg, PolicyKind::ALL[policy], seed).unwrap();
        for s in &r.slots {
            prop_assert!(s.record.total_utility.is_finite());
            prop_assert!(s.record.latencies().iter().all(|l| l.is_finite() && *l > 0.0));
        }
    }
}
