use std::collections::VecDeque;

use vla_accel::config::RunConfig;
use vla_accel::io::write_trace;
use vla_accel::sim::{compute_metrics, run_batch, run_episode, EpisodeTrace};
use vla_accel::Source;

/// Replays the routing rule on the executed actions of a trace and returns
/// the steps at which the generator was eligible.
fn replay_eligible(t: &EpisodeTrace, cfg: &RunConfig) -> Vec<usize> {
    let s = &cfg.scheduler;
    let mut window: VecDeque<bool> = VecDeque::new();
    let mut eligible = Vec::new();
    for (k, r) in t.records.iter().enumerate() {
        if window.len() == s.buffer_len {
            let prev = &t.records[k - 1].action;
            let speed_ok = prev
                .trans
                .iter()
                .all(|v| s.v_min < v.abs() && v.abs() < s.v_max);
            let vla = window.iter().filter(|b| **b).count() as f64 / s.buffer_len as f64;
            if speed_ok && vla > s.tau {
                eligible.push(r.step);
            }
        }
        window.push_back(r.source == Source::Vla);
        if window.len() > s.buffer_len {
            window.pop_front();
        }
    }
    eligible
}

fn check_routing(cfg: &RunConfig, seeds: std::ops::Range<u64>) {
    for seed in seeds {
        let t = run_episode(cfg, seed).unwrap();
        let mut routed: Vec<usize> = t
            .records
            .iter()
            .filter(|r| r.source == Source::Lwm)
            .map(|r| r.step)
            .collect();
        routed.extend(t.rejections.iter().map(|(k, _)| *k));
        routed.sort_unstable();
        assert_eq!(routed, replay_eligible(&t, cfg), "seed {seed}");
    }
}

#[test]
fn routing_matches_replayed_automaton() {
    check_routing(&RunConfig::default(), 0..25);
}

#[test]
fn routing_matches_replayed_automaton_with_noise() {
    let mut cfg = RunConfig::default();
    cfg.sim.noise = 0.03;
    check_routing(&cfg, 100..120);
}

#[test]
fn default_constants_succeed_with_generator_steps() {
    let cfg = RunConfig::default();
    for seed in 0..10 {
        let t = run_episode(&cfg, seed).unwrap();
        assert!(t.success, "seed {seed}: error {}", t.final_error);
        assert!(t.lwm_steps() >= 1, "seed {seed}");
        assert!(t.total_cost() < t.records.len() as f64);
    }
}

#[test]
fn tau_one_never_uses_generator() {
    let mut cfg = RunConfig::default();
    cfg.scheduler.tau = 1.0;
    cfg.sim.episodes = 10;
    let m = compute_metrics(&run_batch(&cfg).unwrap(), cfg.cost.c_full).unwrap();
    assert_eq!(m.intuitive_action_rate, 0.0);
}

#[test]
fn pruning_disabled_keeps_every_token() {
    let mut cfg = RunConfig::default();
    cfg.pruning.v_p_min = cfg.sim.v_max_env;
    cfg.pruning.v_p_max = cfg.sim.v_max_env + 1e-6;
    cfg.sim.episodes = 10;
    cfg.sim.noise = 0.05;
    let traces = run_batch(&cfg).unwrap();
    assert!(traces
        .iter()
        .flat_map(|t| &t.records)
        .all(|r| r.tokens_kept == r.tokens_total));
    assert_eq!(compute_metrics(&traces, 1.0).unwrap().pruning_rate, 0.0);
}

#[test]
fn pruning_engages_at_speed() {
    let cfg = RunConfig::default();
    let t = run_episode(&cfg, 2).unwrap();
    let fast: Vec<_> = t
        .records
        .iter()
        .filter(|r| r.source == Source::Vla && r.speed > cfg.pruning.v_p_min)
        .collect();
    assert!(!fast.is_empty());
    assert!(fast
        .iter()
        .all(|r| r.tokens_kept < r.tokens_total && r.cost < 1.0));
}

#[test]
fn unregularized_generator_matches_baseline_endpoint() {
    let mut with_lwm = RunConfig::default();
    with_lwm.generator.lambda = 0.0;
    let mut baseline = with_lwm.clone();
    baseline.scheduler.tau = 1.0;
    for seed in 0..5 {
        let a = run_episode(&with_lwm, seed).unwrap();
        let b = run_episode(&baseline, seed).unwrap();
        assert!(a.success && b.success);
        assert!(a.lwm_steps() > 0);
        assert!(a.final_error <= with_lwm.sim.success_tol);
    }
}

#[test]
fn traces_are_byte_for_byte_reproducible() {
    let mut cfg = RunConfig::default();
    cfg.sim.noise = 0.02;
    let bytes = |seed| {
        let mut out = Vec::new();
        write_trace(&run_episode(&cfg, seed).unwrap(), &mut out).unwrap();
        out
    };
    assert_eq!(bytes(42), bytes(42));
    assert_ne!(bytes(42), bytes(43));
}

#[test]
fn batch_is_ordered_by_seed() {
    let mut cfg = RunConfig::default();
    cfg.sim.seed = 500;
    cfg.sim.episodes = 6;
    let seeds: Vec<u64> = run_batch(&cfg).unwrap().iter().map(|t| t.seed).collect();
    assert_eq!(seeds, (500..506).collect::<Vec<_>>());
}
