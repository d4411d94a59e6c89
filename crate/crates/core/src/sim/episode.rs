//! Closed-loop episodes.
//!
//! At every step the scheduler decides whether the generator may act. If
//! it may and its output passes the validity gate, the generated action is
//! executed; otherwise the oracle policy acts on a rendered frame whose
//! tokens are pruned according to the current speed. Every executed action
//! enters the buffer and is integrated by the environment.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::cost::cost_of_step;
use super::env::{distance_inf, EnvState, Waypoint};
use super::policy::oracle_policy_step;
use super::scene::{render_scene, Camera, SyntheticAttention};
use super::trajectory::gen_reference_trajectory;
use crate::action::{translational_speed, Action, ActionBuffer, Source};
use crate::config::{PruningConfig, RunConfig, SimConfig};
use crate::error::Result;
use crate::generator::{generate_action, LwmOutcome, Rejection};
use crate::pruning::{attention_weights, retain_ratio, select_tokens, TokenGrid};
use crate::scheduler::{lwm_trigger, RouteDecision, RouteReason};

/// One executed step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub source: Source,
    pub action: Action,
    /// Speed of the arm when the step was decided (speed of the previous
    /// action; zero on the first step).
    pub speed: f64,
    /// Tokens the policy would see unpruned; zero on generator steps.
    pub tokens_total: usize,
    pub tokens_kept: usize,
    /// Zero on generator steps.
    pub retain_ratio: f64,
    pub cost: f64,
    pub cum_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    pub seed: u64,
    pub records: Vec<StepRecord>,
    pub success: bool,
    pub steps_used: usize,
    /// L-infinity distance to the goal at the end.
    pub final_error: f64,
    /// Scheduler output per step. Not persisted.
    pub decisions: Vec<RouteDecision>,
    /// Steps where the generator was eligible but its output was refused.
    /// Not persisted.
    pub rejections: Vec<(usize, Rejection)>,
}

impl EpisodeTrace {
    pub fn total_cost(&self) -> f64 {
        self.records.iter().map(|r| r.cost).sum()
    }

    pub fn lwm_steps(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.source == Source::Lwm)
            .count()
    }

    /// Unpruned all-policy cost divided by the actual cost.
    pub fn speedup(&self, c_full: f64) -> f64 {
        self.records.len() as f64 * c_full / self.total_cost()
    }

    /// Longest run of consecutive generator steps.
    pub fn longest_lwm_run(&self) -> usize {
        let mut best = 0;
        let mut run = 0;
        for r in &self.records {
            if r.source == Source::Lwm {
                run += 1;
                best = best.max(run);
            } else {
                run = 0;
            }
        }
        best
    }
}

/// Start and goal of one pick-and-place task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Task {
    pub start: [f64; 3],
    pub goal: [f64; 3],
}

/// Draws a task whose displacement fits the phase profile. Each axis moves
/// between 75% and 100% of the largest axis, with random signs.
pub fn sample_task<R: Rng + ?Sized>(sim: &SimConfig, rng: &mut R) -> Task {
    let start: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    let fill = rng.random_range(sim.fill_min..=sim.fill_max);
    let dist = fill * sim.profile.capacity();
    let mut dir: [f64; 3] = std::array::from_fn(|_| {
        let m = rng.random_range(0.75..=1.0);
        if rng.random_bool(0.5) {
            m
        } else {
            -m
        }
    });
    let top = dir.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    dir.iter_mut().for_each(|v| *v /= top);
    Task {
        start,
        goal: std::array::from_fn(|i| start[i] + dist * dir[i]),
    }
}

/// Frame rendering and token selection for policy steps.
struct Perception<'a> {
    cfg: &'a PruningConfig,
    grid: TokenGrid,
    attention: SyntheticAttention,
    camera: Camera,
    goal: [f64; 3],
}

impl Perception<'_> {
    /// Returns (kept tokens, retain ratio). Frames are only rendered when
    /// the ratio is below one; otherwise every token is kept.
    fn tokens_kept(&self, state: &EnvState, speed: f64) -> Result<(usize, f64)> {
        let ratio = retain_ratio(speed, self.cfg);
        if ratio >= 1.0 {
            return Ok((self.grid.len(), ratio));
        }
        let img = render_scene(&self.camera, state.ee_pos, state.gripper, self.goal);
        let attn = attention_weights(&self.attention.inputs(&img, &self.grid))?;
        let sel = select_tokens(&img, &attn, &self.grid, speed, self.cfg)?;
        Ok((sel.kept.len(), sel.retain_ratio))
    }
}

/// Runs one episode; `seed` determines the task, the reference motion and
/// the policy noise.
pub fn run_episode(cfg: &RunConfig, seed: u64) -> Result<EpisodeTrace> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let task = sample_task(&cfg.sim, &mut rng);
    run_task(cfg, &task, seed, &mut rng)
}

/// Runs one episode on a given task.
pub fn run_task<R: Rng + ?Sized>(
    cfg: &RunConfig,
    task: &Task,
    seed: u64,
    rng: &mut R,
) -> Result<EpisodeTrace> {
    let sim = &cfg.sim;
    let reference = gen_reference_trajectory(&sim.profile, task.start, task.goal, seed)?;
    let goal = reference.goal();
    let grid = TokenGrid::for_image(sim.image_size, sim.image_size, cfg.pruning.patch_size)?;
    let perception = Perception {
        cfg: &cfg.pruning,
        grid,
        attention: SyntheticAttention::new(&grid, sim.projection_seed),
        camera: Camera::framing(task.start, goal, sim.image_size),
        goal,
    };
    let waypoints = reference
        .phase_ends
        .iter()
        .map(|&k| Waypoint {
            pos: reference.positions[k + 1],
            tol: sim.success_tol,
        })
        .collect();

    let mut state = EnvState::new(task.start, waypoints);
    let mut buffer = ActionBuffer::new(cfg.scheduler.buffer_len)?;
    let mut prev: Option<Action> = None;
    let mut records = Vec::new();
    let mut decisions = Vec::new();
    let mut rejections = Vec::new();
    let mut cum_cost = 0.0;

    while state.step < sim.step_cap {
        if state.step >= reference.len() && distance_inf(&state.ee_pos, &goal) <= sim.success_tol {
            break;
        }
        let speed = prev.as_ref().map_or(0.0, translational_speed);
        let decision = match &prev {
            Some(p) => lwm_trigger(p, &buffer, &cfg.scheduler),
            None => RouteDecision {
                use_lwm: false,
                reason: RouteReason::BufferTooShort,
            },
        };
        let mut generated = None;
        if let (true, Some(p)) = (decision.use_lwm, &prev) {
            match generate_action(&buffer, &cfg.generator, p, sim.v_max_env)? {
                LwmOutcome::Accepted(a) => generated = Some(a),
                LwmOutcome::Rejected(r) => rejections.push((state.step, r)),
            }
        }
        let (action, tokens_total, tokens_kept, ratio) = match generated {
            Some(a) => (a, 0, 0, 0.0),
            None => {
                let (kept, ratio) = perception.tokens_kept(&state, speed)?;
                let a = oracle_policy_step(&state, &reference, sim.noise, sim.v_max_env, rng);
                (a, grid.len(), kept, ratio)
            }
        };
        let cost = cost_of_step(action.source, tokens_kept, tokens_total, &cfg.cost);
        cum_cost += cost;
        records.push(StepRecord {
            step: state.step,
            source: action.source,
            action,
            speed,
            tokens_total,
            tokens_kept,
            retain_ratio: ratio,
            cost,
            cum_cost,
        });
        decisions.push(decision);
        buffer.push(action);
        state.apply(&action);
        prev = Some(action);
    }

    let final_error = distance_inf(&state.ee_pos, &goal);
    let success = final_error <= sim.success_tol && state.gripper_events == reference.events;
    Ok(EpisodeTrace {
        seed,
        steps_used: records.len(),
        records,
        success,
        final_error,
        decisions,
        rejections,
    })
}

/// Runs every configured episode, in parallel, ordered by seed.
pub fn run_batch(cfg: &RunConfig) -> Result<Vec<EpisodeTrace>> {
    cfg.validate()?;
    let seeds: Vec<u64> = cfg.sim.seeds().collect();
    seeds.par_iter().map(|&s| run_episode(cfg, s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn baseline_config() -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.scheduler.tau = 1.0;
        cfg.pruning.v_p_min = cfg.sim.v_max_env;
        cfg.pruning.v_p_max = cfg.sim.v_max_env + 1e-6;
        cfg
    }

    #[test]
    fn baseline_costs_one_per_step() {
        let cfg = baseline_config();
        let t = run_episode(&cfg, 3).unwrap();
        assert!(t.success, "final error {}", t.final_error);
        assert_eq!(t.lwm_steps(), 0);
        assert_eq!(t.total_cost(), t.records.len() as f64);
        assert_eq!(t.speedup(1.0), 1.0);
        assert!(t.records.iter().all(|r| r.tokens_kept == r.tokens_total));
    }

    #[test]
    fn default_constants_use_the_generator() {
        let cfg = RunConfig::default();
        let t = run_episode(&cfg, 3).unwrap();
        assert!(t.success, "final error {}", t.final_error);
        assert!(t.lwm_steps() >= 1);
        assert!(t.total_cost() < t.records.len() as f64);
    }

    #[test]
    fn same_seed_same_trace() {
        let mut cfg = RunConfig::default();
        cfg.sim.noise = 0.01;
        assert_eq!(
            run_episode(&cfg, 11).unwrap(),
            run_episode(&cfg, 11).unwrap()
        );
    }

    #[test]
    fn cum_cost_is_prefix_sum() {
        let t = run_episode(&RunConfig::default(), 5).unwrap();
        let mut acc = 0.0;
        for r in &t.records {
            acc += r.cost;
            assert_eq!(r.cum_cost, acc);
        }
    }

    #[test]
    fn task_fits_profile() {
        let sim = SimConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let t = sample_task(&sim, &mut rng);
            assert!(gen_reference_trajectory(&sim.profile, t.start, t.goal, 0).is_ok());
        }
    }
}
