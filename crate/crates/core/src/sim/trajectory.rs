//! Four-phase pick-and-place reference motion.
//!
//! Each phase follows a trapezoidal speed profile: linear ramps up to and
//! down from a plateau at the phase's peak speed. The slow phases stay
//! below the scheduler's speed window; the moving phase peaks above it, so its ramps sweep through the
//! window. All phases travel along the same direction, and the fraction of
//! the profile's capacity a task uses sets the ramp length.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::action::{Action, Source};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKind {
    Targeting,
    Grasping,
    Moving,
    Placing,
}

impl PhaseKind {
    pub const ORDER: [PhaseKind; 4] = [
        PhaseKind::Targeting,
        PhaseKind::Grasping,
        PhaseKind::Moving,
        PhaseKind::Placing,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GripperEvent {
    Close,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    pub kind: PhaseKind,
    pub duration: usize,
    pub peak_speed: f64,
    /// Fired on the last step of the phase.
    pub gripper_event: Option<GripperEvent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    phases: Vec<Phase>,
}

impl Default for PhaseProfile {
    fn default() -> Self {
        PhaseProfile::four_phase([12, 8, 16, 10], [0.15, 0.1, 0.65, 0.12])
    }
}

impl PhaseProfile {
    /// Targeting, grasping (closes the gripper), moving, placing (opens it).
    pub fn four_phase(durations: [usize; 4], peaks: [f64; 4]) -> Self {
        let phases = PhaseKind::ORDER
            .iter()
            .zip(durations.iter().zip(peaks))
            .map(|(&kind, (&duration, peak_speed))| Phase {
                kind,
                duration,
                peak_speed,
                gripper_event: match kind {
                    PhaseKind::Grasping => Some(GripperEvent::Close),
                    PhaseKind::Placing => Some(GripperEvent::Open),
                    _ => None,
                },
            })
            .collect();
        PhaseProfile { phases }
    }

    pub fn from_lists(durations: &[usize], peaks: &[f64]) -> Result<Self> {
        match (
            <[usize; 4]>::try_from(durations),
            <[f64; 4]>::try_from(peaks),
        ) {
            (Ok(d), Ok(p)) => Ok(Self::four_phase(d, p)),
            _ => Err(Error::config(format!(
                "sim: phase_durations and phase_peaks need 4 entries each, got {} and {}",
                durations.len(),
                peaks.len()
            ))),
        }
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn total_steps(&self) -> usize {
        self.phases.iter().map(|p| p.duration).sum()
    }

    /// Largest distance (per axis) the profile can cover: every phase at
    /// its peak for its whole duration.
    pub fn capacity(&self) -> f64 {
        self.phases
            .iter()
            .map(|p| p.peak_speed * p.duration as f64)
            .sum()
    }

    pub fn events(&self) -> Vec<GripperEvent> {
        self.phases.iter().filter_map(|p| p.gripper_event).collect()
    }

    pub fn validate(&self, v_max_env: f64) -> Result<()> {
        for p in &self.phases {
            if p.duration == 0 {
                return Err(Error::config(format!(
                    "sim: phase {:?} has zero duration",
                    p.kind
                )));
            }
            if !(p.peak_speed > 0.0 && p.peak_speed <= v_max_env) {
                return Err(Error::config(format!(
                    "sim: phase {:?} peak speed {} must lie in (0, v_max_env = {v_max_env}]",
                    p.kind, p.peak_speed
                )));
            }
        }
        if self.total_steps() < 4 {
            return Err(Error::config("sim: phase durations must sum to at least 4"));
        }
        Ok(())
    }
}

/// Per-step speeds of one trapezoid: the exact average of the continuous
/// profile over each unit step, so the steps sum to the covered distance.
pub fn trapezoid_steps(duration: usize, peak: f64, fill: f64) -> Vec<f64> {
    let dur = duration as f64;
    let ramp = dur * (1.0 - fill);
    let total = peak * (dur - ramp);
    let area_to = |t: f64| -> f64 {
        if ramp <= 0.0 {
            peak * t
        } else if t <= ramp {
            peak * t * t / (2.0 * ramp)
        } else if t <= dur - ramp {
            peak * (ramp / 2.0 + (t - ramp))
        } else {
            let left = dur - t;
            total - peak * left * left / (2.0 * ramp)
        }
    };
    (0..duration)
        .map(|k| area_to(k as f64 + 1.0) - area_to(k as f64))
        .collect()
}

/// A reference motion and the states it passes through.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTrajectory {
    pub actions: Vec<Action>,
    /// Positions before each step, plus the final one (`actions.len() + 1`).
    pub positions: Vec<[f64; 3]>,
    /// Orientations, same indexing as `positions`.
    pub orientations: Vec<[f64; 3]>,
    /// Index of the last step of each phase.
    pub phase_ends: Vec<usize>,
    pub events: Vec<GripperEvent>,
}

impl ReferenceTrajectory {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn goal(&self) -> [f64; 3] {
        *self.positions.last().expect("positions is never empty")
    }

    /// Reference action at `step`; past the end, a still action holding the
    /// final gripper state.
    pub fn action_at(&self, step: usize) -> Action {
        match self.actions.get(step) {
            Some(a) => *a,
            None => {
                let g = self.actions.last().map_or(0, |a| a.gripper);
                Action::still(g, Source::Vla)
            }
        }
    }

    pub fn position_at(&self, step: usize) -> [f64; 3] {
        self.positions[step.min(self.positions.len() - 1)]
    }

    pub fn orientation_at(&self, step: usize) -> [f64; 3] {
        self.orientations[step.min(self.orientations.len() - 1)]
    }
}

/// Generates the reference motion from `start` to `goal`.
///
/// The per-axis distance must use between half and all of the profile's
/// capacity (a zero displacement is also accepted and yields a motionless
/// trajectory with gripper events only). `seed` drives small orientation
/// adjustments during the slow phases.
pub fn gen_reference_trajectory(
    profile: &PhaseProfile,
    start: [f64; 3],
    goal: [f64; 3],
    seed: u64,
) -> Result<ReferenceTrajectory> {
    if profile.total_steps() < 4 || profile.phases().iter().any(|p| p.duration == 0) {
        return Err(Error::domain(
            "phase durations must be >= 1 and sum to >= 4",
        ));
    }
    if start.iter().chain(&goal).any(|v| !v.is_finite()) {
        return Err(Error::domain("start and goal must be finite"));
    }
    let delta: [f64; 3] = std::array::from_fn(|i| goal[i] - start[i]);
    let dist = delta.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let still = dist == 0.0;
    let fill = dist / profile.capacity();
    if !still && !(0.5..=1.0).contains(&fill) {
        return Err(Error::domain(format!(
            "displacement {dist:.4} is inconsistent with the phase profile: \
             it must lie in [{:.4}, {:.4}]",
            0.5 * profile.capacity(),
            profile.capacity()
        )));
    }
    let dir: [f64; 3] = if still {
        [0.0; 3]
    } else {
        delta.map(|d| d / dist)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut actions = Vec::with_capacity(profile.total_steps());
    let mut phase_ends = Vec::new();
    let mut gripper = 0u8;
    for phase in profile.phases() {
        let speeds = if still {
            vec![0.0; phase.duration]
        } else {
            trapezoid_steps(phase.duration, phase.peak_speed, fill)
        };
        // Slow phases carry a small yaw correction shaped as a half sine.
        let yaw_amp = if still || phase.kind == PhaseKind::Moving {
            0.0
        } else {
            rng.random_range(-0.05..0.05)
        };
        for (k, s) in speeds.iter().enumerate() {
            let last = k + 1 == phase.duration;
            if last {
                match phase.gripper_event {
                    Some(GripperEvent::Close) => gripper = 1,
                    Some(GripperEvent::Open) => gripper = 0,
                    None => {}
                }
            }
            let yaw =
                yaw_amp * (std::f64::consts::PI * (k as f64 + 0.5) / phase.duration as f64).sin();
            actions.push(Action {
                trans: dir.map(|d| d * s),
                rot: [0.0, 0.0, yaw],
                gripper,
                source: Source::Vla,
            });
        }
        phase_ends.push(actions.len() - 1);
    }

    let mut positions = vec![start];
    let mut orientations = vec![[0.0; 3]];
    for a in &actions {
        let p = positions.last().unwrap();
        let o = orientations.last().unwrap();
        positions.push(std::array::from_fn(|i| p[i] + a.trans[i]));
        orientations.push(std::array::from_fn(|i| o[i] + a.rot[i]));
    }
    Ok(ReferenceTrajectory {
        actions,
        positions,
        orientations,
        phase_ends,
        events: profile.events(),
    })
}
