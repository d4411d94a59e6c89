//! Kinematic end-effector state. Positions integrate velocity with a unit
//! timestep; there is no dynamics.

use super::trajectory::GripperEvent;
use crate::action::Action;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub pos: [f64; 3],
    /// L-infinity tolerance.
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub ee_pos: [f64; 3],
    pub ee_rot: [f64; 3],
    pub gripper: u8,
    pub step: usize,
    pub waypoints: Vec<Waypoint>,
    /// Index of the next waypoint to reach.
    pub next_waypoint: usize,
    /// Gripper transitions observed so far.
    pub gripper_events: Vec<GripperEvent>,
}

impl EnvState {
    pub fn new(ee_pos: [f64; 3], waypoints: Vec<Waypoint>) -> Self {
        EnvState {
            ee_pos,
            ee_rot: [0.0; 3],
            gripper: 0,
            step: 0,
            waypoints,
            next_waypoint: 0,
            gripper_events: Vec::new(),
        }
    }

    /// Applies one action in place.
    pub fn apply(&mut self, a: &Action) {
        for i in 0..3 {
            self.ee_pos[i] += a.trans[i];
            self.ee_rot[i] += a.rot[i];
        }
        match (self.gripper, a.gripper) {
            (0, 1) => self.gripper_events.push(GripperEvent::Close),
            (1, 0) => self.gripper_events.push(GripperEvent::Open),
            _ => {}
        }
        self.gripper = a.gripper;
        self.step += 1;
        if let Some(wp) = self.waypoints.get(self.next_waypoint) {
            if distance_inf(&self.ee_pos, &wp.pos) <= wp.tol {
                self.next_waypoint += 1;
            }
        }
    }

    pub fn waypoints_done(&self) -> bool {
        self.next_waypoint >= self.waypoints.len()
    }
}

pub fn distance_inf(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Returns the state after executing `a`.
pub fn env_step(state: &EnvState, a: &Action) -> EnvState {
    let mut next = state.clone();
    next.apply(a);
    next
}
