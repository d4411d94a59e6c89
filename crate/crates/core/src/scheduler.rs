//! Per-step routing between the expensive policy and the lightweight
//! generator.
//!
//! The generator may produce step `t` only when every translational
//! component of the previous action lies strictly inside the speed window
//! `(v_min, v_max)` and the share of policy-produced actions in the buffer
//! strictly exceeds `tau`. Until the buffer is full the policy is always
//! used.

use crate::action::{Action, ActionBuffer};
use crate::config::SchedulerConfig;

/// Coarse motion class of a single action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionType {
    /// Fast transit; every translational component exceeds `v_min`.
    Intuitive,
    /// Slow or precise motion.
    Deliberative,
}

/// Why a routing decision came out the way it did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteReason {
    BufferTooShort,
    SpeedOutOfWindow,
    RatioTooLow,
    Eligible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RouteDecision {
    pub use_lwm: bool,
    pub reason: RouteReason,
}

impl RouteDecision {
    fn vla(reason: RouteReason) -> Self {
        RouteDecision {
            use_lwm: false,
            reason,
        }
    }
}

pub fn classify_action_type(a: &Action, cfg: &SchedulerConfig) -> ActionType {
    if a.trans.iter().all(|v| v.abs() > cfg.v_min) {
        ActionType::Intuitive
    } else {
        ActionType::Deliberative
    }
}

/// True when every translational component of `a` lies strictly inside
/// `(v_min, v_max)`.
pub fn in_speed_window(a: &Action, cfg: &SchedulerConfig) -> bool {
    a.trans.iter().all(|v| {
        let m = v.abs();
        cfg.v_min < m && m < cfg.v_max
    })
}

/// Decides whether the lightweight generator produces the next action.
///
/// Conditions are checked in order: buffer fill, speed window of `prev`,
/// then the policy share of the buffer. The first failing one is reported.
pub fn lwm_trigger(prev: &Action, buf: &ActionBuffer, cfg: &SchedulerConfig) -> RouteDecision {
    if buf.is_empty() || buf.len() < cfg.buffer_len {
        return RouteDecision::vla(RouteReason::BufferTooShort);
    }
    if !in_speed_window(prev, cfg) {
        return RouteDecision::vla(RouteReason::SpeedOutOfWindow);
    }
    match buf.vla_ratio() {
        Ok(r) if r > cfg.tau => RouteDecision {
            use_lwm: true,
            reason: RouteReason::Eligible,
        },
        _ => RouteDecision::vla(RouteReason::RatioTooLow),
    }
}

/// Longest run of consecutive generator steps that the ratio condition
/// alone permits, starting from a buffer of `buffer_len` policy actions.
/// Found by stepping the buffer automaton, not by formula.
pub fn max_consecutive_lwm(buffer_len: usize, tau: f64) -> usize {
    // true = policy-produced
    let mut buf = std::collections::VecDeque::from(vec![true; buffer_len]);
    let mut run = 0;
    loop {
        let vla = buf.iter().filter(|s| **s).count();
        if (vla as f64 / buffer_len as f64) > tau {
            run += 1;
            buf.pop_front();
            buf.push_back(false);
            if run > buffer_len {
                // tau below zero would loop forever
                return run;
            }
        } else {
            return run;
        }
    }
}
