//! Inference acceleration for closed-loop robot policies.
//!
//! Two mechanisms cut the cost of running an expensive vision-language-
//! action policy at every control step:
//!
//! * a [scheduler] that, when the arm moves at moderate speed and recent
//!   actions came from the policy, substitutes a ridge-regression
//!   extrapolation of the action history ([generator]);
//! * [pruning] of visual tokens whose budget shrinks with arm speed while
//!   patches on image edges are always kept.
//!
//! [sim] provides a kinematic pick-and-place harness that runs both in a
//! closed loop and accounts for their cost; [io] persists traces and
//! reports.

// Validation uses negated comparisons so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod action;
pub mod commands;
pub mod config;
pub mod error;
pub mod generator;
pub mod io;
pub mod pruning;
pub mod scheduler;
pub mod sim;

pub use action::{translational_speed, Action, ActionBuffer, Source};
pub use config::RunConfig;
pub use error::{Error, Result};
