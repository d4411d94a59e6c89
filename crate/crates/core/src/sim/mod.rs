//! Kinematic pick-and-place harness: reference motions, an oracle policy,
//! closed-loop episodes and cost accounting.

pub mod cost;
pub mod env;
pub mod episode;
pub mod metrics;
pub mod policy;
pub mod scene;
pub mod trajectory;

pub use cost::cost_of_step;
pub use env::{env_step, EnvState, Waypoint};
pub use episode::{run_batch, run_episode, run_task, sample_task, EpisodeTrace, StepRecord, Task};
pub use metrics::{compute_metrics, MetricsReport};
pub use policy::oracle_policy_step;
pub use trajectory::{
    gen_reference_trajectory, GripperEvent, PhaseKind, PhaseProfile, ReferenceTrajectory,
};
