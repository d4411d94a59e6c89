//! Prints the four-phase reference motion for one task: per-step speed,
//! phase, and whether the step falls in the generator's speed window.

use vla_accel::sim::{gen_reference_trajectory, PhaseProfile};
use vla_accel::{translational_speed, Source};

fn main() -> vla_accel::Result<()> {
    let profile = PhaseProfile::default();
    let start = [0.2, -0.4, 0.1];
    let d = 0.72 * profile.capacity();
    let goal = [start[0] + d, start[1] - 0.8 * d, start[2] + 0.9 * d];
    let reference = gen_reference_trajectory(&profile, start, goal, 3)?;
    let cfg = vla_accel::config::SchedulerConfig::default();

    let mut phase = 0;
    for (k, a) in reference.actions.iter().enumerate() {
        let window = a
            .trans
            .iter()
            .all(|v| cfg.v_min < v.abs() && v.abs() < cfg.v_max);
        let bar = "#".repeat((translational_speed(a) * 60.0).round() as usize);
        println!(
            "{k:>3} {:<9} {:.3} {} {bar}",
            format!("{:?}", profile.phases()[phase].kind),
            translational_speed(a),
            if window { "w" } else { " " }
        );
        if reference.phase_ends.get(phase) == Some(&k) {
            phase += 1;
        }
        debug_assert_eq!(a.source, Source::Vla);
    }
    println!(
        "gripper events: {:?}; goal {:?}",
        reference.events,
        reference.goal()
    );
    Ok(())
}
