//! Fits the ridge generator to a buffer of accelerating actions and shows
//! how the regularizer shrinks the extrapolation and when the validity
//! gate refuses a prediction.

use vla_accel::config::GeneratorConfig;
use vla_accel::generator::{fit_ridge, generate_action, predict_next, LwmOutcome};
use vla_accel::{Action, ActionBuffer, Source};

fn buffer(rows: impl Iterator<Item = [f64; 3]>) -> vla_accel::Result<ActionBuffer> {
    let mut buf = ActionBuffer::new(6)?;
    for t in rows {
        buf.push(Action::new(t, [0.0, 0.0, 0.02], 1, Source::Vla)?);
    }
    Ok(buf)
}

fn main() -> vla_accel::Result<()> {
    let ramp = buffer((0..6).map(|t| {
        let v = 0.1 + 0.04 * t as f64;
        [v, -v, 0.5 * v]
    }))?;
    for lambda in [0.0, 0.01, 0.1, 1.0] {
        let m = fit_ridge(&ramp, lambda)?;
        let p = predict_next(&m, ramp.len());
        println!(
            "lambda {lambda:<5} slope(ax) {:.5}  intercept(ax) {:.5}  next ax {:.5}",
            m.slope[0], m.intercept[0], p[0]
        );
    }

    let cfg = GeneratorConfig::default();
    let prev = *ramp.last().unwrap();
    match generate_action(&ramp, &cfg, &prev, 1.0)? {
        LwmOutcome::Accepted(a) => println!("accepted: trans {:?}, gripper {}", a.trans, a.gripper),
        LwmOutcome::Rejected(r) => println!("rejected: {r:?}"),
    }

    // Still accelerating at the speed cap: the extrapolation would exceed
    // it, so the gate sends the step back to the policy.
    let steep = buffer((0..6).map(|t| [0.5 + 0.1 * t as f64, 0.2, 0.0]))?;
    let steep_prev = *steep.last().unwrap();
    match generate_action(&steep, &cfg, &steep_prev, 1.0)? {
        LwmOutcome::Accepted(a) => println!("steep ramp accepted: {:?}", a.trans),
        LwmOutcome::Rejected(r) => println!("steep ramp rejected: {r:?}"),
    }
    Ok(())
}
