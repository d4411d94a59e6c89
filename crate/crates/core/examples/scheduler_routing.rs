//! Walks the routing rule through a steady stream of mid-speed actions.
//! The generator takes over as soon as the buffer is full, then hands
//! control back once its own outputs dilute the policy share to `tau`.

use vla_accel::scheduler::{classify_action_type, lwm_trigger, max_consecutive_lwm};
use vla_accel::{Action, ActionBuffer, Source};

fn main() -> vla_accel::Result<()> {
    let cfg = vla_accel::config::SchedulerConfig::default();
    let mut buf = ActionBuffer::new(cfg.buffer_len)?;
    let cruise = [0.3, -0.35, 0.25];
    let mut prev: Option<Action> = None;

    println!("step  reason            source  policy share");
    for step in 0..16 {
        let decision = match &prev {
            Some(p) => lwm_trigger(p, &buf, &cfg),
            None => vla_accel::scheduler::RouteDecision {
                use_lwm: false,
                reason: vla_accel::scheduler::RouteReason::BufferTooShort,
            },
        };
        let source = if decision.use_lwm {
            Source::Lwm
        } else {
            Source::Vla
        };
        let a = Action::new(cruise, [0.0; 3], 0, source)?;
        buf.push(a);
        println!(
            "{step:>4}  {:<16}  {}     {:.3}",
            format!("{:?}", decision.reason),
            source.as_str(),
            buf.vla_ratio()?
        );
        prev = Some(a);
    }

    println!(
        "\n{cruise:?} is {:?}; longest generator run allowed from a full policy buffer: {}",
        classify_action_type(&Action::new(cruise, [0.0; 3], 0, Source::Vla)?, &cfg),
        max_consecutive_lwm(cfg.buffer_len, cfg.tau)
    );
    Ok(())
}
