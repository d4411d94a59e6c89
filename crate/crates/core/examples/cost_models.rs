//! Compares the linear and quadratic token-cost laws, and each mechanism
//! on its own, over the same seeded batch.

use vla_accel::config::TokenCostLaw;
use vla_accel::sim::{compute_metrics, run_batch};
use vla_accel::RunConfig;

type Tweak = Box<dyn Fn(&mut RunConfig)>;

fn main() -> vla_accel::Result<()> {
    let mut base = RunConfig::default();
    base.sim.episodes = 40;
    let no_pruning = |c: &mut RunConfig| {
        c.pruning.v_p_min = c.sim.v_max_env;
        c.pruning.v_p_max = c.sim.v_max_env + 1e-6;
    };

    let variants: [(&str, Tweak); 5] = [
        ("both, linear", Box::new(|_| {})),
        (
            "both, quadratic",
            Box::new(|c| c.cost.mode = TokenCostLaw::Quadratic),
        ),
        ("scheduling only", Box::new(no_pruning)),
        ("pruning only", Box::new(|c| c.scheduler.tau = 1.0)),
        (
            "neither",
            Box::new(move |c| {
                c.scheduler.tau = 1.0;
                no_pruning(c);
            }),
        ),
    ];
    println!("{:<16} speedup  intuitive  pruned  success", "variant");
    for (name, tweak) in variants {
        let mut cfg = base.clone();
        tweak(&mut cfg);
        let m = compute_metrics(&run_batch(&cfg)?, cfg.cost.c_full)?;
        println!(
            "{name:<16} {:>7.3}  {:>9.3}  {:>6.3}  {:>7.3}",
            m.speedup, m.intuitive_action_rate, m.pruning_rate, m.success_rate
        );
    }
    Ok(())
}
