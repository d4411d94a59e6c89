//! Runs a small noisy batch, persists it as CSV, reads it back and shows
//! that the report is unchanged.

use vla_accel::io::{read_run, render_report, summary_csv, write_run};
use vla_accel::sim::{compute_metrics, run_batch};
use vla_accel::RunConfig;

fn main() -> vla_accel::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.sim.episodes = 10;
    cfg.sim.noise = 0.02;
    let traces = run_batch(&cfg)?;

    let dir = std::env::temp_dir().join("vla-accel-trace-demo");
    write_run(&dir, &traces)?;
    let back = read_run(&dir, &cfg.cost)?;

    let before = compute_metrics(&traces, cfg.cost.c_full)?;
    let after = compute_metrics(&back, cfg.cost.c_full)?;
    print!("{}", render_report(&after));
    print!("\n{}", summary_csv(&after));
    println!(
        "\nwritten to {}; identical after reload: {}",
        dir.display(),
        before == after
    );
    Ok(())
}
