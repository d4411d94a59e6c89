//! Runs a seeded batch of pick-and-place episodes with the default settings
//! and prints the metrics report plus per-episode routing statistics.
//!
//!     cargo run --release --example closed_loop -- [episodes]

use std::time::Instant;

use vla_accel::sim::{compute_metrics, run_batch};
use vla_accel::{RunConfig, Source};

fn main() -> vla_accel::Result<()> {
    let mut cfg = RunConfig::default();
    if let Some(n) = std::env::args().nth(1).and_then(|s| s.parse().ok()) {
        cfg.sim.episodes = n;
    }
    let t0 = Instant::now();
    let traces = run_batch(&cfg)?;
    let elapsed = t0.elapsed();
    let m = compute_metrics(&traces, cfg.cost.c_full)?;
    print!("{}", vla_accel::io::render_report(&m));
    println!("{} episodes in {:.2?}", traces.len(), elapsed);

    let longest = traces
        .iter()
        .map(|t| t.longest_lwm_run())
        .max()
        .unwrap_or(0);
    let rejected: usize = traces.iter().map(|t| t.rejections.len()).sum();
    println!("longest generator run: {longest} steps; gate rejections: {rejected}");

    let t = &traces[0];
    let route: String = t
        .records
        .iter()
        .map(|r| if r.source == Source::Lwm { 'L' } else { '.' })
        .collect();
    println!("seed {} route: {route}", t.seed);
    Ok(())
}
