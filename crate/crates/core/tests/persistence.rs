use std::fs;

use vla_accel::config::RunConfig;
use vla_accel::io::{read_run, render_report, summary_csv, write_run};
use vla_accel::sim::{compute_metrics, run_batch};

/// Re-aggregates the raw CSV files with string splitting only.
fn spreadsheet_metrics(dir: &std::path::Path) -> (usize, usize, f64, f64, f64) {
    let index = fs::read_to_string(dir.join("episodes.csv")).unwrap();
    let (mut steps, mut lwm, mut cost, mut kept, mut total) = (0, 0, 0.0, 0.0, 0.0);
    let mut successes = 0;
    for line in index.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        successes += (cols[1] == "1") as usize;
        let trace = fs::read_to_string(dir.join(format!("trace_{}.csv", cols[0]))).unwrap();
        for row in trace.lines().skip(1) {
            let f: Vec<&str> = row.split(',').collect();
            steps += 1;
            cost += f[13].parse::<f64>().unwrap();
            if f[1] == "LWM" {
                lwm += 1;
            } else {
                total += f[10].parse::<f64>().unwrap();
                kept += f[11].parse::<f64>().unwrap();
            }
        }
    }
    (steps, lwm, cost, 1.0 - kept / total, successes as f64)
}

#[test]
fn metrics_match_spreadsheet_recomputation() {
    let mut cfg = RunConfig::default();
    cfg.sim.episodes = 12;
    cfg.sim.noise = 0.01;
    let traces = run_batch(&cfg).unwrap();
    let m = compute_metrics(&traces, 1.0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_run(dir.path(), &traces).unwrap();
    let (steps, lwm, cost, pruning, successes) = spreadsheet_metrics(dir.path());
    assert_eq!(steps, m.total_steps);
    assert_eq!(lwm, m.lwm_steps);
    assert!((cost - m.total_cost).abs() < 1e-6);
    assert!((steps as f64 / cost - m.speedup).abs() < 1e-8);
    assert!((pruning - m.pruning_rate).abs() < 1e-12);
    assert_eq!(successes / 12.0, m.success_rate);
}

#[test]
fn report_from_disk_equals_report_from_memory() {
    let mut cfg = RunConfig::default();
    cfg.sim.episodes = 8;
    let traces = run_batch(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_run(dir.path(), &traces).unwrap();
    let back = read_run(dir.path(), &cfg.cost).unwrap();
    let a = compute_metrics(&traces, 1.0).unwrap();
    let b = compute_metrics(&back, 1.0).unwrap();
    assert_eq!(render_report(&a), render_report(&b));
    assert_eq!(summary_csv(&a), summary_csv(&b));
    for (x, y) in traces.iter().zip(&back) {
        assert_eq!(x.success, y.success);
        assert_eq!(x.steps_used, y.steps_used);
        let cum: Vec<f64> = y.records.iter().map(|r| r.cum_cost).collect();
        let expect: Vec<f64> = x.records.iter().map(|r| r.cum_cost).collect();
        assert_eq!(cum, expect);
    }
}

#[test]
fn cum_cost_column_is_prefix_sum() {
    let mut cfg = RunConfig::default();
    cfg.sim.episodes = 1;
    let traces = run_batch(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_run(dir.path(), &traces).unwrap();
    let text = fs::read_to_string(dir.path().join("trace_0.csv")).unwrap();
    let mut acc = 0.0;
    for row in text.lines().skip(1) {
        let f: Vec<f64> = row
            .split(',')
            .skip(13)
            .map(|v| v.parse().unwrap())
            .collect();
        acc += f[0];
        assert!((acc - f[1]).abs() <= 1e-8 * acc.max(1.0));
    }
}
