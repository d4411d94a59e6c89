//! Batch metrics.

use super::episode::EpisodeTrace;
use crate::action::Source;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub episodes: usize,
    pub successes: usize,
    pub total_steps: usize,
    pub lwm_steps: usize,
    /// Token counts summed over policy steps only.
    pub vla_tokens_total: usize,
    pub vla_tokens_kept: usize,
    pub total_cost: f64,
    pub c_full: f64,
    pub success_rate: f64,
    /// Cost of running the unpruned policy on every step, divided by the
    /// actual cost.
    pub speedup: f64,
    pub intuitive_action_rate: f64,
    /// Fraction of tokens dropped on policy steps.
    pub pruning_rate: f64,
    pub mean_cost_per_step: f64,
}

/// Aggregates traces. Costs are summed trace by trace in record order, so
/// a trace read back from disk reproduces the same report bit for bit.
pub fn compute_metrics(traces: &[EpisodeTrace], c_full: f64) -> Result<MetricsReport> {
    if traces.is_empty() {
        return Err(Error::domain("no episodes to summarize"));
    }
    let mut total_steps = 0;
    let mut lwm_steps = 0;
    let mut vla_tokens_total = 0;
    let mut vla_tokens_kept = 0;
    let mut total_cost = 0.0;
    for t in traces {
        total_steps += t.records.len();
        for r in &t.records {
            total_cost += r.cost;
            match r.source {
                Source::Lwm => lwm_steps += 1,
                Source::Vla => {
                    vla_tokens_total += r.tokens_total;
                    vla_tokens_kept += r.tokens_kept;
                }
            }
        }
    }
    if total_steps == 0 {
        return Err(Error::domain("episodes contain no steps"));
    }
    let successes = traces.iter().filter(|t| t.success).count();
    let pruning_rate = if vla_tokens_total == 0 {
        0.0
    } else {
        1.0 - vla_tokens_kept as f64 / vla_tokens_total as f64
    };
    Ok(MetricsReport {
        episodes: traces.len(),
        successes,
        total_steps,
        lwm_steps,
        vla_tokens_total,
        vla_tokens_kept,
        total_cost,
        c_full,
        success_rate: successes as f64 / traces.len() as f64,
        speedup: total_steps as f64 * c_full / total_cost,
        intuitive_action_rate: lwm_steps as f64 / total_steps as f64,
        pruning_rate,
        mean_cost_per_step: total_cost / total_steps as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::Action;
    use crate::sim::episode::StepRecord;

    fn record(step: usize, source: Source, kept: usize, total: usize, cost: f64) -> StepRecord {
        StepRecord {
            step,
            source,
            action: Action::still(0, source),
            speed: 0.0,
            tokens_total: total,
            tokens_kept: kept,
            retain_ratio: 0.0,
            cost,
            cum_cost: 0.0,
        }
    }

    fn trace(records: Vec<StepRecord>, success: bool) -> EpisodeTrace {
        EpisodeTrace {
            seed: 0,
            steps_used: records.len(),
            records,
            success,
            final_error: 0.0,
            decisions: vec![],
            rejections: vec![],
        }
    }

    #[test]
    fn hand_counted_report() {
        let t = trace(
            vec![
                record(0, Source::Vla, 196, 196, 1.0),
                record(1, Source::Vla, 98, 196, 0.7),
                record(2, Source::Lwm, 0, 0, 0.001),
                record(3, Source::Vla, 49, 196, 0.55),
                record(4, Source::Lwm, 0, 0, 0.001),
            ],
            true,
        );
        let m = compute_metrics(
            &[t, trace(vec![record(0, Source::Vla, 196, 196, 1.0)], false)],
            1.0,
        )
        .unwrap();
        assert_eq!(m.total_steps, 6);
        assert_eq!(m.lwm_steps, 2);
        assert_eq!(m.intuitive_action_rate, 2.0 / 6.0);
        assert_eq!(m.success_rate, 0.5);
        assert_eq!(m.vla_tokens_total, 784);
        assert_eq!(m.vla_tokens_kept, 539);
        assert!((m.pruning_rate - 245.0 / 784.0).abs() < 1e-15);
        assert!((m.total_cost - 3.252).abs() < 1e-12);
        assert!((m.speedup - 6.0 / 3.252).abs() < 1e-12);
    }

    #[test]
    fn empty_batch_is_an_error() {
        assert!(compute_metrics(&[], 1.0).is_err());
    }
}
