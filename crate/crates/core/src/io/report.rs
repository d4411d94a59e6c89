//! Human-readable and plot-ready metric summaries.

use crate::sim::MetricsReport;

/// Plain-text table of the headline metrics.
pub fn render_report(m: &MetricsReport) -> String {
    let rows = [
        ("episodes", m.episodes.to_string()),
        ("total steps", m.total_steps.to_string()),
        ("success rate", format!("{:.3}", m.success_rate)),
        ("speedup", format!("{:.3}", m.speedup)),
        (
            "intuitive action rate",
            format!("{:.3}", m.intuitive_action_rate),
        ),
        ("pruning rate", format!("{:.3}", m.pruning_rate)),
        ("mean cost per step", format!("{:.3}", m.mean_cost_per_step)),
    ];
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = format!("{:<width$}  value\n{}\n", "metric", "-".repeat(width + 7));
    for (k, v) in rows {
        out.push_str(&format!("{k:<width$}  {v:>5}\n"));
    }
    out
}

/// `key,value` lines for plotting pipelines.
pub fn summary_csv(m: &MetricsReport) -> String {
    format!(
        "key,value\nepisodes,{}\ntotal_steps,{}\nsuccess_rate,{:.3}\nspeedup,{:.3}\n\
         intuitive_action_rate,{:.3}\npruning_rate,{:.3}\nmean_cost_per_step,{:.3}\n",
        m.episodes,
        m.total_steps,
        m.success_rate,
        m.speedup,
        m.intuitive_action_rate,
        m.pruning_rate,
        m.mean_cost_per_step
    )
}
