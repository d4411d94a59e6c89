//! Compute-cost proxy for each step.

use crate::action::Source;
use crate::config::{CostModel, TokenCostLaw};

/// Normalized cost of one step. Generator steps cost `c_lwm`; policy steps
/// cost `c_full` scaled by the kept-token fraction under the chosen law.
pub fn cost_of_step(
    source: Source,
    tokens_kept: usize,
    tokens_total: usize,
    cm: &CostModel,
) -> f64 {
    match source {
        Source::Lwm => cm.c_lwm,
        Source::Vla => {
            let kept = if tokens_total == 0 {
                1.0
            } else {
                tokens_kept as f64 / tokens_total as f64
            };
            match cm.mode {
                TokenCostLaw::Linear => cm.c_full * (1.0 - cm.c_tok * (1.0 - kept)),
                TokenCostLaw::Quadratic => cm.c_full * ((1.0 - cm.c_tok) + cm.c_tok * kept * kept),
            }
        }
    }
}
