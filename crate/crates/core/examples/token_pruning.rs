//! Sweeps arm speed over one rendered frame and reports how many tokens
//! survive, how many of those are edge tokens, and the resulting step cost.

use vla_accel::action::Source;
use vla_accel::config::{CostModel, PruningConfig};
use vla_accel::pruning::{attention_weights, select_tokens, TokenGrid};
use vla_accel::sim::cost_of_step;
use vla_accel::sim::scene::{render_scene, Camera, SyntheticAttention};

fn main() -> vla_accel::Result<()> {
    let cfg = PruningConfig::default();
    let grid = TokenGrid::for_image(224, 224, cfg.patch_size)?;
    let goal = [2.0, 1.5, -1.0];
    let frame = render_scene(
        &Camera::framing([0.0; 3], goal, 224),
        [0.8, 0.7, -0.4],
        0,
        goal,
    );
    let attn = attention_weights(&SyntheticAttention::new(&grid, 7).inputs(&frame, &grid))?;

    println!("speed  ratio  kept/{}  spatial  semantic  cost", grid.len());
    for v in [0.0, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0] {
        let sel = select_tokens(&frame, &attn, &grid, v, &cfg)?;
        println!(
            "{v:>5.2}  {:>5.3}  {:>8}  {:>7}  {:>8}  {:.3}",
            sel.retain_ratio,
            sel.kept.len(),
            sel.spatial.len(),
            sel.semantic.len(),
            cost_of_step(
                Source::Vla,
                sel.kept.len(),
                grid.len(),
                &CostModel::default()
            )
        );
    }
    Ok(())
}
