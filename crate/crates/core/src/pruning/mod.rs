//! Spatio-semantic token pruning.
//!
//! Semantic importance comes from the attention each patch token receives;
//! spatial importance from whether the token's patch touches a Canny edge.
//! Spatial tokens are always kept. Whatever the speed-dependent budget
//! leaves over goes to the most important remaining tokens, and the
//! survivors keep their lattice order.

pub mod attention;
pub mod canny;
pub mod image;
pub mod tokens;

pub use attention::{accumulate_importance, attention_weights, AttentionInputs, ImportanceScores};
pub use canny::{canny_edges, sobel_gradients, EdgeMask, Gradients};
pub use image::GrayImage;
pub use tokens::{
    extract_spatial_tokens, order_preserving_union, prune_tokens, retain_ratio, select_semantic,
    token_budget, TokenGrid,
};

use nalgebra::DMatrix;

use crate::config::PruningConfig;
use crate::error::Result;

/// Everything the dual-aware selection produced for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Kept token indices, ascending.
    pub kept: Vec<usize>,
    /// Tokens touching an edge.
    pub spatial: Vec<usize>,
    /// Tokens above the semantic threshold (diagnostic only).
    pub semantic: Vec<usize>,
    pub scores: ImportanceScores,
    pub retain_ratio: f64,
    pub mask: EdgeMask,
}

/// Runs edge detection, importance scoring and budgeted selection on one
/// frame, given its row-stochastic attention matrix.
pub fn select_tokens(
    img: &GrayImage,
    attention: &DMatrix<f64>,
    grid: &TokenGrid,
    v: f64,
    cfg: &PruningConfig,
) -> Result<Selection> {
    let mask = canny_edges(img, &cfg.canny)?;
    let spatial = extract_spatial_tokens(&mask, grid)?;
    let scores = accumulate_importance(attention)?;
    let t_ks = cfg.t_ks.unwrap_or(1.0 / grid.len() as f64);
    let semantic = select_semantic(&scores, t_ks);
    let kept = prune_tokens(grid, &scores, &spatial, v, cfg)?;
    Ok(Selection {
        kept,
        spatial,
        semantic,
        scores,
        retain_ratio: retain_ratio(v, cfg),
        mask,
    })
}
