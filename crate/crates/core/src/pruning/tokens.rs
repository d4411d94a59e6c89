//! Token lattice, spatial/semantic selection and the speed-adaptive budget.

use std::cmp::Ordering;

use super::attention::ImportanceScores;
use super::canny::EdgeMask;
use crate::config::PruningConfig;
use crate::error::{Error, Result};

/// Square-patch token lattice over an image. Token `i` sits at row
/// `i / cols`, column `i % cols`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenGrid {
    pub patch_size: usize,
    pub rows: usize,
    pub cols: usize,
}

impl TokenGrid {
    pub fn new(patch_size: usize, rows: usize, cols: usize) -> Result<Self> {
        if patch_size == 0 || rows == 0 || cols == 0 {
            return Err(Error::domain("token grid dimensions must be positive"));
        }
        Ok(TokenGrid {
            patch_size,
            rows,
            cols,
        })
    }

    /// Lattice covering a `width × height` image exactly.
    pub fn for_image(width: usize, height: usize, patch_size: usize) -> Result<Self> {
        if patch_size == 0
            || !width.is_multiple_of(patch_size)
            || !height.is_multiple_of(patch_size)
        {
            return Err(Error::domain(format!(
                "patch size {patch_size} does not tile a {width}x{height} image"
            )));
        }
        Self::new(patch_size, height / patch_size, width / patch_size)
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    /// `(index, row, col)` in lattice order.
    pub fn tokens(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.len()).map(|i| (i, i / self.cols, i % self.cols))
    }
}

/// Tokens whose importance strictly exceeds `t_ks`, ascending.
pub fn select_semantic(scores: &ImportanceScores, t_ks: f64) -> Vec<usize> {
    scores
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > t_ks)
        .map(|(i, _)| i)
        .collect()
}

/// Tokens whose patch contains at least one edge pixel, ascending.
pub fn extract_spatial_tokens(mask: &EdgeMask, grid: &TokenGrid) -> Result<Vec<usize>> {
    let (w, h) = (grid.cols * grid.patch_size, grid.rows * grid.patch_size);
    if mask.width != w || mask.height != h {
        return Err(Error::domain(format!(
            "mask is {}x{}, grid expects {w}x{h}",
            mask.width, mask.height
        )));
    }
    let mut hit = vec![false; grid.len()];
    for y in 0..h {
        let row = y / grid.patch_size;
        for x in 0..w {
            if mask.bits[y * w + x] {
                hit[grid.index(row, x / grid.patch_size)] = true;
            }
        }
    }
    Ok(hit
        .iter()
        .enumerate()
        .filter(|(_, h)| **h)
        .map(|(i, _)| i)
        .collect())
}

/// Fraction of tokens kept at speed `v`: one below `v_p_min`, then a
/// linear ramp reaching zero at `v_p_max`.
pub fn retain_ratio(v: f64, cfg: &PruningConfig) -> f64 {
    if v < cfg.v_p_min {
        return 1.0;
    }
    if v > cfg.v_p_max {
        log::warn!(
            "speed {v} exceeds v_p_max {}; retaining no optional tokens",
            cfg.v_p_max
        );
        return 0.0;
    }
    (1.0 - (v - cfg.v_p_min) / (cfg.v_p_max - cfg.v_p_min)).clamp(0.0, 1.0)
}

/// Number of tokens allowed by a retain ratio: `ceil(ratio · n)`.
pub fn token_budget(ratio: f64, n: usize) -> usize {
    ((ratio * n as f64).ceil() as usize).min(n)
}

fn check_ascending(name: &str, s: &[usize]) -> Result<()> {
    if s.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain(format!("{name} is not strictly ascending")));
    }
    Ok(())
}

/// Union of two ascending index sequences, emitted in ascending order.
pub fn order_preserving_union(a: &[usize], b: &[usize]) -> Result<Vec<usize>> {
    check_ascending("left operand", a)?;
    check_ascending("right operand", b)?;
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Ok(out)
}

/// Selects the tokens passed on to the language backbone.
///
/// Every spatial token is kept. Any budget left over goes to the
/// highest-scoring non-spatial tokens, ties broken by lower index. The
/// result is ascending; below `v_p_min` it is the full lattice.
pub fn prune_tokens(
    grid: &TokenGrid,
    scores: &ImportanceScores,
    spatial: &[usize],
    v: f64,
    cfg: &PruningConfig,
) -> Result<Vec<usize>> {
    let n = grid.len();
    if scores.len() != n {
        return Err(Error::domain(format!(
            "{} scores for a {n}-token grid",
            scores.len()
        )));
    }
    check_ascending("spatial token list", spatial)?;
    if spatial.last().is_some_and(|&i| i >= n) {
        return Err(Error::domain("spatial token index out of range"));
    }
    let ratio = retain_ratio(v, cfg);
    if ratio >= 1.0 {
        return Ok((0..n).collect());
    }
    let budget = token_budget(ratio, n);
    if spatial.len() >= budget {
        return Ok(spatial.to_vec());
    }
    let extra = budget - spatial.len();

    let mut is_spatial = vec![false; n];
    spatial.iter().for_each(|&i| is_spatial[i] = true);
    let s = scores.as_slice();
    let mut rest: Vec<usize> = (0..n).filter(|&i| !is_spatial[i]).collect();
    let by_rank = |a: &usize, b: &usize| s[*b].total_cmp(&s[*a]).then(a.cmp(b));
    if extra < rest.len() {
        rest.select_nth_unstable_by(extra, by_rank);
        rest.truncate(extra);
    }
    rest.sort_unstable();
    order_preserving_union(spatial, &rest)
}
