//! Procedural grayscale observations and synthetic attention inputs.
//!
//! A frame shows the goal marker and the end-effector as filled discs on a
//! flat background, seen from above. Attention inputs are built from patch
//! statistics (mean and standard deviation) plus a seeded position code,
//! then projected with fixed seeded matrices.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::pruning::{AttentionInputs, GrayImage, TokenGrid};

const BACKGROUND: u8 = 40;
const GOAL: u8 = 210;
const ARM: u8 = 150;
const HELD: u8 = 95;

/// Top-down orthographic camera covering a task's workspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub size: usize,
    center: [f64; 2],
    scale: f64,
}

impl Camera {
    /// Frames the segment from `start` to `goal` with a margin.
    pub fn framing(start: [f64; 3], goal: [f64; 3], size: usize) -> Self {
        let span = (goal[0] - start[0])
            .abs()
            .max((goal[1] - start[1]).abs())
            .max(1.0);
        Camera {
            size,
            center: [(start[0] + goal[0]) / 2.0, (start[1] + goal[1]) / 2.0],
            scale: 0.7 * size as f64 / span,
        }
    }

    pub fn project(&self, p: [f64; 3]) -> (f64, f64) {
        let half = self.size as f64 / 2.0;
        (
            half + (p[0] - self.center[0]) * self.scale,
            half - (p[1] - self.center[1]) * self.scale,
        )
    }
}

fn fill_disc(img: &mut GrayImage, cx: f64, cy: f64, r: f64, value: u8) {
    let (w, h) = (img.width() as isize, img.height() as isize);
    let x0 = ((cx - r).floor() as isize).max(0);
    let x1 = ((cx + r).ceil() as isize).min(w - 1);
    let y0 = ((cy - r).floor() as isize).max(0);
    let y1 = ((cy + r).ceil() as isize).min(h - 1);
    for y in y0..=y1 {
        for x in x0..=x1 {
            let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
            if dx * dx + dy * dy <= r * r {
                img.set(x as usize, y as usize, value);
            }
        }
    }
}

/// Renders the goal marker and the end-effector. A closed gripper shows a
/// darker core (the held object).
pub fn render_scene(cam: &Camera, ee_pos: [f64; 3], gripper: u8, goal: [f64; 3]) -> GrayImage {
    let s = cam.size as f64;
    let mut img =
        GrayImage::filled(cam.size, cam.size, BACKGROUND).expect("camera size is positive");
    let (gx, gy) = cam.project(goal);
    fill_disc(&mut img, gx, gy, s / 14.0, GOAL);
    let (ax, ay) = cam.project(ee_pos);
    // Height changes the apparent size a little.
    let lift = ((ee_pos[2] - goal[2]) * 0.01).clamp(-0.3, 0.3);
    let r = s / 16.0 * (1.0 + lift);
    fill_disc(&mut img, ax, ay, r, ARM);
    if gripper == 1 {
        fill_disc(&mut img, ax, ay, r * 0.45, HELD);
    }
    img
}

/// Fixed projections for attention over patch features.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticAttention {
    position_code: DMatrix<f64>,
    w_q: DMatrix<f64>,
    w_k: DMatrix<f64>,
    w_v: DMatrix<f64>,
}

const POSITION_DIMS: usize = 6;
const KEY_DIMS: usize = 8;

impl SyntheticAttention {
    pub fn new(grid: &TokenGrid, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 2 + POSITION_DIMS;
        let mut uniform = |r: usize, c: usize, scale: f64| {
            DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0) * scale)
        };
        let position_code = uniform(grid.len(), POSITION_DIMS, 0.5);
        let w_q = uniform(d, KEY_DIMS, 1.5);
        let w_k = uniform(d, KEY_DIMS, 1.5);
        let w_v = uniform(d, KEY_DIMS, 1.0);
        SyntheticAttention {
            position_code,
            w_q,
            w_k,
            w_v,
        }
    }

    /// Embeds every patch of `img` and pairs the embeddings with the fixed
    /// projections.
    pub fn inputs(&self, img: &GrayImage, grid: &TokenGrid) -> AttentionInputs {
        let n = grid.len();
        let mut emb = DMatrix::zeros(n, 2 + POSITION_DIMS);
        let p = grid.patch_size;
        for (i, row, col) in grid.tokens() {
            let (mut sum, mut sq) = (0.0, 0.0);
            for y in row * p..(row + 1) * p {
                for x in col * p..(col + 1) * p {
                    let v = img.get(x, y) as f64;
                    sum += v;
                    sq += v * v;
                }
            }
            let count = (p * p) as f64;
            let mean = sum / count;
            let var = (sq / count - mean * mean).max(0.0);
            emb[(i, 0)] = mean / 255.0;
            emb[(i, 1)] = var.sqrt() / 64.0;
            for j in 0..POSITION_DIMS {
                emb[(i, 2 + j)] = self.position_code[(i, j)];
            }
        }
        AttentionInputs {
            embeddings: emb,
            w_q: self.w_q.clone(),
            w_k: self.w_k.clone(),
            w_v: self.w_v.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pruning::{accumulate_importance, attention_weights};

    #[test]
    fn render_is_deterministic_and_shows_both_discs() {
        let cam = Camera::framing([0.0; 3], [8.0, -6.0, 0.0], 224);
        let img = render_scene(&cam, [0.0; 3], 1, [8.0, -6.0, 0.0]);
        assert_eq!(img, render_scene(&cam, [0.0; 3], 1, [8.0, -6.0, 0.0]));
        let px = img.pixels();
        for v in [BACKGROUND, GOAL, ARM, HELD] {
            assert!(px.contains(&v), "missing {v}");
        }
    }

    #[test]
    fn attention_scores_sum_to_one() {
        let grid = TokenGrid::for_image(224, 224, 16).unwrap();
        let att = SyntheticAttention::new(&grid, 7);
        let cam = Camera::framing([0.0; 3], [8.0, 6.0, 0.0], 224);
        let img = render_scene(&cam, [2.0, 1.0, 0.0], 0, [8.0, 6.0, 0.0]);
        let w = attention_weights(&att.inputs(&img, &grid)).unwrap();
        let s = accumulate_importance(&w).unwrap();
        assert_eq!(s.len(), 196);
        assert!((s.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
