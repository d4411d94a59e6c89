//! Canny edge detection.
//!
//! Smoothing and differentiation run in integer arithmetic: the Gaussian is
//! quantized to integer taps and the Sobel responses of the (unnormalized)
//! smoothed image are exact. Edge masks are therefore bit-reproducible and
//! invariant to a constant intensity offset. Thresholds are fractions of
//! the largest gradient magnitude in the image.

use std::collections::VecDeque;

use super::image::GrayImage;
use crate::config::CannyParams;
use crate::error::{Error, Result};

/// Gradient direction quantized to four orientations (degrees, image
/// coordinates with y pointing down).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

impl Direction {
    fn from_components(gx: i64, gy: i64) -> Self {
        let mut deg = (gy as f64).atan2(gx as f64).to_degrees();
        if deg < 0.0 {
            deg += 180.0;
        }
        if !(22.5..157.5).contains(&deg) {
            Direction::Deg0
        } else if deg < 67.5 {
            Direction::Deg45
        } else if deg < 112.5 {
            Direction::Deg90
        } else {
            Direction::Deg135
        }
    }

    /// Pixel offset pointing along the gradient.
    fn step(self) -> (isize, isize) {
        match self {
            Direction::Deg0 => (1, 0),
            Direction::Deg45 => (1, 1),
            Direction::Deg90 => (0, 1),
            Direction::Deg135 => (-1, 1),
        }
    }
}

/// Sobel responses of an image.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub width: usize,
    pub height: usize,
    pub gx: Vec<i64>,
    pub gy: Vec<i64>,
    pub magnitude: Vec<f64>,
    pub direction: Vec<Direction>,
}

/// Binary edge mask, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMask {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl EdgeMask {
    pub fn empty(width: usize, height: usize) -> Self {
        EdgeMask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Edge pixels as 255, background as 0.
    pub fn to_image(&self) -> GrayImage {
        let px = self.bits.iter().map(|b| if *b { 255 } else { 0 }).collect();
        GrayImage::new(self.width, self.height, px).expect("mask dimensions are valid")
    }
}

/// Integer Gaussian taps, scaled so that they sum to roughly 1024.
pub fn gaussian_taps(sigma: f64, size: usize) -> Vec<i64> {
    let half = (size / 2) as isize;
    let raw: Vec<f64> = (-half..=half)
        .map(|x| (-((x * x) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.iter()
        .map(|w| ((1024.0 * w / total).round() as i64).max(1))
        .collect()
}

fn clamp_index(i: isize, len: usize) -> usize {
    i.clamp(0, len as isize - 1) as usize
}

/// Separable convolution with edge replication. Output is unnormalized.
fn blur(plane: &[i64], width: usize, height: usize, taps: &[i64]) -> Vec<i64> {
    let half = (taps.len() / 2) as isize;
    let mut tmp = vec![0i64; plane.len()];
    for y in 0..height {
        let row = &plane[y * width..(y + 1) * width];
        for x in 0..width {
            tmp[y * width + x] = taps
                .iter()
                .enumerate()
                .map(|(k, w)| w * row[clamp_index(x as isize + k as isize - half, width)])
                .sum();
        }
    }
    let mut out = vec![0i64; plane.len()];
    for y in 0..height {
        for x in 0..width {
            out[y * width + x] = taps
                .iter()
                .enumerate()
                .map(|(k, w)| {
                    w * tmp[clamp_index(y as isize + k as isize - half, height) * width + x]
                })
                .sum();
        }
    }
    out
}

fn sobel_plane(plane: &[i64], width: usize, height: usize) -> Gradients {
    let at = |x: isize, y: isize| plane[clamp_index(y, height) * width + clamp_index(x, width)];
    let n = width * height;
    let mut gx = Vec::with_capacity(n);
    let mut gy = Vec::with_capacity(n);
    for y in 0..height as isize {
        for x in 0..width as isize {
            let h = (at(x + 1, y - 1) + 2 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2 * at(x - 1, y) + at(x - 1, y + 1));
            let v = (at(x - 1, y + 1) + 2 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2 * at(x, y - 1) + at(x + 1, y - 1));
            gx.push(h);
            gy.push(v);
        }
    }
    let magnitude = gx
        .iter()
        .zip(&gy)
        .map(|(&h, &v)| ((h * h + v * v) as f64).sqrt())
        .collect();
    let direction = gx
        .iter()
        .zip(&gy)
        .map(|(&h, &v)| Direction::from_components(h, v))
        .collect();
    Gradients {
        width,
        height,
        gx,
        gy,
        magnitude,
        direction,
    }
}

/// 3×3 Sobel gradients of the raw image, borders replicated.
pub fn sobel_gradients(img: &GrayImage) -> Result<Gradients> {
    if img.width() < 3 || img.height() < 3 {
        return Err(Error::domain(format!(
            "sobel needs at least 3x3 pixels, got {}x{}",
            img.width(),
            img.height()
        )));
    }
    let plane: Vec<i64> = img.pixels().iter().map(|&p| p as i64).collect();
    Ok(sobel_plane(&plane, img.width(), img.height()))
}

/// Thins edges to one pixel: a pixel survives when its magnitude is at
/// least that of its neighbour against the gradient and strictly greater
/// than its neighbour along it. Out-of-image neighbours count as zero.
pub fn non_max_suppression(g: &Gradients) -> Vec<f64> {
    let (w, h) = (g.width as isize, g.height as isize);
    let mag = |x: isize, y: isize| {
        if x < 0 || y < 0 || x >= w || y >= h {
            0.0
        } else {
            g.magnitude[(y * w + x) as usize]
        }
    };
    let mut out = vec![0.0; g.magnitude.len()];
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            let m = g.magnitude[i];
            if m == 0.0 {
                continue;
            }
            let (dx, dy) = g.direction[i].step();
            if m >= mag(x - dx, y - dy) && m > mag(x + dx, y + dy) {
                out[i] = m;
            }
        }
    }
    out
}

/// Double threshold plus hysteresis: pixels at or above `high` are edges,
/// pixels at or above `low` are edges when 8-connected to an edge through
/// other such pixels.
pub fn hysteresis(
    magnitude: &[f64],
    width: usize,
    height: usize,
    low: f64,
    high: f64,
) -> Vec<bool> {
    let mut keep = vec![false; magnitude.len()];
    let mut queue: VecDeque<usize> = magnitude
        .iter()
        .enumerate()
        .filter(|(_, m)| **m > 0.0 && **m >= high)
        .map(|(i, _)| i)
        .collect();
    for &i in &queue {
        keep[i] = true;
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % width) as isize, (i / width) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= width as isize || ny >= height as isize {
                    continue;
                }
                let j = ny as usize * width + nx as usize;
                if !keep[j] && magnitude[j] > 0.0 && magnitude[j] >= low {
                    keep[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    keep
}

/// Full Canny pipeline: blur, Sobel, non-maximum suppression, double
/// threshold relative to the largest magnitude, hysteresis.
pub fn canny_edges(img: &GrayImage, p: &CannyParams) -> Result<EdgeMask> {
    p.validate().map_err(|e| Error::domain(e.to_string()))?;
    let (w, h) = (img.width(), img.height());
    if w < p.kernel_size || h < p.kernel_size {
        return Err(Error::domain(format!(
            "image {w}x{h} is smaller than the {0}x{0} smoothing kernel",
            p.kernel_size
        )));
    }
    let plane: Vec<i64> = img.pixels().iter().map(|&v| v as i64).collect();
    let smoothed = blur(
        &plane,
        w,
        h,
        &gaussian_taps(p.gaussian_sigma, p.kernel_size),
    );
    let grad = sobel_plane(&smoothed, w, h);
    let max_mag = grad.magnitude.iter().cloned().fold(0.0, f64::max);
    if max_mag == 0.0 {
        return Ok(EdgeMask::empty(w, h));
    }
    let thin = non_max_suppression(&grad);
    let bits = hysteresis(&thin, w, h, p.low_ratio * max_mag, p.high_ratio * max_mag);
    Ok(EdgeMask {
        width: w,
        height: h,
        bits,
    })
}
