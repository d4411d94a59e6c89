//! Lightweight action generator: a ridge regression of velocity on time,
//! refit from scratch on the action buffer at every call.
//!
//! With buffered actions relabelled at timesteps `0..n-1`, the design
//! matrix is `X = [T, 1]` and the fit is
//! `beta = (XᵀX + λI)⁻¹ XᵀY` with `Y` the `n × 6` matrix of continuous
//! channels. The intercept is penalized along with the slope. The next
//! action is `[n, 1] · beta`; the gripper is copied from the previous step.

use nalgebra::{DMatrix, Matrix2};

use crate::action::{Action, ActionBuffer, Source};
use crate::config::GeneratorConfig;
use crate::error::{Error, Result};

/// Number of regressed channels (three translational, three rotational).
pub const CHANNELS: usize = 6;

/// Fitted time-to-velocity model, one slope and intercept per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    pub slope: [f64; CHANNELS],
    pub intercept: [f64; CHANNELS],
    pub lambda: f64,
    /// Number of points in the fit.
    pub n: usize,
}

impl RidgeModel {
    /// Fits rows observed at timesteps `t0, t0 + 1, …`.
    pub fn fit_from(t0: f64, rows: &[[f64; CHANNELS]], lambda: f64) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::domain(format!(
                "ridge fit needs >= 2 points, got {n}"
            )));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::domain(format!(
                "lambda must be finite and >= 0, got {lambda}"
            )));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::domain("buffer contains non-finite values"));
        }

        let x = DMatrix::from_fn(n, 2, |i, j| if j == 0 { t0 + i as f64 } else { 1.0 });
        let y = DMatrix::from_fn(n, CHANNELS, |i, j| rows[i][j]);
        let xt = x.transpose();
        let gram = &xt * &x;
        let normal = Matrix2::new(
            gram[(0, 0)] + lambda,
            gram[(0, 1)],
            gram[(1, 0)],
            gram[(1, 1)] + lambda,
        );
        let inv = normal
            .try_inverse()
            .ok_or_else(|| Error::domain("singular normal matrix"))?;
        let xty = &xt * &y;

        let mut slope = [0.0; CHANNELS];
        let mut intercept = [0.0; CHANNELS];
        for c in 0..CHANNELS {
            slope[c] = inv[(0, 0)] * xty[(0, c)] + inv[(0, 1)] * xty[(1, c)];
            intercept[c] = inv[(1, 0)] * xty[(0, c)] + inv[(1, 1)] * xty[(1, c)];
        }
        if slope.iter().chain(&intercept).any(|v| !v.is_finite()) {
            return Err(Error::domain("ridge fit produced non-finite parameters"));
        }
        Ok(RidgeModel {
            slope,
            intercept,
            lambda,
            n,
        })
    }

    /// Fits rows observed at timesteps `0..n-1`.
    pub fn fit(rows: &[[f64; CHANNELS]], lambda: f64) -> Result<Self> {
        Self::fit_from(0.0, rows, lambda)
    }

    /// Evaluates `[t, 1] · beta` for every channel.
    pub fn predict(&self, t: f64) -> [f64; CHANNELS] {
        std::array::from_fn(|c| t * self.slope[c] + self.intercept[c])
    }

    /// Squared Frobenius norm of the parameter matrix.
    pub fn norm_sq(&self) -> f64 {
        self.slope
            .iter()
            .chain(&self.intercept)
            .map(|v| v * v)
            .sum()
    }
}

/// Fits the buffer contents, oldest entry at `t = 0`.
pub fn fit_ridge(buf: &ActionBuffer, lambda: f64) -> Result<RidgeModel> {
    let rows: Vec<[f64; CHANNELS]> = buf.iter().map(Action::continuous).collect();
    RidgeModel::fit(&rows, lambda)
}

pub fn predict_next(model: &RidgeModel, t: usize) -> [f64; CHANNELS] {
    model.predict(t as f64)
}

/// Why a generated action was refused.
#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    NonFinite {
        channel: usize,
    },
    /// A translational component exceeds the physical velocity cap.
    SpeedCap {
        channel: usize,
        value: f64,
    },
    /// The prediction strays too far from the buffered values.
    Deviation {
        channel: usize,
        deviation: f64,
        gate: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum LwmOutcome {
    Accepted(Action),
    Rejected(Rejection),
}

/// Runs the validity gate on a predicted channel vector.
///
/// `mean` and `std` are the per-channel sample statistics of the buffer the
/// prediction was fitted on.
pub fn check_prediction(
    pred: &[f64; CHANNELS],
    mean: &[f64; CHANNELS],
    std: &[f64; CHANNELS],
    cfg: &GeneratorConfig,
    v_max_env: f64,
) -> Option<Rejection> {
    if let Some(channel) = pred.iter().position(|v| !v.is_finite()) {
        return Some(Rejection::NonFinite { channel });
    }
    if let Some(channel) = pred[..3].iter().position(|v| v.abs() > v_max_env) {
        return Some(Rejection::SpeedCap {
            channel,
            value: pred[channel],
        });
    }
    for channel in 0..CHANNELS {
        let gate = cfg.gate_k * std[channel].max(cfg.gate_sigma_floor);
        let deviation = (pred[channel] - mean[channel]).abs();
        if deviation > gate {
            return Some(Rejection::Deviation {
                channel,
                deviation,
                gate,
            });
        }
    }
    None
}

/// Per-channel mean and sample standard deviation of the buffer.
pub fn buffer_stats(buf: &ActionBuffer) -> ([f64; CHANNELS], [f64; CHANNELS]) {
    let n = buf.len() as f64;
    let mut mean = [0.0; CHANNELS];
    for a in buf.iter() {
        for (m, v) in mean.iter_mut().zip(a.continuous()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = [0.0; CHANNELS];
    for a in buf.iter() {
        for ((s, v), m) in var.iter_mut().zip(a.continuous()).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let denom = (n - 1.0).max(1.0);
    (mean, var.map(|s| (s / denom).sqrt()))
}

/// Produces the next action from a full buffer, or a rejection telling the
/// caller to fall back to the expensive policy.
pub fn generate_action(
    buf: &ActionBuffer,
    cfg: &GeneratorConfig,
    prev: &Action,
    v_max_env: f64,
) -> Result<LwmOutcome> {
    if !buf.is_full() {
        return Err(Error::domain(format!(
            "generator needs a full buffer ({} of {})",
            buf.len(),
            buf.capacity()
        )));
    }
    let model = fit_ridge(buf, cfg.lambda)?;
    let pred = predict_next(&model, buf.len());
    let (mean, std) = buffer_stats(buf);
    if let Some(r) = check_prediction(&pred, &mean, &std, cfg, v_max_env) {
        return Ok(LwmOutcome::Rejected(r));
    }
    Ok(LwmOutcome::Accepted(Action::from_continuous(
        pred,
        prev.gripper,
        Source::Lwm,
    )))
}
