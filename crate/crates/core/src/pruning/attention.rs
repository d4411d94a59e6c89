//! Semantic token importance from self-attention.
//!
//! Tokens are scored by the attention they receive: the column means of the
//! row-softmaxed `QKᵀ/√d_k` matrix. Row sums of a row-stochastic matrix are
//! all one and carry no ranking information.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Token embeddings and projection matrices for one attention layer.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionInputs {
    /// `N × d` token embeddings.
    pub embeddings: DMatrix<f64>,
    /// `d × d_k` projections.
    pub w_q: DMatrix<f64>,
    pub w_k: DMatrix<f64>,
    pub w_v: DMatrix<f64>,
}

impl AttentionInputs {
    pub fn key_dim(&self) -> usize {
        self.w_k.ncols()
    }

    fn validate(&self) -> Result<()> {
        let d = self.embeddings.ncols();
        let dk = self.w_q.ncols();
        if self.embeddings.nrows() == 0 || d == 0 || dk == 0 {
            return Err(Error::domain("attention inputs must be non-empty"));
        }
        for (name, w) in [("w_q", &self.w_q), ("w_k", &self.w_k), ("w_v", &self.w_v)] {
            if w.nrows() != d || w.ncols() != dk {
                return Err(Error::domain(format!(
                    "{name} is {}x{}, expected {d}x{dk}",
                    w.nrows(),
                    w.ncols()
                )));
            }
        }
        let all = [&self.embeddings, &self.w_q, &self.w_k, &self.w_v];
        if all.iter().any(|m| m.iter().any(|v| !v.is_finite())) {
            return Err(Error::domain("attention inputs contain non-finite values"));
        }
        Ok(())
    }

    /// Attention output `Softmax(QKᵀ/√d_k)·V`.
    pub fn output(&self) -> Result<DMatrix<f64>> {
        let w = attention_weights(self)?;
        Ok(w * (&self.embeddings * &self.w_v))
    }
}

/// Numerically stable softmax over each row.
pub fn softmax_rows(logits: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut out = logits.clone();
    for mut row in out.row_iter_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::domain("non-finite attention logits"));
        }
        row.apply(|v| *v = (*v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
    Ok(out)
}

/// Row-stochastic attention weights `Softmax(QKᵀ/√d_k)`.
pub fn attention_weights(inp: &AttentionInputs) -> Result<DMatrix<f64>> {
    inp.validate()?;
    let q = &inp.embeddings * &inp.w_q;
    let k = &inp.embeddings * &inp.w_k;
    let scale = (inp.key_dim() as f64).sqrt();
    softmax_rows(&((q * k.transpose()) / scale))
}

/// Per-token importance; sums to one for row-stochastic inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceScores(Vec<f64>);

impl ImportanceScores {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::domain("importance scores must be finite and >= 0"));
        }
        Ok(ImportanceScores(scores))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Column means of a square attention matrix: the average attention each
/// token receives.
pub fn accumulate_importance(w: &DMatrix<f64>) -> Result<ImportanceScores> {
    if w.nrows() != w.ncols() || w.is_empty() {
        return Err(Error::domain(format!(
            "attention matrix must be square and non-empty, got {}x{}",
            w.nrows(),
            w.ncols()
        )));
    }
    let n = w.nrows() as f64;
    ImportanceScores::new(w.column_iter().map(|c| c.sum() / n).collect())
}

/// Checks that `w` is square, non-negative and row-stochastic within `tol`.
pub fn check_row_stochastic(w: &DMatrix<f64>, tol: f64) -> Result<()> {
    if w.nrows() != w.ncols() || w.is_empty() {
        return Err(Error::domain(
            "attention matrix must be square and non-empty",
        ));
    }
    for (i, row) in w.row_iter().enumerate() {
        if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::domain(format!(
                "row {i} has negative or non-finite entries"
            )));
        }
        let s = row.sum();
        if (s - 1.0).abs() > tol {
            return Err(Error::domain(format!("row {i} sums to {s}, not 1")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    fn inputs(x: DMatrix<f64>, wq: DMatrix<f64>, wk: DMatrix<f64>) -> AttentionInputs {
        let wv = DMatrix::zeros(wq.nrows(), wq.ncols());
        AttentionInputs {
            embeddings: x,
            w_q: wq,
            w_k: wk,
            w_v: wv,
        }
    }

    #[test]
    fn zero_logits_give_uniform_rows() {
        let inp = inputs(
            DMatrix::zeros(4, 3),
            DMatrix::zeros(3, 2),
            DMatrix::zeros(3, 2),
        );
        let w = attention_weights(&inp).unwrap();
        assert!(w.iter().all(|v| (*v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn saturated_row() {
        let logits = DMatrix::from_row_slice(2, 2, &[800.0, -800.0, -800.0, 800.0]);
        let w = softmax_rows(&logits).unwrap();
        assert!((w[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(w[(0, 1)] < 1e-300);
    }

    #[test]
    fn matches_naive_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random(&mut rng, 3, 4);
        let wq = random(&mut rng, 4, 2);
        let wk = random(&mut rng, 4, 2);
        let w = attention_weights(&inputs(x.clone(), wq.clone(), wk.clone())).unwrap();
        let mut q = [[0.0; 2]; 3];
        let mut k = [[0.0; 2]; 3];
        for i in 0..3 {
            for j in 0..2 {
                for t in 0..4 {
                    q[i][j] += x[(i, t)] * wq[(t, j)];
                    k[i][j] += x[(i, t)] * wk[(t, j)];
                }
            }
        }
        for i in 0..3 {
            let mut e = [0.0; 3];
            for j in 0..3 {
                let dot = q[i][0] * k[j][0] + q[i][1] * k[j][1];
                e[j] = (dot / 2f64.sqrt()).exp();
            }
            let s: f64 = e.iter().sum();
            for j in 0..3 {
                assert!((w[(i, j)] - e[j] / s).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn shape_mismatch_is_error() {
        let inp = inputs(
            DMatrix::zeros(4, 3),
            DMatrix::zeros(2, 2),
            DMatrix::zeros(3, 2),
        );
        assert!(attention_weights(&inp).is_err());
    }

    #[test]
    fn output_has_value_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let inp = AttentionInputs {
            embeddings: random(&mut rng, 5, 3),
            w_q: random(&mut rng, 3, 2),
            w_k: random(&mut rng, 3, 2),
            w_v: random(&mut rng, 3, 2),
        };
        let out = inp.output().unwrap();
        assert_eq!((out.nrows(), out.ncols()), (5, 2));
    }

    #[test]
    fn importance_examples() {
        let uniform = DMatrix::from_element(4, 4, 0.25);
        assert_eq!(
            accumulate_importance(&uniform).unwrap().as_slice(),
            &[0.25; 4]
        );
        let first = DMatrix::from_fn(4, 4, |_, j| if j == 0 { 1.0 } else { 0.0 });
        assert_eq!(
            accumulate_importance(&first).unwrap().as_slice(),
            &[1.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn importance_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let raw = DMatrix::from_fn(3, 3, |_, _| rng.random_range(0.0..1.0));
        let w = DMatrix::from_fn(3, 3, |i, j| raw[(i, j)] / raw.row(i).sum());
        let s = accumulate_importance(&w).unwrap();
        for j in 0..3 {
            let mut col = 0.0;
            for i in 0..3 {
                col += w[(i, j)];
            }
            assert!((s.as_slice()[j] - col / 3.0).abs() < 1e-15);
        }
        assert!((s.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn row_stochastic_check() {
        assert!(check_row_stochastic(&DMatrix::from_element(3, 3, 1.0 / 3.0), 1e-9).is_ok());
        assert!(check_row_stochastic(&DMatrix::from_element(3, 3, 0.5), 1e-9).is_err());
        assert!(check_row_stochastic(&DMatrix::from_element(2, 3, 0.5), 1e-9).is_err());
    }
}
