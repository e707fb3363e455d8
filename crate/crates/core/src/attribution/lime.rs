use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::WordRelevance;
use crate::corpus::TokenSequence;
use crate::textcnn::CnnModel;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimeConfig {
    pub n_samples: usize,
    /// σ of the proximity kernel `exp(-(1 - s)² / σ²)`, `s` = retained fraction.
    pub kernel_width: f64,
    /// L2 penalty of the weighted least-squares surrogate (intercept unpenalized).
    pub ridge: f64,
}

impl Default for LimeConfig {
    fn default() -> Self {
        Self {
            n_samples: 5000,
            kernel_width: 0.25,
            ridge: 1.0,
        }
    }
}

/// Perturbation surrogate. The first sample is the unmasked text; the rest
/// keep each position independently with probability 1/2 (a uniformly random
/// subset). Masked positions are removed from the sequence, the model's
/// probability for `target` is recorded, and a proximity-weighted ridge
/// regression on the binary presence features gives one coefficient per
/// position.
pub fn lime_explain(
    model: &CnnModel,
    tokens: &TokenSequence,
    target: usize,
    config: &LimeConfig,
    seed: u64,
) -> Result<WordRelevance> {
    if config.n_samples < 2 {
        return Err(Error::InvalidInput("LIME needs at least 2 samples".into()));
    }
    if target >= model.num_classes() {
        return Err(Error::InvalidInput(format!("class {target} out of range")));
    }
    let d = tokens.len();
    if d == 0 {
        return Ok(WordRelevance { scores: Vec::new() });
    }
    let proj = model.project(&model.embed(tokens));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = config.n_samples;
    let mut z = DMatrix::<f64>::zeros(n, d);
    let mut y = DVector::<f64>::zeros(n);
    let mut w = DVector::<f64>::zeros(n);
    let mut keep = Vec::with_capacity(d);
    for s in 0..n {
        keep.clear();
        for i in 0..d {
            if s == 0 || rng.random_bool(0.5) {
                keep.push(i);
                z[(s, i)] = 1.0;
            }
        }
        y[s] = model.probs_projected(&proj, &keep)[target];
        let dist = 1.0 - keep.len() as f64 / d as f64;
        w[s] = (-(dist * dist) / (config.kernel_width * config.kernel_width)).exp();
    }
    Ok(WordRelevance {
        scores: weighted_ridge(&z, &y, &w, config.ridge).iter().copied().collect(),
    })
}

/// Coefficients of `min Σ w (y − zβ − c)² + λ‖β‖²`.
fn weighted_ridge(z: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>, lambda: f64) -> DVector<f64> {
    let (n, d) = z.shape();
    let wsum = w.sum();
    let zmean = DVector::from_fn(d, |j, _| (0..n).map(|s| w[s] * z[(s, j)]).sum::<f64>() / wsum);
    let ymean = y.dot(w) / wsum;
    let mut zc = z.clone();
    for s in 0..n {
        let sw = w[s].sqrt();
        for j in 0..d {
            zc[(s, j)] = (zc[(s, j)] - zmean[j]) * sw;
        }
    }
    let yc = DVector::from_fn(n, |s, _| (y[s] - ymean) * w[s].sqrt());
    let mut gram = zc.tr_mul(&zc);
    for j in 0..d {
        gram[(j, j)] += lambda;
    }
    let rhs = zc.tr_mul(&yc);
    gram.cholesky()
        .expect("ridge system is positive definite")
        .solve(&rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ridge_recovers_exact_linear_signal() {
        // y = 1 + 2 z0 − 3 z1 with tiny penalty
        let rows = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]];
        let z = DMatrix::from_fn(5, 2, |r, c| rows[r][c]);
        let y = DVector::from_fn(5, |r, _| 1.0 + 2.0 * rows[r][0] - 3.0 * rows[r][1]);
        let w = DVector::from_element(5, 1.0);
        let b = weighted_ridge(&z, &y, &w, 1e-12);
        assert!((b[0] - 2.0).abs() < 1e-9 && (b[1] + 3.0).abs() < 1e-9);
    }
}
