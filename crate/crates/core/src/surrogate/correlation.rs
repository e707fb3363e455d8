use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Per feature `k`: Pearson correlation of `v_k` with every class logit,
/// and the class it tracks most closely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureClassCorrelation {
    /// `rho[k][class]`.
    pub rho: Vec<Vec<f64>>,
    pub most_correlated: Vec<usize>,
    /// Features with zero variance (all zeros in `rho`, class 0).
    pub constant: Vec<bool>,
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// `features[i]` and `logits[i]` belong to sample `i`.
pub fn correlate_features(features: &[Vec<f64>], logits: &[Vec<f64>]) -> Result<FeatureClassCorrelation> {
    if features.len() < 2 || features.len() != logits.len() {
        return Err(Error::Insufficient(
            "feature correlation needs at least two paired samples".into(),
        ));
    }
    let width = features[0].len();
    let classes = logits[0].len();
    let columns: Vec<Vec<f64>> = (0..classes)
        .map(|c| logits.iter().map(|l| l[c]).collect())
        .collect();
    let mut out = FeatureClassCorrelation {
        rho: Vec::with_capacity(width),
        most_correlated: Vec::with_capacity(width),
        constant: Vec::with_capacity(width),
    };
    for k in 0..width {
        let col: Vec<f64> = features.iter().map(|v| v[k]).collect();
        let constant = col.iter().all(|&x| x == col[0]);
        let row: Vec<f64> = if constant {
            vec![0.0; classes]
        } else {
            columns.iter().map(|y| pearson(&col, y).unwrap_or(0.0)).collect()
        };
        let mut best = 0;
        for c in 1..classes {
            if row[c] > row[best] {
                best = c;
            }
        }
        out.rho.push(row);
        out.most_correlated.push(best);
        out.constant.push(constant);
    }
    Ok(out)
}
