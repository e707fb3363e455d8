use serde::{Deserialize, Serialize};

use super::select::Candidate;
use crate::textcnn::{CnnModel, Prediction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectMode {
    Evidence,
    Counter,
}

/// Per-filter effects and their aggregation onto token positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterEffect {
    pub filter: Vec<f64>,
    /// One entry per convolved row (`prediction.padded_len`).
    pub word: Vec<f64>,
}

/// `E_k = |max(∂logit_j/∂v_k, 0)| · v_k` (evidence) or `|min(…, 0)| · v_k`
/// (counter), and `E_w = Σ_k E_k · 1[w ∈ N_k]`.
pub fn gradcam_text(model: &CnnModel, prediction: &Prediction, target: usize, mode: EffectMode) -> FilterEffect {
    let v = &prediction.feature.values;
    let grad = model.head_gradient(v, target);
    let filter: Vec<f64> = grad
        .iter()
        .zip(v)
        .map(|(&g, &vk)| {
            let clipped = match mode {
                EffectMode::Evidence => g.max(0.0),
                EffectMode::Counter => g.min(0.0),
            };
            clipped.abs() * vk
        })
        .collect();
    let word = word_effects(&filter, prediction);
    FilterEffect { filter, word }
}

pub(crate) fn word_effects(filter: &[f64], prediction: &Prediction) -> Vec<f64> {
    let mut word = vec![0.0; prediction.padded_len];
    for (e, span) in filter.iter().zip(&prediction.feature.spans) {
        for w in &mut word[span.start..span.start + span.len] {
            *w += e;
        }
    }
    word
}

/// Distinct pooled spans of fired filters (`v_k > 0`), scored by the summed
/// word effects they cover. Spans are clipped to the real tokens.
pub fn fired_span_candidates(prediction: &Prediction, effect: &FilterEffect, n_tokens: usize) -> Vec<Candidate> {
    let mut out: Vec<Candidate> = Vec::new();
    for (k, span) in prediction.feature.spans.iter().enumerate() {
        if prediction.feature.values[k] <= 0.0 || span.start >= n_tokens {
            continue;
        }
        let len = span.len.min(n_tokens - span.start);
        if out.iter().any(|c| c.start == span.start && c.len == len) {
            continue;
        }
        let score = effect.word[span.start..span.start + len].iter().sum();
        out.push(Candidate {
            start: span.start,
            len,
            score,
            fired: true,
        });
    }
    out
}
