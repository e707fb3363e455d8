use super::WordRelevance;
use crate::corpus::{EmbeddedMatrix, TokenSequence};
use crate::textcnn::{CnnModel, Dense};

fn stabilize(z: f64, epsilon: f64) -> f64 {
    z + if z >= 0.0 { epsilon } else { -epsilon }
}

/// ε-rule for one affine layer: `R_i = Σ_o a_i w_oi / (z_o ± ε) · R_o`, where
/// `z_o` includes the bias.
pub fn lrp_dense(layer: &Dense, input: &[f64], pre: &[f64], relevance_out: &[f64], epsilon: f64) -> Vec<f64> {
    let mut r = vec![0.0; layer.inputs];
    for o in 0..layer.outputs {
        if relevance_out[o] == 0.0 {
            continue;
        }
        let scale = relevance_out[o] / stabilize(pre[o], epsilon);
        for (ri, (&a, &w)) in r.iter_mut().zip(input.iter().zip(layer.row(o))) {
            *ri += a * w * scale;
        }
    }
    r
}

/// Relevance of every embedding entry for the pre-softmax output `target`.
/// Hidden ReLUs pass relevance through unchanged, max-pooling hands each
/// filter's relevance entirely to its pooled span, and each filter
/// redistributes onto the embedding rows of that span with the ε-rule.
/// Returns `padded_len × dim` relevances.
pub fn lrp_input(model: &CnnModel, x: &EmbeddedMatrix, target: usize, epsilon: f64) -> EmbeddedMatrix {
    let mut x = x.clone();
    x.pad_to(model.filters.max_size());
    let (fv, _) = model.features(&x);
    let trace = model.head.trace(&fv.values);
    let mut r = vec![0.0; model.num_classes()];
    r[target] = trace.logits()[target];
    for l in (0..model.head.layers.len()).rev() {
        r = lrp_dense(
            &model.head.layers[l],
            &trace.activations[l],
            &trace.pre_activations[l],
            &r,
            epsilon,
        );
    }
    let mut out = EmbeddedMatrix::zeros(x.rows, x.dim);
    for (k, f) in model.filters.filters.iter().enumerate() {
        if r[k] == 0.0 {
            continue;
        }
        let span = fv.spans[k];
        let scale = r[k] / stabilize(fv.pre_activations[k], epsilon);
        let window = x.window(span.start, f.size);
        let dst = &mut out.data[span.start * x.dim..(span.start + f.size) * x.dim];
        for ((d, &xv), &w) in dst.iter_mut().zip(window).zip(&f.weights) {
            *d += xv * w * scale;
        }
    }
    out
}

/// ε-LRP relevance per token (summed over embedding dimensions).
pub fn lrp_words(model: &CnnModel, tokens: &TokenSequence, target: usize, epsilon: f64) -> WordRelevance {
    let rel = lrp_input(model, &model.embed(tokens), target, epsilon);
    WordRelevance::from_rows(&rel, tokens.len())
}
