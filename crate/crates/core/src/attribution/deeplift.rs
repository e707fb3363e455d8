use super::WordRelevance;
use crate::corpus::{EmbeddedMatrix, TokenSequence};
use crate::textcnn::{relu, CnnModel};

/// Secant slope of ReLU between reference and actual pre-activations.
fn rescale(pre: f64, pre_ref: f64) -> f64 {
    let dz = pre - pre_ref;
    if dz == 0.0 {
        0.0
    } else {
        (relu(pre) - relu(pre_ref)) / dz
    }
}

/// Rescale-rule contributions of every embedding entry to
/// `logit_target(x) − logit_target(reference)`, with the all-zero embedding
/// as reference. The reference conv map equals `ReLU(b_k)` at every
/// position, so each filter's pooled difference is routed to its pooled span.
/// Returns `padded_len × dim` contributions.
pub fn deeplift_input(model: &CnnModel, x: &EmbeddedMatrix, target: usize) -> EmbeddedMatrix {
    let mut x = x.clone();
    x.pad_to(model.filters.max_size());
    let (fv, _) = model.features(&x);
    let biases: Vec<f64> = model.filters.filters.iter().map(|f| f.bias).collect();
    let v_ref: Vec<f64> = biases.iter().map(|&b| relu(b)).collect();
    let trace = model.head.trace(&fv.values);
    let trace_ref = model.head.trace(&v_ref);

    let n_layers = model.head.layers.len();
    let mut mult = vec![0.0; model.num_classes()];
    mult[target] = 1.0;
    for l in (0..n_layers).rev() {
        mult = model.head.layers[l].back(&mult);
        if l > 0 {
            let (z, z0) = (&trace.pre_activations[l - 1], &trace_ref.pre_activations[l - 1]);
            for (i, m) in mult.iter_mut().enumerate() {
                *m *= rescale(z[i], z0[i]);
            }
        }
    }
    let mut out = EmbeddedMatrix::zeros(x.rows, x.dim);
    for (k, f) in model.filters.filters.iter().enumerate() {
        let m = mult[k] * rescale(fv.pre_activations[k], biases[k]);
        if m == 0.0 {
            continue;
        }
        let start = fv.spans[k].start;
        let window = x.window(start, f.size);
        let dst = &mut out.data[start * x.dim..(start + f.size) * x.dim];
        for ((d, &xv), &w) in dst.iter_mut().zip(window).zip(&f.weights) {
            *d += m * w * xv;
        }
    }
    out
}

/// DeepLIFT score per token (summed over embedding dimensions).
pub fn deeplift_words(model: &CnnModel, tokens: &TokenSequence, target: usize) -> WordRelevance {
    let c = deeplift_input(model, &model.embed(tokens), target);
    WordRelevance::from_rows(&c, tokens.len())
}

/// `logit_target` of the all-zero reference of the same length.
pub fn reference_logit(model: &CnnModel, rows: usize, target: usize) -> f64 {
    model
        .forward_embedded(&EmbeddedMatrix::zeros(rows, model.embedding.dimension()))
        .logits[target]
}
