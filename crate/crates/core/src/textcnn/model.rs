use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{embed, EmbeddedMatrix, EmbeddingTable, TokenSequence};
use crate::{Error, Result};

/// Architecture hyperparameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnnConfig {
    pub filter_sizes: Vec<usize>,
    pub filters_per_size: usize,
    /// Widths of the hidden ReLU layers of the dense head.
    pub hidden: Vec<usize>,
    pub classes: Vec<String>,
}

impl CnnConfig {
    /// Filter sizes [2, 3, 4] with 50 filters each and one 150-unit hidden layer.
    pub fn standard(classes: &[&str]) -> Self {
        Self {
            filter_sizes: vec![2, 3, 4],
            filters_per_size: 50,
            hidden: vec![150],
            classes: classes.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn num_filters(&self) -> usize {
        self.filter_sizes.len() * self.filters_per_size
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Filter {
    pub size: usize,
    /// Row-major `size × dim` kernel.
    pub weights: Vec<f64>,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterBank {
    pub dim: usize,
    pub filters: Vec<Filter>,
}

impl FilterBank {
    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    pub fn max_size(&self) -> usize {
        self.filters.iter().map(|f| f.size).max().unwrap_or(1)
    }

    /// Distinct filter sizes, ascending.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.filters.iter().map(|f| f.size).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Pre-activation `filter_k · X[start..start+n) + b_k`.
    pub fn pre_activation(&self, k: usize, x: &EmbeddedMatrix, start: usize) -> f64 {
        let f = &self.filters[k];
        dot(&f.weights, x.window(start, f.size)) + f.bias
    }
}

/// Affine layer, row-major `outputs × inputs` weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    pub fn row(&self, o: usize) -> &[f64] {
        &self.weights[o * self.inputs..(o + 1) * self.inputs]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| dot(self.row(o), x) + self.bias[o])
            .collect()
    }

    /// `Wᵀ g`.
    pub fn back(&self, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.inputs];
        for (o, &go) in g.iter().enumerate() {
            if go != 0.0 {
                for (acc, &w) in out.iter_mut().zip(self.row(o)) {
                    *acc += go * w;
                }
            }
        }
        out
    }
}

/// Stack of affine layers with ReLU between them; the last layer emits logits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseHead {
    pub layers: Vec<Dense>,
}

/// Pre-activations and activations of every head layer for one input.
#[derive(Debug, Clone)]
pub struct HeadTrace {
    /// `activations[0]` is the input; `activations[l + 1]` the output of layer `l`
    /// (after ReLU for hidden layers, raw logits for the last).
    pub activations: Vec<Vec<f64>>,
    pub pre_activations: Vec<Vec<f64>>,
}

impl HeadTrace {
    pub fn logits(&self) -> &[f64] {
        self.activations.last().expect("head has layers")
    }
}

impl DenseHead {
    pub fn input_width(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs)
    }

    pub fn trace(&self, v: &[f64]) -> HeadTrace {
        let mut activations = vec![v.to_vec()];
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let z = layer.apply(activations.last().unwrap());
            let a = if l == last {
                z.clone()
            } else {
                z.iter().map(|&x| relu(x)).collect()
            };
            pre_activations.push(z);
            activations.push(a);
        }
        HeadTrace {
            activations,
            pre_activations,
        }
    }

    pub fn logits(&self, v: &[f64]) -> Vec<f64> {
        let mut x = v.to_vec();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            x = layer.apply(&x);
            if l != last {
                x.iter_mut().for_each(|a| *a = relu(*a));
            }
        }
        x
    }

    /// Backpropagates an output-side gradient to the input of the head,
    /// using subgradient 0 at exactly-zero hidden pre-activations.
    pub fn backprop(&self, trace: &HeadTrace, grad_logits: &[f64]) -> Vec<f64> {
        let mut g = grad_logits.to_vec();
        for l in (0..self.layers.len()).rev() {
            if l + 1 < self.layers.len() {
                for (gi, &z) in g.iter_mut().zip(&trace.pre_activations[l]) {
                    if z <= 0.0 {
                        *gi = 0.0;
                    }
                }
            }
            g = self.layers[l].back(&g);
        }
        g
    }

    /// Exact gradient of logit `j` with respect to the head input `v`.
    pub fn gradient(&self, v: &[f64], j: usize) -> Vec<f64> {
        let trace = self.trace(v);
        let mut onehot = vec![0.0; self.output_width()];
        onehot[j] = 1.0;
        self.backprop(&trace, &onehot)
    }
}

/// Position and length of the n-gram where a filter attained its max.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FilterSpan {
    pub start: usize,
    pub len: usize,
}

impl FilterSpan {
    pub fn contains(&self, pos: usize) -> bool {
        pos >= self.start && pos < self.start + self.len
    }

    pub fn overlaps(&self, other: &FilterSpan) -> bool {
        self.start < other.start + other.len && other.start < self.start + self.len
    }
}

/// Max-pooled filter outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub spans: Vec<FilterSpan>,
    /// Filter pre-activation at the pooled span (before ReLU).
    pub pre_activations: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub probs: Vec<f64>,
    pub logits: Vec<f64>,
    pub predicted_class: usize,
    pub feature: FeatureVector,
    /// Rows fed to the convolution (token count, or the largest filter size
    /// when the text is shorter).
    pub padded_len: usize,
}

impl Prediction {
    pub fn confidence(&self) -> f64 {
        self.probs[self.predicted_class]
    }
}

/// Dot products of every embedded row with every kernel row.
#[derive(Debug, Clone)]
pub struct RowProjection {
    rows: usize,
    filters: usize,
    max_size: usize,
    data: Vec<f64>,
}

impl RowProjection {
    pub fn rows(&self) -> usize {
        self.rows
    }
}

#[derive(Debug, Clone)]
pub struct CnnModel {
    pub embedding: Arc<EmbeddingTable>,
    pub filters: FilterBank,
    pub head: DenseHead,
    pub classes: Vec<String>,
}

impl CnnModel {
    /// Glorot-uniform weights, zero biases.
    pub fn new(embedding: Arc<EmbeddingTable>, config: &CnnConfig, rng: &mut impl Rng) -> Self {
        let dim = embedding.dimension();
        let mut filters = Vec::new();
        for &size in &config.filter_sizes {
            let limit = (6.0 / ((size * dim + size * config.filters_per_size) as f64)).sqrt();
            for _ in 0..config.filters_per_size {
                filters.push(Filter {
                    size,
                    weights: (0..size * dim).map(|_| rng.random_range(-limit..limit)).collect(),
                    bias: 0.0,
                });
            }
        }
        let mut widths = vec![config.num_filters()];
        widths.extend(&config.hidden);
        widths.push(config.classes.len());
        let layers = widths
            .windows(2)
            .map(|w| {
                let limit = (6.0 / ((w[0] + w[1]) as f64)).sqrt();
                Dense {
                    inputs: w[0],
                    outputs: w[1],
                    weights: (0..w[0] * w[1]).map(|_| rng.random_range(-limit..limit)).collect(),
                    bias: vec![0.0; w[1]],
                }
            })
            .collect();
        Self {
            embedding,
            filters: FilterBank { dim, filters },
            head: DenseHead { layers },
            classes: config.classes.clone(),
        }
    }

    /// Checks that filter, head and class widths line up.
    pub fn validate(&self) -> Result<()> {
        let k = self.filters.len();
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.filters.dim != self.embedding.dimension() {
            return bad("filter width differs from embedding dimension".into());
        }
        if let Some(f) = self
            .filters
            .filters
            .iter()
            .find(|f| f.weights.len() != f.size * self.filters.dim)
        {
            return bad(format!("filter of size {} has {} weights", f.size, f.weights.len()));
        }
        if self.head.layers.is_empty() || self.head.input_width() != k {
            return bad(format!("head input width must equal filter count {k}"));
        }
        for w in self.head.layers.windows(2) {
            if w[0].outputs != w[1].inputs {
                return bad("head layer widths do not chain".into());
            }
        }
        for l in &self.head.layers {
            if l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return bad("dense layer array sizes inconsistent".into());
            }
        }
        if self.head.output_width() != self.classes.len() {
            return bad("head output width must equal class count".into());
        }
        Ok(())
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn config(&self) -> CnnConfig {
        let sizes = self.filters.sizes();
        CnnConfig {
            filters_per_size: self.filters.len() / sizes.len().max(1),
            filter_sizes: sizes,
            hidden: self.head.layers[..self.head.layers.len() - 1]
                .iter()
                .map(|l| l.outputs)
                .collect(),
            classes: self.classes.clone(),
        }
    }

    pub fn embed(&self, tokens: &TokenSequence) -> EmbeddedMatrix {
        embed(tokens, &self.embedding)
    }

    pub fn forward(&self, tokens: &TokenSequence) -> Prediction {
        self.forward_embedded(&self.embed(tokens))
    }

    /// Conv + max-over-time pooling; the input is zero-padded up to the
    /// largest filter size.
    pub fn features(&self, x: &EmbeddedMatrix) -> (FeatureVector, usize) {
        let mut x = std::borrow::Cow::Borrowed(x);
        let max = self.filters.max_size();
        if x.rows < max {
            x.to_mut().pad_to(max);
        }
        let rows = x.rows;
        let k = self.filters.len();
        let mut values = Vec::with_capacity(k);
        let mut spans = Vec::with_capacity(k);
        let mut pres = Vec::with_capacity(k);
        for (idx, f) in self.filters.filters.iter().enumerate() {
            let mut best = (f64::NEG_INFINITY, 0usize, 0.0);
            for t in 0..=rows - f.size {
                let z = self.filters.pre_activation(idx, &x, t);
                let a = relu(z);
                // strict > keeps the smallest start on ties
                if a > best.0 {
                    best = (a, t, z);
                }
            }
            values.push(best.0);
            spans.push(FilterSpan {
                start: best.1,
                len: f.size,
            });
            pres.push(best.2);
        }
        (
            FeatureVector {
                values,
                spans,
                pre_activations: pres,
            },
            rows,
        )
    }

    pub fn forward_embedded(&self, x: &EmbeddedMatrix) -> Prediction {
        let (feature, padded_len) = self.features(x);
        let logits = self.head.logits(&feature.values);
        let probs = softmax(&logits);
        Prediction {
            predicted_class: argmax(&logits),
            probs,
            logits,
            feature,
            padded_len,
        }
    }

    /// Per-row filter projections of `x`, for fast re-evaluation on
    /// subsequences of its rows.
    pub fn project(&self, x: &EmbeddedMatrix) -> RowProjection {
        let max = self.filters.max_size();
        let k = self.filters.len();
        let mut data = vec![0.0; x.rows * k * max];
        for i in 0..x.rows {
            let row = x.row(i);
            for (fk, f) in self.filters.filters.iter().enumerate() {
                for o in 0..f.size {
                    data[(i * k + fk) * max + o] = dot(&f.weights[o * x.dim..(o + 1) * x.dim], row);
                }
            }
        }
        RowProjection {
            rows: x.rows,
            filters: k,
            max_size: max,
            data,
        }
    }

    /// Class probabilities for the sequence made of the projected rows at
    /// `positions` (in order). Equals `forward_embedded` on the same rows up
    /// to summation order.
    pub fn probs_projected(&self, proj: &RowProjection, positions: &[usize]) -> Vec<f64> {
        let len = positions.len().max(proj.max_size);
        let k = proj.filters;
        let values: Vec<f64> = self
            .filters
            .filters
            .iter()
            .enumerate()
            .map(|(fk, f)| {
                let mut best = 0.0f64;
                for t in 0..=len - f.size {
                    let mut z = f.bias;
                    for o in 0..f.size {
                        if let Some(&row) = positions.get(t + o) {
                            z += proj.data[(row * k + fk) * proj.max_size + o];
                        }
                    }
                    best = best.max(z);
                }
                best
            })
            .collect();
        softmax(&self.head.logits(&values))
    }

    /// Gradient of logit `j` with respect to the pooled feature vector.
    pub fn head_gradient(&self, v: &[f64], j: usize) -> Vec<f64> {
        self.head.gradient(v, j)
    }
}

pub fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Index of the first maximum.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}
