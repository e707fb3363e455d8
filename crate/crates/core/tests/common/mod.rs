#![allow(dead_code)]

use std::sync::Arc;

use cnnexplain::attribution::MethodId;
use cnnexplain::corpus::EmbeddingTable;
use cnnexplain::study::{Choice, ModelSide, Payload, Stratum, Task, TaskQuestion};
use cnnexplain::surrogate::{CartParams, Counts, TreeNode};
use cnnexplain::textcnn::{CnnConfig, CnnModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Hand-built question bank: `per_task` questions for each task, methods
/// cycling, strata alternating.
pub fn bank(per_task: usize) -> Vec<TaskQuestion> {
    let mut out = Vec::new();
    for task in Task::ALL {
        for i in 0..per_task {
            let method = MethodId::ALL[i % MethodId::ALL.len()];
            let (payload, key) = match task {
                Task::One => (
                    Payload::Task1 {
                        text: format!("text {i}"),
                        predicted_class: 0,
                        model_a: vec![],
                        model_b: vec![],
                    },
                    Choice::Model(if i % 2 == 0 { ModelSide::A } else { ModelSide::B }),
                ),
                Task::Two => (Payload::Task2 { evidence: vec!["good".into()] }, Choice::Class(i % 2)),
                Task::Three => (
                    Payload::Task3 {
                        predicted_class: 0,
                        probabilities: vec![0.6, 0.4],
                        evidence: vec!["a".into()],
                        counter_evidence: vec!["b".into()],
                    },
                    Choice::Class((i / 2) % 2),
                ),
            };
            out.push(TaskQuestion {
                id: format!("t{}-{i:03}", task as u8),
                task,
                doc_id: format!("doc-{i}"),
                method,
                stratum: if (i / MethodId::ALL.len()) % 2 == 0 { Stratum::Correct } else { Stratum::Misclassified },
                classes: vec!["Negative".into(), "Positive".into()],
                payload,
                hidden_key: key,
                empty_explanation: false,
            });
        }
    }
    out
}

/// Random vocabulary `w0..w{vocab}` of dimension `dim`.
pub fn table(vocab: usize, dim: usize, seed: u64) -> Arc<EmbeddingTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = EmbeddingTable::new(dim);
    for w in 0..vocab {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        t.insert(format!("w{w}"), &v).unwrap();
    }
    Arc::new(t)
}

pub fn small_model(seed: u64, dim: usize, hidden: Vec<usize>, classes: usize) -> CnnModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = CnnConfig {
        filter_sizes: vec![2, 3, 4],
        filters_per_size: 4,
        hidden,
        classes: (0..classes).map(|c| format!("c{c}")).collect(),
    };
    let mut m = CnnModel::new(table(20, dim, seed ^ 0xABCD), &cfg, &mut rng);
    for f in &mut m.filters.filters {
        f.bias = rng.random_range(-0.2..0.2);
    }
    for l in &mut m.head.layers {
        for b in &mut l.bias {
            *b = rng.random_range(-0.2..0.2);
        }
    }
    m
}

pub fn random_text(rng: &mut impl Rng, vocab: usize, len: usize) -> String {
    (0..len).map(|_| format!("w{}", rng.random_range(0..vocab))).collect::<Vec<_>>().join(" ")
}

/// Every embedding entry, filter weight and head weight drawn from a
/// positive range, all biases zero: every pre-activation on a text of at
/// least four tokens is strictly positive.
pub fn positive_model(seed: u64, dim: usize, hidden: Vec<usize>, classes: usize) -> CnnModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = EmbeddingTable::new(dim);
    for w in 0..20 {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(0.1..1.0)).collect();
        t.insert(format!("w{w}"), &v).unwrap();
    }
    let cfg = CnnConfig {
        filter_sizes: vec![2, 3, 4],
        filters_per_size: 3,
        hidden,
        classes: (0..classes).map(|c| format!("c{c}")).collect(),
    };
    let mut m = CnnModel::new(Arc::new(t), &cfg, &mut rng);
    for f in &mut m.filters.filters {
        for w in &mut f.weights {
            *w = rng.random_range(0.05..1.0);
        }
    }
    for l in &mut m.head.layers {
        for w in &mut l.weights {
            *w = rng.random_range(0.05..1.0);
        }
    }
    m
}

/// Two classes; the head reads only filter 0, a width-1 filter that fires
/// on `excellent` and nowhere else.
pub fn keyword_model() -> CnnModel {
    let dim = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut t = EmbeddingTable::new(dim);
    t.insert("excellent", &[1.0, 0.0, 0.0, 0.0]).unwrap();
    for w in 0..20 {
        let mut v = vec![0.0];
        v.extend((1..dim).map(|_| rng.random_range(-1.0..1.0)));
        t.insert(format!("w{w}"), &v).unwrap();
    }
    let cfg = CnnConfig {
        filter_sizes: vec![1, 2],
        filters_per_size: 2,
        hidden: vec![],
        classes: vec!["neg".into(), "pos".into()],
    };
    let mut m = CnnModel::new(Arc::new(t), &cfg, &mut rng);
    m.filters.filters[0].weights = vec![1.0, 0.0, 0.0, 0.0];
    let head = &mut m.head.layers[0];
    for w in &mut head.weights {
        *w = 0.0;
    }
    let k = head.inputs;
    head.weights[0] = -2.0;
    head.weights[k] = 2.0;
    m
}

/// `small_model` with every head weight zeroed: the output ignores the input.
pub fn constant_model(seed: u64) -> CnnModel {
    let mut m = small_model(seed, 4, vec![3], 2);
    for l in &mut m.head.layers {
        for w in &mut l.weights {
            *w = 0.0;
        }
    }
    m
}

/// `‖g − g_fd‖ / max(‖g‖, 1e-12)` for the head gradient of logit `j` against
/// central differences with step `h`.
pub fn head_fd_error(head: &cnnexplain::textcnn::DenseHead, v: &[f64], j: usize, h: f64) -> f64 {
    let g = head.gradient(v, j);
    let mut err = 0.0;
    let mut norm = 0.0;
    for k in 0..v.len() {
        let mut up = v.to_vec();
        let mut down = v.to_vec();
        up[k] += h;
        down[k] -= h;
        let fd = (head.logits(&up)[j] - head.logits(&down)[j]) / (2.0 * h);
        err += (g[k] - fd).powi(2);
        norm += g[k] * g[k];
    }
    err.sqrt() / norm.sqrt().max(1e-12)
}

/// `a / b` with `b > 0`.
#[derive(Clone, Copy)]
struct Frac(i128, i128);

impl Frac {
    fn lt(self, o: Frac) -> bool {
        self.0 * o.1 < o.0 * self.1
    }
}

/// `n_c · Gini(c)` summed over the given groups, from `1 − Σ p²` directly.
fn weighted_impurity(groups: &[(i128, i128)]) -> Frac {
    let mut acc = Frac(0, 1);
    for &(t, r) in groups {
        let n = t + r;
        let term = Frac(n * n - t * t - r * r, n);
        acc = Frac(acc.0 * term.1 + term.0 * acc.1, acc.1 * term.1);
    }
    acc
}

/// Tries every feature and every cut between distinct observed values.
pub fn oracle_tree(x: &[Vec<f64>], y: &[bool], idx: &[usize], params: CartParams, depth: usize) -> TreeNode {
    let t = idx.iter().filter(|&&i| y[i]).count();
    let counts = Counts {
        target: t,
        rest: idx.len() - t,
    };
    if depth >= params.max_depth {
        return TreeNode::leaf(counts);
    }
    let tally = |set: &[usize]| {
        let t = set.iter().filter(|&&i| y[i]).count() as i128;
        (t, set.len() as i128 - t)
    };
    let mut best: Option<(Frac, usize, f64)> = None;
    for k in 0..x[0].len() {
        let mut vals: Vec<f64> = idx.iter().map(|&i| x[i][k]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let theta = (w[0] + w[1]) / 2.0;
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[i][k] <= theta);
            if l.len() < params.min_leaf || r.len() < params.min_leaf {
                continue;
            }
            let imp = weighted_impurity(&[tally(&l), tally(&r)]);
            if best.as_ref().is_none_or(|(b, _, _)| imp.lt(*b)) {
                best = Some((imp, k, theta));
            }
        }
    }
    match best {
        Some((imp, k, theta)) if imp.lt(weighted_impurity(&[tally(idx)])) => {
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[i][k] <= theta);
            TreeNode::Internal {
                k,
                threshold: theta,
                left: Box::new(oracle_tree(x, y, &l, params, depth + 1)),
                right: Box::new(oracle_tree(x, y, &r, params, depth + 1)),
                counts,
            }
        }
        _ => TreeNode::leaf(counts),
    }
}
