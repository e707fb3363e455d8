use log::info;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{softmax, CnnModel};
use crate::corpus::{Document, EmbeddedMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation-loss improvement before stopping.
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_epsilon: 1e-7,
            batch_size: 64,
            max_epochs: 30,
            patience: 2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochLog>,
    /// Epoch (1-based) whose weights were kept.
    pub best_epoch: usize,
    pub stopped_early: bool,
}

/// Document resolved to embedding-table rows.
struct Encoded {
    rows: Vec<Option<usize>>,
    label: usize,
}

fn encode(model: &CnnModel, docs: &[&Document]) -> Vec<Encoded> {
    docs.iter()
        .map(|d| Encoded {
            rows: d
                .tokens()
                .tokens
                .iter()
                .map(|t| model.embedding.row_of(t))
                .collect(),
            label: d.label,
        })
        .collect()
}

/// Parameter-shaped gradient buffers: one group per filter kernel, one per
/// filter bias, then weights and bias of each dense layer.
fn zero_groups(model: &CnnModel) -> Vec<Vec<f64>> {
    let mut g: Vec<Vec<f64>> = model
        .filters
        .filters
        .iter()
        .map(|f| vec![0.0; f.weights.len()])
        .collect();
    g.extend(model.filters.filters.iter().map(|_| vec![0.0; 1]));
    for l in &model.head.layers {
        g.push(vec![0.0; l.weights.len()]);
        g.push(vec![0.0; l.bias.len()]);
    }
    g
}

fn param_groups_mut(model: &mut CnnModel) -> Vec<&mut [f64]> {
    let (weights, biases): (Vec<_>, Vec<_>) = model
        .filters
        .filters
        .iter_mut()
        .map(|f| (f.weights.as_mut_slice(), std::slice::from_mut(&mut f.bias)))
        .unzip();
    let mut groups: Vec<&mut [f64]> = weights;
    groups.extend(biases);
    for l in &mut model.head.layers {
        groups.push(l.weights.as_mut_slice());
        groups.push(l.bias.as_mut_slice());
    }
    groups
}

fn embed_and_pad(model: &CnnModel, rows: &[Option<usize>]) -> EmbeddedMatrix {
    let mut x = model.embedding.embed_rows(rows);
    x.pad_to(model.filters.max_size());
    x
}

fn sample_loss(model: &CnnModel, ex: &Encoded) -> f64 {
    let x = embed_and_pad(model, &ex.rows);
    let p = model.forward_embedded(&x);
    -p.probs[ex.label].max(f64::MIN_POSITIVE).ln()
}

/// Adds the cross-entropy gradient of one example into `grads`; returns its loss.
fn accumulate(model: &CnnModel, ex: &Encoded, grads: &mut [Vec<f64>]) -> f64 {
    let x = embed_and_pad(model, &ex.rows);
    let (fv, _) = model.features(&x);
    let trace = model.head.trace(&fv.values);
    let probs = softmax(trace.logits());
    let loss = -probs[ex.label].max(f64::MIN_POSITIVE).ln();

    let k = model.filters.len();
    let n_layers = model.head.layers.len();
    let mut g = probs;
    g[ex.label] -= 1.0;
    for l in (0..n_layers).rev() {
        let layer = &model.head.layers[l];
        let input = &trace.activations[l];
        let base = 2 * k + 2 * l;
        {
            let gw = &mut grads[base];
            for (o, &go) in g.iter().enumerate() {
                if go != 0.0 {
                    let row = &mut gw[o * layer.inputs..(o + 1) * layer.inputs];
                    for (r, &a) in row.iter_mut().zip(input) {
                        *r += go * a;
                    }
                }
            }
        }
        for (b, &go) in grads[base + 1].iter_mut().zip(&g) {
            *b += go;
        }
        let mut below = layer.back(&g);
        if l > 0 {
            for (gi, &z) in below.iter_mut().zip(&trace.pre_activations[l - 1]) {
                if z <= 0.0 {
                    *gi = 0.0;
                }
            }
        }
        g = below;
    }
    for (idx, f) in model.filters.filters.iter().enumerate() {
        let d = g[idx];
        if d == 0.0 || fv.pre_activations[idx] <= 0.0 {
            continue;
        }
        let window = x.window(fv.spans[idx].start, f.size);
        for (gw, &xv) in grads[idx].iter_mut().zip(window) {
            *gw += d * xv;
        }
        grads[k + idx][0] += d;
    }
    loss
}

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl Adam {
    fn step(&mut self, params: Vec<&mut [f64]>, grads: &[Vec<f64>], cfg: &TrainConfig) {
        self.t += 1;
        let bc1 = 1.0 - cfg.beta1.powi(self.t);
        let bc2 = 1.0 - cfg.beta2.powi(self.t);
        for (gi, p) in params.into_iter().enumerate() {
            let (m, v, g) = (&mut self.m[gi], &mut self.v[gi], &grads[gi]);
            for i in 0..p.len() {
                m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
                v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
                let mhat = m[i] / bc1;
                let vhat = v[i] / bc2;
                p[i] -= cfg.learning_rate * mhat / (vhat.sqrt() + cfg.adam_epsilon);
            }
        }
    }
}

/// Mean cross-entropy of the model on `docs`.
pub fn mean_loss(model: &CnnModel, docs: &[&Document]) -> f64 {
    let enc = encode(model, docs);
    enc.iter().map(|e| sample_loss(model, e)).sum::<f64>() / enc.len().max(1) as f64
}

/// Mini-batch Adam on cross-entropy with the embedding frozen. Stops after
/// `patience` epochs without validation-loss improvement and returns the
/// weights of the best validation epoch. Without validation documents all
/// `max_epochs` run and the final weights are kept.
pub fn train(
    mut model: CnnModel,
    train_docs: &[&Document],
    val_docs: &[&Document],
    config: &TrainConfig,
) -> Result<(CnnModel, TrainingLog)> {
    if train_docs.is_empty() {
        return Err(Error::InvalidInput("empty training split".into()));
    }
    if config.patience < 1 || config.batch_size < 1 {
        return Err(Error::InvalidInput("patience and batch size must be at least 1".into()));
    }
    if let Some(d) = train_docs.iter().chain(val_docs).find(|d| d.label >= model.num_classes()) {
        return Err(Error::InvalidInput(format!("document {} has label {} out of range", d.id, d.label)));
    }
    let train_set = encode(&model, train_docs);
    let val_set = encode(&model, val_docs);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let template = zero_groups(&model);
    let mut adam = Adam {
        m: template.clone(),
        v: template.clone(),
        t: 0,
    };

    let mut log = TrainingLog {
        epochs: Vec::new(),
        best_epoch: 0,
        stopped_early: false,
    };
    let mut best: Option<(f64, CnnModel)> = None;
    let mut stale = 0;
    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut grads = template.clone();
            for &i in batch {
                total += accumulate(&model, &train_set[i], &mut grads);
            }
            let scale = 1.0 / batch.len() as f64;
            grads.iter_mut().flatten().for_each(|g| *g *= scale);
            adam.step(param_groups_mut(&mut model), &grads, config);
        }
        let train_loss = total / train_set.len() as f64;
        let val_loss = (!val_set.is_empty()).then(|| {
            val_set.iter().map(|e| sample_loss(&model, e)).sum::<f64>() / val_set.len() as f64
        });
        info!("epoch {epoch}: train loss {train_loss:.5}, val loss {val_loss:?}");
        log.epochs.push(EpochLog {
            epoch,
            train_loss,
            val_loss,
        });
        let Some(vl) = val_loss else {
            log.best_epoch = epoch;
            continue;
        };
        if best.as_ref().is_none_or(|(b, _)| vl < *b) {
            best = Some((vl, model.clone()));
            log.best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                log.stopped_early = epoch < config.max_epochs;
                break;
            }
        }
    }
    if let Some((_, m)) = best {
        model = m;
    }
    Ok((model, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::EmbeddingTable;
    use crate::textcnn::CnnConfig;
    use rand::Rng;
    use std::sync::Arc;

    fn toy() -> (Arc<EmbeddingTable>, Vec<Document>) {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let words = ["good", "bad", "the", "item", "was", "it", "is", "really"];
        let mut t = EmbeddingTable::new(6);
        for w in words {
            let v: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            t.insert(w, &v).unwrap();
        }
        let fillers = ["the", "item", "was", "it", "is", "really"];
        let docs = (0..20)
            .map(|i| {
                let label = i % 2;
                let kw = if label == 1 { "good" } else { "bad" };
                let mut toks: Vec<&str> = (0..5).map(|j| fillers[(i * 3 + j) % 6]).collect();
                toks.insert(i % 5, kw);
                Document {
                    id: format!("t{i}"),
                    text: toks.join(" "),
                    label,
                    subtopic: None,
                }
            })
            .collect();
        (Arc::new(t), docs)
    }

    fn small_config() -> CnnConfig {
        CnnConfig {
            filter_sizes: vec![2, 3],
            filters_per_size: 4,
            hidden: vec![8],
            classes: vec!["neg".into(), "pos".into()],
        }
    }

    #[test]
    fn loss_decreases_on_separable_toy_set() {
        let (table, docs) = toy();
        let refs: Vec<&Document> = docs.iter().collect();
        let model = CnnModel::new(table, &small_config(), &mut ChaCha8Rng::seed_from_u64(1));
        let cfg = TrainConfig {
            learning_rate: 0.01,
            batch_size: 4,
            max_epochs: 3,
            ..Default::default()
        };
        let (_, log) = train(model, &refs, &[], &cfg).unwrap();
        let l: Vec<f64> = log.epochs.iter().map(|e| e.train_loss).collect();
        assert_eq!(l.len(), 3);
        assert!(l[0] > l[1] && l[1] > l[2], "{l:?}");
    }

    #[test]
    fn one_epoch_budget_runs_exactly_one_epoch() {
        let (table, docs) = toy();
        let refs: Vec<&Document> = docs.iter().collect();
        let model = CnnModel::new(table, &small_config(), &mut ChaCha8Rng::seed_from_u64(1));
        let cfg = TrainConfig {
            max_epochs: 1,
            ..Default::default()
        };
        let (_, log) = train(model, &refs[..14], &refs[14..], &cfg).unwrap();
        assert_eq!(log.epochs.len(), 1);
    }

    #[test]
    fn deterministic_and_embedding_untouched() {
        let (table, docs) = toy();
        let before = table.fingerprint();
        let refs: Vec<&Document> = docs.iter().collect();
        let cfg = TrainConfig {
            batch_size: 3,
            max_epochs: 4,
            seed: 5,
            ..Default::default()
        };
        let run = || {
            let model = CnnModel::new(table.clone(), &small_config(), &mut ChaCha8Rng::seed_from_u64(2));
            train(model, &refs[..15], &refs[15..], &cfg).unwrap()
        };
        let (a, la) = run();
        let (b, lb) = run();
        assert_eq!(a.filters, b.filters);
        assert_eq!(a.head, b.head);
        assert_eq!(la, lb);
        assert_eq!(a.embedding.fingerprint(), before);
    }

    #[test]
    fn empty_training_split_is_error() {
        let (table, _) = toy();
        let model = CnnModel::new(table, &small_config(), &mut ChaCha8Rng::seed_from_u64(1));
        assert!(train(model, &[], &[], &TrainConfig::default()).is_err());
    }

    #[test]
    fn backprop_matches_finite_differences() {
        let (table, docs) = toy();
        let mut model = CnnModel::new(table, &small_config(), &mut ChaCha8Rng::seed_from_u64(4));
        for (i, f) in model.filters.filters.iter_mut().enumerate() {
            f.bias = 0.05 * i as f64;
        }
        let enc = encode(&model, &[&docs[3]]);
        let mut grads = zero_groups(&model);
        accumulate(&model, &enc[0], &mut grads);
        let h = 1e-6;
        for group in [0usize, 9, 16, 18, 19] {
            let n = grads[group].len();
            for i in [0, n / 2, n - 1] {
                let mut plus = model.clone();
                param_groups_mut(&mut plus)[group][i] += h;
                let mut minus = model.clone();
                param_groups_mut(&mut minus)[group][i] -= h;
                let fd = (sample_loss(&plus, &enc[0]) - sample_loss(&minus, &enc[0])) / (2.0 * h);
                assert!(
                    (fd - grads[group][i]).abs() < 1e-5,
                    "group {group} idx {i}: fd {fd} vs {}",
                    grads[group][i]
                );
            }
        }
    }
}
