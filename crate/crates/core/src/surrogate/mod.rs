//! One-vs-rest CART surrogates of the classifier's dense head, trained on
//! pooled feature vectors labelled with the classifier's own predictions.

mod cart;
mod correlation;
mod prune;

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use cart::{best_split, gini, grow, CartParams, Counts, LeafLabel, SplitChoice, TreeNode};
pub use correlation::{correlate_features, pearson, FeatureClassCorrelation};
pub use prune::{accuracy, reduced_error_prune};

use crate::attribution::{Explanation, Fragment, FragmentKind, MethodId};
use crate::corpus::Document;
use crate::textcnn::{classification_report, ClassificationReport, CnnModel, Prediction};
use crate::{Error, Result};

/// Pooled features and logits for each document, targets are the
/// classifier's predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDataset {
    pub features: Vec<Vec<f64>>,
    pub logits: Vec<Vec<f64>>,
    pub targets: Vec<usize>,
}

impl FeatureDataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    fn one_vs_rest(&self, class: usize) -> Vec<bool> {
        self.targets.iter().map(|&t| t == class).collect()
    }
}

pub fn build_feature_dataset(model: &CnnModel, docs: &[&Document]) -> Result<FeatureDataset> {
    if docs.is_empty() {
        return Err(Error::InvalidInput("cannot build features from an empty split".into()));
    }
    let mut out = FeatureDataset {
        features: Vec::with_capacity(docs.len()),
        logits: Vec::with_capacity(docs.len()),
        targets: Vec::with_capacity(docs.len()),
    };
    for d in docs {
        let p = model.forward(&d.tokens());
        out.targets.push(p.predicted_class);
        out.features.push(p.feature.values);
        out.logits.push(p.logits);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeMetadata {
    pub nodes: usize,
    pub depth: usize,
    pub leaves: usize,
}

impl TreeMetadata {
    pub fn of(root: &TreeNode) -> Self {
        Self {
            nodes: root.node_count(),
            depth: root.depth(),
            leaves: root.leaf_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractedTree {
    pub target_class: usize,
    pub root: TreeNode,
    pub metadata: TreeMetadata,
}

impl ExtractedTree {
    pub fn new(target_class: usize, root: TreeNode) -> Self {
        let metadata = TreeMetadata::of(&root);
        Self {
            target_class,
            root,
            metadata,
        }
    }
}

/// Trains the one-vs-rest tree for `class`.
pub fn cart_train(data: &FeatureDataset, class: usize, params: CartParams) -> ExtractedTree {
    ExtractedTree::new(class, grow(&data.features, &data.one_vs_rest(class), params))
}

pub fn prune(tree: &ExtractedTree, validation: &FeatureDataset) -> ExtractedTree {
    let labels = validation.one_vs_rest(tree.target_class);
    ExtractedTree::new(
        tree.target_class,
        reduced_error_prune(tree.root.clone(), &validation.features, &labels),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractConfig {
    pub cart: CartParams,
    pub prune: bool,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            cart: CartParams::default(),
            prune: true,
        }
    }
}

/// One tree per class plus the feature-to-class correlation used to label
/// path fragments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateForest {
    pub classes: Vec<String>,
    pub trees: Vec<ExtractedTree>,
    pub correlation: FeatureClassCorrelation,
}

impl SurrogateForest {
    pub fn extract(
        model: &CnnModel,
        train_docs: &[&Document],
        validation_docs: &[&Document],
        config: ExtractConfig,
    ) -> Result<Self> {
        let train = build_feature_dataset(model, train_docs)?;
        let validation = if config.prune {
            Some(build_feature_dataset(model, validation_docs)?)
        } else {
            None
        };
        Self::from_datasets(&model.classes, &train, validation.as_ref(), config.cart)
    }

    pub fn from_datasets(
        classes: &[String],
        train: &FeatureDataset,
        validation: Option<&FeatureDataset>,
        params: CartParams,
    ) -> Result<Self> {
        let correlation = correlate_features(&train.features, &train.logits)?;
        let trees = (0..classes.len())
            .map(|c| {
                let t = cart_train(train, c, params);
                match validation {
                    Some(v) if !v.is_empty() => prune(&t, v),
                    _ => t,
                }
            })
            .collect();
        Ok(Self {
            classes: classes.to_vec(),
            trees,
            correlation,
        })
    }

    /// Among trees routing `v` to a `target` leaf, the one with the purest
    /// leaf wins. If none claims `v`, the leaf with the highest target
    /// fraction overall decides. Ties go to the smaller class.
    pub fn predict(&self, v: &[f64]) -> usize {
        let mut claimed: Option<(usize, f64)> = None;
        let mut fallback: Option<(usize, f64)> = None;
        for t in &self.trees {
            let (label, counts) = t.root.route(v);
            let purity = counts.target_fraction();
            let better = |cur: &Option<(usize, f64)>| cur.is_none_or(|(_, p)| purity > p);
            if label == LeafLabel::Target && better(&claimed) {
                claimed = Some((t.target_class, purity));
            }
            if better(&fallback) {
                fallback = Some((t.target_class, purity));
            }
        }
        claimed.or(fallback).map_or(0, |(c, _)| c)
    }

    /// Walks the predicted class's tree. Every node whose threshold `v_k`
    /// exceeds contributes the pooled span of filter `k`, scored `v_k − θ`;
    /// it is evidence when `k` correlates most with the predicted class.
    /// Path order, at most `m` per list; repeats and overlaps are kept.
    pub fn local_explain(&self, prediction: &Prediction, n_tokens: usize, m: usize) -> Result<Explanation> {
        let j = prediction.predicted_class;
        let tree = self
            .trees
            .iter()
            .find(|t| t.target_class == j)
            .ok_or_else(|| Error::InvalidInput(format!("no surrogate tree for class {j}")))?;
        let v = &prediction.feature.values;
        if v.len() != self.correlation.most_correlated.len() {
            return Err(Error::InvalidInput("feature width disagrees with the surrogate trees".into()));
        }
        let mut evidence = Vec::new();
        let mut counter = Vec::new();
        let mut node = &tree.root;
        while let TreeNode::Internal {
            k,
            threshold,
            left,
            right,
            ..
        } = node
        {
            if v[*k] <= *threshold {
                node = left;
                continue;
            }
            node = right;
            let span = prediction.feature.spans[*k];
            if span.start >= n_tokens {
                continue;
            }
            let frag = Fragment {
                start: span.start,
                count: span.len.min(n_tokens - span.start),
                kind: FragmentKind::Ngram,
                score: v[*k] - threshold,
            };
            let list = if self.correlation.most_correlated[*k] == j {
                &mut evidence
            } else {
                &mut counter
            };
            if list.len() < m {
                list.push(frag);
            }
        }
        Ok(Explanation {
            method: MethodId::DecisionTrees,
            target_class: j,
            evidence,
            counter_evidence: counter,
            m,
        })
    }

    /// Macro-F1 of the forest's decisions against the classifier's.
    pub fn fidelity(&self, data: &FeatureDataset) -> ClassificationReport {
        let pred: Vec<usize> = data.features.iter().map(|v| self.predict(v)).collect();
        classification_report(&data.targets, &pred, &self.classes)
    }

    pub fn fidelity_on(&self, model: &CnnModel, docs: &[&Document]) -> Result<f64> {
        Ok(self.fidelity(&build_feature_dataset(model, docs)?).macro_f1())
    }

    pub fn report(&self) -> TreeReport {
        TreeReport {
            rows: self
                .trees
                .iter()
                .map(|t| (self.classes[t.target_class].clone(), t.metadata))
                .collect(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, serde_json::to_vec_pretty(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let forest: Self = serde_json::from_slice(&bytes)?;
        for t in &forest.trees {
            if t.metadata != TreeMetadata::of(&t.root) || t.target_class >= forest.classes.len() {
                return Err(Error::InvalidInput(format!("{}: inconsistent tree record", path.display())));
            }
        }
        Ok(forest)
    }
}

/// Class name with node count, depth and leaf count per tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeReport {
    pub rows: Vec<(String, TreeMetadata)>,
}

impl fmt::Display for TreeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.rows.iter().map(|(c, _)| c.len()).chain([5]).max().unwrap_or(5);
        writeln!(f, "{:<w$}  {:>7}  {:>5}  {:>7}", "Class", "#Nodes", "Depth", "#Leaves")?;
        for (c, m) in &self.rows {
            writeln!(f, "{:<w$}  {:>7}  {:>5}  {:>7}", c, m.nodes, m.depth, m.leaves)?;
        }
        Ok(())
    }
}
