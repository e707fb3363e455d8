mod common;

use cnnexplain::surrogate::{
    accuracy, gini, grow, reduced_error_prune, CartParams, FeatureDataset, LeafLabel, SurrogateForest,
    TreeNode,
};
use cnnexplain::textcnn::{FeatureVector, FilterSpan, Prediction};
use common::oracle_tree;
use proptest::prelude::*;

/// Feature values on a half-integer grid so that ties are common.
fn small_dataset() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<bool>)> {
    (1usize..=3, 1usize..=8).prop_flat_map(|(width, n)| {
        (
            prop::collection::vec(prop::collection::vec((0u8..5).prop_map(|v| v as f64 * 0.5), width), n),
            prop::collection::vec(any::<bool>(), n),
        )
    })
}

fn dataset(n: usize, width: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<bool>)> {
    (
        prop::collection::vec(prop::collection::vec(0.0f64..1.0, width), n),
        prop::collection::vec(any::<bool>(), n),
    )
}

fn path_nodes(root: &TreeNode, v: &[f64]) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    let mut node = root;
    while let TreeNode::Internal {
        k,
        threshold,
        left,
        right,
        ..
    } = node
    {
        out.push((*k, *threshold));
        node = if v[*k] <= *threshold { left } else { right };
    }
    out
}

fn forest_data(seed: u64, n: usize, width: usize, classes: usize) -> FeatureDataset {
    let mut state = seed | 1;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let features: Vec<Vec<f64>> = (0..n).map(|_| (0..width).map(|_| next()).collect()).collect();
    let logits: Vec<Vec<f64>> = features
        .iter()
        .map(|f| (0..classes).map(|c| f[c % width] - f[(c + 1) % width] + 0.1 * next()).collect())
        .collect();
    let targets = logits
        .iter()
        .map(|l| (0..classes).max_by(|&a, &b| l[a].total_cmp(&l[b])).unwrap())
        .collect();
    FeatureDataset {
        features,
        logits,
        targets,
    }
}

#[test]
fn gini_of_balanced_pair() {
    assert_eq!(gini(2, 2), 0.5);
    assert_eq!(gini(4, 0), 0.0);
}

#[test]
fn leaf_ties_go_to_rest() {
    let tree = grow(&[vec![0.0], vec![0.0]], &[true, false], CartParams::default());
    assert_eq!(tree.route(&[0.0]).0, LeafLabel::Rest);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn cart_matches_brute_force((x, y) in small_dataset(), min_leaf in 1usize..3, max_depth in 1usize..5) {
        let params = CartParams { min_leaf, max_depth };
        let idx: Vec<usize> = (0..x.len()).collect();
        prop_assert_eq!(grow(&x, &y, params), oracle_tree(&x, &y, &idx, params, 0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pruning_never_lowers_validation_accuracy((x, y) in dataset(60, 3), (vx, vy) in dataset(30, 3)) {
        let params = CartParams { min_leaf: 1, max_depth: 50 };
        let tree = grow(&x, &y, params);
        let before = accuracy(&tree, &vx, &vy);
        let pruned = reduced_error_prune(tree.clone(), &vx, &vy);
        prop_assert!(accuracy(&pruned, &vx, &vy) >= before);
        prop_assert!(pruned.node_count() <= tree.node_count());
    }

    #[test]
    fn binary_tree_shape((x, y) in dataset(40, 2), min_leaf in 1usize..6) {
        let tree = grow(&x, &y, CartParams { min_leaf, max_depth: 50 });
        prop_assert_eq!(tree.leaf_count(), (tree.node_count() + 1) / 2);
        prop_assert_eq!(tree.counts().total(), x.len());
    }

    #[test]
    fn tree_explanation_follows_passing_nodes(seed in any::<u64>(), n_tokens in 1usize..12, m in 0usize..4) {
        let width = 6;
        let data = forest_data(seed, 80, width, 3);
        let classes: Vec<String> = (0..3).map(|c| format!("c{c}")).collect();
        let forest = SurrogateForest::from_datasets(&classes, &data, None, CartParams::default()).unwrap();
        let v = &data.features[0];
        let spans: Vec<FilterSpan> = (0..width).map(|k| FilterSpan { start: k * 2, len: 2 + k % 3 }).collect();
        let prediction = Prediction {
            probs: vec![1.0 / 3.0; 3],
            logits: data.logits[0].clone(),
            predicted_class: data.targets[0],
            feature: FeatureVector { values: v.clone(), spans: spans.clone(), pre_activations: v.clone() },
            padded_len: n_tokens.max(16),
        };
        let e = forest.local_explain(&prediction, n_tokens, m).unwrap();
        prop_assert!(e.evidence.len() <= m && e.counter_evidence.len() <= m);
        let path = path_nodes(&forest.trees[data.targets[0]].root, v);
        for f in e.evidence.iter().chain(&e.counter_evidence) {
            prop_assert!(f.start + f.count <= n_tokens);
            prop_assert!(f.score > 0.0);
            prop_assert!(path.iter().any(|&(k, th)| spans[k].start == f.start && v[k] > th && v[k] - th == f.score));
        }
    }
}
