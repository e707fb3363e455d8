use super::cart::TreeNode;

/// Reduced-error pruning, bottom-up: a subtree becomes a leaf (labelled by
/// its training majority) whenever that does not increase the number of
/// validation errors among the samples reaching it.
pub fn reduced_error_prune(tree: TreeNode, features: &[Vec<f64>], labels: &[bool]) -> TreeNode {
    let idx: Vec<usize> = (0..features.len()).collect();
    prune_node(tree, features, labels, &idx).0
}

fn errors_as_leaf(node: &TreeNode, labels: &[bool], idx: &[usize]) -> usize {
    let predicts_target = node.counts().majority() == super::cart::LeafLabel::Target;
    idx.iter().filter(|&&i| labels[i] != predicts_target).count()
}

fn prune_node(node: TreeNode, features: &[Vec<f64>], labels: &[bool], idx: &[usize]) -> (TreeNode, usize) {
    match node {
        TreeNode::Leaf { .. } => {
            let e = errors_as_leaf(&node, labels, idx);
            (node, e)
        }
        TreeNode::Internal {
            k,
            threshold,
            left,
            right,
            counts,
        } => {
            let (l_idx, r_idx): (Vec<usize>, Vec<usize>) =
                idx.iter().partition(|&&i| features[i][k] <= threshold);
            let (left, le) = prune_node(*left, features, labels, &l_idx);
            let (right, re) = prune_node(*right, features, labels, &r_idx);
            let as_leaf = TreeNode::leaf(counts);
            let leaf_err = errors_as_leaf(&as_leaf, labels, idx);
            if leaf_err <= le + re {
                (as_leaf, leaf_err)
            } else {
                (
                    TreeNode::Internal {
                        k,
                        threshold,
                        left: Box::new(left),
                        right: Box::new(right),
                        counts,
                    },
                    le + re,
                )
            }
        }
    }
}

/// Fraction of samples whose routed leaf label matches.
pub fn accuracy(tree: &TreeNode, features: &[Vec<f64>], labels: &[bool]) -> f64 {
    if features.is_empty() {
        return 1.0;
    }
    let hits = features
        .iter()
        .zip(labels)
        .filter(|(v, &y)| (tree.route(v).0 == super::cart::LeafLabel::Target) == y)
        .count();
    hits as f64 / features.len() as f64
}
