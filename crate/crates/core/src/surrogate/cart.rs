use serde::{Deserialize, Serialize};

/// Target-vs-rest sample counts at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub target: usize,
    pub rest: usize,
}

impl Counts {
    pub fn total(&self) -> usize {
        self.target + self.rest
    }

    /// Majority label; ties go to `rest`.
    pub fn majority(&self) -> LeafLabel {
        if self.target > self.rest {
            LeafLabel::Target
        } else {
            LeafLabel::Rest
        }
    }

    pub fn gini(&self) -> f64 {
        gini(self.target, self.rest)
    }

    pub fn target_fraction(&self) -> f64 {
        if self.total() == 0 {
            0.0
        } else {
            self.target as f64 / self.total() as f64
        }
    }
}

pub fn gini(target: usize, rest: usize) -> f64 {
    let n = (target + rest) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let (p, q) = (target as f64 / n, rest as f64 / n);
    1.0 - p * p - q * q
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafLabel {
    Target,
    Rest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Internal {
        k: usize,
        #[serde(rename = "theta")]
        threshold: f64,
        /// Samples with `v_k <= threshold`.
        left: Box<TreeNode>,
        right: Box<TreeNode>,
        counts: Counts,
    },
    Leaf {
        leaf: LeafLabel,
        counts: Counts,
    },
}

impl TreeNode {
    pub fn leaf(counts: Counts) -> Self {
        TreeNode::Leaf {
            leaf: counts.majority(),
            counts,
        }
    }

    pub fn counts(&self) -> Counts {
        match self {
            TreeNode::Internal { counts, .. } | TreeNode::Leaf { counts, .. } => *counts,
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    /// Edges on the longest root-to-leaf path (a lone leaf has depth 0).
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Leaf reached by `v`.
    pub fn route(&self, v: &[f64]) -> (LeafLabel, Counts) {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { leaf, counts } => return (*leaf, *counts),
                TreeNode::Internal {
                    k,
                    threshold,
                    left,
                    right,
                    ..
                } => node = if v[*k] <= *threshold { left } else { right },
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CartParams {
    pub min_leaf: usize,
    pub max_depth: usize,
}

impl Default for CartParams {
    fn default() -> Self {
        Self {
            min_leaf: 5,
            max_depth: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    /// Weighted Gini decrease `G(parent) − n_l/n G(l) − n_r/n G(r)`.
    pub decrease: f64,
}

/// `n · Σ_children (n_c G(c))` as an exact fraction.
#[derive(Clone, Copy)]
struct ChildImpurity {
    num: u128,
    den: u128,
}

impl ChildImpurity {
    // n_c G(c) = 2 t_c r_c / n_c; the common factor 2 is dropped.
    fn of(tl: usize, rl: usize, tr: usize, rr: usize) -> Self {
        let (nl, nr) = ((tl + rl) as u128, (tr + rr) as u128);
        Self {
            num: (tl as u128) * (rl as u128) * nr + (tr as u128) * (rr as u128) * nl,
            den: nl * nr,
        }
    }

    fn less_than(&self, other: &Self) -> bool {
        self.num * other.den < other.num * self.den
    }
}

/// Best Gini split over every feature and every midpoint between
/// consecutive distinct values, subject to `min_leaf` samples per side.
/// Among equal decreases the smaller feature index, then the smaller
/// threshold wins (exact rational comparison, no floating ties). Returns
/// `None` if no split strictly lowers impurity.
pub fn best_split(features: &[Vec<f64>], labels: &[bool], idx: &[usize], min_leaf: usize) -> Option<SplitChoice> {
    let n = idx.len();
    let t = idx.iter().filter(|&&i| labels[i]).count();
    let parent = ChildImpurity {
        num: (t as u128) * ((n - t) as u128),
        den: n as u128,
    };
    let min_leaf = min_leaf.max(1);
    if n < 2 * min_leaf || t == 0 || t == n {
        return None;
    }
    let width = features[idx[0]].len();
    let mut best: Option<(ChildImpurity, usize, f64)> = None;
    let mut order = idx.to_vec();
    for k in 0..width {
        order.sort_by(|&a, &b| features[a][k].total_cmp(&features[b][k]));
        let mut tl = 0;
        for pos in 0..n - 1 {
            if labels[order[pos]] {
                tl += 1;
            }
            let nl = pos + 1;
            let (lo, hi) = (features[order[pos]][k], features[order[pos + 1]][k]);
            if lo == hi || nl < min_leaf || n - nl < min_leaf {
                continue;
            }
            let c = ChildImpurity::of(tl, nl - tl, t - tl, n - nl - (t - tl));
            if best.as_ref().is_none_or(|(b, _, _)| c.less_than(b)) {
                best = Some((c, k, lo + (hi - lo) / 2.0));
            }
        }
    }
    let (c, feature, threshold) = best?;
    if !c.less_than(&parent) {
        return None;
    }
    let parent_g = gini(t, n - t);
    let child_g = 2.0 * c.num as f64 / c.den as f64 / n as f64;
    Some(SplitChoice {
        feature,
        threshold,
        decrease: parent_g - child_g,
    })
}

/// Greedy CART with Gini impurity on a binary target-vs-rest labelling.
pub fn grow(features: &[Vec<f64>], labels: &[bool], params: CartParams) -> TreeNode {
    let idx: Vec<usize> = (0..features.len()).collect();
    grow_node(features, labels, &idx, params, 0)
}

fn grow_node(features: &[Vec<f64>], labels: &[bool], idx: &[usize], params: CartParams, depth: usize) -> TreeNode {
    let target = idx.iter().filter(|&&i| labels[i]).count();
    let counts = Counts {
        target,
        rest: idx.len() - target,
    };
    if depth >= params.max_depth || idx.is_empty() {
        return TreeNode::leaf(counts);
    }
    let Some(split) = best_split(features, labels, idx, params.min_leaf) else {
        return TreeNode::leaf(counts);
    };
    let (l, r): (Vec<usize>, Vec<usize>) = idx
        .iter()
        .partition(|&&i| features[i][split.feature] <= split.threshold);
    TreeNode::Internal {
        k: split.feature,
        threshold: split.threshold,
        left: Box::new(grow_node(features, labels, &l, params, depth + 1)),
        right: Box::new(grow_node(features, labels, &r, params, depth + 1)),
        counts,
    }
}
