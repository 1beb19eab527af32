//! CART-style binary classification tree on Gini impurity.
//!
//! Splits test `x[feature] >= threshold` (true goes right). Thresholds are
//! midpoints between consecutive distinct values seen at the node; absent
//! sparse entries count as 0.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{ClassifierModel, ClassifierParams, LabeledMatrix, ModelError, Prediction, TrainMeta};
use crate::data::Gender;
use crate::featurize::SparseVector;
use crate::rng::Rng;

/// Two impurities closer than this are treated as equal, so the earlier
/// (lower feature, then lower threshold) candidate wins.
pub const IMPURITY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self { max_depth: None, min_leaf: 1, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { label: Gender, purity: f64, samples: usize },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    /// `nodes[0]` is the root; children always have larger indices.
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &SparseVector) -> Prediction {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { label, purity, .. } => return Prediction { label: *label, score: *purity },
                Node::Split { feature, threshold, left, right } => {
                    i = if x.get(*feature) >= *threshold { *right } else { *left };
                }
            }
        }
    }

    /// `(feature, threshold)` at the root, if the root split at all.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes.first()? {
            Node::Split { feature, threshold, .. } => Some((*feature, *threshold)),
            Node::Leaf { .. } => None,
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match &t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
            }
        }
        go(self, 0)
    }
}

/// Weighted Gini impurity of a two-way partition given per-side class
/// counts `[female, male]`.
pub fn weighted_gini(left: [usize; 2], right: [usize; 2]) -> f64 {
    fn part(c: [usize; 2]) -> f64 {
        let n = (c[0] + c[1]) as f64;
        if n == 0.0 {
            return 0.0;
        }
        let (p0, p1) = (c[0] as f64 / n, c[1] as f64 / n);
        n * (1.0 - p0 * p0 - p1 * p1)
    }
    let n = (left[0] + left[1] + right[0] + right[1]) as f64;
    (part(left) + part(right)) / n
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    pub impurity: f64,
}

/// Best split of `rows` over `candidates` (ascending feature indices).
pub fn best_split(
    data: &LabeledMatrix,
    rows: &[usize],
    candidates: &[usize],
    min_leaf: usize,
) -> Option<SplitChoice> {
    let nf = data.n_features();
    let mut slot = vec![usize::MAX; nf];
    for (k, &f) in candidates.iter().enumerate() {
        slot[f] = k;
    }
    let mut values: Vec<Vec<(f64, usize)>> = vec![Vec::new(); candidates.len()];
    let mut totals = [0usize; 2];
    for &r in rows {
        let label = data.labels()[r].as_u8() as usize;
        totals[label] += 1;
        for (f, v) in data.rows()[r].iter() {
            if slot[f] != usize::MAX {
                values[slot[f]].push((v, label));
            }
        }
    }
    let n = rows.len();
    let mut best: Option<SplitChoice> = None;
    let mut groups: Vec<(f64, [usize; 2])> = Vec::new();
    for (k, &feature) in candidates.iter().enumerate() {
        let vals = &mut values[k];
        vals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut nonzero = [0usize; 2];
        groups.clear();
        for &(v, l) in vals.iter() {
            nonzero[l] += 1;
            match groups.last_mut() {
                Some(g) if g.0 == v => g.1[l] += 1,
                _ => groups.push((v, [usize::from(l == 0), usize::from(l == 1)])),
            }
        }
        let zeros = [totals[0] - nonzero[0], totals[1] - nonzero[1]];
        if zeros[0] + zeros[1] > 0 {
            let at = groups.partition_point(|g| g.0 < 0.0);
            groups.insert(at, (0.0, zeros));
        }
        let mut left = [0usize; 2];
        for j in 0..groups.len().saturating_sub(1) {
            left[0] += groups[j].1[0];
            left[1] += groups[j].1[1];
            let nl = left[0] + left[1];
            if nl < min_leaf || n - nl < min_leaf {
                continue;
            }
            let right = [totals[0] - left[0], totals[1] - left[1]];
            let impurity = weighted_gini(left, right);
            if best.map_or(true, |b| impurity < b.impurity - IMPURITY_EPS) {
                let threshold = 0.5 * (groups[j].0 + groups[j + 1].0);
                best = Some(SplitChoice { feature, threshold, impurity });
            }
        }
    }
    best
}

/// Grows a tree on `rows` (indices into `data`, repeats allowed). With
/// `feature_sampler`, each split considers only `mtry` sampled features.
pub(crate) fn grow(
    data: &LabeledMatrix,
    rows: Vec<usize>,
    cfg: &TreeConfig,
    mut feature_sampler: Option<(usize, &mut Rng)>,
) -> Tree {
    struct Work {
        node: usize,
        rows: Vec<usize>,
        depth: usize,
    }
    let placeholder = Node::Leaf { label: Gender::Male, purity: 1.0, samples: 0 };
    let all_features: Vec<usize> = (0..data.n_features()).collect();
    let mut nodes = vec![placeholder.clone()];
    let mut stack = vec![Work { node: 0, rows, depth: 0 }];
    while let Some(w) = stack.pop() {
        let male = w.rows.iter().filter(|&&r| data.labels()[r].is_male()).count();
        let n = w.rows.len();
        let leaf = || {
            let label = Gender::from_bool(2 * male >= n);
            let majority = if label.is_male() { male } else { n - male };
            Node::Leaf { label, purity: if n == 0 { 1.0 } else { majority as f64 / n as f64 }, samples: n }
        };
        let pure = male == 0 || male == n;
        let depth_capped = cfg.max_depth.is_some_and(|d| w.depth >= d);
        if pure || depth_capped || n < 2 * cfg.min_leaf {
            nodes[w.node] = leaf();
            continue;
        }
        let sampled;
        let candidates: &[usize] = match feature_sampler.as_mut() {
            Some((mtry, rng)) if *mtry < all_features.len() => {
                let mut s = rand::seq::index::sample(*rng, all_features.len(), *mtry).into_vec();
                s.sort_unstable();
                sampled = s;
                &sampled
            }
            _ => &all_features,
        };
        let Some(split) = best_split(data, &w.rows, candidates, cfg.min_leaf) else {
            nodes[w.node] = leaf();
            continue;
        };
        let (right, left): (Vec<usize>, Vec<usize>) =
            w.rows.iter().partition(|&&r| data.rows()[r].get(split.feature) >= split.threshold);
        let l = nodes.len();
        nodes.push(placeholder.clone());
        nodes.push(placeholder.clone());
        nodes[w.node] = Node::Split { feature: split.feature, threshold: split.threshold, left: l, right: l + 1 };
        stack.push(Work { node: l + 1, rows: right, depth: w.depth + 1 });
        stack.push(Work { node: l, rows: left, depth: w.depth + 1 });
    }
    Tree { nodes }
}

pub(crate) fn validate(data: &LabeledMatrix, cfg: &TreeConfig) -> Result<(), ModelError> {
    if data.is_empty() {
        return Err(ModelError::EmptyData);
    }
    if cfg.min_leaf == 0 {
        return Err(ModelError::InvalidConfig("min_leaf must be at least 1".to_string()));
    }
    Ok(())
}

pub(crate) fn tree_meta(cfg: &TreeConfig) -> Vec<(alloc::string::String, alloc::string::String)> {
    vec![
        ("max_depth".to_string(), cfg.max_depth.map_or("none".to_string(), |d| d.to_string())),
        ("min_leaf".to_string(), cfg.min_leaf.to_string()),
    ]
}

pub fn fit_decision_tree(data: &LabeledMatrix, cfg: &TreeConfig) -> Result<ClassifierModel, ModelError> {
    validate(data, cfg)?;
    let tree = grow(data, (0..data.len()).collect(), cfg, None);
    Ok(ClassifierModel {
        n_features: data.n_features(),
        train_meta: TrainMeta {
            config: tree_meta(cfg),
            seed: Some(cfg.seed),
            iterations: tree.nodes.len(),
            converged: None,
            objective_trace: Vec::new(),
        },
        params: ClassifierParams::DecisionTree(tree),
    })
}

impl core::fmt::Display for Tree {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        fn go(t: &Tree, i: usize, indent: usize, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
            let pad = format!("{:1$}", "", indent * 2);
            match &t.nodes[i] {
                Node::Leaf { label, purity, samples } => {
                    writeln!(f, "{pad}leaf {label} purity={purity:.3} n={samples}")
                }
                Node::Split { feature, threshold, left, right } => {
                    writeln!(f, "{pad}x[{feature}] >= {threshold}")?;
                    go(t, *right, indent + 1, f)?;
                    writeln!(f, "{pad}else")?;
                    go(t, *left, indent + 1, f)
                }
            }
        }
        go(self, 0, 0, f)
    }
}
