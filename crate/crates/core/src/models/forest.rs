//! Bagged random forest of Gini trees with per-split feature subsampling.

use alloc::string::ToString;
use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::tree::{self, Tree, TreeConfig};
use super::{ClassifierModel, ClassifierParams, LabeledMatrix, ModelError, Prediction, TrainMeta};
use crate::data::Gender;
use crate::featurize::SparseVector;
use crate::{math, rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Features tried per split; `None` means ⌈√n_features⌉.
    pub mtry: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
    pub tree: TreeConfig,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self { n_trees: 100, mtry: None, bootstrap: true, seed: 0, tree: TreeConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub tree_seeds: Vec<u64>,
    pub mtry: usize,
    pub bootstrap: bool,
}

impl Forest {
    /// Score is the fraction of trees voting male; a split vote is male.
    pub fn predict(&self, x: &SparseVector) -> Prediction {
        let male = self.trees.iter().filter(|t| t.predict(x).label.is_male()).count();
        let frac = male as f64 / self.trees.len() as f64;
        Prediction { label: Gender::from_bool(2 * male >= self.trees.len()), score: frac }
    }
}

pub fn default_mtry(n_features: usize) -> usize {
    (math::ceil(math::sqrt(n_features as f64)) as usize).clamp(1, n_features.max(1))
}

/// Trains one tree of the forest. Everything random about the tree comes
/// from `tree_seed`, so trees can be built in any order.
pub fn grow_tree(data: &LabeledMatrix, tree_seed: u64, mtry: usize, bootstrap: bool, cfg: &TreeConfig) -> Tree {
    let mut r = rng::seeded(tree_seed);
    let n = data.len();
    let rows: Vec<usize> = if bootstrap { (0..n).map(|_| r.random_range(0..n)).collect() } else { (0..n).collect() };
    tree::grow(data, rows, cfg, Some((mtry, &mut r)))
}

pub fn fit_random_forest(data: &LabeledMatrix, cfg: &ForestConfig) -> Result<ClassifierModel, ModelError> {
    tree::validate(data, &cfg.tree)?;
    if cfg.n_trees == 0 {
        return Err(ModelError::InvalidConfig("n_trees must be at least 1".to_string()));
    }
    let nf = data.n_features();
    let mtry = cfg.mtry.unwrap_or_else(|| default_mtry(nf));
    if mtry == 0 || mtry > nf {
        return Err(ModelError::InvalidConfig(alloc::format!("mtry {mtry} outside [1, {nf}]")));
    }
    let tree_seeds: Vec<u64> = (0..cfg.n_trees as u64).map(|i| rng::derive(cfg.seed, i)).collect();
    let trees = tree_seeds.iter().map(|&s| grow_tree(data, s, mtry, cfg.bootstrap, &cfg.tree)).collect();
    let mut config = tree::tree_meta(&cfg.tree);
    config.push(("n_trees".to_string(), cfg.n_trees.to_string()));
    config.push(("mtry".to_string(), mtry.to_string()));
    config.push(("bootstrap".to_string(), cfg.bootstrap.to_string()));
    Ok(ClassifierModel {
        n_features: nf,
        params: ClassifierParams::RandomForest(Forest { trees, tree_seeds, mtry, bootstrap: cfg.bootstrap }),
        train_meta: TrainMeta { config, seed: Some(cfg.seed), ..TrainMeta::default() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::testutil::matrix;
    use crate::models::tree::fit_decision_tree;
    use alloc::vec;

    fn random_data(seed: u64, rows: usize, nf: usize) -> LabeledMatrix {
        let mut r = rng::seeded(seed);
        let dense: Vec<Vec<f64>> =
            (0..rows).map(|_| (0..nf).map(|_| r.random_range(0..3) as f64).collect()).collect();
        let labels: Vec<u8> = (0..rows).map(|_| r.random_range(0..2)).collect();
        let refs: Vec<&[f64]> = dense.iter().map(Vec::as_slice).collect();
        matrix(&refs, &labels)
    }

    #[test]
    fn single_full_tree_equals_decision_tree() {
        for seed in 0..20 {
            let data = random_data(seed, 25, 4);
            let cfg = ForestConfig { n_trees: 1, mtry: Some(4), bootstrap: false, seed, tree: TreeConfig::default() };
            let f = fit_random_forest(&data, &cfg).unwrap();
            let t = fit_decision_tree(&data, &TreeConfig::default()).unwrap();
            let probe = random_data(seed + 1000, 30, 4);
            for x in data.rows().iter().chain(probe.rows()) {
                assert_eq!(f.predict(x).unwrap().label, t.predict(x).unwrap().label);
            }
        }
    }

    #[test]
    fn same_seed_same_forest() {
        let data = random_data(3, 60, 5);
        let cfg = ForestConfig { n_trees: 7, seed: 11, ..ForestConfig::default() };
        assert_eq!(fit_random_forest(&data, &cfg).unwrap(), fit_random_forest(&data, &cfg).unwrap());
        let other = ForestConfig { seed: 12, ..cfg };
        assert_ne!(fit_random_forest(&data, &cfg).unwrap(), fit_random_forest(&data, &other).unwrap());
    }

    #[test]
    fn tree_order_does_not_matter() {
        let data = random_data(8, 50, 6);
        let cfg = ForestConfig { n_trees: 5, seed: 2, ..ForestConfig::default() };
        let f = fit_random_forest(&data, &cfg).unwrap();
        let ClassifierParams::RandomForest(forest) = &f.params else { unreachable!() };
        for i in (0..5).rev() {
            let t = grow_tree(&data, forest.tree_seeds[i], forest.mtry, true, &cfg.tree);
            assert_eq!(t, forest.trees[i]);
        }
    }

    #[test]
    fn vote_fraction_and_tie_rule() {
        let data = matrix(&[&[1.0], &[0.0]], &[1, 0]);
        let cfg = ForestConfig { n_trees: 4, bootstrap: false, ..ForestConfig::default() };
        let f = fit_random_forest(&data, &cfg).unwrap();
        let p = f.predict(&SparseVector::from_dense(&[1.0])).unwrap();
        assert_eq!((p.label, p.score), (Gender::Male, 1.0));
        let ClassifierParams::RandomForest(mut forest) = f.params.clone() else { unreachable!() };
        forest.trees[0] = Tree { nodes: vec![tree::Node::Leaf { label: Gender::Female, purity: 1.0, samples: 1 }] };
        forest.trees[1] = forest.trees[0].clone();
        let p = forest.predict(&SparseVector::from_dense(&[1.0]));
        assert_eq!((p.label, p.score), (Gender::Male, 0.5));
    }

    #[test]
    fn config_errors() {
        let data = random_data(1, 10, 3);
        let bad = [
            ForestConfig { n_trees: 0, ..ForestConfig::default() },
            ForestConfig { mtry: Some(0), ..ForestConfig::default() },
            ForestConfig { mtry: Some(4), ..ForestConfig::default() },
        ];
        for cfg in bad {
            assert!(matches!(fit_random_forest(&data, &cfg), Err(ModelError::InvalidConfig(_))));
        }
        assert_eq!(default_mtry(72), 9);
        assert_eq!(default_mtry(1), 1);
    }
}
