//! The six classical classifiers behind one fit/predict contract.
//!
//! All of them consume [`LabeledMatrix`] rows of sparse features and produce
//! a [`ClassifierModel`]. Label 1 (male) is the positive class and every
//! exact-threshold tie resolves to it.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Gender;
use crate::featurize::SparseVector;

pub mod forest;
pub mod linear;
pub mod naive_bayes;
pub mod tree;

pub use forest::fit_random_forest;
pub use linear::{fit_linear_svm, fit_logistic_regression, LogisticConfig, SvmConfig};
pub use naive_bayes::{fit_bernoulli_nb, fit_multinomial_nb};
pub use tree::{fit_decision_tree, Tree, TreeConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("training data is empty")]
    EmptyData,
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("rows ({rows}) and labels ({labels}) differ in length")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("feature index {index} out of range for {n_features} features")]
    FeatureOutOfRange { index: usize, n_features: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidConfig(String),
    #[error("training diverged at iteration {iteration}: non-finite {what}")]
    Diverged { iteration: usize, what: &'static str },
}

/// Feature rows with their labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    rows: Vec<SparseVector>,
    labels: Vec<Gender>,
    n_features: usize,
}

impl LabeledMatrix {
    pub fn new(rows: Vec<SparseVector>, labels: Vec<Gender>, n_features: usize) -> Result<Self, ModelError> {
        if rows.len() != labels.len() {
            return Err(ModelError::LengthMismatch { rows: rows.len(), labels: labels.len() });
        }
        for r in &rows {
            check_range(r, n_features)?;
        }
        Ok(Self { rows, labels, n_features })
    }

    pub fn rows(&self) -> &[SparseVector] {
        &self.rows
    }

    pub fn labels(&self) -> &[Gender] {
        &self.labels
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// (female, male) counts.
    pub fn class_counts(&self) -> [usize; 2] {
        let male = self.labels.iter().filter(|g| g.is_male()).count();
        [self.labels.len() - male, male]
    }

    pub(crate) fn require_both_classes(&self) -> Result<(), ModelError> {
        if self.is_empty() {
            return Err(ModelError::EmptyData);
        }
        let [f, m] = self.class_counts();
        if f == 0 || m == 0 {
            return Err(ModelError::SingleClass);
        }
        Ok(())
    }
}

pub(crate) fn check_range(x: &SparseVector, n_features: usize) -> Result<(), ModelError> {
    match x.max_index() {
        Some(index) if index >= n_features => Err(ModelError::FeatureOutOfRange { index, n_features }),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    MultinomialNb,
    BernoulliNb,
    LogisticRegression,
    LinearSvm,
    DecisionTree,
    RandomForest,
}

impl ClassifierKind {
    pub const ALL: [Self; 6] = [
        Self::MultinomialNb,
        Self::BernoulliNb,
        Self::LogisticRegression,
        Self::LinearSvm,
        Self::DecisionTree,
        Self::RandomForest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::MultinomialNb => "multinomial_nb",
            Self::BernoulliNb => "bernoulli_nb",
            Self::LogisticRegression => "logistic_regression",
            Self::LinearSvm => "linear_svm",
            Self::DecisionTree => "decision_tree",
            Self::RandomForest => "random_forest",
        }
    }

    /// Whether [`Prediction::score`] is a probability of label 1.
    pub fn scores_probability(self) -> bool {
        matches!(self, Self::MultinomialNb | Self::BernoulliNb | Self::LogisticRegression | Self::RandomForest)
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Ok(match key.as_str() {
            "multinomial_nb" | "mnb" => Self::MultinomialNb,
            "bernoulli_nb" | "bnb" => Self::BernoulliNb,
            "logistic_regression" | "lr" | "logreg" => Self::LogisticRegression,
            "linear_svm" | "svm" => Self::LinearSvm,
            "decision_tree" | "tree" | "dt" => Self::DecisionTree,
            "random_forest" | "forest" | "rf" => Self::RandomForest,
            _ => return Err(alloc::format!("unknown classifier `{s}`")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Gender,
    /// Probability of label 1 for NB/LR/forest, signed margin for the SVM,
    /// leaf purity for the tree.
    pub score: f64,
}

impl Prediction {
    /// Label 1 iff `p >= 0.5`.
    pub fn from_probability(p: f64) -> Self {
        Self { label: Gender::from_bool(p >= 0.5), score: p }
    }
}

/// Fitted parameters, one variant per algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierParams {
    MultinomialNb(naive_bayes::MultinomialNb),
    BernoulliNb(naive_bayes::BernoulliNb),
    LogisticRegression(linear::LinearModel),
    LinearSvm(linear::LinearModel),
    DecisionTree(tree::Tree),
    RandomForest(forest::Forest),
}

/// Hyperparameters and training trace recorded alongside the parameters.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainMeta {
    /// `key=value` pairs describing the configuration.
    pub config: Vec<(String, String)>,
    pub seed: Option<u64>,
    pub iterations: usize,
    pub converged: Option<bool>,
    /// Per-iteration (LR) or per-epoch (SVM) objective values.
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub n_features: usize,
    pub params: ClassifierParams,
    pub train_meta: TrainMeta,
}

impl ClassifierModel {
    pub fn kind(&self) -> ClassifierKind {
        match &self.params {
            ClassifierParams::MultinomialNb(_) => ClassifierKind::MultinomialNb,
            ClassifierParams::BernoulliNb(_) => ClassifierKind::BernoulliNb,
            ClassifierParams::LogisticRegression(_) => ClassifierKind::LogisticRegression,
            ClassifierParams::LinearSvm(_) => ClassifierKind::LinearSvm,
            ClassifierParams::DecisionTree(_) => ClassifierKind::DecisionTree,
            ClassifierParams::RandomForest(_) => ClassifierKind::RandomForest,
        }
    }

    pub fn predict(&self, x: &SparseVector) -> Result<Prediction, ModelError> {
        check_range(x, self.n_features)?;
        Ok(match &self.params {
            ClassifierParams::MultinomialNb(m) => Prediction::from_probability(m.posterior_male(x)),
            ClassifierParams::BernoulliNb(m) => Prediction::from_probability(m.posterior_male(x)),
            ClassifierParams::LogisticRegression(m) => Prediction::from_probability(crate::math::sigmoid(m.margin(x))),
            ClassifierParams::LinearSvm(m) => {
                let margin = m.margin(x);
                Prediction { label: Gender::from_bool(margin >= 0.0), score: margin }
            }
            ClassifierParams::DecisionTree(t) => t.predict(x),
            ClassifierParams::RandomForest(f) => f.predict(x),
        })
    }
}

/// Free-function form of [`ClassifierModel::predict`].
pub fn predict(model: &ClassifierModel, x: &SparseVector) -> Result<Prediction, ModelError> {
    model.predict(x)
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use alloc::vec::Vec;

    /// Dense rows to a matrix; label 1 = male.
    pub fn matrix(rows: &[&[f64]], labels: &[u8]) -> LabeledMatrix {
        let n = rows.first().map_or(0, |r| r.len());
        LabeledMatrix::new(
            rows.iter().map(|r| SparseVector::from_dense(r)).collect(),
            labels.iter().map(|&l| Gender::try_from(l).unwrap()).collect::<Vec<_>>(),
            n,
        )
        .unwrap()
    }
}
