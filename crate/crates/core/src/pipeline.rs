//! Model specifications and trained models over selected name tokens.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::data::Gender;
use crate::featurize::{FeaturizeError, Vectorizer, VectorizerConfig};
use crate::lstm::{self, EmbeddingTable, LstmError, LstmModel, LstmTrainConfig};
use crate::models::{
    self, forest::ForestConfig, ClassifierKind, ClassifierModel, LabeledMatrix, LogisticConfig, ModelError, Prediction,
    SvmConfig, TreeConfig,
};
use crate::names::NameError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Name(#[from] NameError),
    #[error(transparent)]
    Featurize(#[from] FeaturizeError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lstm(#[from] LstmError),
    #[error("{docs} documents but {labels} labels")]
    LengthMismatch { docs: usize, labels: usize },
}

/// What to train. Classical kinds are fed by a [`Vectorizer`]; the LSTM
/// reads embeddings directly.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    MultinomialNb { alpha: f64 },
    BernoulliNb { alpha: f64 },
    LogisticRegression(LogisticConfig),
    LinearSvm(SvmConfig),
    DecisionTree(TreeConfig),
    RandomForest(ForestConfig),
    Lstm { config: LstmTrainConfig, embeddings: Arc<EmbeddingTable> },
}

impl ModelSpec {
    /// Default hyperparameters for a classical kind, seeded with `seed`.
    pub fn classical(kind: ClassifierKind, seed: u64) -> Self {
        match kind {
            ClassifierKind::MultinomialNb => Self::MultinomialNb { alpha: 1.0 },
            ClassifierKind::BernoulliNb => Self::BernoulliNb { alpha: 1.0 },
            ClassifierKind::LogisticRegression => Self::LogisticRegression(LogisticConfig::default()),
            ClassifierKind::LinearSvm => Self::LinearSvm(SvmConfig { seed, ..SvmConfig::default() }),
            ClassifierKind::DecisionTree => Self::DecisionTree(TreeConfig { seed, ..TreeConfig::default() }),
            ClassifierKind::RandomForest => Self::RandomForest(ForestConfig { seed, ..ForestConfig::default() }),
        }
    }

    pub fn lstm(config: LstmTrainConfig, embeddings: Arc<EmbeddingTable>) -> Self {
        Self::Lstm { config, embeddings }
    }

    pub fn classifier_kind(&self) -> Option<ClassifierKind> {
        Some(match self {
            Self::MultinomialNb { .. } => ClassifierKind::MultinomialNb,
            Self::BernoulliNb { .. } => ClassifierKind::BernoulliNb,
            Self::LogisticRegression(_) => ClassifierKind::LogisticRegression,
            Self::LinearSvm(_) => ClassifierKind::LinearSvm,
            Self::DecisionTree(_) => ClassifierKind::DecisionTree,
            Self::RandomForest(_) => ClassifierKind::RandomForest,
            Self::Lstm { .. } => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        self.classifier_kind().map_or("lstm", ClassifierKind::as_str)
    }

    pub fn is_lstm(&self) -> bool {
        matches!(self, Self::Lstm { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Classical { vectorizer: Vectorizer, model: ClassifierModel },
    Lstm { embeddings: Arc<EmbeddingTable>, model: LstmModel },
}

impl TrainedModel {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Classical { model, .. } => model.kind().as_str(),
            Self::Lstm { .. } => "lstm",
        }
    }

    /// Predicts from already-selected, normalized tokens.
    pub fn predict_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Prediction, PipelineError> {
        match self {
            Self::Classical { vectorizer, model } => Ok(model.predict(&vectorizer.transform(tokens))?),
            Self::Lstm { embeddings, model } => Ok(model.predict(tokens, embeddings)?),
        }
    }
}

/// Fits the vectorizer (classical kinds only) and the model on `docs`.
pub fn train<S: AsRef<str>>(
    spec: &ModelSpec,
    vectorizer: &VectorizerConfig,
    docs: &[Vec<S>],
    labels: &[Gender],
) -> Result<TrainedModel, PipelineError> {
    if docs.len() != labels.len() {
        return Err(PipelineError::LengthMismatch { docs: docs.len(), labels: labels.len() });
    }
    if let ModelSpec::Lstm { config, embeddings } = spec {
        let model = lstm::train_lstm(docs, labels, embeddings, config)?;
        return Ok(TrainedModel::Lstm { embeddings: Arc::clone(embeddings), model });
    }
    let vec = Vectorizer::fit(docs, *vectorizer)?;
    let rows = docs.iter().map(|d| vec.transform(d)).collect();
    let data = LabeledMatrix::new(rows, labels.to_vec(), vec.n_features())?;
    let model = match spec {
        ModelSpec::MultinomialNb { alpha } => models::fit_multinomial_nb(&data, *alpha)?,
        ModelSpec::BernoulliNb { alpha } => models::fit_bernoulli_nb(&data, *alpha)?,
        ModelSpec::LogisticRegression(c) => models::fit_logistic_regression(&data, c)?,
        ModelSpec::LinearSvm(c) => models::fit_linear_svm(&data, c)?,
        ModelSpec::DecisionTree(c) => models::fit_decision_tree(&data, c)?,
        ModelSpec::RandomForest(c) => models::fit_random_forest(&data, c)?,
        ModelSpec::Lstm { .. } => unreachable!("handled above"),
    };
    Ok(TrainedModel::Classical { vectorizer: vec, model })
}

/// Short column name such as `linear_svm+count`, or `lstm`.
pub fn arm_name(spec: &ModelSpec, vectorizer: &VectorizerConfig) -> String {
    if spec.is_lstm() {
        String::from("lstm")
    } else {
        alloc::format!("{}+{}", spec.name(), vectorizer.mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn docs() -> (Vec<Vec<&'static str>>, Vec<Gender>) {
        (
            vec![vec!["văn", "an"], vec!["thị", "an"], vec!["văn", "bình"], vec!["thị", "hoa"]],
            vec![Gender::Male, Gender::Female, Gender::Male, Gender::Female],
        )
    }

    #[test]
    fn every_classical_kind_trains_and_predicts() {
        let (d, y) = docs();
        for kind in ClassifierKind::ALL {
            let spec = ModelSpec::classical(kind, 1);
            let m = train(&spec, &VectorizerConfig::count(), &d, &y).unwrap();
            assert_eq!(m.name(), kind.as_str());
            assert_eq!(m.predict_tokens(&["văn", "hoa"]).unwrap().label, Gender::Male, "{kind}");
            assert_eq!(m.predict_tokens(&["thị", "bình"]).unwrap().label, Gender::Female, "{kind}");
        }
    }

    #[test]
    fn unseen_tokens_use_an_empty_vector() {
        let (d, y) = docs();
        let m = train(&ModelSpec::classical(ClassifierKind::MultinomialNb, 0), &VectorizerConfig::tfidf(), &d, &y).unwrap();
        assert!(m.predict_tokens(&["xyz"]).unwrap().score.is_finite());
    }

    #[test]
    fn lstm_spec_ignores_the_vectorizer() {
        let (d, y) = docs();
        let emb = Arc::new(EmbeddingTable::new(4, 3).unwrap());
        let cfg = LstmTrainConfig { hidden: 3, batch_size: 2, epochs: 1, ..LstmTrainConfig::default() };
        let m = train(&ModelSpec::lstm(cfg, emb), &VectorizerConfig::count(), &d, &y).unwrap();
        assert_eq!(m.name(), "lstm");
        let p = m.predict_tokens(&["văn"]).unwrap().score;
        assert!(p > 0.0 && p < 1.0);
        assert!(matches!(m.predict_tokens::<&str>(&[]), Err(PipelineError::Lstm(LstmError::EmptySequence))));
    }

    #[test]
    fn arm_names() {
        let emb = Arc::new(EmbeddingTable::new(2, 0).unwrap());
        assert_eq!(arm_name(&ModelSpec::classical(ClassifierKind::LinearSvm, 0), &VectorizerConfig::count()), "linear_svm+count");
        assert_eq!(arm_name(&ModelSpec::lstm(LstmTrainConfig::default(), emb), &VectorizerConfig::tfidf()), "lstm");
    }
}
