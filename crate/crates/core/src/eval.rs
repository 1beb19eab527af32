//! Stratified splitting, confusion matrices, macro metrics and the
//! component ablation.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, DatasetRecord, Gender};
use crate::featurize::VectorizerConfig;
use crate::names::{self, ComponentMask, NameError};
use crate::pipeline::{self, ModelSpec, PipelineError, TrainedModel};
use crate::rng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("invalid split: {0}")]
    InvalidSplit(&'static str),
    #[error("label {label} has {count} records; at least 3 are needed")]
    TooFewRecords { label: Gender, count: usize },
    #[error("{truth} true labels but {predicted} predictions")]
    LengthMismatch { truth: usize, predicted: usize },
    #[error("nothing to evaluate")]
    Empty,
    #[error("mask {mask} leaves no usable {subset} records")]
    NoUsableRecords { mask: ComponentMask, subset: &'static str },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

impl From<NameError> for EvalError {
    fn from(e: NameError) -> Self {
        Self::Pipeline(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub dev_frac: f64,
    pub test_frac: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { train_frac: 0.7, dev_frac: 0.1, test_frac: 0.2, seed: 0 }
    }
}

impl SplitSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        let f = [self.train_frac, self.dev_frac, self.test_frac];
        if f.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
            return Err(EvalError::InvalidSplit("fractions must be positive"));
        }
        if (f.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(EvalError::InvalidSplit("fractions must sum to 1"));
        }
        Ok(())
    }

    /// Per-label cut points `(⌊n·train⌋, ⌊n·(train+dev)⌋)`.
    pub fn cuts(&self, n: usize) -> (usize, usize) {
        (floor_frac(n, self.train_frac), floor_frac(n, self.train_frac + self.dev_frac))
    }
}

// ⌊n·f⌋, treating products within rounding noise of an integer as that
// integer (0.7 + 0.1 is 0.7999…9 in binary).
fn floor_frac(n: usize, f: f64) -> usize {
    let x = n as f64 * f;
    let r = crate::math::round(x);
    if (x - r).abs() <= 1e-9 * (n.max(1) as f64) {
        r as usize
    } else {
        crate::math::floor(x) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Dataset,
    pub dev: Dataset,
    pub test: Dataset,
}

/// Per label: shuffle, cut, then merge the pieces and reshuffle each subset.
pub fn stratified_split(d: &Dataset, spec: &SplitSpec) -> Result<Split, EvalError> {
    spec.validate()?;
    let mut parts: [Vec<DatasetRecord>; 3] = Default::default();
    for label in [Gender::Female, Gender::Male] {
        let mut recs: Vec<DatasetRecord> = d.records.iter().filter(|r| r.gender == label).cloned().collect();
        if recs.len() < 3 {
            return Err(EvalError::TooFewRecords { label, count: recs.len() });
        }
        recs.shuffle(&mut rng::seeded(rng::derive(spec.seed, 1 + label.as_u8() as u64)));
        let (a, b) = spec.cuts(recs.len());
        let test = recs.split_off(b);
        let dev = recs.split_off(a);
        parts[0].extend(recs);
        parts[1].extend(dev);
        parts[2].extend(test);
    }
    let [train, dev, test] = parts;
    let finish = |mut recs: Vec<DatasetRecord>, i: u64, name: &str| {
        recs.shuffle(&mut rng::seeded(rng::derive(spec.seed, 10 + i)));
        Dataset::new(recs, alloc::format!("{}:{name}", d.source_tag))
    };
    Ok(Split { train: finish(train, 0, "train"), dev: finish(dev, 1, "dev"), test: finish(test, 2, "test") })
}

/// Counts with male (label 1) as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn add(&mut self, truth: Gender, predicted: Gender) {
        match (truth.is_male(), predicted.is_male()) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (false, false) => self.tn += 1,
            (true, false) => self.fn_ += 1,
        }
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }
}

pub fn confusion(y_true: &[Gender], y_pred: &[Gender]) -> Result<ConfusionMatrix, EvalError> {
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch { truth: y_true.len(), predicted: y_pred.len() });
    }
    if y_true.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        cm.add(t, p);
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MacroMetrics {
    pub male: ClassMetrics,
    pub female: ClassMetrics,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
}

// 0/0 is 0.
fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn class_metrics(tp: usize, fp: usize, fn_: usize) -> ClassMetrics {
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    ClassMetrics { precision, recall, f1, support: tp + fn_ }
}

pub fn macro_metrics(cm: &ConfusionMatrix) -> Result<MacroMetrics, EvalError> {
    if cm.total() == 0 {
        return Err(EvalError::Empty);
    }
    let male = class_metrics(cm.tp, cm.fp, cm.fn_);
    let female = class_metrics(cm.tn, cm.fn_, cm.fp);
    Ok(MacroMetrics {
        male,
        female,
        macro_precision: (male.precision + female.precision) / 2.0,
        macro_recall: (male.recall + female.recall) / 2.0,
        macro_f1: (male.f1 + female.f1) / 2.0,
        accuracy: cm.accuracy(),
    })
}

/// Macro F1 of always predicting the more frequent label (ties: male).
pub fn majority_baseline_f1(y_true: &[Gender]) -> Result<f64, EvalError> {
    let male = y_true.iter().filter(|g| g.is_male()).count();
    let guess = Gender::from_bool(2 * male >= y_true.len());
    let preds: Vec<Gender> = y_true.iter().map(|_| guess).collect();
    Ok(macro_metrics(&confusion(y_true, &preds)?)?.macro_f1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Misclassified {
    /// Selected components joined by spaces.
    pub text: String,
    pub truth: Gender,
    pub predicted: Gender,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub mask: ComponentMask,
    pub model: String,
    pub metrics: MacroMetrics,
    pub confusion: ConfusionMatrix,
    pub misclassified: Vec<Misclassified>,
    /// Records across all three subsets whose selection under `mask` is empty.
    pub skipped: usize,
    pub n_train: usize,
    pub n_test: usize,
}

/// Tokens selected by `mask` for each record; empty selections are dropped
/// and counted.
pub fn select_tokens(d: &Dataset, mask: ComponentMask) -> Result<(Vec<Vec<String>>, Vec<Gender>, usize), EvalError> {
    let mut docs = Vec::with_capacity(d.len());
    let mut labels = Vec::with_capacity(d.len());
    let mut skipped = 0;
    for r in &d.records {
        let parsed = names::parse(&r.full_name)?;
        match names::select_components(&parsed, mask) {
            Ok(t) => {
                docs.push(t);
                labels.push(r.gender);
            }
            Err(NameError::EmptySelection(_)) => skipped += 1,
            Err(e) => return Err(e.into()),
        }
    }
    Ok((docs, labels, skipped))
}

/// Trains on `split.train` and scores `split.test`; the dev subset is only
/// counted for skips.
pub fn train_and_evaluate(
    split: &Split,
    mask: ComponentMask,
    spec: &ModelSpec,
    vectorizer: &VectorizerConfig,
) -> Result<(TrainedModel, ExperimentResult), EvalError> {
    let (train_docs, train_labels, skip_train) = select_tokens(&split.train, mask)?;
    let (_, _, skip_dev) = select_tokens(&split.dev, mask)?;
    let (test_docs, test_labels, skip_test) = select_tokens(&split.test, mask)?;
    if train_docs.is_empty() {
        return Err(EvalError::NoUsableRecords { mask, subset: "train" });
    }
    if test_docs.is_empty() {
        return Err(EvalError::NoUsableRecords { mask, subset: "test" });
    }
    let model = pipeline::train(spec, vectorizer, &train_docs, &train_labels)?;
    let mut cm = ConfusionMatrix::default();
    let mut misclassified = Vec::new();
    for (doc, &truth) in test_docs.iter().zip(&test_labels) {
        let p = model.predict_tokens(doc)?;
        cm.add(truth, p.label);
        if p.label != truth {
            misclassified.push(Misclassified { text: doc.join(" "), truth, predicted: p.label, score: p.score });
        }
    }
    let result = ExperimentResult {
        mask,
        model: pipeline::arm_name(spec, vectorizer),
        metrics: macro_metrics(&cm)?,
        confusion: cm,
        misclassified,
        skipped: skip_train + skip_dev + skip_test,
        n_train: train_docs.len(),
        n_test: test_docs.len(),
    };
    Ok((model, result))
}

/// split → select → fit vectorizer on train → train → score test.
pub fn run_experiment(
    d: &Dataset,
    mask: ComponentMask,
    spec: &ModelSpec,
    vectorizer: &VectorizerConfig,
    split: &SplitSpec,
) -> Result<ExperimentResult, EvalError> {
    let s = stratified_split(d, split)?;
    Ok(train_and_evaluate(&s, mask, spec, vectorizer)?.1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationCell {
    pub mask: ComponentMask,
    pub model: String,
    pub metrics: MacroMetrics,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub masks: Vec<ComponentMask>,
    pub models: Vec<String>,
    /// Mask-major: `cells[m * models.len() + k]`.
    pub cells: Vec<AblationCell>,
    /// Skipped-record count per mask, aligned with `masks`.
    pub skipped: Vec<usize>,
    pub split: SplitSpec,
}

impl AblationReport {
    pub fn cell(&self, mask: ComponentMask, model: &str) -> Option<&AblationCell> {
        self.cells.iter().find(|c| c.mask == mask && c.model == model)
    }

    /// Mean macro F1 over models for one mask.
    pub fn mask_average(&self, mask: ComponentMask) -> Option<f64> {
        let v: Vec<f64> = self.cells.iter().filter(|c| c.mask == mask).map(|c| c.metrics.macro_f1).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Every mask in [`ComponentMask::ALL`] × every (model, vectorizer) arm, all
/// on one shared split.
pub fn run_ablation(d: &Dataset, arms: &[(ModelSpec, VectorizerConfig)], split: &SplitSpec) -> Result<AblationReport, EvalError> {
    run_ablation_masks(d, &ComponentMask::ALL, arms, split)
}

pub fn run_ablation_masks(
    d: &Dataset,
    masks: &[ComponentMask],
    arms: &[(ModelSpec, VectorizerConfig)],
    split: &SplitSpec,
) -> Result<AblationReport, EvalError> {
    let s = stratified_split(d, split)?;
    let mut cells = Vec::with_capacity(masks.len() * arms.len());
    let mut skipped = Vec::with_capacity(masks.len());
    for &mask in masks {
        let mut mask_skipped = None;
        for (spec, vcfg) in arms {
            let (_, r) = train_and_evaluate(&s, mask, spec, vcfg)?;
            mask_skipped = Some(r.skipped);
            cells.push(AblationCell { mask, model: r.model, metrics: r.metrics, confusion: r.confusion });
        }
        let n = match mask_skipped {
            Some(n) => n,
            None => [&s.train, &s.dev, &s.test].iter().map(|d| select_tokens(d, mask).map(|t| t.2)).sum::<Result<_, _>>()?,
        };
        skipped.push(n);
    }
    Ok(AblationReport {
        masks: masks.to_vec(),
        models: arms.iter().map(|(m, v)| pipeline::arm_name(m, v)).collect(),
        cells,
        skipped,
        split: *split,
    })
}
