//! Multinomial and Bernoulli naive Bayes with additive smoothing.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{ClassifierModel, ClassifierParams, LabeledMatrix, ModelError, TrainMeta};
use crate::featurize::SparseVector;
use crate::math;

/// Smoothing below this is raised to it, so every likelihood stays finite.
pub const MIN_ALPHA: f64 = 1e-10;

fn effective_alpha(alpha: f64) -> Result<f64, ModelError> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(ModelError::InvalidConfig(format!("alpha must be a finite value >= 0, got {alpha}")));
    }
    Ok(alpha.max(MIN_ALPHA))
}

fn class_log_prior(data: &LabeledMatrix) -> [f64; 2] {
    let [f, m] = data.class_counts();
    let n = data.len() as f64;
    [math::ln(f as f64 / n), math::ln(m as f64 / n)]
}

// P(male | x) from the two joint log-likelihoods.
fn posterior(joint: [f64; 2]) -> f64 {
    math::sigmoid(joint[1] - joint[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultinomialNb {
    pub alpha: f64,
    pub class_log_prior: [f64; 2],
    /// `ln θ[c][f]`, θ = (count(c, f) + α) / (count(c) + α·F).
    pub feature_log_prob: [Vec<f64>; 2],
}

impl MultinomialNb {
    pub fn joint_log_likelihood(&self, x: &SparseVector) -> [f64; 2] {
        [0, 1].map(|c| self.class_log_prior[c] + x.dot(&self.feature_log_prob[c]))
    }

    pub fn posterior_male(&self, x: &SparseVector) -> f64 {
        posterior(self.joint_log_likelihood(x))
    }
}

pub fn fit_multinomial_nb(data: &LabeledMatrix, alpha: f64) -> Result<ClassifierModel, ModelError> {
    let alpha = effective_alpha(alpha)?;
    data.require_both_classes()?;
    let nf = data.n_features();
    let mut counts = [vec![0.0; nf], vec![0.0; nf]];
    for (row, label) in data.rows().iter().zip(data.labels()) {
        let c = &mut counts[label.as_u8() as usize];
        for (i, w) in row.iter() {
            c[i] += w;
        }
    }
    let feature_log_prob = counts.map(|c| {
        let denom = c.iter().sum::<f64>() + alpha * nf as f64;
        c.into_iter().map(|n| math::ln((n + alpha) / denom)).collect()
    });
    Ok(ClassifierModel {
        n_features: nf,
        params: ClassifierParams::MultinomialNb(MultinomialNb {
            alpha,
            class_log_prior: class_log_prior(data),
            feature_log_prob,
        }),
        train_meta: TrainMeta { config: vec![("alpha".to_string(), alpha.to_string())], ..TrainMeta::default() },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliNb {
    pub alpha: f64,
    pub class_log_prior: [f64; 2],
    /// `ln p[c][f]`, p = (docs(c) containing f + α) / (docs(c) + 2α).
    pub log_present: [Vec<f64>; 2],
    pub log_absent: [Vec<f64>; 2],
    /// Σ_f ln(1 − p[c][f]): the score of an all-absent document.
    pub absent_total: [f64; 2],
}

impl BernoulliNb {
    pub fn joint_log_likelihood(&self, x: &SparseVector) -> [f64; 2] {
        [0, 1].map(|c| {
            let mut s = self.class_log_prior[c] + self.absent_total[c];
            for (i, w) in x.iter() {
                if w > 0.0 {
                    s += self.log_present[c][i] - self.log_absent[c][i];
                }
            }
            s
        })
    }

    pub fn posterior_male(&self, x: &SparseVector) -> f64 {
        posterior(self.joint_log_likelihood(x))
    }
}

/// Features are binarized (`> 0` is present); absent features contribute
/// their `1 − p` factor.
pub fn fit_bernoulli_nb(data: &LabeledMatrix, alpha: f64) -> Result<ClassifierModel, ModelError> {
    let alpha = effective_alpha(alpha)?;
    data.require_both_classes()?;
    let nf = data.n_features();
    let docs = data.class_counts();
    let mut present = [vec![0usize; nf], vec![0usize; nf]];
    for (row, label) in data.rows().iter().zip(data.labels()) {
        let c = &mut present[label.as_u8() as usize];
        for (i, w) in row.iter() {
            if w > 0.0 {
                c[i] += 1;
            }
        }
    }
    let mut log_present = [Vec::new(), Vec::new()];
    let mut log_absent = [Vec::new(), Vec::new()];
    let mut absent_total = [0.0; 2];
    for c in 0..2 {
        let denom = docs[c] as f64 + 2.0 * alpha;
        for &k in &present[c] {
            let p = (k as f64 + alpha) / denom;
            log_present[c].push(math::ln(p));
            // (docs - k + α) / denom, computed directly to keep 1 − p exact
            let q = ((docs[c] - k) as f64 + alpha) / denom;
            log_absent[c].push(math::ln(q));
        }
        absent_total[c] = log_absent[c].iter().sum();
    }
    Ok(ClassifierModel {
        n_features: nf,
        params: ClassifierParams::BernoulliNb(BernoulliNb {
            alpha,
            class_log_prior: class_log_prior(data),
            log_present,
            log_absent,
            absent_total,
        }),
        train_meta: TrainMeta { config: vec![("alpha".to_string(), alpha.to_string())], ..TrainMeta::default() },
    })
}
