//! Linear models: L2-regularized logistic regression by full-batch gradient
//! descent and a linear SVM by stochastic subgradient descent on the hinge
//! loss.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{ClassifierModel, ClassifierParams, LabeledMatrix, ModelError, TrainMeta};
use crate::featurize::SparseVector;
use crate::{math, rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn zeros(n_features: usize) -> Self {
        Self { weights: vec![0.0; n_features], bias: 0.0 }
    }

    pub fn margin(&self, x: &SparseVector) -> f64 {
        x.dot(&self.weights) + self.bias
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub l2: f64,
    pub lr: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self { l2: 1e-4, lr: 0.1, max_iter: 1000, tol: 1e-6 }
    }
}

/// Mean log-loss plus `(l2 / 2)·‖w‖²` (bias unpenalized), with its gradient
/// with respect to the weights and the bias.
pub fn logistic_objective(data: &LabeledMatrix, model: &LinearModel, l2: f64) -> (f64, Vec<f64>, f64) {
    let n = data.len().max(1) as f64;
    let mut loss = 0.0;
    let mut grad: Vec<f64> = model.weights.iter().map(|w| l2 * w).collect();
    let mut grad_b = 0.0;
    for (x, y) in data.rows().iter().zip(data.labels()) {
        let z = model.margin(x);
        let y = if y.is_male() { 1.0 } else { 0.0 };
        loss += math::softplus(z) - y * z;
        let r = (math::sigmoid(z) - y) / n;
        for (i, v) in x.iter() {
            grad[i] += r * v;
        }
        grad_b += r;
    }
    let penalty = 0.5 * l2 * model.weights.iter().map(|w| w * w).sum::<f64>();
    (loss / n + penalty, grad, grad_b)
}

pub fn fit_logistic_regression(data: &LabeledMatrix, cfg: &LogisticConfig) -> Result<ClassifierModel, ModelError> {
    if cfg.max_iter == 0 {
        return Err(ModelError::InvalidConfig("max_iter must be at least 1".to_string()));
    }
    if !(cfg.l2 >= 0.0) || !(cfg.lr > 0.0) {
        return Err(ModelError::InvalidConfig(format!("need l2 >= 0 and lr > 0 (got {}, {})", cfg.l2, cfg.lr)));
    }
    if data.is_empty() {
        return Err(ModelError::EmptyData);
    }
    let mut model = LinearModel::zeros(data.n_features());
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for iteration in 0..cfg.max_iter {
        let (loss, grad, grad_b) = logistic_objective(data, &model, cfg.l2);
        if !loss.is_finite() {
            return Err(ModelError::Diverged { iteration, what: "loss" });
        }
        trace.push(loss);
        let gmax = grad.iter().fold(grad_b.abs(), |m, g| m.max(g.abs()));
        if gmax < cfg.tol {
            converged = true;
            break;
        }
        for (w, g) in model.weights.iter_mut().zip(&grad) {
            *w -= cfg.lr * g;
        }
        model.bias -= cfg.lr * grad_b;
        iterations = iteration + 1;
    }
    Ok(ClassifierModel {
        n_features: data.n_features(),
        params: ClassifierParams::LogisticRegression(model),
        train_meta: TrainMeta {
            config: vec![
                ("l2".to_string(), cfg.l2.to_string()),
                ("lr".to_string(), cfg.lr.to_string()),
                ("max_iter".to_string(), cfg.max_iter.to_string()),
                ("tol".to_string(), cfg.tol.to_string()),
            ],
            seed: None,
            iterations,
            converged: Some(converged),
            objective_trace: trace,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// Weight of the summed hinge loss against `½‖w‖²`.
    pub c: f64,
    /// Initial step; step `t` (1-based, counted over all updates) is `lr / t`.
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self { c: 1.0, lr: 1.0, epochs: 50, seed: 0 }
    }
}

/// `½‖w‖² + c·Σ max(0, 1 − y(w·x + b))` with labels mapped to ±1.
pub fn svm_objective(data: &LabeledMatrix, model: &LinearModel, c: f64) -> f64 {
    let hinge: f64 = data
        .rows()
        .iter()
        .zip(data.labels())
        .map(|(x, g)| {
            let y = if g.is_male() { 1.0 } else { -1.0 };
            (1.0 - y * model.margin(x)).max(0.0)
        })
        .sum();
    0.5 * model.weights.iter().map(|w| w * w).sum::<f64>() + c * hinge
}

/// One stochastic subgradient step on sample `(x, y)` of the per-sample
/// objective `½‖w‖² + c·n·hinge`, whose mean over the `n` samples is the
/// full objective divided by `n`. With `eta = 1/t` this is Pegasos with
/// `λ = 1/(c·n)`.
pub fn svm_step(model: &mut LinearModel, x: &SparseVector, y: f64, c: f64, eta: f64, n: usize) {
    let active = y * model.margin(x) < 1.0;
    let shrink = (1.0 - eta).max(0.0);
    if shrink != 1.0 {
        for w in &mut model.weights {
            *w *= shrink;
        }
    }
    if active && c != 0.0 {
        let step = eta * c * n as f64 * y;
        for (i, v) in x.iter() {
            model.weights[i] += step * v;
        }
        model.bias += step;
    }
}

pub fn fit_linear_svm(data: &LabeledMatrix, cfg: &SvmConfig) -> Result<ClassifierModel, ModelError> {
    if cfg.epochs == 0 {
        return Err(ModelError::InvalidConfig("epochs must be at least 1".to_string()));
    }
    if !(cfg.c >= 0.0) || !(cfg.lr > 0.0) {
        return Err(ModelError::InvalidConfig(format!("need c >= 0 and lr > 0 (got {}, {})", cfg.c, cfg.lr)));
    }
    if data.is_empty() {
        return Err(ModelError::EmptyData);
    }
    let n = data.len();
    let mut model = LinearModel::zeros(data.n_features());
    let mut order: Vec<usize> = (0..n).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut t = 0usize;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng::seeded(rng::derive(cfg.seed, epoch as u64)));
        for &i in &order {
            t += 1;
            let y = if data.labels()[i].is_male() { 1.0 } else { -1.0 };
            svm_step(&mut model, &data.rows()[i], y, cfg.c, cfg.lr / t as f64, n);
        }
        if !model.bias.is_finite() || model.weights.iter().any(|w| !w.is_finite()) {
            return Err(ModelError::Diverged { iteration: epoch, what: "weights" });
        }
        trace.push(svm_objective(data, &model, cfg.c));
    }
    Ok(ClassifierModel {
        n_features: data.n_features(),
        params: ClassifierParams::LinearSvm(model),
        train_meta: TrainMeta {
            config: vec![
                ("c".to_string(), cfg.c.to_string()),
                ("lr".to_string(), cfg.lr.to_string()),
                ("epochs".to_string(), cfg.epochs.to_string()),
            ],
            seed: Some(cfg.seed),
            iterations: t,
            converged: None,
            objective_trace: trace,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Gender;
    use crate::models::testutil::matrix;
    use rand::Rng;

    fn random_instance(seed: u64, rows: usize, nf: usize) -> LabeledMatrix {
        let mut r = rng::seeded(seed);
        let dense: Vec<Vec<f64>> = (0..rows)
            .map(|_| (0..nf).map(|_| if r.random_bool(0.6) { r.random_range(0.0..3.0) } else { 0.0 }).collect())
            .collect();
        let labels: Vec<u8> = (0..rows).map(|i| (i % 2) as u8).collect();
        let refs: Vec<&[f64]> = dense.iter().map(Vec::as_slice).collect();
        matrix(&refs, &labels)
    }

    #[test]
    fn logistic_gradient_matches_finite_differences() {
        let h = 1e-5;
        for seed in 0..20 {
            let data = random_instance(seed, 12, 5);
            let mut r = rng::seeded(seed + 100);
            let model = LinearModel {
                weights: (0..5).map(|_| r.random_range(-1.0..1.0)).collect(),
                bias: r.random_range(-1.0..1.0),
            };
            let l2 = 0.3;
            let (_, grad, grad_b) = logistic_objective(&data, &model, l2);
            for i in 0..=5 {
                let eval = |delta: f64| {
                    let mut m = model.clone();
                    if i < 5 {
                        m.weights[i] += delta;
                    } else {
                        m.bias += delta;
                    }
                    logistic_objective(&data, &m, l2).0
                };
                let numeric = (eval(h) - eval(-h)) / (2.0 * h);
                let analytic = if i < 5 { grad[i] } else { grad_b };
                let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-8);
                assert!(rel <= 1e-6, "seed {seed} param {i}: {analytic} vs {numeric}");
            }
        }
    }

    #[test]
    fn zero_weights_score_half() {
        let data = matrix(&[&[1.0], &[0.0]], &[1, 0]);
        let cfg = LogisticConfig { max_iter: 1, tol: 1e9, ..LogisticConfig::default() };
        let m = fit_logistic_regression(&data, &cfg).unwrap();
        let p = m.predict(&SparseVector::from_dense(&[3.0])).unwrap();
        assert_eq!(p.score, 0.5);
        assert_eq!(p.label, Gender::Male);
        assert_eq!(m.train_meta.converged, Some(true));
    }

    #[test]
    fn logistic_separable_points() {
        let data = matrix(&[&[1.0], &[0.0]], &[1, 0]);
        let cfg = LogisticConfig { l2: 0.0, lr: 1.0, max_iter: 5000, tol: 1e-6 };
        let m = fit_logistic_regression(&data, &cfg).unwrap();
        assert_eq!(m.predict(&SparseVector::from_dense(&[1.0])).unwrap().label, Gender::Male);
        assert_eq!(m.predict(&SparseVector::from_dense(&[0.0])).unwrap().label, Gender::Female);
    }

    #[test]
    fn logistic_divergence_is_reported() {
        let data = matrix(&[&[1e300], &[0.0]], &[1, 0]);
        let cfg = LogisticConfig { l2: 0.0, lr: 1e300, max_iter: 50, tol: 0.0 };
        assert!(matches!(fit_logistic_regression(&data, &cfg), Err(ModelError::Diverged { .. })));
        let zero = LogisticConfig { max_iter: 0, ..LogisticConfig::default() };
        assert!(matches!(fit_logistic_regression(&data, &zero), Err(ModelError::InvalidConfig(_))));
    }

    #[test]
    fn svm_separates_two_points() {
        let data = matrix(&[&[1.0, 0.0], &[0.0, 1.0]], &[1, 0]);
        let m = fit_linear_svm(&data, &SvmConfig::default()).unwrap();
        let a = m.predict(&SparseVector::from_dense(&[1.0, 0.0])).unwrap();
        let b = m.predict(&SparseVector::from_dense(&[0.0, 1.0])).unwrap();
        assert_eq!((a.label, b.label), (Gender::Male, Gender::Female));
        assert!(a.score > 0.0 && b.score < 0.0);
    }

    #[test]
    fn svm_without_hinge_only_shrinks() {
        let mut model = LinearModel { weights: vec![2.0, -1.0], bias: 0.0 };
        let x = SparseVector::from_dense(&[1.0, 1.0]);
        let before: f64 = model.weights.iter().map(|w| w * w).sum();
        svm_step(&mut model, &x, -1.0, 0.0, 0.5, 4);
        let after: f64 = model.weights.iter().map(|w| w * w).sum();
        assert!(after < before);
        assert_eq!(model.weights, vec![1.0, -0.5]);

        let data = matrix(&[&[1.0, 0.0], &[0.0, 1.0]], &[1, 0]);
        let m = fit_linear_svm(&data, &SvmConfig { c: 0.0, ..SvmConfig::default() }).unwrap();
        let ClassifierParams::LinearSvm(lm) = &m.params else { unreachable!() };
        assert!(lm.weights.iter().all(|&w| w == 0.0));
    }

    #[test]
    fn svm_zero_vector_scores_bias() {
        let data = matrix(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 2.0]], &[1, 0, 0]);
        let m = fit_linear_svm(&data, &SvmConfig::default()).unwrap();
        let ClassifierParams::LinearSvm(lm) = &m.params else { unreachable!() };
        let p = m.predict(&SparseVector::new()).unwrap();
        assert_eq!(p.score, lm.bias);
        assert_eq!(p.label, Gender::from_bool(lm.bias >= 0.0));
    }

    #[test]
    fn svm_running_mean_objective_does_not_increase() {
        let mut r = rng::seeded(20);
        let dense: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                vec![s * r.random_range(0.5..2.0) + r.random_range(-0.8..0.8), r.random_range(-1.0..1.0)]
            })
            .collect();
        let labels: Vec<u8> = (0..20).map(|i| u8::from(i % 2 == 0)).collect();
        let refs: Vec<&[f64]> = dense.iter().map(Vec::as_slice).collect();
        let data = matrix(&refs, &labels);
        let cfg = SvmConfig { c: 1.0, lr: 1.0, epochs: 30, seed: 3 };
        let m = fit_linear_svm(&data, &cfg).unwrap();
        let trace = &m.train_meta.objective_trace;
        let mut sum = 0.0;
        let mut prev = f64::INFINITY;
        for (k, j) in trace.iter().enumerate() {
            sum += j;
            let avg = sum / (k + 1) as f64;
            assert!(avg <= prev + 1e-3, "epoch {k}: {avg} > {prev}");
            prev = avg;
        }
    }

    #[test]
    fn svm_is_deterministic() {
        let data = random_instance(5, 30, 4);
        let cfg = SvmConfig { seed: 9, ..SvmConfig::default() };
        assert_eq!(fit_linear_svm(&data, &cfg).unwrap(), fit_linear_svm(&data, &cfg).unwrap());
    }
}
