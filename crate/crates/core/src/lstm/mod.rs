//! Single-layer LSTM over name-token embeddings with a logistic output on
//! the final hidden state, trained by mini-batch SGD with hand-written BPTT.
//!
//! Per step, with gates in the order input (i), forget (f), output (o) and
//! cell candidate (g):
//!
//! ```text
//! i = σ(W_i x + U_i h + b_i)    f = σ(W_f x + U_f h + b_f)
//! o = σ(W_o x + U_o h + b_o)    g = tanh(W_c x + U_c h + b_c)
//! c' = f ⊙ c + i ⊙ g            h' = o ⊙ tanh(c')
//! ```
//!
//! and `p = σ(v·h_T + c_out)`. Embeddings are frozen.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::Gender;
use crate::math::{self, sigmoid};
use crate::models::Prediction;
use crate::rng;

mod embedding;

pub use embedding::{EmbeddingError, EmbeddingTable, ParseReport, OOV_RANGE};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LstmError {
    #[error("token sequence is empty")]
    EmptySequence,
    #[error("training data needs both labels")]
    SingleClass,
    #[error("{sequences} sequences but {labels} labels")]
    LengthMismatch { sequences: usize, labels: usize },
    #[error("invalid LSTM configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("embedding width {embedding} does not match the model input width {model}")]
    DimMismatch { embedding: usize, model: usize },
    #[error("loss became non-finite at epoch {epoch}, batch {batch}")]
    Diverged { epoch: usize, batch: usize },
}

pub const GATE_I: usize = 0;
pub const GATE_F: usize = 1;
pub const GATE_O: usize = 2;
pub const GATE_C: usize = 3;
const GATE_NAMES: [&str; 4] = ["i", "f", "o", "c"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LstmTrainConfig {
    pub hidden: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Longer inputs keep only their last `max_seq_len` tokens.
    pub max_seq_len: usize,
    pub seed: u64,
}

impl Default for LstmTrainConfig {
    fn default() -> Self {
        Self { hidden: 128, batch_size: 32, epochs: 2, learning_rate: 0.5, max_seq_len: 8, seed: 0 }
    }
}

impl LstmTrainConfig {
    fn validate(&self) -> Result<(), LstmError> {
        if self.hidden == 0 {
            return Err(LstmError::InvalidConfig("hidden must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(LstmError::InvalidConfig("batch_size must be at least 1"));
        }
        if self.epochs == 0 {
            return Err(LstmError::InvalidConfig("epochs must be at least 1"));
        }
        if self.max_seq_len == 0 {
            return Err(LstmError::InvalidConfig("max_seq_len must be at least 1"));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(LstmError::InvalidConfig("learning_rate must be positive"));
        }
        Ok(())
    }
}

/// Gate matrices are row-major: `w[g]` is hidden × dim, `u[g]` hidden × hidden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    pub dim: usize,
    pub hidden: usize,
    pub w: [Vec<f64>; 4],
    pub u: [Vec<f64>; 4],
    pub b: [Vec<f64>; 4],
    pub v: Vec<f64>,
    pub c: f64,
}

impl LstmParams {
    pub fn zeros(dim: usize, hidden: usize) -> Self {
        Self {
            dim,
            hidden,
            w: core::array::from_fn(|_| vec![0.0; hidden * dim]),
            u: core::array::from_fn(|_| vec![0.0; hidden * hidden]),
            b: core::array::from_fn(|_| vec![0.0; hidden]),
            v: vec![0.0; hidden],
            c: 0.0,
        }
    }

    /// Uniform[-0.1, 0.1] everywhere except the forget-gate bias, which
    /// starts at 1.
    pub fn init(dim: usize, hidden: usize, seed: u64) -> Self {
        let mut r = rng::seeded(seed);
        let mut p = Self::zeros(dim, hidden);
        for (_, t) in p.tensors_mut() {
            for x in t.iter_mut() {
                *x = r.random_range(-0.1..=0.1);
            }
        }
        p.b[GATE_F].iter_mut().for_each(|x| *x = 1.0);
        p
    }

    /// Every parameter tensor with its name, in a fixed order.
    pub fn tensors(&self) -> Vec<(alloc::string::String, &[f64])> {
        let mut out = Vec::with_capacity(14);
        for g in 0..4 {
            out.push((alloc::format!("W_{}", GATE_NAMES[g]), self.w[g].as_slice()));
        }
        for g in 0..4 {
            out.push((alloc::format!("U_{}", GATE_NAMES[g]), self.u[g].as_slice()));
        }
        for g in 0..4 {
            out.push((alloc::format!("b_{}", GATE_NAMES[g]), self.b[g].as_slice()));
        }
        out.push(("v".into(), self.v.as_slice()));
        out.push(("c".into(), core::slice::from_ref(&self.c)));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        const NAMES: [&str; 12] = ["W_i", "W_f", "W_o", "W_c", "U_i", "U_f", "U_o", "U_c", "b_i", "b_f", "b_o", "b_c"];
        let mut out: Vec<(&'static str, &mut [f64])> = Vec::with_capacity(14);
        let mut names = NAMES.iter();
        for t in self.w.iter_mut().chain(self.u.iter_mut()).chain(self.b.iter_mut()) {
            out.push((names.next().expect("12 names"), t.as_mut_slice()));
        }
        out.push(("v", self.v.as_mut_slice()));
        out.push(("c", core::slice::from_mut(&mut self.c)));
        out
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, alpha: f64, other: &LstmParams) {
        for ((_, a), (_, b)) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += alpha * y;
            }
        }
    }

    pub fn fill_zero(&mut self) {
        for (_, t) in self.tensors_mut() {
            t.iter_mut().for_each(|x| *x = 0.0);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.iter().all(|x| x.is_finite()))
    }

    pub fn n_params(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }
}

// Four independent accumulators let the compiler vectorize.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

struct Step {
    gates: [Vec<f64>; 4],
    c: Vec<f64>,
    tanh_c: Vec<f64>,
}

struct Trace {
    steps: Vec<Step>,
    // h[0] = 0, h[t + 1] is the state after step t
    h: Vec<Vec<f64>>,
    logit: f64,
}

fn run_forward(xs: &[&[f64]], p: &LstmParams) -> Trace {
    let hn = p.hidden;
    let mut h = vec![vec![0.0; hn]];
    let mut c_prev = vec![0.0; hn];
    let mut steps = Vec::with_capacity(xs.len());
    for x in xs {
        let h_prev = h.last().expect("h0 present");
        let mut gates: [Vec<f64>; 4] = core::array::from_fn(|_| vec![0.0; hn]);
        for (g, out) in gates.iter_mut().enumerate() {
            for r in 0..hn {
                let a = dot(&p.w[g][r * p.dim..(r + 1) * p.dim], x)
                    + dot(&p.u[g][r * hn..(r + 1) * hn], h_prev)
                    + p.b[g][r];
                out[r] = if g == GATE_C { math::tanh(a) } else { sigmoid(a) };
            }
        }
        let mut c = vec![0.0; hn];
        let mut tanh_c = vec![0.0; hn];
        let mut h_next = vec![0.0; hn];
        for r in 0..hn {
            c[r] = gates[GATE_F][r] * c_prev[r] + gates[GATE_I][r] * gates[GATE_C][r];
            tanh_c[r] = math::tanh(c[r]);
            h_next[r] = gates[GATE_O][r] * tanh_c[r];
        }
        c_prev.clone_from(&c);
        h.push(h_next);
        steps.push(Step { gates, c, tanh_c });
    }
    let logit = dot(&p.v, h.last().expect("h0 present")) + p.c;
    Trace { steps, h, logit }
}

/// Binary cross-entropy of label `y` at logit `z`.
fn bce(z: f64, y: f64) -> f64 {
    math::softplus(z) - y * z
}

/// Probability of label 1 for an already-embedded sequence.
pub fn forward_vectors(xs: &[&[f64]], p: &LstmParams) -> Result<f64, LstmError> {
    if xs.is_empty() {
        return Err(LstmError::EmptySequence);
    }
    Ok(sigmoid(run_forward(xs, p).logit))
}

/// Cross-entropy loss of one embedded sequence.
pub fn sequence_loss(xs: &[&[f64]], label: Gender, p: &LstmParams) -> Result<f64, LstmError> {
    if xs.is_empty() {
        return Err(LstmError::EmptySequence);
    }
    Ok(bce(run_forward(xs, p).logit, if label.is_male() { 1.0 } else { 0.0 }))
}

/// Adds `scale · ∂loss/∂θ` for one sequence into `grad` and returns the loss.
pub fn accumulate_gradient(xs: &[&[f64]], label: Gender, p: &LstmParams, grad: &mut LstmParams, scale: f64) -> f64 {
    let hn = p.hidden;
    let y = if label.is_male() { 1.0 } else { 0.0 };
    let tr = run_forward(xs, p);
    let loss = bce(tr.logit, y);
    let dz = (sigmoid(tr.logit) - y) * scale;
    let h_last = tr.h.last().expect("h0 present");
    axpy(dz, h_last, &mut grad.v);
    grad.c += dz;

    let mut dh: Vec<f64> = p.v.iter().map(|v| v * dz).collect();
    let mut dc_next = vec![0.0; hn];
    let mut da: [Vec<f64>; 4] = core::array::from_fn(|_| vec![0.0; hn]);
    let zero_c = vec![0.0; hn];
    for t in (0..tr.steps.len()).rev() {
        let s = &tr.steps[t];
        let c_prev = if t == 0 { &zero_c } else { &tr.steps[t - 1].c };
        let [gi, gf, go, gg] = &s.gates;
        for r in 0..hn {
            let d_o = dh[r] * s.tanh_c[r];
            let dc = dc_next[r] + dh[r] * go[r] * (1.0 - s.tanh_c[r] * s.tanh_c[r]);
            let d_i = dc * gg[r];
            let d_g = dc * gi[r];
            let d_f = dc * c_prev[r];
            dc_next[r] = dc * gf[r];
            da[GATE_I][r] = d_i * gi[r] * (1.0 - gi[r]);
            da[GATE_F][r] = d_f * gf[r] * (1.0 - gf[r]);
            da[GATE_O][r] = d_o * go[r] * (1.0 - go[r]);
            da[GATE_C][r] = d_g * (1.0 - gg[r] * gg[r]);
        }
        let x = xs[t];
        let h_prev = &tr.h[t];
        dh.iter_mut().for_each(|d| *d = 0.0);
        for g in 0..4 {
            for r in 0..hn {
                let a = da[g][r];
                if a == 0.0 {
                    continue;
                }
                axpy(a, x, &mut grad.w[g][r * p.dim..(r + 1) * p.dim]);
                axpy(a, h_prev, &mut grad.u[g][r * hn..(r + 1) * hn]);
                grad.b[g][r] += a;
                axpy(a, &p.u[g][r * hn..(r + 1) * hn], &mut dh);
            }
        }
    }
    loss
}

/// Loss and full gradient for one embedded sequence.
pub fn sequence_gradient(xs: &[&[f64]], label: Gender, p: &LstmParams) -> Result<(f64, LstmParams), LstmError> {
    if xs.is_empty() {
        return Err(LstmError::EmptySequence);
    }
    let mut grad = LstmParams::zeros(p.dim, p.hidden);
    let loss = accumulate_gradient(xs, label, p, &mut grad, 1.0);
    Ok((loss, grad))
}

/// The last `max_len` tokens.
pub fn truncate_left<T>(tokens: &[T], max_len: usize) -> &[T] {
    &tokens[tokens.len().saturating_sub(max_len)..]
}

fn embed<S: AsRef<str>>(tokens: &[S], emb: &EmbeddingTable) -> Vec<Vec<f64>> {
    tokens.iter().map(|t| emb.vector(t.as_ref()).into_owned()).collect()
}

/// Probability of label 1 for `tokens` (no truncation).
pub fn lstm_forward<S: AsRef<str>>(tokens: &[S], emb: &EmbeddingTable, p: &LstmParams) -> Result<f64, LstmError> {
    if emb.dim() != p.dim {
        return Err(LstmError::DimMismatch { embedding: emb.dim(), model: p.dim });
    }
    let vecs = embed(tokens, emb);
    let xs: Vec<&[f64]> = vecs.iter().map(Vec::as_slice).collect();
    forward_vectors(&xs, p)
}

/// Label 1 iff the forward probability is at least 0.5.
pub fn predict_lstm<S: AsRef<str>>(tokens: &[S], emb: &EmbeddingTable, p: &LstmParams) -> Result<Prediction, LstmError> {
    lstm_forward(tokens, emb, p).map(Prediction::from_probability)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmModel {
    pub params: LstmParams,
    pub config: LstmTrainConfig,
    /// Mean training loss per epoch.
    pub loss_trace: Vec<f64>,
}

impl LstmModel {
    pub fn predict<S: AsRef<str>>(&self, tokens: &[S], emb: &EmbeddingTable) -> Result<Prediction, LstmError> {
        predict_lstm(truncate_left(tokens, self.config.max_seq_len), emb, &self.params)
    }
}

/// Trains from `LstmParams::init(emb.dim(), cfg.hidden, ..)`.
pub fn train_lstm<S: AsRef<str>>(
    sequences: &[Vec<S>],
    labels: &[Gender],
    emb: &EmbeddingTable,
    cfg: &LstmTrainConfig,
) -> Result<LstmModel, LstmError> {
    cfg.validate()?;
    let init = LstmParams::init(emb.dim(), cfg.hidden, rng::derive(cfg.seed, 0));
    train_lstm_from(sequences, labels, emb, cfg, init)
}

/// Mini-batch SGD on mean cross-entropy from the given initial parameters.
/// Batch order is reshuffled each epoch from `cfg.seed`.
pub fn train_lstm_from<S: AsRef<str>>(
    sequences: &[Vec<S>],
    labels: &[Gender],
    emb: &EmbeddingTable,
    cfg: &LstmTrainConfig,
    mut params: LstmParams,
) -> Result<LstmModel, LstmError> {
    cfg.validate()?;
    if sequences.len() != labels.len() {
        return Err(LstmError::LengthMismatch { sequences: sequences.len(), labels: labels.len() });
    }
    if emb.dim() != params.dim {
        return Err(LstmError::DimMismatch { embedding: emb.dim(), model: params.dim });
    }
    let male = labels.iter().filter(|g| g.is_male()).count();
    if male == 0 || male == labels.len() {
        return Err(LstmError::SingleClass);
    }
    let embedded: Vec<Vec<Vec<f64>>> = sequences
        .iter()
        .map(|s| {
            let s = truncate_left(s, cfg.max_seq_len);
            if s.is_empty() {
                Err(LstmError::EmptySequence)
            } else {
                Ok(embed(s, emb))
            }
        })
        .collect::<Result<_, _>>()?;

    let mut grad = LstmParams::zeros(params.dim, params.hidden);
    let mut order: Vec<usize> = (0..embedded.len()).collect();
    let mut loss_trace = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng::seeded(rng::derive(cfg.seed, 1 + epoch as u64)));
        let mut epoch_loss = 0.0;
        for (batch, idx) in order.chunks(cfg.batch_size).enumerate() {
            grad.fill_zero();
            let scale = 1.0 / idx.len() as f64;
            let mut batch_loss = 0.0;
            for &i in idx {
                let xs: Vec<&[f64]> = embedded[i].iter().map(Vec::as_slice).collect();
                batch_loss += accumulate_gradient(&xs, labels[i], &params, &mut grad, scale);
            }
            if !batch_loss.is_finite() {
                return Err(LstmError::Diverged { epoch, batch });
            }
            epoch_loss += batch_loss;
            params.add_scaled(-cfg.learning_rate, &grad);
        }
        if !params.is_finite() {
            return Err(LstmError::Diverged { epoch, batch: order.len().div_ceil(cfg.batch_size) - 1 });
        }
        loss_trace.push(epoch_loss / embedded.len() as f64);
    }
    Ok(LstmModel { params, config: *cfg, loss_trace })
}
