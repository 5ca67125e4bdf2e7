//! Optimizers, losses and the training loops over fractional orders.
//!
//! All gradients are propagated through the spectral multipliers of the
//! operators. For a complex quantity `y` the stored gradient is
//! `dL/dRe y + i dL/dIm y`, so that `dL = Re <g, dy>`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::compression::{self, CompressionReport};
use crate::denoise;
use crate::error::{invalid, Error, Result};
use crate::linalg::{CVec, ZERO};
use crate::spectral::{
    multipliers, orders_grad_from_multiplier_grad, type_i_multipliers, OrderVector,
    SpectralBasis, TransformKind, INVERTIBILITY_TOL,
};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// Training stops early once the loss falls below this value. Past it the
/// gradients are round-off, which Adam would rescale into full-size steps.
pub const CONVERGED_LOSS: f64 = 1e-24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    #[default]
    Adam,
    Sgd,
}

/// Elementwise activation after a transform layer. `Tanh` acts on the real
/// and imaginary parts separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Identity,
    Tanh,
}

impl Activation {
    pub fn forward(&self, u: &CVec) -> CVec {
        match self {
            Activation::Identity => u.clone(),
            Activation::Tanh => u.map(|c| Complex64::new(c.re.tanh(), c.im.tanh())),
        }
    }

    /// Gradient with respect to the pre-activation `u`.
    pub fn backward(&self, u: &CVec, g: &CVec) -> CVec {
        match self {
            Activation::Identity => g.clone(),
            Activation::Tanh => u.zip_map(g, |c, gc| {
                let (tr, ti) = (c.re.tanh(), c.im.tanh());
                Complex64::new((1.0 - tr * tr) * gc.re, (1.0 - ti * ti) * gc.im)
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub optimizer: Optimizer,
    pub activation: Activation,
    pub log_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            epochs: 300,
            seed: 0,
            optimizer: Optimizer::Adam,
            activation: Activation::Identity,
            log_every: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(invalid(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if self.epochs == 0 {
            return Err(invalid("epochs must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        AdamState { first_moment: vec![0.0; len], second_moment: vec![0.0; len], step: 0 }
    }
}

fn check_grads(grads: &[f64]) -> Result<()> {
    if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::Diverged(format!("non-finite gradient at index {i}")));
    }
    Ok(())
}

/// One bias-corrected Adam update.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, lr: f64) -> Result<()> {
    if params.len() != grads.len() || state.first_moment.len() != params.len() {
        return Err(invalid("parameter, gradient and state lengths differ"));
    }
    check_grads(grads)?;
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - ADAM_BETA1.powi(t);
    let c2 = 1.0 - ADAM_BETA2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        let m = &mut state.first_moment[i];
        let v = &mut state.second_moment[i];
        *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
        *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
        params[i] -= lr * (*m / c1) / ((*v / c2).sqrt() + ADAM_EPS);
    }
    Ok(())
}

/// Optimizer state for one parameter group.
#[derive(Debug, Clone)]
pub enum OptState {
    Adam(AdamState),
    Sgd,
}

impl OptState {
    pub fn new(kind: Optimizer, len: usize) -> Self {
        match kind {
            Optimizer::Adam => OptState::Adam(AdamState::new(len)),
            Optimizer::Sgd => OptState::Sgd,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) -> Result<()> {
        match self {
            OptState::Adam(s) => adam_step(params, grads, s, lr),
            OptState::Sgd => {
                if params.len() != grads.len() {
                    return Err(invalid("parameter and gradient lengths differ"));
                }
                check_grads(grads)?;
                params.iter_mut().zip(grads).for_each(|(p, g)| *p -= lr * g);
                Ok(())
            }
        }
    }
}

/// `(1/N) ||y_hat - y||^2` with squared moduli.
pub fn mse_loss(y_hat: &CVec, y: &CVec) -> f64 {
    assert_eq!(y_hat.len(), y.len(), "mse_loss length mismatch");
    let n = y.len().max(1) as f64;
    y_hat.iter().zip(y.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / n
}

/// Gradient of [`mse_loss`] with respect to `y_hat`.
pub fn mse_grad(y_hat: &CVec, y: &CVec) -> CVec {
    let n = y.len().max(1) as f64;
    (y_hat - y) * Complex64::new(2.0 / n, 0.0)
}

/// `gm_j` with `dL = Re sum_j gm_j dm_j` for `y = V diag(m) V^{-1} x`, given
/// the upstream gradient on `y` and `z = V^{-1} x`.
fn multiplier_grad(basis: &SpectralBasis, g_y: &CVec, z: &CVec) -> CVec {
    let w = basis.eigvecs().adjoint() * g_y;
    w.zip_map(z, |wj, zj| wj.conj() * zj)
}

/// `F^H g` for `F = V diag(m) V^{-1}`.
fn adjoint_apply(basis: &SpectralBasis, m: &CVec, g: &CVec) -> CVec {
    let w = basis.eigvecs().adjoint() * g;
    basis.eigvecs_inv().adjoint() * w.zip_map(m, |wj, mj| mj.conj() * wj)
}

/// Order gradient of a loss through one transform layer `y = phi(F^a x)`.
/// Entry `k` is `Re <upstream, phi'(u) (dF^a/da_k) x>`.
pub fn loss_grad_wrt_orders(
    basis: &SpectralBasis,
    kind: TransformKind,
    a: &OrderVector,
    upstream: &CVec,
    x: &CVec,
    activation: Activation,
) -> Result<Vec<f64>> {
    let n = basis.n();
    if upstream.len() != n || x.len() != n {
        return Err(invalid("vector length does not match basis"));
    }
    let m = multipliers(basis, kind, a)?;
    let z = basis.eigvecs_inv() * x;
    let g_u = match activation {
        Activation::Identity => upstream.clone(),
        Activation::Tanh => {
            let u = basis.eigvecs() * z.component_mul(&m);
            activation.backward(&u, upstream)
        }
    };
    let gm = multiplier_grad(basis, &g_u, &z);
    orders_grad_from_multiplier_grad(basis, kind, a, &gm)
}

/// How the free parameters map onto an order vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type", content = "value")]
pub enum OrderTying {
    /// One parameter per entry.
    Free,
    /// A single shared order (the GFRFT).
    Scalar,
    /// Entry `i` uses parameter `groups[i]`.
    Groups(Vec<usize>),
}

impl OrderTying {
    /// Contiguous blocks as in [`OrderVector::blocks`].
    pub fn blocks(n: usize, blocks: usize) -> Result<Self> {
        if blocks == 0 || blocks > n {
            return Err(invalid(format!("need 1..={n} blocks, got {blocks}")));
        }
        let len = n / blocks;
        Ok(OrderTying::Groups((0..n).map(|i| (i / len).min(blocks - 1)).collect()))
    }

    pub fn param_count(&self, n: usize) -> usize {
        match self {
            OrderTying::Free => n,
            OrderTying::Scalar => 1,
            OrderTying::Groups(g) => g.iter().max().map_or(0, |m| m + 1),
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        if let OrderTying::Groups(g) = self {
            if g.len() != n {
                return Err(invalid("tying groups do not cover the order vector"));
            }
        }
        Ok(())
    }

    /// Parameters from an order vector: group means.
    pub fn params_from(&self, a: &OrderVector) -> Vec<f64> {
        match self {
            OrderTying::Free => a.as_slice().to_vec(),
            OrderTying::Scalar => {
                vec![a.as_slice().iter().sum::<f64>() / a.len().max(1) as f64]
            }
            OrderTying::Groups(g) => {
                let p = self.param_count(a.len());
                let mut sum = vec![0.0; p];
                let mut cnt = vec![0usize; p];
                for (&gi, &v) in g.iter().zip(a.as_slice()) {
                    sum[gi] += v;
                    cnt[gi] += 1;
                }
                sum.iter().zip(&cnt).map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 }).collect()
            }
        }
    }

    pub fn expand(&self, params: &[f64], n: usize) -> OrderVector {
        let v = match self {
            OrderTying::Free => params.to_vec(),
            OrderTying::Scalar => vec![params[0]; n],
            OrderTying::Groups(g) => g.iter().map(|&gi| params[gi]).collect(),
        };
        OrderVector::new(v).expect("parameters stay finite")
    }

    /// Sums entry gradients into parameter gradients.
    pub fn reduce(&self, grad: &[f64]) -> Vec<f64> {
        match self {
            OrderTying::Free => grad.to_vec(),
            OrderTying::Scalar => vec![grad.iter().sum()],
            OrderTying::Groups(g) => {
                let mut out = vec![0.0; self.param_count(grad.len())];
                for (&gi, &v) in g.iter().zip(grad) {
                    out[gi] += v;
                }
                out
            }
        }
    }
}

/// Real diagonal filter in the transform domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalFilter {
    pub h: Vec<f64>,
    pub ideal: bool,
}

impl DiagonalFilter {
    /// `diag(1_K, 0_{N-K})`.
    pub fn ideal(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(invalid(format!("pass band {k} exceeds length {n}")));
        }
        Ok(DiagonalFilter { h: (0..n).map(|i| if i < k { 1.0 } else { 0.0 }).collect(), ideal: true })
    }

    pub fn ones(n: usize) -> Self {
        DiagonalFilter { h: vec![1.0; n], ideal: false }
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type", content = "k")]
pub enum FilterMode {
    /// Fixed `diag(1_K, 0_{N-K})`.
    IdealK(usize),
    /// Learnable real entries, initialized to one.
    Learnable,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LearnResult {
    /// One order vector per layer.
    pub orders: Vec<OrderVector>,
    pub filter: Option<DiagonalFilter>,
    /// Loss before each update, one entry per epoch run. Shorter than the
    /// epoch budget when training converged early.
    pub loss_history: Vec<f64>,
    pub metrics: BTreeMap<String, f64>,
    /// Secondary metric per epoch: the largest deviation of the layer-order
    /// sum from the target for transform learning, the SNR in dB for
    /// denoising and the retained-energy fraction for compression.
    #[serde(skip)]
    pub metric_history: Vec<f64>,
}

impl LearnResult {
    /// Sum of the layer order vectors.
    pub fn order_sum(&self) -> Option<OrderVector> {
        let mut it = self.orders.iter();
        let mut acc = it.next()?.clone();
        for a in it {
            acc = acc.add(a).ok()?;
        }
        Some(acc)
    }

    /// `(epoch, loss, metric)` rows every `log_every` epochs, plus the last
    /// one. Epochs count from 1.
    pub fn progress_rows(&self, log_every: usize) -> Vec<(usize, f64, Option<f64>)> {
        let every = log_every.max(1);
        let last = self.loss_history.len().saturating_sub(1);
        self.loss_history
            .iter()
            .enumerate()
            .filter(|(i, _)| i % every == 0 || *i == last)
            .map(|(i, &l)| (i + 1, l, self.metric_history.get(i).copied()))
            .collect()
    }
}

/// Learns `L` stacked type-I layers so that `prod_l F^{a_l} x` matches
/// `F^{a_ori} x` under mean squared error.
pub fn train_transform_layers(
    basis: &Arc<SpectralBasis>,
    kind: TransformKind,
    x: &CVec,
    a_ori: &OrderVector,
    layer_inits: &[OrderVector],
    cfg: &TrainConfig,
) -> Result<LearnResult> {
    if kind == TransformKind::MpgfrftII {
        return Err(Error::UnsupportedKind(
            "type-II operators are not additive and cannot be stacked".into(),
        ));
    }
    cfg.validate()?;
    let n = basis.n();
    if x.len() != n || a_ori.len() != n {
        return Err(invalid("signal or target order length does not match basis"));
    }
    if layer_inits.is_empty() || layer_inits.iter().any(|a| a.len() != n) {
        return Err(invalid("need at least one layer with a full-length order vector"));
    }
    let target = basis.apply_multipliers(&type_i_multipliers(basis, a_ori)?, x);
    let mut params: Vec<Vec<f64>> = layer_inits.iter().map(|a| a.as_slice().to_vec()).collect();
    let mut opts: Vec<OptState> = params.iter().map(|_| OptState::new(cfg.optimizer, n)).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut metric = Vec::with_capacity(cfg.epochs);
    let sum_dev = |params: &[Vec<f64>]| {
        (0..n)
            .map(|i| (params.iter().map(|p| p[i]).sum::<f64>() - a_ori.as_slice()[i]).abs())
            .fold(0.0, f64::max)
    };

    for _ in 0..cfg.epochs {
        let orders: Vec<OrderVector> = params.iter().map(|p| OrderVector::new(p.clone())).collect::<Result<_>>()?;
        let ms: Vec<CVec> = orders.iter().map(|a| type_i_multipliers(basis, a)).collect::<Result<_>>()?;
        // Forward, keeping each layer's input and pre-activation.
        let mut inputs = Vec::with_capacity(ms.len());
        let mut pre = Vec::with_capacity(ms.len());
        let mut y = x.clone();
        for m in &ms {
            let u = basis.apply_multipliers(m, &y);
            inputs.push(y);
            y = cfg.activation.forward(&u);
            pre.push(u);
        }
        let loss = mse_loss(&y, &target);
        if !loss.is_finite() {
            return Err(Error::Diverged(format!("loss became {loss}")));
        }
        history.push(loss);
        metric.push(sum_dev(&params));
        if loss < CONVERGED_LOSS {
            break;
        }
        let mut g = mse_grad(&y, &target);
        let mut grads = vec![Vec::new(); ms.len()];
        for l in (0..ms.len()).rev() {
            let g_u = cfg.activation.backward(&pre[l], &g);
            let z = basis.eigvecs_inv() * &inputs[l];
            let gm = multiplier_grad(basis, &g_u, &z);
            grads[l] = orders_grad_from_multiplier_grad(basis, kind, &orders[l], &gm)?;
            g = adjoint_apply(basis, &ms[l], &g_u);
        }
        for ((p, o), gr) in params.iter_mut().zip(&mut opts).zip(&grads) {
            let gr = if kind == TransformKind::Gfrft { vec![gr.iter().sum::<f64>(); n] } else { gr.clone() };
            o.step(p, &gr, cfg.learning_rate)?;
        }
    }
    let orders: Vec<OrderVector> = params.into_iter().map(OrderVector::new).collect::<Result<_>>()?;
    let mut y = x.clone();
    for a in &orders {
        y = cfg.activation.forward(&basis.apply_multipliers(&type_i_multipliers(basis, a)?, &y));
    }
    let mut metrics = BTreeMap::new();
    metrics.insert("final_loss".into(), mse_loss(&y, &target));
    metrics.insert("initial_loss".into(), history[0]);
    let mut result = LearnResult { orders, filter: None, loss_history: history, metrics, metric_history: metric };
    if let Some(sum) = result.order_sum() {
        let dev = sum
            .as_slice()
            .iter()
            .zip(a_ori.as_slice())
            .map(|(s, a)| (s - a).abs())
            .fold(0.0, f64::max);
        result.metrics.insert("max_sum_deviation".into(), dev);
    }
    Ok(result)
}

/// Intermediate values of the filtering pipeline
/// `x~ = V (V^{-1} (h . V (m . V^{-1} y)) / m)`.
struct FilterPass {
    z: CVec,
    t: CVec,
    q: CVec,
    out: CVec,
}

fn filter_forward(basis: &SpectralBasis, m: &CVec, h: &[f64], y: &CVec) -> FilterPass {
    let z = basis.eigvecs_inv() * y;
    let t = basis.eigvecs() * z.component_mul(m);
    let u = CVec::from_iterator(t.len(), t.iter().zip(h).map(|(ti, &hi)| ti * hi));
    let q = basis.eigvecs_inv() * u;
    let r = q.zip_map(m, |qi, mi| qi / mi);
    let out = basis.eigvecs() * r;
    FilterPass { z, t, q, out }
}

fn min_abs(m: &CVec) -> f64 {
    m.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min)
}

/// Jointly learns the orders (under `tying`) and, in learnable mode, the
/// diagonal filter so that `F^{-1} H F y` approaches `x`.
#[allow(clippy::too_many_arguments)]
pub fn train_order_and_filter(
    basis: &Arc<SpectralBasis>,
    kind: TransformKind,
    y_noisy: &CVec,
    x_clean: &CVec,
    filter_mode: FilterMode,
    a_init: &OrderVector,
    tying: &OrderTying,
    cfg: &TrainConfig,
) -> Result<LearnResult> {
    cfg.validate()?;
    let n = basis.n();
    if y_noisy.len() != n || x_clean.len() != n || a_init.len() != n {
        return Err(invalid("vector length does not match basis"));
    }
    let tying = if kind == TransformKind::Gfrft { &OrderTying::Scalar } else { tying };
    tying.check(n)?;
    let mut filter = match filter_mode {
        FilterMode::IdealK(k) => DiagonalFilter::ideal(n, k)?,
        FilterMode::Learnable => DiagonalFilter::ones(n),
    };
    let learn_h = filter_mode == FilterMode::Learnable;
    let mut params = tying.params_from(a_init);
    let mut opt_a = OptState::new(cfg.optimizer, params.len());
    let mut opt_h = OptState::new(cfg.optimizer, n);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut metric = Vec::with_capacity(cfg.epochs);
    let mut a = tying.expand(&params, n);
    let mut m = multipliers(basis, kind, &a)?;
    if !(min_abs(&m) > INVERTIBILITY_TOL) {
        return Err(Error::NotInvertible { min_abs_diag: min_abs(&m) });
    }

    for _ in 0..cfg.epochs {
        let pass = filter_forward(basis, &m, &filter.h, y_noisy);
        let loss = mse_loss(&pass.out, x_clean);
        if !loss.is_finite() {
            return Err(Error::Diverged(format!("loss became {loss}")));
        }
        history.push(loss);
        metric.push(denoise::snr_db(x_clean, &pass.out));
        if loss < CONVERGED_LOSS {
            break;
        }
        let g_out = mse_grad(&pass.out, x_clean);
        let g_r = basis.eigvecs().adjoint() * g_out;
        let g_q = g_r.zip_map(&m, |g, mi| g / mi.conj());
        let mut gm = CVec::from_fn(n, |j, _| -(g_r[j].conj()) * pass.q[j] / (m[j] * m[j]));
        let g_u = basis.eigvecs_inv().adjoint() * g_q;
        let g_h: Vec<f64> = (0..n).map(|i| (g_u[i].conj() * pass.t[i]).re).collect();
        let g_t = CVec::from_iterator(n, g_u.iter().zip(&filter.h).map(|(g, &hi)| g * hi));
        let g_p = basis.eigvecs().adjoint() * g_t;
        for j in 0..n {
            gm[j] += g_p[j].conj() * pass.z[j];
        }
        let g_a = tying.reduce(&orders_grad_from_multiplier_grad(basis, kind, &a, &gm)?);

        // Type-II updates that lose invertibility are retried with a halved step.
        let mut lr = cfg.learning_rate;
        let mut accepted = false;
        for _ in 0..=10 {
            let mut trial = params.clone();
            let mut trial_opt = opt_a.clone();
            trial_opt.step(&mut trial, &g_a, lr)?;
            let trial_a = tying.expand(&trial, n);
            let trial_m = multipliers(basis, kind, &trial_a)?;
            if min_abs(&trial_m) > INVERTIBILITY_TOL {
                params = trial;
                opt_a = trial_opt;
                a = trial_a;
                m = trial_m;
                accepted = true;
                break;
            }
            lr *= 0.5;
        }
        if !accepted {
            return Err(Error::Diverged("operator stayed singular after 10 step halvings".into()));
        }
        if learn_h {
            opt_h.step(&mut filter.h, &g_h, cfg.learning_rate)?;
        }
    }
    let pass = filter_forward(basis, &m, &filter.h, y_noisy);
    let mut metrics = BTreeMap::new();
    metrics.insert("mse".into(), mse_loss(&pass.out, x_clean));
    metrics.insert("snr_db".into(), denoise::snr_db(x_clean, &pass.out));
    metrics.insert("initial_loss".into(), history[0]);
    Ok(LearnResult { orders: vec![a], filter: Some(filter), loss_history: history, metrics, metric_history: metric })
}

/// Applies a trained filter result to a signal.
pub fn apply_learned_filter(
    basis: &SpectralBasis,
    kind: TransformKind,
    a: &OrderVector,
    filter: &DiagonalFilter,
    y: &CVec,
) -> Result<CVec> {
    let m = multipliers(basis, kind, a)?;
    if !(min_abs(&m) > INVERTIBILITY_TOL) {
        return Err(Error::NotInvertible { min_abs_diag: min_abs(&m) });
    }
    Ok(filter_forward(basis, &m, &filter.h, y).out)
}

/// Retained energy `||T_r(F^a x)||^2` and the retained index set.
pub fn retained_energy(spectrum: &CVec, keep: usize) -> (f64, Vec<usize>) {
    let idx = compression::top_indices(spectrum, keep);
    (idx.iter().map(|&i| spectrum[i].norm_sqr()).sum(), idx)
}

/// Maximizes the energy kept by the `floor(rN)` largest transform
/// coefficients. The retained set is recomputed each epoch and treated as
/// constant for the gradient.
#[allow(clippy::too_many_arguments)]
pub fn train_compression_orders(
    basis: &Arc<SpectralBasis>,
    kind: TransformKind,
    x: &CVec,
    r: f64,
    a_init: &OrderVector,
    tying: &OrderTying,
    cfg: &TrainConfig,
) -> Result<LearnResult> {
    cfg.validate()?;
    let n = basis.n();
    if x.len() != n || a_init.len() != n {
        return Err(invalid("vector length does not match basis"));
    }
    if !(r > 0.0 && r <= 1.0) {
        return Err(invalid(format!("ratio must be in (0, 1], got {r}")));
    }
    let keep = (r * n as f64).floor() as usize;
    if keep == 0 {
        return Err(invalid(format!("ratio {r} keeps no coefficient of {n}")));
    }
    let tying = if kind == TransformKind::Gfrft { &OrderTying::Scalar } else { tying };
    tying.check(n)?;
    let z = basis.eigvecs_inv() * x;
    let mut params = tying.params_from(a_init);
    let mut opt = OptState::new(cfg.optimizer, params.len());
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut metric = Vec::with_capacity(cfg.epochs);
    let total = x.norm_squared();
    let mut a = tying.expand(&params, n);
    for _ in 0..cfg.epochs {
        let m = multipliers(basis, kind, &a)?;
        let spec = basis.eigvecs() * z.component_mul(&m);
        let (energy, idx) = retained_energy(&spec, keep);
        history.push(-energy);
        metric.push(if total > 0.0 { energy / total } else { 0.0 });
        let mut g = CVec::from_element(n, ZERO);
        for &i in &idx {
            g[i] = spec[i] * -2.0;
        }
        let gm = multiplier_grad(basis, &g, &z);
        let g_a = tying.reduce(&orders_grad_from_multiplier_grad(basis, kind, &a, &gm)?);
        opt.step(&mut params, &g_a, cfg.learning_rate)?;
        a = tying.expand(&params, n);
    }
    let m = multipliers(basis, kind, &a)?;
    let spec = basis.eigvecs() * z.component_mul(&m);
    let (energy, _) = retained_energy(&spec, keep);
    let mut metrics = BTreeMap::new();
    metrics.insert("retained_energy_initial".into(), -history[0]);
    metrics.insert("retained_energy".into(), energy);
    metrics.insert("signal_energy".into(), x.norm_squared());
    if let Ok(report) = compress_with_multipliers(basis, &m, x, r) {
        insert_report(&mut metrics, &report);
    }
    Ok(LearnResult { orders: vec![a], filter: None, loss_history: history, metrics, metric_history: metric })
}

fn compress_with_multipliers(
    basis: &SpectralBasis,
    m: &CVec,
    x: &CVec,
    r: f64,
) -> Result<CompressionReport> {
    if !(min_abs(m) > INVERTIBILITY_TOL) {
        return Err(Error::NotInvertible { min_abs_diag: min_abs(m) });
    }
    let spec = basis.apply_multipliers(m, x);
    let (kept, _) = compression::truncate_top(&spec, r);
    let inv = m.map(|c| c.inv());
    let rec = basis.apply_multipliers(&inv, &kept);
    compression::CompressionReport::new(x, &rec, r)
}

pub(crate) fn insert_report(metrics: &mut BTreeMap<String, f64>, rep: &CompressionReport) {
    metrics.insert("re".into(), rep.re);
    metrics.insert("nrms".into(), rep.nrms);
    metrics.insert("cc".into(), rep.cc);
    metrics.insert("nrms_euclidean".into(), rep.nrms_euclidean);
    metrics.insert("cc_pearson".into(), rep.cc_pearson);
}
