//! Restricted Boltzmann machine and contrastive-divergence training.
//!
//! Energy of a joint configuration:
//!
//! ```text
//! binary visible:   E(v,h) = -b_vis·v - b_hid·h - vᵀWh
//! gaussian visible: E(v,h) = ½‖v - b_vis‖² - b_hid·h - vᵀWh      (unit variance)
//! ```

use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;

/// Largest layer that [`exact_log_likelihood`] will enumerate.
pub const MAX_ENUMERATION_UNITS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VisibleType {
    Binary,
    Gaussian,
}

/// Weights are stored `n_visible × n_hidden`; column `j` is the sub-network of hidden unit `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rbm {
    pub weights: Array2<f64>,
    pub visible_bias: Array1<f64>,
    pub hidden_bias: Array1<f64>,
    pub visible_type: VisibleType,
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `ln(1 + eˣ)` without overflow.
#[inline]
pub(crate) fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub(crate) fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

impl Rbm {
    /// Weights i.i.d. `Normal(0, 0.01²)` from a seeded generator, biases zero.
    pub fn init(n_visible: usize, n_hidden: usize, visible_type: VisibleType, seed: u64) -> Result<Rbm> {
        if n_visible == 0 || n_hidden == 0 {
            return Err(Error::InvalidArgument(format!(
                "layer sizes must be positive, got {n_visible}x{n_hidden}"
            )));
        }
        let mut rng = rng::seeded(seed);
        let normal = Normal::new(0.0, 0.01).expect("valid std");
        let weights = Array2::from_shape_simple_fn((n_visible, n_hidden), || normal.sample(&mut rng));
        Ok(Rbm {
            weights,
            visible_bias: Array1::zeros(n_visible),
            hidden_bias: Array1::zeros(n_hidden),
            visible_type,
        })
    }

    pub fn zeros(n_visible: usize, n_hidden: usize, visible_type: VisibleType) -> Rbm {
        Rbm {
            weights: Array2::zeros((n_visible, n_hidden)),
            visible_bias: Array1::zeros(n_visible),
            hidden_bias: Array1::zeros(n_hidden),
            visible_type,
        }
    }

    pub fn from_parts(
        weights: Array2<f64>,
        visible_bias: Array1<f64>,
        hidden_bias: Array1<f64>,
        visible_type: VisibleType,
    ) -> Result<Rbm> {
        let rbm = Rbm {
            weights,
            visible_bias,
            hidden_bias,
            visible_type,
        };
        rbm.validate()?;
        Ok(rbm)
    }

    pub fn n_visible(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_hidden(&self) -> usize {
        self.weights.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        let (v, h) = self.weights.dim();
        if v == 0 || h == 0 {
            return Err(Error::Shape(format!("empty layer: {v}x{h}")));
        }
        if self.visible_bias.len() != v || self.hidden_bias.len() != h {
            return Err(Error::Shape(format!(
                "weights {v}x{h} with bias lengths {} and {}",
                self.visible_bias.len(),
                self.hidden_bias.len()
            )));
        }
        if !self.is_finite() {
            return Err(Error::NonFinite("model parameters".into()));
        }
        Ok(())
    }

    pub(crate) fn is_finite(&self) -> bool {
        self.weights.iter().all(|x| x.is_finite())
            && self.visible_bias.iter().all(|x| x.is_finite())
            && self.hidden_bias.iter().all(|x| x.is_finite())
    }

    /// `σ(V·W + b_hid)` for a batch of visible rows.
    pub fn hidden_probs(&self, v: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if v.ncols() != self.n_visible() {
            return Err(Error::Shape(format!(
                "batch has {} columns, model has {} visible units",
                v.ncols(),
                self.n_visible()
            )));
        }
        Ok(hidden_block(v, &self.weights, &self.hidden_bias))
    }

    /// Binary visible: `σ(H·Wᵀ + b_vis)`. Gaussian visible: the mean `H·Wᵀ + b_vis`.
    pub fn visible_probs(&self, h: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if h.ncols() != self.n_hidden() {
            return Err(Error::Shape(format!(
                "batch has {} columns, model has {} hidden units",
                h.ncols(),
                self.n_hidden()
            )));
        }
        Ok(visible_from(h, self, None))
    }

    /// Free energy `F(v)` with `p(v) ∝ exp(−F(v))`.
    pub fn free_energy(&self, v: ArrayView1<'_, f64>) -> Result<f64> {
        if v.len() != self.n_visible() {
            return Err(Error::Shape(format!(
                "sample has {} entries, model has {} visible units",
                v.len(),
                self.n_visible()
            )));
        }
        let act = v.dot(&self.weights) + &self.hidden_bias;
        let hidden_term: f64 = act.iter().map(|&x| softplus(x)).sum();
        let visible_term = match self.visible_type {
            VisibleType::Binary => -self.visible_bias.dot(&v),
            VisibleType::Gaussian => 0.5 * (&v - &self.visible_bias).mapv(|d| d * d).sum(),
        };
        Ok(visible_term - hidden_term)
    }
}

pub(crate) fn hidden_block(v: ArrayView2<'_, f64>, weights: &Array2<f64>, bias: &Array1<f64>) -> Array2<f64> {
    let mut act = v.dot(weights);
    act += bias;
    act.mapv_inplace(sigmoid);
    act
}

/// Frozen hidden units that take part in sampling but are never updated.
pub(crate) struct FrozenBlock<'a> {
    pub weights: &'a Array2<f64>,
    pub bias: &'a Array1<f64>,
    /// Scale applied to this block's top-down contribution.
    pub theta: f64,
}

/// Visible means/probabilities given adaptive hidden states `h` and optional frozen states.
fn visible_from(h: ArrayView2<'_, f64>, rbm: &Rbm, frozen: Option<(&FrozenBlock<'_>, &Array2<f64>)>) -> Array2<f64> {
    let mut act = h.dot(&rbm.weights.t());
    if let Some((block, fh)) = frozen {
        // θ = 0 contributes nothing to the reconstruction.
        if block.theta != 0.0 && block.weights.ncols() > 0 {
            act.scaled_add(block.theta, &fh.dot(&block.weights.t()));
        }
    }
    act += &rbm.visible_bias;
    if rbm.visible_type == VisibleType::Binary {
        act.mapv_inplace(sigmoid);
    }
    act
}

/// Entry is 1 iff a uniform draw is below the probability. Draws are consumed in
/// row-major order.
pub fn sample_bernoulli<R: Rng + ?Sized>(probs: &Array2<f64>, rng: &mut R) -> Array2<f64> {
    let mut out = Array2::zeros(probs.raw_dim());
    for (o, &p) in out.iter_mut().zip(probs.iter()) {
        let u: f64 = rng.random();
        *o = if u < p { 1.0 } else { 0.0 };
    }
    out
}

/// Adds unit-variance Gaussian noise to each mean, row-major.
pub fn sample_gaussian<R: Rng + ?Sized>(means: &Array2<f64>, rng: &mut R) -> Array2<f64> {
    let mut out = means.clone();
    for o in out.iter_mut() {
        let z: f64 = StandardNormal.sample(rng);
        *o += z;
    }
    out
}

fn sample_visible<R: Rng + ?Sized>(vt: VisibleType, means: &Array2<f64>, rng: &mut R) -> Array2<f64> {
    match vt {
        VisibleType::Binary => sample_bernoulli(means, rng),
        VisibleType::Gaussian => sample_gaussian(means, rng),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Gibbs alternations per update.
    pub cd_k: usize,
    pub momentum: f64,
    pub weight_decay: f64,
    pub sparsity_target: Option<f64>,
    pub sparsity_cost: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            epochs: 50,
            batch_size: 100,
            cd_k: 1,
            momentum: 0.5,
            weight_decay: 0.0002,
            sparsity_target: None,
            sparsity_cost: 0.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// 20 epochs of batch-20 CD-1 with momentum 0.9: the settings the digit experiments use.
    pub fn quick() -> Self {
        TrainConfig {
            epochs: 20,
            batch_size: 20,
            momentum: 0.9,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        self.validate_step()?;
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch_size must be at least 1".into()));
        }
        Ok(())
    }

    /// The subset of checks a single update needs; a zero learning rate is allowed here.
    fn validate_step(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad learning_rate {}", self.learning_rate)));
        }
        if self.cd_k == 0 {
            return Err(Error::InvalidArgument("cd_k must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidArgument(format!("momentum {} not in [0,1)", self.momentum)));
        }
        if self.weight_decay < 0.0 || self.sparsity_cost < 0.0 {
            return Err(Error::InvalidArgument("weight_decay and sparsity_cost must be non-negative".into()));
        }
        if let Some(t) = self.sparsity_target {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::InvalidArgument(format!("sparsity_target {t} not in (0,1)")));
            }
        }
        Ok(())
    }
}

/// Intermediate quantities of one contrastive-divergence step.
///
/// Hidden matrices cover the trainable units; during transfer training the frozen
/// block's activations are kept separately in the `frozen_*` fields.
#[derive(Clone, Debug)]
pub struct GibbsState {
    pub v_plus: Array2<f64>,
    pub h_plus: Array2<f64>,
    pub h_plus_sample: Array2<f64>,
    pub v_minus: Array2<f64>,
    pub v_minus_sample: Array2<f64>,
    pub h_minus: Array2<f64>,
    pub frozen_h_plus: Option<Array2<f64>>,
    pub frozen_h_minus: Option<Array2<f64>>,
}

/// Previous parameter increments, for momentum.
#[derive(Clone, Debug, PartialEq)]
pub struct Velocity {
    pub weights: Array2<f64>,
    pub visible_bias: Array1<f64>,
    pub hidden_bias: Array1<f64>,
}

impl Velocity {
    pub fn zeros_like(rbm: &Rbm) -> Velocity {
        Velocity {
            weights: Array2::zeros(rbm.weights.raw_dim()),
            visible_bias: Array1::zeros(rbm.n_visible()),
            hidden_bias: Array1::zeros(rbm.n_hidden()),
        }
    }
}

/// One CD-k update of every parameter of `rbm`.
///
/// Positive statistics pair the data with hidden probabilities; negative statistics pair
/// the sampled reconstruction with the hidden probabilities it induces.
pub fn cd_update<R: Rng + ?Sized>(
    rbm: &Rbm,
    batch: ArrayView2<'_, f64>,
    config: &TrainConfig,
    velocity: &mut Velocity,
    rng: &mut R,
) -> Result<(Rbm, GibbsState)> {
    let mut unused = rng::seeded_stream(0, 1);
    cd_step(rbm, None, batch, config, velocity, rng, &mut unused)
}

pub(crate) fn cd_step<R: Rng + ?Sized, F: Rng + ?Sized>(
    rbm: &Rbm,
    frozen: Option<&FrozenBlock<'_>>,
    batch: ArrayView2<'_, f64>,
    config: &TrainConfig,
    velocity: &mut Velocity,
    rng: &mut R,
    frozen_rng: &mut F,
) -> Result<(Rbm, GibbsState)> {
    config.validate_step()?;
    let n = batch.nrows();
    if n == 0 {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    if batch.ncols() != rbm.n_visible() {
        return Err(Error::Shape(format!(
            "batch has {} columns, model has {} visible units",
            batch.ncols(),
            rbm.n_visible()
        )));
    }

    let v_plus = batch.to_owned();
    let h_plus = hidden_block(batch, &rbm.weights, &rbm.hidden_bias);
    let fh_plus = frozen.map(|b| hidden_block(batch, b.weights, b.bias));

    let mut h_sample = sample_bernoulli(&h_plus, rng);
    let mut fh_sample = fh_plus.as_ref().map(|p| sample_bernoulli(p, frozen_rng));
    let mut v_minus;
    let mut v_minus_sample;
    let mut h_minus;
    let mut fh_minus;
    let mut step = 0;
    loop {
        let fz = frozen.zip(fh_sample.as_ref());
        v_minus = visible_from(h_sample.view(), rbm, fz);
        v_minus_sample = sample_visible(rbm.visible_type, &v_minus, rng);
        h_minus = hidden_block(v_minus_sample.view(), &rbm.weights, &rbm.hidden_bias);
        fh_minus = frozen.map(|b| hidden_block(v_minus_sample.view(), b.weights, b.bias));
        step += 1;
        if step == config.cd_k {
            break;
        }
        h_sample = sample_bernoulli(&h_minus, rng);
        fh_sample = fh_minus.as_ref().map(|p| sample_bernoulli(p, frozen_rng));
    }

    let lr = config.learning_rate;
    let scale = lr / n as f64;
    let pos = v_plus.t().dot(&h_plus);
    let neg = v_minus_sample.t().dot(&h_minus);

    velocity.weights *= config.momentum;
    velocity.weights.scaled_add(scale, &pos);
    velocity.weights.scaled_add(-scale, &neg);
    velocity.weights.scaled_add(-lr * config.weight_decay, &rbm.weights);

    velocity.visible_bias *= config.momentum;
    velocity.visible_bias.scaled_add(scale, &v_plus.sum_axis(Axis(0)));
    velocity.visible_bias.scaled_add(-scale, &v_minus_sample.sum_axis(Axis(0)));

    velocity.hidden_bias *= config.momentum;
    velocity.hidden_bias.scaled_add(scale, &h_plus.sum_axis(Axis(0)));
    velocity.hidden_bias.scaled_add(-scale, &h_minus.sum_axis(Axis(0)));
    if let Some(target) = config.sparsity_target {
        if config.sparsity_cost > 0.0 {
            let mean_h = h_plus.mean_axis(Axis(0)).expect("non-empty batch");
            let penalty = mean_h.mapv(|q| target - q);
            velocity.hidden_bias.scaled_add(lr * config.sparsity_cost, &penalty);
        }
    }

    let mut next = rbm.clone();
    next.weights += &velocity.weights;
    next.visible_bias += &velocity.visible_bias;
    next.hidden_bias += &velocity.hidden_bias;
    if !next.is_finite() {
        return Err(Error::NonFinite(format!(
            "CD update with learning rate {lr} diverged; lower the learning rate"
        )));
    }
    Ok((
        next,
        GibbsState {
            v_plus,
            h_plus,
            h_plus_sample: h_sample,
            v_minus,
            v_minus_sample,
            h_minus,
            frozen_h_plus: fh_plus,
            frozen_h_minus: fh_minus,
        },
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    /// Mean squared difference between data and the mean-field reconstruction of the
    /// sampled hidden states, averaged over minibatches.
    pub reconstruction_error: f64,
    pub mean_hidden_activation: f64,
    /// Wall-clock time; not serialized so saved traces stay reproducible.
    #[serde(skip)]
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub epochs: Vec<EpochStats>,
}

/// Minibatch CD training over seeded per-epoch shuffles.
pub fn train(rbm: &Rbm, data: &Dataset, config: &TrainConfig) -> Result<(Rbm, TrainTrace)> {
    train_blocks(rbm, None, data.samples.view(), config)
}

pub(crate) fn train_blocks(
    rbm: &Rbm,
    frozen: Option<&FrozenBlock<'_>>,
    data: ArrayView2<'_, f64>,
    config: &TrainConfig,
) -> Result<(Rbm, TrainTrace)> {
    config.validate()?;
    rbm.validate()?;
    if data.ncols() != rbm.n_visible() {
        return Err(Error::Shape(format!(
            "data has {} dims, model has {} visible units",
            data.ncols(),
            rbm.n_visible()
        )));
    }
    let mut rng = rng::seeded(config.seed);
    let mut frozen_rng = rng::seeded_stream(config.seed, 1);
    let mut velocity = Velocity::zeros_like(rbm);
    let mut model = rbm.clone();
    let mut trace = TrainTrace::default();
    let mut order: Vec<usize> = (0..data.nrows()).collect();
    for _ in 0..config.epochs {
        let start = Instant::now();
        order.shuffle(&mut rng);
        let (mut err, mut act, mut batches) = (0.0, 0.0, 0usize);
        for chunk in order.chunks(config.batch_size) {
            let batch = data.select(Axis(0), chunk);
            let (next, state) = cd_step(&model, frozen, batch.view(), config, &mut velocity, &mut rng, &mut frozen_rng)?;
            model = next;
            err += Zip::from(&state.v_plus)
                .and(&state.v_minus)
                .fold(0.0, |acc, a, b| acc + (a - b) * (a - b))
                / state.v_plus.len() as f64;
            act += state.h_plus.mean().unwrap_or(0.0);
            batches += 1;
        }
        trace.epochs.push(EpochStats {
            reconstruction_error: err / batches as f64,
            mean_hidden_activation: act / batches as f64,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok((model, trace))
}

/// Mean squared error between the data and its deterministic mean-field reconstruction.
pub fn reconstruction_error(rbm: &Rbm, data: ArrayView2<'_, f64>) -> Result<f64> {
    let h = rbm.hidden_probs(data)?;
    let r = rbm.visible_probs(h.view())?;
    Ok(Zip::from(&data).and(&r).fold(0.0, |acc, a, b| acc + (a - b) * (a - b)) / data.len() as f64)
}

fn bits(pattern: u64, n: usize) -> Array1<f64> {
    Array1::from_shape_fn(n, |i| ((pattern >> i) & 1) as f64)
}

/// `ln Z` by exhaustive enumeration over the smaller layer.
pub fn log_partition(rbm: &Rbm) -> Result<f64> {
    let (nv, nh) = rbm.weights.dim();
    match rbm.visible_type {
        VisibleType::Binary => {
            if nv.min(nh) > MAX_ENUMERATION_UNITS {
                return Err(Error::TooLarge(format!(
                    "{nv} visible x {nh} hidden; one layer must have at most {MAX_ENUMERATION_UNITS} units"
                )));
            }
            if nv <= nh {
                let terms: Result<Vec<f64>> = (0..1u64 << nv)
                    .map(|p| rbm.free_energy(bits(p, nv).view()).map(|f| -f))
                    .collect();
                Ok(log_sum_exp(terms?))
            } else {
                Ok(log_sum_exp((0..1u64 << nh).map(|p| {
                    let h = bits(p, nh);
                    let act = rbm.weights.dot(&h) + &rbm.visible_bias;
                    rbm.hidden_bias.dot(&h) + act.iter().map(|&x| softplus(x)).sum::<f64>()
                })))
            }
        }
        VisibleType::Gaussian => {
            if nh > MAX_ENUMERATION_UNITS {
                return Err(Error::TooLarge(format!(
                    "gaussian model with {nh} hidden units; at most {MAX_ENUMERATION_UNITS} supported"
                )));
            }
            // ∫ exp(−½‖v−b‖² + vᵀa) dv = (2π)^{n/2} exp(bᵀa + ½‖a‖²) with a = W h.
            let gauss = 0.5 * nv as f64 * (2.0 * std::f64::consts::PI).ln();
            Ok(gauss
                + log_sum_exp((0..1u64 << nh).map(|p| {
                    let h = bits(p, nh);
                    let a = rbm.weights.dot(&h);
                    rbm.hidden_bias.dot(&h) + rbm.visible_bias.dot(&a) + 0.5 * a.dot(&a)
                })))
        }
    }
}

/// Mean of `ln p(v)` over the rows of `data`, with the partition function enumerated exactly.
pub fn exact_log_likelihood(rbm: &Rbm, data: ArrayView2<'_, f64>) -> Result<f64> {
    if data.nrows() == 0 {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    let log_z = log_partition(rbm)?;
    let mut total = 0.0;
    for row in data.rows() {
        total += -rbm.free_energy(row)? - log_z;
    }
    Ok(total / data.nrows() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn init_shapes_and_determinism() {
        let a = Rbm::init(3, 2, VisibleType::Binary, 11).unwrap();
        let b = Rbm::init(3, 2, VisibleType::Binary, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.weights.dim(), (3, 2));
        assert_eq!(a.visible_bias.len(), 3);
        assert_eq!(a.hidden_bias.len(), 2);
        assert!(Rbm::init(0, 2, VisibleType::Binary, 1).is_err());
    }

    #[test]
    fn zero_model_probabilities() {
        let rbm = Rbm::zeros(3, 2, VisibleType::Binary);
        let h = rbm.hidden_probs(array![[1.0, 0.0, 1.0]].view()).unwrap();
        assert!(h.iter().all(|&p| p == 0.5));
        let v = rbm.visible_probs(array![[1.0, 0.0]].view()).unwrap();
        assert!(v.iter().all(|&p| p == 0.5));
        let g = Rbm::zeros(3, 2, VisibleType::Gaussian);
        assert!(g.visible_probs(array![[1.0, 1.0]].view()).unwrap().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn sigmoid_of_ln3() {
        let mut rbm = Rbm::zeros(1, 1, VisibleType::Binary);
        rbm.weights[[0, 0]] = 3f64.ln();
        let p = rbm.hidden_probs(array![[1.0]].view()).unwrap()[[0, 0]];
        assert!((p - 0.75).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let rbm = Rbm::zeros(3, 2, VisibleType::Binary);
        assert!(rbm.hidden_probs(array![[1.0, 0.0]].view()).is_err());
        assert!(rbm.visible_probs(array![[1.0, 0.0, 1.0]].view()).is_err());
    }

    #[test]
    fn bernoulli_extremes() {
        let mut r = rng::seeded(3);
        assert!(sample_bernoulli(&Array2::zeros((4, 5)), &mut r).iter().all(|&x| x == 0.0));
        assert!(sample_bernoulli(&Array2::ones((4, 5)), &mut r).iter().all(|&x| x == 1.0));
    }

    #[test]
    fn free_energy_plug_in() {
        let rbm = Rbm::zeros(4, 3, VisibleType::Binary);
        let f = rbm.free_energy(array![1.0, 0.0, 1.0, 1.0].view()).unwrap();
        assert!((f + 3.0 * 2f64.ln()).abs() < 1e-15);

        let mut one = Rbm::zeros(1, 1, VisibleType::Binary);
        one.visible_bias[0] = 1.0;
        let f = one.free_energy(array![1.0].view()).unwrap();
        assert!((f - (-1.0 - 2f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn zero_learning_rate_leaves_model_unchanged() {
        let rbm = Rbm::init(4, 3, VisibleType::Binary, 5).unwrap();
        let cfg = TrainConfig { learning_rate: 0.0, ..TrainConfig::default() };
        let mut vel = Velocity::zeros_like(&rbm);
        let batch = array![[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 1.0, 1.0]];
        let (next, _) = cd_update(&rbm, batch.view(), &cfg, &mut vel, &mut rng::seeded(1)).unwrap();
        assert_eq!(next, rbm);
    }

    #[test]
    fn divergent_update_is_reported() {
        let rbm = Rbm::init(2, 2, VisibleType::Gaussian, 5).unwrap();
        let cfg = TrainConfig { learning_rate: 1e308, ..TrainConfig::default() };
        let mut vel = Velocity::zeros_like(&rbm);
        let batch = array![[1e10, -1e10]];
        let res = cd_update(&rbm, batch.view(), &cfg, &mut vel, &mut rng::seeded(1));
        assert!(matches!(res, Err(Error::NonFinite(_))));
    }

    #[test]
    fn fixed_point_leaves_only_weight_decay() {
        // Saturated weights make every conditional deterministic, so the chain
        // returns to the data and the CD statistics cancel.
        let big = 1000.0;
        let rbm = Rbm::from_parts(
            array![[big, -big], [-big, big]],
            array![-big / 2.0, -big / 2.0],
            array![-big / 2.0, -big / 2.0],
            VisibleType::Binary,
        )
        .unwrap();
        let batch = array![[1.0, 0.0], [0.0, 1.0]];
        let cfg = TrainConfig { learning_rate: 0.1, momentum: 0.0, weight_decay: 0.01, ..TrainConfig::default() };
        let mut vel = Velocity::zeros_like(&rbm);
        let (next, state) = cd_update(&rbm, batch.view(), &cfg, &mut vel, &mut rng::seeded(9)).unwrap();
        assert_eq!(state.v_minus_sample, batch);
        assert_eq!(state.h_minus, state.h_plus);
        let expected = &rbm.weights - &(&rbm.weights * (0.1 * 0.01));
        assert_eq!(next.weights, expected);
        assert_eq!(next.visible_bias, rbm.visible_bias);
        assert_eq!(next.hidden_bias, rbm.hidden_bias);
    }

    #[test]
    fn train_zero_epochs_is_identity_and_deterministic() {
        let data = Dataset::new(array![[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 0.0]], None).unwrap();
        let rbm = Rbm::init(3, 4, VisibleType::Binary, 2).unwrap();
        let cfg = TrainConfig { epochs: 0, ..TrainConfig::default() };
        let (same, trace) = train(&rbm, &data, &cfg).unwrap();
        assert_eq!(same, rbm);
        assert!(trace.epochs.is_empty());

        let cfg = TrainConfig { epochs: 20, batch_size: 2, seed: 4, ..TrainConfig::default() };
        let (a, ta) = train(&rbm, &data, &cfg).unwrap();
        let (b, tb) = train(&rbm, &data, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta.epochs.len(), 20);
        assert_eq!(
            ta.epochs.iter().map(|e| e.reconstruction_error).collect::<Vec<_>>(),
            tb.epochs.iter().map(|e| e.reconstruction_error).collect::<Vec<_>>()
        );
    }

    #[test]
    fn uniform_model_likelihood() {
        let rbm = Rbm::zeros(3, 2, VisibleType::Binary);
        let data = array![[0.0, 1.0, 1.0], [1.0, 1.0, 1.0]];
        let ll = exact_log_likelihood(&rbm, data.view()).unwrap();
        assert!((ll + 3.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn enumeration_size_guard() {
        let rbm = Rbm::zeros(21, 21, VisibleType::Binary);
        assert!(matches!(log_partition(&rbm), Err(Error::TooLarge(_))));
    }

    #[test]
    fn reconstruction_error_of_zero_model() {
        let rbm = Rbm::zeros(2, 2, VisibleType::Binary);
        let data = array![[1.0, 0.0], [1.0, 1.0]];
        assert!((reconstruction_error(&rbm, data.view()).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn reconstruction_error_vanishes_when_saturated() {
        let mut prev = f64::INFINITY;
        for scale in [2.0, 5.0, 10.0, 20.0] {
            let rbm = Rbm::from_parts(array![[scale]], array![-scale / 2.0], array![-scale / 2.0], VisibleType::Binary).unwrap();
            let err = reconstruction_error(&rbm, array![[1.0], [0.0]].view()).unwrap();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-6);
    }
}
