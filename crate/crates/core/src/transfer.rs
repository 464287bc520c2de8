//! Adaptive transfer of ranked sub-networks.
//!
//! The top-`k` source units are copied into a target model and frozen. `m` fresh units
//! are added and trained on target data by contrastive divergence: the up-pass uses all
//! `k + m` units, the down-pass scales the frozen block by the influence factor `θ`.
//! At `θ = 0` the frozen units only contribute features; at `θ = 1` they shape what the
//! new units learn. Result tables elsewhere call this knob α.

use ndarray::{concatenate, Array1, Array2, ArrayView2, Axis};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::ranking::FeatureRanking;
use crate::rbm::{self, FrozenBlock, Rbm, TrainConfig, TrainTrace, VisibleType};

/// The knowledge package moved from a source model to a target model.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferSpec {
    /// `n_visible × k`, columns in source rank order.
    pub weights: Array2<f64>,
    pub hidden_bias: Array1<f64>,
    pub theta: f64,
    /// Source hidden index of each transferred column.
    pub source_indices: Vec<usize>,
}

impl TransferSpec {
    pub fn k(&self) -> usize {
        self.weights.ncols()
    }

    pub fn n_visible(&self) -> usize {
        self.weights.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::InvalidArgument(format!("theta {} not in [0,1]", self.theta)));
        }
        let k = self.k();
        if self.hidden_bias.len() != k || self.source_indices.len() != k {
            return Err(Error::Shape(format!(
                "transfer block of {k} columns with {} biases and {} indices",
                self.hidden_bias.len(),
                self.source_indices.len()
            )));
        }
        let mut seen = self.source_indices.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != k {
            return Err(Error::InvalidArgument("duplicate source indices".into()));
        }
        if self.weights.iter().chain(self.hidden_bias.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("transferred parameters".into()));
        }
        Ok(())
    }

    fn frozen(&self) -> FrozenBlock<'_> {
        FrozenBlock {
            weights: &self.weights,
            bias: &self.hidden_bias,
            theta: self.theta,
        }
    }
}

/// Target model: frozen transferred units followed by trainable adaptive units.
///
/// `adaptive` holds `U`, the adaptive hidden biases, and the (trainable) visible biases.
/// Hidden index `i < k` is transferred unit `i`; `k + j` is adaptive unit `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetRbm {
    pub spec: TransferSpec,
    pub adaptive: Rbm,
}

impl TargetRbm {
    pub fn k(&self) -> usize {
        self.spec.k()
    }

    pub fn m(&self) -> usize {
        self.adaptive.n_hidden()
    }

    pub fn n_visible(&self) -> usize {
        self.adaptive.n_visible()
    }

    pub fn visible_type(&self) -> VisibleType {
        self.adaptive.visible_type
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.adaptive.validate()?;
        if self.spec.n_visible() != self.adaptive.n_visible() {
            return Err(Error::Shape(format!(
                "transferred block has {} visible rows, adaptive block {}",
                self.spec.n_visible(),
                self.adaptive.n_visible()
            )));
        }
        Ok(())
    }

    /// The combined model with down-weights `[θ·W_t | U]`, as used for reconstruction.
    pub fn as_rbm(&self) -> Rbm {
        let scaled = &self.spec.weights * self.spec.theta;
        Rbm {
            weights: concatenate![Axis(1), scaled, self.adaptive.weights],
            visible_bias: self.adaptive.visible_bias.clone(),
            hidden_bias: concatenate![Axis(0), self.spec.hidden_bias, self.adaptive.hidden_bias],
            visible_type: self.adaptive.visible_type,
        }
    }
}

/// Takes the `k` highest-ranked source units.
pub fn build_transfer_spec(source: &Rbm, ranking: &FeatureRanking, k: usize, theta: f64) -> Result<TransferSpec> {
    if k > source.n_hidden() {
        return Err(Error::InvalidArgument(format!(
            "cannot transfer {k} of {} source units",
            source.n_hidden()
        )));
    }
    if ranking.order.len() != source.n_hidden() {
        return Err(Error::Shape("ranking does not belong to this model".into()));
    }
    let idx = ranking.order[..k].to_vec();
    let spec = TransferSpec {
        weights: source.weights.select(Axis(1), &idx),
        hidden_bias: source.hidden_bias.select(Axis(0), &idx),
        theta,
        source_indices: idx,
    };
    spec.validate()?;
    Ok(spec)
}

/// Adds `m` fresh units, initialized exactly like [`Rbm::init`] with the same seed.
pub fn init_target(spec: TransferSpec, n_visible: usize, m: usize, visible_type: VisibleType, seed: u64) -> Result<TargetRbm> {
    spec.validate()?;
    if m == 0 {
        return Err(Error::InvalidArgument("at least one adaptive unit is required".into()));
    }
    if spec.k() > 0 && spec.n_visible() != n_visible {
        return Err(Error::Shape(format!(
            "transferred weights have {} visible rows but the target has {n_visible}; align domain shapes first",
            spec.n_visible()
        )));
    }
    let spec = if spec.k() == 0 {
        TransferSpec {
            weights: Array2::zeros((n_visible, 0)),
            ..spec
        }
    } else {
        spec
    };
    Ok(TargetRbm {
        spec,
        adaptive: Rbm::init(n_visible, m, visible_type, seed)?,
    })
}

/// Trains only the adaptive parameters; the transferred block is read, never written.
pub fn train_adaptive(target: &TargetRbm, data: &Dataset, config: &TrainConfig) -> Result<(TargetRbm, TrainTrace)> {
    target.validate()?;
    if data.n_dims() != target.n_visible() {
        return Err(Error::Shape(format!(
            "data has {} dims, target model has {} visible units",
            data.n_dims(),
            target.n_visible()
        )));
    }
    let frozen = target.spec.frozen();
    let frozen = (target.k() > 0).then_some(&frozen);
    let (adaptive, trace) = rbm::train_blocks(&target.adaptive, frozen, data.samples.view(), config)?;
    Ok((
        TargetRbm {
            spec: target.spec.clone(),
            adaptive,
        },
        trace,
    ))
}

/// One CD update of the adaptive parameters; exposed for step-level inspection.
pub fn adaptive_step<R: rand::Rng + ?Sized, F: rand::Rng + ?Sized>(
    target: &TargetRbm,
    batch: ArrayView2<'_, f64>,
    config: &TrainConfig,
    velocity: &mut rbm::Velocity,
    rng: &mut R,
    frozen_rng: &mut F,
) -> Result<(TargetRbm, rbm::GibbsState)> {
    target.validate()?;
    let frozen = target.spec.frozen();
    let frozen = (target.k() > 0).then_some(&frozen);
    let (adaptive, state) = rbm::cd_step(&target.adaptive, frozen, batch, config, velocity, rng, frozen_rng)?;
    Ok((
        TargetRbm {
            spec: target.spec.clone(),
            adaptive,
        },
        state,
    ))
}

/// Hidden probabilities of all `k + m` units with unscaled up-weights.
///
/// Columns `0..k` are the self-taught features, `k..k+m` the adaptive features.
pub fn extract_features(target: &TargetRbm, data: &Dataset) -> Result<Array2<f64>> {
    let adaptive = target.adaptive.hidden_probs(data.samples.view())?;
    if target.k() == 0 {
        return Ok(adaptive);
    }
    let transferred = rbm::hidden_block(data.samples.view(), &target.spec.weights, &target.spec.hidden_bias);
    Ok(concatenate![Axis(1), transferred, adaptive])
}

/// Hidden probabilities of the untouched source model on target data.
pub fn self_taught_features(source: &Rbm, data: &Dataset) -> Result<Array2<f64>> {
    data.validate()?;
    source.hidden_probs(data.samples.view())
}
