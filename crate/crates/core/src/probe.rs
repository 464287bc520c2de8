//! Multinomial logistic regression used to score feature sets by test accuracy.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxModel {
    /// `n_features × n_classes`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    /// Distinct training labels, ascending; column `c` scores `class_labels[c]`.
    pub class_labels: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            learning_rate: 0.5,
            epochs: 100,
            l2: 1e-4,
            batch_size: 50,
            seed: 0,
        }
    }
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!("probe learning_rate {} must be positive", self.learning_rate)));
        }
        if !(self.l2 >= 0.0) {
            return Err(Error::InvalidArgument(format!("probe l2 {} must be non-negative", self.l2)));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("probe batch_size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Learning-rate halving triggered by a loss increase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Backoff {
    pub epoch: usize,
    pub new_learning_rate: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProbeTrace {
    /// Full-data objective after each epoch (entry 0 is the initial value).
    pub losses: Vec<f64>,
    pub backoffs: Vec<Backoff>,
}

/// Row-wise softmax of the class scores.
pub fn softmax_probs(model: &SoftmaxModel, features: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut scores = features.dot(&model.weights) + &model.bias;
    for mut row in scores.rows_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|s| (s - max).exp());
        let z = row.sum();
        row /= z;
    }
    scores
}

fn class_indices(labels: &[i64], classes: &[i64]) -> Result<Vec<usize>> {
    labels
        .iter()
        .map(|l| {
            classes
                .binary_search(l)
                .map_err(|_| Error::InvalidArgument(format!("label {l} not among classes {classes:?}")))
        })
        .collect()
}

/// Mean cross-entropy plus `(l2/2)‖W‖²`, and its gradient with respect to `(W, b)`.
pub fn loss_and_gradient(
    model: &SoftmaxModel,
    features: ArrayView2<'_, f64>,
    labels: &[i64],
    l2: f64,
) -> Result<(f64, Array2<f64>, Array1<f64>)> {
    let y = class_indices(labels, &model.class_labels)?;
    let n = features.nrows() as f64;
    let mut p = softmax_probs(model, features);
    let mut ce = 0.0;
    for (mut row, &c) in p.rows_mut().into_iter().zip(&y) {
        ce -= row[c].max(f64::MIN_POSITIVE).ln();
        row[c] -= 1.0;
    }
    let loss = ce / n + 0.5 * l2 * model.weights.iter().map(|w| w * w).sum::<f64>();
    let mut grad_w = features.t().dot(&p) / n;
    grad_w.scaled_add(l2, &model.weights);
    let grad_b = p.sum_axis(Axis(0)) / n;
    Ok((loss, grad_w, grad_b))
}

/// Minibatch gradient descent from zero weights.
///
/// After each epoch the full-data objective is evaluated; if it rose, the epoch is
/// undone and the learning rate halved, so recorded losses never increase.
pub fn train_softmax(features: ArrayView2<'_, f64>, labels: &[i64], config: &ProbeConfig) -> Result<(SoftmaxModel, ProbeTrace)> {
    config.validate()?;
    if features.nrows() != labels.len() {
        return Err(Error::Shape(format!("{} feature rows for {} labels", features.nrows(), labels.len())));
    }
    let mut classes = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least two distinct labels, found {classes:?}"
        )));
    }
    let mut model = SoftmaxModel {
        weights: Array2::zeros((features.ncols(), classes.len())),
        bias: Array1::zeros(classes.len()),
        class_labels: classes,
    };
    let (mut loss, _, _) = loss_and_gradient(&model, features, labels, config.l2)?;
    if !loss.is_finite() {
        return Err(Error::NonFinite("initial probe loss".into()));
    }
    let mut trace = ProbeTrace { losses: vec![loss], backoffs: Vec::new() };
    let mut rng = rng::seeded(config.seed);
    let mut lr = config.learning_rate;
    let mut order: Vec<usize> = (0..labels.len()).collect();
    for epoch in 0..config.epochs {
        let saved = model.clone();
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            let x = features.select(Axis(0), chunk);
            let y: Vec<i64> = chunk.iter().map(|&i| labels[i]).collect();
            let (_, gw, gb) = loss_and_gradient(&model, x.view(), &y, config.l2)?;
            model.weights.scaled_add(-lr, &gw);
            model.bias.scaled_add(-lr, &gb);
        }
        let (next, _, _) = loss_and_gradient(&model, features, labels, config.l2)?;
        if next.is_finite() && next <= loss {
            loss = next;
        } else {
            model = saved;
            lr *= 0.5;
            trace.backoffs.push(Backoff { epoch, new_learning_rate: lr });
            if lr < 1e-12 {
                return Err(Error::NonFinite(format!("probe loss failed to decrease at epoch {epoch}")));
            }
        }
        trace.losses.push(loss);
    }
    Ok((model, trace))
}

/// Arg-max class per row; ties resolve to the lowest label.
pub fn predict(model: &SoftmaxModel, features: ArrayView2<'_, f64>) -> Result<Vec<i64>> {
    if features.ncols() != model.weights.nrows() {
        return Err(Error::Shape(format!(
            "{} feature columns for a probe over {} features",
            features.ncols(),
            model.weights.nrows()
        )));
    }
    let scores = features.dot(&model.weights) + &model.bias;
    Ok(scores
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (c, &s) in row.iter().enumerate() {
                if s > row[best] {
                    best = c;
                }
            }
            model.class_labels[best]
        })
        .collect())
}

pub fn accuracy(pred: &[i64], truth: &[i64]) -> Result<f64> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(Error::Shape(format!("{} predictions for {} labels", pred.len(), truth.len())));
    }
    Ok(pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / pred.len() as f64)
}

/// Mean and normal-approximation 95% half-width `1.96·s/√n` (sample std, `n−1`).
pub fn mean_ci95(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "confidence interval needs at least 2 values, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, 1.96 * var.sqrt() / n.sqrt()))
}

/// Trains a probe on one feature set and returns its accuracy on another.
pub fn probe_accuracy(
    train_features: ArrayView2<'_, f64>,
    train_labels: &[i64],
    eval_features: ArrayView2<'_, f64>,
    eval_labels: &[i64],
    config: &ProbeConfig,
) -> Result<f64> {
    let (model, _) = train_softmax(train_features, train_labels, config)?;
    accuracy(&predict(&model, eval_features)?, eval_labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn separable_toy_reaches_full_accuracy() {
        let x = array![[0.0, 0.1], [0.2, 0.0], [0.1, 0.3], [1.0, 0.9], [0.8, 1.1], [1.2, 1.0]];
        let y = [3, 3, 3, 8, 8, 8];
        let cfg = ProbeConfig { epochs: 200, batch_size: 2, l2: 0.0, ..ProbeConfig::default() };
        let (m, trace) = train_softmax(x.view(), &y, &cfg).unwrap();
        assert_eq!(predict(&m, x.view()).unwrap(), y.to_vec());
        assert!(trace.losses.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn heavy_l2_keeps_weights_tiny() {
        let x = array![[0.0, 1.0], [1.0, 0.0], [1.0, 1.0], [0.0, 0.0]];
        let y = [0, 1, 1, 0];
        let cfg = ProbeConfig { l2: 1e6, epochs: 50, ..ProbeConfig::default() };
        let (m, _) = train_softmax(x.view(), &y, &cfg).unwrap();
        let norm = m.weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        assert!(norm <= 1e-2, "{norm}");
    }

    #[test]
    fn single_class_rejected() {
        let x = array![[0.0], [1.0]];
        assert!(train_softmax(x.view(), &[4, 4], &ProbeConfig::default()).is_err());
    }

    #[test]
    fn zero_model_predicts_lowest_label() {
        let m = SoftmaxModel { weights: Array2::zeros((2, 3)), bias: Array1::zeros(3), class_labels: vec![2, 5, 9] };
        assert_eq!(predict(&m, array![[1.0, 2.0], [-1.0, 0.5]].view()).unwrap(), vec![2, 2]);
    }

    #[test]
    fn identity_weights_recover_classes() {
        let m = SoftmaxModel { weights: Array2::eye(3), bias: Array1::zeros(3), class_labels: vec![0, 1, 2] };
        assert_eq!(predict(&m, Array2::eye(3).view()).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn accuracy_cases() {
        assert_eq!(accuracy(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, 2], &[3, 4]).unwrap(), 0.0);
        assert_eq!(accuracy(&[1, 2, 3, 4], &[1, 2, 0, 0]).unwrap(), 0.5);
        assert!(accuracy(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn ci_plug_in() {
        assert_eq!(mean_ci95(&[0.3, 0.3, 0.3]).unwrap(), (0.3, 0.0));
        let (m, h) = mean_ci95(&[0.0, 1.0]).unwrap();
        assert_eq!(m, 0.5);
        assert!((h - 1.96 * 0.5f64.sqrt() / 2f64.sqrt()).abs() < 1e-15);
        assert!((h - 0.98).abs() < 1e-12);
        assert!(mean_ci95(&[1.0]).is_err());
    }

    #[test]
    fn probabilities_sum_to_one() {
        let m = SoftmaxModel {
            weights: array![[1.0, -2.0, 0.5], [3.0, 0.0, -1.0]],
            bias: array![0.1, 0.2, 0.3],
            class_labels: vec![0, 1, 2],
        };
        let p = softmax_probs(&m, array![[10.0, -3.0], [0.0, 0.0], [500.0, 800.0]].view());
        for row in p.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
        }
    }
}
