//! Accuracy of a probe on the hidden features of progressively pruned models.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::probe::{probe_accuracy, ProbeConfig};
use crate::ranking::{kept_units, score_features, PruneDirection};
use crate::rbm::Rbm;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub direction: PruneDirection,
    pub kept_units: usize,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruneCurve {
    /// All `drop_lowest` points (largest model first), then all `drop_highest` points.
    pub points: Vec<CurvePoint>,
}

/// `n, n−step, n−2·step, …` while positive.
pub fn keep_grid(n_hidden: usize, step: usize) -> Result<Vec<usize>> {
    if step == 0 {
        return Err(Error::InvalidArgument("prune step must be at least 1".into()));
    }
    Ok((0..).map(|i| i * step).take_while(|&d| d < n_hidden).map(|d| n_hidden - d).collect())
}

/// Probes the hidden probabilities of every pruned model on the step grid, in both
/// directions. The probe is trained on `train` features and evaluated on `test`.
pub fn prune_curve(rbm: &Rbm, train: &Dataset, test: &Dataset, step: usize, probe: &ProbeConfig) -> Result<PruneCurve> {
    let train_labels = train.require_labels("prune curve training set")?;
    let test_labels = test.require_labels("prune curve test set")?;
    let grid = keep_grid(rbm.n_hidden(), step)?;
    let ranking = score_features(rbm);
    let h_train = rbm.hidden_probs(train.samples.view())?;
    let h_test = rbm.hidden_probs(test.samples.view())?;

    let full = probe_accuracy(h_train.view(), train_labels, h_test.view(), test_labels, probe)?;
    let mut points = Vec::with_capacity(2 * grid.len());
    for direction in [PruneDirection::DropLowest, PruneDirection::DropHighest] {
        for &keep in &grid {
            let accuracy = if keep == rbm.n_hidden() {
                full
            } else {
                let cols = kept_units(&ranking, keep, direction)?;
                let tr = h_train.select(ndarray::Axis(1), &cols);
                let te = h_test.select(ndarray::Axis(1), &cols);
                probe_accuracy(tr.view(), train_labels, te.view(), test_labels, probe)?
            };
            log::debug!("{direction} keep={keep} accuracy={accuracy:.4}");
            points.push(CurvePoint { direction, kept_units: keep, accuracy });
        }
    }
    Ok(PruneCurve { points })
}

impl PruneCurve {
    pub fn arm(&self, direction: PruneDirection) -> impl Iterator<Item = &CurvePoint> {
        self.points.iter().filter(move |p| p.direction == direction)
    }

    pub fn accuracy_at(&self, direction: PruneDirection, kept: usize) -> Option<f64> {
        self.arm(direction).find(|p| p.kept_units == kept).map(|p| p.accuracy)
    }

    /// Trapezoidal area under accuracy as a function of kept units.
    pub fn area(&self, direction: PruneDirection) -> f64 {
        let mut pts: Vec<(f64, f64)> = self.arm(direction).map(|p| (p.kept_units as f64, p.accuracy)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("direction,kept_units,accuracy\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", p.direction, p.kept_units, p.accuracy));
        }
        out
    }
}
