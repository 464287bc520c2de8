//! Loading, normalizing, resizing and splitting datasets.
//!
//! Every loader transparently accepts gzip-compressed input (detected by the
//! `1f 8b` prefix).

mod csv;
mod idx;
mod pca;

pub use self::csv::{load_csv, parse_csv};
pub use self::idx::{load_idx, load_idx_images, load_idx_labels, parse_idx_images, parse_idx_labels};
pub use self::pca::{pca_fit, pca_transform, PcaModel};

use std::io::Read;
use std::path::Path;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// How the values of a [`Dataset`] have been transformed since loading.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Raw,
    UnitScaled,
    Binarized,
    Pca,
    Zscore,
}

/// A sample matrix (one row per sample) with optional integer labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub samples: Array2<f64>,
    pub labels: Option<Vec<i64>>,
    /// Image shape `(height, width)` when rows are flattened images.
    pub dims: Option<(usize, usize)>,
    pub normalization: Normalization,
    /// Human-readable log of where the data came from and what was done to it.
    pub provenance: Vec<String>,
}

impl Dataset {
    pub fn new(samples: Array2<f64>, labels: Option<Vec<i64>>) -> Result<Self> {
        let d = Dataset {
            samples,
            labels,
            dims: None,
            normalization: Normalization::Raw,
            provenance: Vec::new(),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn with_dims(mut self, dims: (usize, usize)) -> Result<Self> {
        if dims.0 * dims.1 != self.n_dims() {
            return Err(Error::Shape(format!(
                "image shape {}x{} does not match {} dims",
                dims.0,
                dims.1,
                self.n_dims()
            )));
        }
        self.dims = Some(dims);
        Ok(self)
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn n_samples(&self) -> usize {
        self.samples.nrows()
    }

    pub fn n_dims(&self) -> usize {
        self.samples.ncols()
    }

    /// Labels, or an error naming `context` when the dataset is unlabeled.
    pub fn require_labels(&self, context: &str) -> Result<&[i64]> {
        self.labels
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument(format!("{context}: dataset has no labels")))
    }

    /// Checks the structural invariants.
    pub fn validate(&self) -> Result<()> {
        if self.n_samples() == 0 {
            return Err(Error::Shape("dataset has no samples".into()));
        }
        if self.n_dims() == 0 {
            return Err(Error::Shape("dataset has zero-width rows".into()));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.n_samples() {
                return Err(Error::Shape(format!(
                    "{} labels for {} samples",
                    labels.len(),
                    self.n_samples()
                )));
            }
        }
        if let Some((h, w)) = self.dims {
            if h * w != self.n_dims() {
                return Err(Error::Shape(format!("image shape {h}x{w} vs {} dims", self.n_dims())));
            }
        }
        match self.normalization {
            Normalization::UnitScaled if self.samples.iter().any(|v| !(0.0..=1.0).contains(v)) => {
                return Err(Error::Shape("unit-scaled dataset has entries outside [0,1]".into()))
            }
            Normalization::Binarized if self.samples.iter().any(|&v| v != 0.0 && v != 1.0) => {
                return Err(Error::Shape("binarized dataset has entries outside {0,1}".into()))
            }
            _ => {}
        }
        Ok(())
    }

    /// Rows at `indices`, in that order, with labels kept aligned.
    pub fn select(&self, indices: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n_samples()) {
            return Err(Error::InvalidArgument(format!(
                "sample index {bad} out of range for {} samples",
                self.n_samples()
            )));
        }
        let samples = self.samples.select(Axis(0), indices);
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i]).collect());
        let d = Dataset {
            samples,
            labels,
            dims: self.dims,
            normalization: self.normalization,
            provenance: self.provenance.clone(),
        };
        d.validate()?;
        Ok(d)
    }

    /// Samples whose label is in `classes`, in their original order.
    pub fn filter_classes(&self, classes: &[i64]) -> Result<Dataset> {
        let labels = self.require_labels("filter_classes")?;
        let idx: Vec<usize> = (0..labels.len())
            .filter(|&i| classes.contains(&labels[i]))
            .collect();
        let mut d = self.select(&idx)?;
        d.provenance.push(format!("classes {classes:?}"));
        Ok(d)
    }

    /// The first `n` samples (or all of them if fewer).
    pub fn take(&self, n: usize) -> Result<Dataset> {
        let idx: Vec<usize> = (0..n.min(self.n_samples())).collect();
        self.select(&idx)
    }

    /// Rows `[start, start + n)`.
    pub fn range(&self, start: usize, n: usize) -> Result<Dataset> {
        let end = (start + n).min(self.n_samples());
        let idx: Vec<usize> = (start..end).collect();
        self.select(&idx)
    }
}

/// Reads a whole file, inflating it when it carries the gzip magic prefix.
pub(crate) fn read_maybe_gzip(path: &Path) -> Result<Vec<u8>> {
    let raw = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if raw.len() >= 2 && raw[0] == 0x1f && raw[1] == 0x8b {
        let mut out = Vec::new();
        flate2::read::MultiGzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::io(path, e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

/// Per-value transformation applied by [`normalize`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum NormalizeMode {
    /// Divide by `max`; when absent, 255 for raw data (and a no-op on unit-scaled data).
    UnitScale {
        #[serde(default)]
        max: Option<f64>,
    },
    /// `v >= threshold` maps to 1, everything else to 0.
    Binarize {
        #[serde(default = "default_threshold")]
        threshold: f64,
    },
    /// Per-dimension standardization; zero-variance dimensions are only centered.
    Zscore,
}

fn default_threshold() -> f64 {
    0.5
}

pub fn normalize(d: &Dataset, mode: NormalizeMode) -> Result<Dataset> {
    let mut out = d.clone();
    match mode {
        NormalizeMode::UnitScale { max } => {
            let max = match (max, d.normalization) {
                (Some(m), _) => m,
                (None, Normalization::UnitScaled) | (None, Normalization::Binarized) => return Ok(out),
                (None, Normalization::Raw) => 255.0,
                (None, other) => {
                    return Err(Error::InvalidArgument(format!(
                        "unit_scale needs an explicit max for {other:?} data"
                    )))
                }
            };
            if !(max > 0.0 && max.is_finite()) {
                return Err(Error::InvalidArgument(format!("unit_scale max must be positive, got {max}")));
            }
            if let Some(v) = d.samples.iter().find(|&&v| !(0.0..=max).contains(&v)) {
                return Err(Error::InvalidArgument(format!(
                    "unit_scale: value {v} lies outside [0, {max}]"
                )));
            }
            out.samples.mapv_inplace(|v| v / max);
            out.normalization = Normalization::UnitScaled;
            out.provenance.push(format!("unit_scale(max={max})"));
        }
        NormalizeMode::Binarize { threshold } => {
            if d.normalization != Normalization::UnitScaled && d.normalization != Normalization::Binarized {
                let (lo, hi) = d
                    .samples
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
                if threshold < lo || threshold > hi {
                    let msg = format!(
                        "warning: binarize threshold {threshold} outside data range [{lo}, {hi}] of {:?} data",
                        d.normalization
                    );
                    log::warn!("{msg}");
                    out.provenance.push(msg);
                }
            }
            out.samples.mapv_inplace(|v| if v >= threshold { 1.0 } else { 0.0 });
            out.normalization = Normalization::Binarized;
            out.provenance.push(format!("binarize(threshold={threshold})"));
        }
        NormalizeMode::Zscore => {
            let n = d.n_samples() as f64;
            for mut col in out.samples.columns_mut() {
                let mean = col.sum() / n;
                let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                let std = var.sqrt();
                let denom = if std > 0.0 { std } else { 1.0 };
                col.mapv_inplace(|v| (v - mean) / denom);
            }
            out.normalization = Normalization::Zscore;
            out.provenance.push("zscore".into());
        }
    }
    out.validate()?;
    Ok(out)
}

/// Nearest-neighbour resampling of every image to `new_shape`.
///
/// Output pixel `(r, c)` reads source pixel `(r·h/new_h, c·w/new_w)` (integer division).
pub fn resize_nearest(d: &Dataset, new_shape: (usize, usize)) -> Result<Dataset> {
    let (h, w) = d
        .dims
        .ok_or_else(|| Error::InvalidArgument("resize_nearest needs image dims".into()))?;
    let (nh, nw) = new_shape;
    if nh == 0 || nw == 0 {
        return Err(Error::InvalidArgument("resize target must be non-empty".into()));
    }
    let src_index: Vec<usize> = (0..nh)
        .flat_map(|r| (0..nw).map(move |c| (r * h / nh) * w + (c * w / nw)))
        .collect();
    let mut samples = Array2::zeros((d.n_samples(), nh * nw));
    for (mut dst, src) in samples.rows_mut().into_iter().zip(d.samples.rows()) {
        for (o, &s) in dst.iter_mut().zip(&src_index) {
            *o = src[s];
        }
    }
    let mut out = d.clone();
    out.samples = samples;
    out.dims = Some(new_shape);
    out.provenance.push(format!("resize_nearest({h}x{w} -> {nh}x{nw})"));
    Ok(out)
}

/// Train / validation / test partition produced by [`split`].
#[derive(Clone, Debug)]
pub struct Splits {
    pub train: Dataset,
    pub valid: Dataset,
    pub test: Dataset,
}

/// Deterministic shuffled partition.
///
/// Validation and test sizes are `floor(n·fraction)`; the remainder goes to train.
pub fn split(d: &Dataset, fractions: (f64, f64, f64), seed: u64) -> Result<Splits> {
    let (ft, fv, fs) = fractions;
    if !(ft > 0.0 && fv > 0.0 && fs > 0.0) || ((ft + fv + fs) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "split fractions must be positive and sum to 1, got ({ft}, {fv}, {fs})"
        )));
    }
    let n = d.n_samples();
    // The epsilon absorbs products like 10 * 0.1 landing just below an integer.
    let n_valid = (n as f64 * fv + 1e-9).floor() as usize;
    let n_test = (n as f64 * fs + 1e-9).floor() as usize;
    if n_valid == 0 || n_test == 0 || n_valid + n_test >= n {
        return Err(Error::InvalidArgument(format!(
            "split of {n} samples with ({ft}, {fv}, {fs}) leaves a partition empty"
        )));
    }
    let n_train = n - n_valid - n_test;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::seeded(seed));
    let part = |range: std::ops::Range<usize>, name: &str| -> Result<Dataset> {
        let mut p = d.select(&idx[range])?;
        p.provenance.push(format!("split {name} (seed {seed})"));
        Ok(p)
    };
    Ok(Splits {
        train: part(0..n_train, "train")?,
        valid: part(n_train..n_train + n_valid, "valid")?,
        test: part(n_train + n_valid..n, "test")?,
    })
}
