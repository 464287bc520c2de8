//! JSON experiment configuration and dataset assembly.

use std::path::{Path, PathBuf};

use ndarray::Axis;
use serde::{Deserialize, Serialize};

use super::transfer::TransferGrid;
use super::xor::XorSettings;
use crate::data::{self, Dataset, Normalization, NormalizeMode, PcaModel};
use crate::error::{Error, Result};
use crate::probe::ProbeConfig;
use crate::rbm::{TrainConfig, VisibleType};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    #[default]
    Idx,
    Csv,
}

/// Where a dataset comes from and which rows of it to use.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSource {
    /// IDX image file or CSV file.
    pub images: PathBuf,
    /// IDX label file (ignored for CSV).
    pub labels: Option<PathBuf>,
    pub format: DataFormat,
    /// CSV column holding the label; `None` reads every column as a feature.
    pub label_column: Option<usize>,
    /// Keep only these classes (applied before `offset`/`limit`).
    pub classes: Option<Vec<i64>>,
    pub offset: usize,
    pub limit: Option<usize>,
}

impl DataSource {
    pub fn load(&self, base: &Path) -> Result<Dataset> {
        let images = base.join(&self.images);
        let mut d = match self.format {
            DataFormat::Idx => match &self.labels {
                Some(l) => data::load_idx(&images, base.join(l))?,
                None => data::load_idx_images(&images)?,
            },
            DataFormat::Csv => match self.label_column {
                Some(c) => data::load_csv(&images, true, c)?,
                None => data::load_csv(&images, false, 0)?,
            },
        };
        if let Some(classes) = &self.classes {
            d = d.filter_classes(classes)?;
        }
        if self.offset > 0 || self.limit.is_some() {
            if self.offset >= d.n_samples() {
                return Err(Error::Shape(format!(
                    "offset {} is past the {} available samples",
                    self.offset,
                    d.n_samples()
                )));
            }
            d = d.range(self.offset, self.limit.unwrap_or(usize::MAX - self.offset))?;
        }
        Ok(d)
    }
}

/// One preprocessing step; statistics-bearing steps are fitted on the first dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum PreprocessStep {
    UnitScale {
        #[serde(default)]
        max: Option<f64>,
    },
    Binarize {
        #[serde(default = "half")]
        threshold: f64,
    },
    Zscore,
    Resize {
        height: usize,
        width: usize,
    },
    Pca {
        components: usize,
    },
}

fn half() -> f64 {
    0.5
}

/// Applies `steps` to every dataset. PCA and z-scoring use statistics of `sets[0]`.
pub fn preprocess(steps: &[PreprocessStep], sets: &mut [Dataset]) -> Result<()> {
    for step in steps {
        match *step {
            PreprocessStep::UnitScale { max } => apply(sets, |d| data::normalize(d, NormalizeMode::UnitScale { max }))?,
            PreprocessStep::Binarize { threshold } => apply(sets, |d| data::normalize(d, NormalizeMode::Binarize { threshold }))?,
            PreprocessStep::Resize { height, width } => apply(sets, |d| data::resize_nearest(d, (height, width)))?,
            PreprocessStep::Pca { components } => {
                let model: PcaModel = data::pca_fit(sets.first().ok_or_else(no_data)?, components)?;
                apply(sets, |d| data::pca_transform(&model, d))?
            }
            PreprocessStep::Zscore => {
                let reference = sets.first().ok_or_else(no_data)?;
                let mean = reference.samples.mean_axis(Axis(0)).expect("non-empty");
                let std = reference.samples.std_axis(Axis(0), 0.0).mapv(|s| if s > 0.0 { s } else { 1.0 });
                apply(sets, |d| {
                    if d.n_dims() != mean.len() {
                        return Err(Error::Shape(format!("zscore fitted on {} dims, got {}", mean.len(), d.n_dims())));
                    }
                    let mut out = d.clone();
                    out.samples = (&d.samples - &mean) / &std;
                    out.normalization = Normalization::Zscore;
                    out.provenance.push("zscore (reference statistics)".into());
                    Ok(out)
                })?
            }
        }
    }
    Ok(())
}

fn no_data() -> Error {
    Error::InvalidArgument("preprocessing needs at least one dataset".into())
}

fn apply(sets: &mut [Dataset], f: impl Fn(&Dataset) -> Result<Dataset>) -> Result<()> {
    for d in sets.iter_mut() {
        *d = f(d)?;
    }
    Ok(())
}

/// Filter image export for `rank`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterDump {
    pub height: usize,
    pub width: usize,
    /// How many top-ranked units to export; all when absent.
    #[serde(default)]
    pub count: Option<usize>,
}

/// Everything a command needs. Missing fields take their defaults, and reports echo
/// the effective value of every field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub output_dir: Option<PathBuf>,
    pub master_seed: u64,
    pub repeat: usize,
    /// Training data, or the source domain for transfer and sweep.
    pub data: Option<DataSource>,
    /// Held-out data for prune-curve and probe.
    pub test: Option<DataSource>,
    /// Target domain for transfer and sweep; split by `target_split`.
    pub target: Option<DataSource>,
    pub preprocess: Vec<PreprocessStep>,
    pub visible_type: VisibleType,
    pub hidden: usize,
    pub train: TrainConfig,
    pub target_train: TrainConfig,
    pub probe: ProbeConfig,
    pub grid: TransferGrid,
    pub target_split: (f64, f64, f64),
    pub prune_step: usize,
    pub xor: XorSettings,
    /// Pre-trained model; commands that need one train from `data` when absent.
    pub model: Option<PathBuf>,
    pub filters: Option<FilterDump>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let transfer = super::transfer::TransferSettings::default();
        ExperimentConfig {
            output_dir: None,
            master_seed: 0,
            repeat: transfer.repeat,
            data: None,
            test: None,
            target: None,
            preprocess: vec![PreprocessStep::UnitScale { max: None }],
            visible_type: VisibleType::Binary,
            hidden: 100,
            train: TrainConfig::quick(),
            target_train: transfer.target_train,
            probe: transfer.probe,
            grid: transfer.grid,
            target_split: (0.7, 0.15, 0.15),
            prune_step: 10,
            xor: XorSettings::default(),
            model: None,
            filters: None,
        }
    }
}

impl ExperimentConfig {
    /// Parses a config file; relative paths inside it are resolved against its directory
    /// by the caller of [`ExperimentConfig::load`].
    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::from_json(&text)?, base))
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeat == 0 {
            return Err(Error::InvalidArgument("repeat must be at least 1".into()));
        }
        if self.hidden == 0 {
            return Err(Error::InvalidArgument("hidden must be at least 1".into()));
        }
        if self.prune_step == 0 {
            return Err(Error::InvalidArgument("prune_step must be at least 1".into()));
        }
        self.train.validate()?;
        self.target_train.validate()?;
        self.probe.validate()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
