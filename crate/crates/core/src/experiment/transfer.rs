//! Transfer comparisons: adaptive transfer cells against plain, self-taught and
//! raw-input baselines, all scored by the same probe.

use std::time::Instant;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Splits};
use crate::error::{Error, Result};
use crate::probe::{accuracy, mean_ci95, predict, train_softmax, ProbeConfig};
use crate::ranking::score_features;
use crate::rbm::{Rbm, TrainConfig};
use crate::rng::derive_seed;
use crate::transfer::{build_transfer_spec, extract_features, init_target, self_taught_features, train_adaptive};

const CELL_TAG: u64 = 0xce11;
const RAW_TAG: u64 = 0x4a3;
const STL_TAG: u64 = 0x57c;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferGrid {
    pub k: Vec<usize>,
    pub m: Vec<usize>,
    pub theta: Vec<f64>,
}

impl Default for TransferGrid {
    fn default() -> Self {
        TransferGrid {
            k: vec![25, 50],
            m: vec![50, 100],
            theta: vec![0.0, 1.0],
        }
    }
}

impl TransferGrid {
    pub fn validate(&self) -> Result<()> {
        if self.k.is_empty() || self.m.is_empty() || self.theta.is_empty() {
            return Err(Error::InvalidArgument("transfer grid axes must be nonempty".into()));
        }
        if self.m.contains(&0) {
            return Err(Error::InvalidArgument("m values must be positive".into()));
        }
        if let Some(t) = self.theta.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(Error::InvalidArgument(format!("theta {t} not in [0,1]")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.k.len() * self.m.len() * self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cells in `(θ, k, m)` nesting order.
    pub fn cells(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for &theta in &self.theta {
            for &k in &self.k {
                for &m in &self.m {
                    out.push((k, m, theta));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransferSettings {
    pub target_train: TrainConfig,
    pub probe: ProbeConfig,
    pub grid: TransferGrid,
    pub repeat: usize,
}

impl Default for TransferSettings {
    fn default() -> Self {
        TransferSettings {
            target_train: TrainConfig::quick(),
            probe: ProbeConfig::default(),
            grid: TransferGrid::default(),
            repeat: 10,
        }
    }
}

/// One trained and probed model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub k: usize,
    pub m: usize,
    pub theta: f64,
    pub repeat_index: usize,
    pub seed: u64,
    pub valid_accuracy: f64,
    pub test_accuracy: f64,
}

/// Aggregate over the repeats of one `(k, m, θ)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub k: usize,
    pub m: usize,
    pub theta: f64,
    pub mean_valid_accuracy: f64,
    pub mean_accuracy: f64,
    /// `None` with fewer than two repeats.
    pub ci95_half_width: Option<f64>,
}

/// One line of the comparison table, reporting the cell chosen on validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    pub method: String,
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub theta: Option<f64>,
    pub mean_valid_accuracy: f64,
    pub mean_accuracy: f64,
    pub ci95_half_width: Option<f64>,
    pub per_seed_accuracies: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub settings: TransferSettings,
    pub master_seed: u64,
    pub cells: Vec<CellResult>,
    pub summaries: Vec<CellSummary>,
    pub methods: Vec<MethodRow>,
    pub best: CellSummary,
    #[serde(skip)]
    pub seconds: f64,
}

/// Seed of repeat `r` of cell `(k, m, θ)`; it drives initialization, training and the probe.
pub fn cell_seed(master: u64, k: usize, m: usize, theta: f64, r: usize) -> u64 {
    derive_seed(master, &[CELL_TAG, k as u64, m as u64, theta.to_bits(), r as u64])
}

struct Probed {
    valid: f64,
    test: f64,
}

fn probe_splits(
    train: ArrayView2<'_, f64>,
    valid: ArrayView2<'_, f64>,
    test: ArrayView2<'_, f64>,
    splits: &Splits,
    probe: &ProbeConfig,
    seed: u64,
) -> Result<Probed> {
    let cfg = ProbeConfig { seed, ..probe.clone() };
    let (model, _) = train_softmax(train, splits.train.require_labels("target training split")?, &cfg)?;
    let valid_acc = accuracy(&predict(&model, valid)?, splits.valid.require_labels("target validation split")?)?;
    let test_acc = accuracy(&predict(&model, test)?, splits.test.require_labels("target test split")?)?;
    Ok(Probed { valid: valid_acc, test: test_acc })
}

fn features_of(f: impl Fn(&Dataset) -> Result<Array2<f64>>, splits: &Splits) -> Result<[Array2<f64>; 3]> {
    Ok([f(&splits.train)?, f(&splits.valid)?, f(&splits.test)?])
}

/// Trains one target model for the cell and probes its `k + m` features.
pub fn run_cell(source: &Rbm, splits: &Splits, settings: &TransferSettings, k: usize, m: usize, theta: f64, seed: u64) -> Result<(f64, f64)> {
    let spec = build_transfer_spec(source, &score_features(source), k, theta)?;
    let target = init_target(spec, splits.train.n_dims(), m, source.visible_type, seed)?;
    let cfg = TrainConfig { seed, ..settings.target_train.clone() };
    let (trained, _) = train_adaptive(&target, &splits.train, &cfg)?;
    let [tr, va, te] = features_of(|d| extract_features(&trained, d), splits)?;
    let p = probe_splits(tr.view(), va.view(), te.view(), splits, &settings.probe, seed)?;
    Ok((p.valid, p.test))
}

fn summarize(k: usize, m: usize, theta: f64, results: &[&CellResult]) -> Result<CellSummary> {
    let valid: Vec<f64> = results.iter().map(|c| c.valid_accuracy).collect();
    let test: Vec<f64> = results.iter().map(|c| c.test_accuracy).collect();
    let n = results.len() as f64;
    Ok(CellSummary {
        k,
        m,
        theta,
        mean_valid_accuracy: valid.iter().sum::<f64>() / n,
        mean_accuracy: test.iter().sum::<f64>() / n,
        ci95_half_width: if results.len() >= 2 { Some(mean_ci95(&test)?.1) } else { None },
    })
}

fn method_row(name: &str, key: Option<(usize, usize, f64)>, valid: &[f64], test: &[f64]) -> Result<MethodRow> {
    let n = test.len() as f64;
    Ok(MethodRow {
        method: name.to_string(),
        k: key.map(|c| c.0),
        m: key.map(|c| c.1),
        theta: key.map(|c| c.2),
        mean_valid_accuracy: valid.iter().sum::<f64>() / n,
        mean_accuracy: test.iter().sum::<f64>() / n,
        ci95_half_width: if test.len() >= 2 { Some(mean_ci95(test)?.1) } else { None },
        per_seed_accuracies: test.to_vec(),
    })
}

/// Highest mean validation accuracy; the earliest candidate wins ties.
fn select<'a>(candidates: impl Iterator<Item = &'a CellSummary>) -> Option<&'a CellSummary> {
    candidates.fold(None, |best: Option<&CellSummary>, c| match best {
        Some(b) if b.mean_valid_accuracy >= c.mean_valid_accuracy => Some(b),
        _ => Some(c),
    })
}

/// Runs every grid cell `repeat` times plus the baselines, selecting each method's
/// configuration on the validation split and reporting test accuracy.
pub fn run_transfer(source: &Rbm, splits: &Splits, settings: &TransferSettings, master_seed: u64) -> Result<TransferReport> {
    let start = Instant::now();
    settings.grid.validate()?;
    if settings.repeat == 0 {
        return Err(Error::InvalidArgument("repeat must be at least 1".into()));
    }
    if splits.train.n_dims() != source.n_visible() {
        return Err(Error::Shape(format!(
            "target data has {} dims, source model has {} visible units",
            splits.train.n_dims(),
            source.n_visible()
        )));
    }

    let grid_cells = settings.grid.cells();
    let mut keys = grid_cells.clone();
    for &m in &settings.grid.m {
        if !keys.contains(&(0, m, 0.0)) {
            keys.push((0, m, 0.0));
        }
    }

    let mut cells = Vec::with_capacity(keys.len() * settings.repeat);
    for &(k, m, theta) in &keys {
        for r in 0..settings.repeat {
            let seed = cell_seed(master_seed, k, m, theta, r);
            let (valid_accuracy, test_accuracy) = run_cell(source, splits, settings, k, m, theta, seed)?;
            log::info!("k={k} m={m} theta={theta} r={r} valid={valid_accuracy:.4} test={test_accuracy:.4}");
            cells.push(CellResult { k, m, theta, repeat_index: r, seed, valid_accuracy, test_accuracy });
        }
    }
    let summary_of = |key: (usize, usize, f64)| {
        let rs: Vec<&CellResult> = cells.iter().filter(|c| (c.k, c.m, c.theta) == key).collect();
        summarize(key.0, key.1, key.2, &rs)
    };
    let all_summaries = keys.iter().map(|&k| summary_of(k)).collect::<Result<Vec<_>>>()?;
    let summaries: Vec<CellSummary> = all_summaries[..grid_cells.len()].to_vec();

    let per_seed = |s: &CellSummary| -> (Vec<f64>, Vec<f64>) {
        cells
            .iter()
            .filter(|c| (c.k, c.m, c.theta) == (s.k, s.m, s.theta))
            .map(|c| (c.valid_accuracy, c.test_accuracy))
            .unzip()
    };
    let cell_row = |name: &str, s: &CellSummary| {
        let (v, t) = per_seed(s);
        method_row(name, Some((s.k, s.m, s.theta)), &v, &t)
    };

    let mut methods = Vec::new();

    let (mut rv, mut rt) = (Vec::new(), Vec::new());
    for r in 0..settings.repeat {
        let p = probe_splits(
            splits.train.samples.view(),
            splits.valid.samples.view(),
            splits.test.samples.view(),
            splits,
            &settings.probe,
            derive_seed(master_seed, &[RAW_TAG, r as u64]),
        )?;
        rv.push(p.valid);
        rt.push(p.test);
    }
    methods.push(method_row("raw-pixel probe", None, &rv, &rt)?);

    let plain = select(all_summaries.iter().filter(|s| s.k == 0 && s.theta == 0.0)).expect("plain cells exist");
    methods.push(cell_row("plain RBM", plain)?);

    let [tr, va, te] = features_of(|d| self_taught_features(source, d), splits)?;
    let (mut sv, mut st) = (Vec::new(), Vec::new());
    for r in 0..settings.repeat {
        let p = probe_splits(tr.view(), va.view(), te.view(), splits, &settings.probe, derive_seed(master_seed, &[STL_TAG, r as u64]))?;
        sv.push(p.valid);
        st.push(p.test);
    }
    methods.push(method_row("RBM STL", None, &sv, &st)?);

    for &theta in &settings.grid.theta {
        let chosen = select(summaries.iter().filter(|s| s.theta == theta)).expect("nonempty grid");
        methods.push(cell_row(&format!("ASTL θ={theta}"), chosen)?);
    }

    let best = select(summaries.iter()).expect("nonempty grid").clone();
    Ok(TransferReport {
        settings: settings.clone(),
        master_seed,
        cells: cells.into_iter().filter(|c| grid_cells.contains(&(c.k, c.m, c.theta))).collect(),
        summaries,
        methods,
        best,
        seconds: start.elapsed().as_secs_f64(),
    })
}

impl TransferReport {
    pub fn method(&self, name: &str) -> Option<&MethodRow> {
        self.methods.iter().find(|m| m.method == name)
    }

    /// `k,m,theta,mean_accuracy,ci95_half_width` per grid cell; an empty field when no CI.
    pub fn heatmap_csv(&self) -> String {
        let mut out = String::from("k,m,theta,mean_accuracy,ci95_half_width\n");
        for s in &self.summaries {
            let ci = s.ci95_half_width.map(|c| c.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{},{},{}\n", s.k, s.m, s.theta, s.mean_accuracy, ci));
        }
        out
    }

    /// Fixed-width comparison table.
    pub fn format_table(&self) -> String {
        let mut out = format!("{:<18} {:>5} {:>5} {:>6} {:>9} {:>9}\n", "method", "k", "m", "theta", "accuracy", "ci95");
        let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
        for r in &self.methods {
            out.push_str(&format!(
                "{:<18} {:>5} {:>5} {:>6} {:>9.4} {:>9}\n",
                r.method,
                opt(r.k.map(|v| v.to_string())),
                opt(r.m.map(|v| v.to_string())),
                opt(r.theta.map(|v| v.to_string())),
                r.mean_accuracy,
                opt(r.ci95_half_width.map(|v| format!("{v:.4}"))),
            ));
        }
        out
    }
}
