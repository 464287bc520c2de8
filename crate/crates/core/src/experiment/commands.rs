//! The `rbmtl` subcommands as library functions. Each writes its artifacts and a
//! `manifest.json` into the output directory.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use super::prune::prune_curve;
use super::transfer::{run_transfer, TransferSettings};
use super::xor::{format_rule_table, run_xor};
use crate::data::{self, Dataset};
use crate::error::{Error, Result};
use crate::persist::{self, ModelFile};
use crate::probe::{mean_ci95, probe_accuracy, ProbeConfig};
use crate::ranking::{filter_pgm, ranking_csv, score_features, PruneDirection};
use crate::rbm::{self, Rbm, TrainConfig};
use crate::rng::derive_seed;

/// Environment variable naming the output root when no flag is given.
pub const OUTPUT_DIR_ENV: &str = "RBMTL_OUTPUT_DIR";
const DEFAULT_OUTPUT_DIR: &str = "rbmtl-out";
const SPLIT_TAG: u64 = 0x5b1;
const PROBE_TAG: u64 = 0x9b0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Train,
    Rank,
    PruneCurve,
    Xor,
    Transfer,
    Sweep,
    Probe,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Train => "train",
            Command::Rank => "rank",
            Command::PruneCurve => "prune-curve",
            Command::Xor => "xor",
            Command::Transfer => "transfer",
            Command::Sweep => "sweep",
            Command::Probe => "probe",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub version: String,
    /// File names relative to the output directory.
    pub outputs: Vec<String>,
}

/// What a command produced: the manifest and a short human-readable summary.
#[derive(Clone, Debug)]
pub struct CommandOutput {
    pub output_dir: PathBuf,
    pub manifest: Manifest,
    pub summary: String,
}

/// Flag, then environment, then config file, then `rbmtl-out`.
pub fn resolve_output_dir(flag: Option<&Path>, config: &ExperimentConfig) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    config.output_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

/// Hex SHA-256 of the effective configuration, excluding where outputs go.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let mut c = config.clone();
    c.output_dir = None;
    let digest = Sha256::digest(c.to_json().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text)
    }
}

#[derive(Serialize)]
struct Echo<'a, T: Serialize> {
    config: &'a ExperimentConfig,
    #[serde(flatten)]
    report: T,
}

/// Runs `command` with `config`; relative data and model paths resolve against `base_dir`.
pub fn run_command(command: Command, config: &ExperimentConfig, base_dir: &Path, output_dir: &Path) -> Result<CommandOutput> {
    config.validate()?;
    std::fs::create_dir_all(output_dir).map_err(|e| Error::io(output_dir, e))?;
    let mut out = Outputs { dir: output_dir.to_path_buf(), files: Vec::new() };
    let ctx = Ctx { config, base: base_dir };
    let summary = match command {
        Command::Train => ctx.train(&mut out)?,
        Command::Rank => ctx.rank(&mut out)?,
        Command::PruneCurve => ctx.prune_curve(&mut out)?,
        Command::Xor => ctx.xor(&mut out)?,
        Command::Transfer => ctx.transfer(&mut out, false)?,
        Command::Sweep => ctx.transfer(&mut out, true)?,
        Command::Probe => ctx.probe(&mut out)?,
    };
    let manifest = Manifest {
        command: command.to_string(),
        config_sha256: config_hash(config),
        seed: config.master_seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        outputs: out.files.clone(),
    };
    out.json("manifest.json", &manifest)?;
    Ok(CommandOutput { output_dir: output_dir.to_path_buf(), manifest, summary })
}

struct Ctx<'a> {
    config: &'a ExperimentConfig,
    base: &'a Path,
}

impl Ctx<'_> {
    fn source(&self, field: &str, src: &Option<super::config::DataSource>) -> Result<Dataset> {
        src.as_ref()
            .ok_or_else(|| Error::InvalidArgument(format!("this command needs `{field}` in the config")))?
            .load(self.base)
    }

    /// Loads `data` plus the named extra sources and runs the preprocessing chain,
    /// fitted on `data`.
    fn datasets(&self, with_test: bool, with_target: bool) -> Result<Vec<Dataset>> {
        let mut sets = vec![self.source("data", &self.config.data)?];
        if with_test {
            sets.push(self.source("test", &self.config.test)?);
        }
        if with_target {
            sets.push(self.source("target", &self.config.target)?);
        }
        super::config::preprocess(&self.config.preprocess, &mut sets)?;
        Ok(sets)
    }

    fn train_config(&self) -> TrainConfig {
        TrainConfig { seed: self.config.master_seed, ..self.config.train.clone() }
    }

    fn fit(&self, data: &Dataset, out: &mut Outputs) -> Result<Rbm> {
        let init = Rbm::init(data.n_dims(), self.config.hidden, self.config.visible_type, self.config.master_seed)?;
        let (model, trace) = rbm::train(&init, data, &self.train_config())?;
        out.write("model.json", persist::rbm_to_json(&model)?)?;
        out.json("train_trace.json", &trace)?;
        Ok(model)
    }

    /// The configured model file, or a model trained on `data` when none is given.
    fn model(&self, data: Option<&Dataset>, out: &mut Outputs) -> Result<Rbm> {
        match (&self.config.model, data) {
            (Some(p), _) => Ok(persist::load_model(self.base.join(p))?.into_feature_model()),
            (None, Some(d)) => self.fit(d, out),
            (None, None) => Err(Error::InvalidArgument("this command needs `model` or `data` in the config".into())),
        }
    }

    fn train(&self, out: &mut Outputs) -> Result<String> {
        let data = self.datasets(false, false)?.remove(0);
        let model = self.fit(&data, out)?;
        let err = rbm::reconstruction_error(&model, data.samples.view())?;
        Ok(format!(
            "trained {}x{} {:?} RBM on {} samples; reconstruction error {err:.6}",
            model.n_visible(),
            model.n_hidden(),
            model.visible_type,
            data.n_samples()
        ))
    }

    fn rank(&self, out: &mut Outputs) -> Result<String> {
        let data = match (&self.config.model, &self.config.data) {
            (Some(_), None) => None,
            _ => Some(self.datasets(false, false)?.remove(0)),
        };
        let model = self.model(data.as_ref(), out)?;
        let ranking = score_features(&model);
        out.write("ranking.csv", ranking_csv(&ranking))?;
        let shape = self
            .config
            .filters
            .as_ref()
            .map(|f| (f.height, f.width, f.count))
            .or_else(|| data.as_ref().and_then(|d| d.dims).map(|(h, w)| (h, w, None)));
        let mut dumped = 0;
        if let Some((h, w, count)) = shape {
            for (r, &j) in ranking.order.iter().take(count.unwrap_or(usize::MAX)).enumerate() {
                let pgm = filter_pgm(model.weights.column(j), h, w)?;
                out.write(&format!("filters/rank{r:03}_unit{j:03}.pgm"), pgm)?;
                dumped += 1;
            }
        }
        let top: Vec<String> = ranking.order.iter().take(5).map(|&j| format!("h{j}={:.4}", ranking.scores[j])).collect();
        Ok(format!(
            "ranked {} units (top: {}); total information loss {:.6}; {dumped} filter images",
            model.n_hidden(),
            top.join(", "),
            ranking.total_loss
        ))
    }

    fn prune_curve(&self, out: &mut Outputs) -> Result<String> {
        let mut sets = self.datasets(true, false)?;
        let test = sets.pop().expect("two sets");
        let train = sets.pop().expect("two sets");
        let model = self.model(Some(&train), out)?;
        let probe = ProbeConfig { seed: self.config.master_seed, ..self.config.probe.clone() };
        let curve = prune_curve(&model, &train, &test, self.config.prune_step, &probe)?;
        out.write("prune_curve.csv", curve.to_csv())?;
        let (lo, hi) = (curve.area(PruneDirection::DropLowest), curve.area(PruneDirection::DropHighest));
        #[derive(Serialize)]
        struct Areas<'a> {
            area_drop_lowest: f64,
            area_drop_highest: f64,
            curve: &'a super::prune::PruneCurve,
        }
        out.json("prune_report.json", &Echo { config: self.config, report: Areas { area_drop_lowest: lo, area_drop_highest: hi, curve: &curve } })?;
        Ok(format!("area under curve: drop_lowest {lo:.4}, drop_highest {hi:.4}"))
    }

    fn xor(&self, out: &mut Outputs) -> Result<String> {
        let report = run_xor(&self.config.xor, self.config.master_seed)?;
        out.json("xor_report.json", &Echo { config: self.config, report: &report })?;
        let s = &report.summary;
        let mut text = report.runs.first().map(format_rule_table).unwrap_or_default();
        text.push_str(&format!(
            "{} seeds: consistent rules {} (mean score {:.4}), inconsistent {} (mean score {:.4}); \
             top rule consistent in {:.0}% of seeds; likelihood improved in {}",
            s.seeds,
            s.rules_consistent,
            s.mean_consistent_score,
            s.rules_inconsistent,
            s.mean_inconsistent_score,
            100.0 * s.top_rule_consistent_fraction,
            s.likelihood_improved
        ));
        Ok(text)
    }

    fn transfer(&self, out: &mut Outputs, sweep: bool) -> Result<String> {
        let mut sets = self.datasets(false, true)?;
        let target = sets.pop().expect("two sets");
        let source_data = sets.pop().expect("two sets");
        let source = self.model(Some(&source_data), out)?;
        let splits = data::split(&target, self.config.target_split, derive_seed(self.config.master_seed, &[SPLIT_TAG]))?;
        let settings = TransferSettings {
            target_train: self.config.target_train.clone(),
            probe: self.config.probe.clone(),
            grid: self.config.grid.clone(),
            repeat: self.config.repeat,
        };
        let report = run_transfer(&source, &splits, &settings, self.config.master_seed)?;
        if sweep {
            out.write("sweep.csv", report.heatmap_csv())?;
            out.json("sweep_report.json", &Echo { config: self.config, report: &report })?;
            Ok(report.heatmap_csv())
        } else {
            out.json("transfer_report.json", &Echo { config: self.config, report: &report })?;
            Ok(report.format_table())
        }
    }

    fn probe(&self, out: &mut Outputs) -> Result<String> {
        let mut sets = self.datasets(true, false)?;
        let test = sets.pop().expect("two sets");
        let train = sets.pop().expect("two sets");
        let (tr, te) = match &self.config.model {
            Some(p) => {
                let m = match persist::load_model(self.base.join(p))? {
                    ModelFile::Plain(r) => r,
                    other => other.into_feature_model(),
                };
                (m.hidden_probs(train.samples.view())?, m.hidden_probs(test.samples.view())?)
            }
            None => (train.samples.clone(), test.samples.clone()),
        };
        let train_labels = train.require_labels("probe training data")?;
        let test_labels = test.require_labels("probe test data")?;
        let accs = (0..self.config.repeat)
            .map(|r| {
                let cfg = ProbeConfig { seed: derive_seed(self.config.master_seed, &[PROBE_TAG, r as u64]), ..self.config.probe.clone() };
                probe_accuracy(tr.view(), train_labels, te.view(), test_labels, &cfg)
            })
            .collect::<Result<Vec<f64>>>()?;
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        let ci = if accs.len() >= 2 { Some(mean_ci95(&accs)?.1) } else { None };
        #[derive(Serialize)]
        struct ProbeReport<'a> {
            per_seed_accuracies: &'a [f64],
            mean: f64,
            ci95_half_width: Option<f64>,
        }
        out.json("probe_report.json", &Echo { config: self.config, report: ProbeReport { per_seed_accuracies: &accs, mean, ci95_half_width: ci } })?;
        Ok(match ci {
            Some(c) => format!("probe accuracy {mean:.4} ± {c:.4} over {} seeds", accs.len()),
            None => format!("probe accuracy {mean:.4}"),
        })
    }
}
