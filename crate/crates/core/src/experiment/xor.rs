//! Rule extraction from RBMs trained on the XOR truth table.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::Result;
use crate::ranking::{rule_consistency, score_features, to_logical_rules, TruthTable};
use crate::rbm::{self, Rbm, TrainConfig, VisibleType};
use crate::rng::derive_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct XorSettings {
    pub hidden: usize,
    pub seeds: usize,
    pub train: TrainConfig,
}

impl Default for XorSettings {
    fn default() -> Self {
        XorSettings {
            hidden: 10,
            seeds: 100,
            train: TrainConfig {
                learning_rate: 0.05,
                epochs: 5000,
                batch_size: 1,
                momentum: 0.5,
                sparsity_target: Some(0.25),
                sparsity_cost: 0.5,
                ..TrainConfig::default()
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleRow {
    pub hidden_index: usize,
    pub score: f64,
    pub pattern: String,
    pub rule: String,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XorSeedResult {
    pub seed: u64,
    /// One row per hidden unit, highest score first.
    pub rules: Vec<RuleRow>,
    pub top_rule_consistent: bool,
    pub log_likelihood_init: f64,
    pub log_likelihood_final: f64,
    pub reconstruction_init: f64,
    pub reconstruction_final: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XorSummary {
    pub seeds: usize,
    pub rules_consistent: usize,
    pub rules_inconsistent: usize,
    pub mean_consistent_score: f64,
    pub mean_inconsistent_score: f64,
    pub top_rule_consistent_fraction: f64,
    pub likelihood_improved: usize,
    pub reconstruction_improved: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XorReport {
    pub settings: XorSettings,
    pub master_seed: u64,
    pub runs: Vec<XorSeedResult>,
    pub summary: XorSummary,
}

pub fn xor_dataset() -> Dataset {
    Dataset::new(TruthTable::xor().to_matrix(), None).expect("non-empty table")
}

/// Trains one model and reads its rules with `z` as the head.
pub fn xor_run(hidden: usize, train: &TrainConfig, seed: u64) -> Result<(Rbm, XorSeedResult)> {
    let table = TruthTable::xor();
    let data = xor_dataset();
    let init = Rbm::init(3, hidden, VisibleType::Binary, seed)?;
    let cfg = TrainConfig { seed, ..train.clone() };
    let (model, _) = rbm::train(&init, &data, &cfg)?;

    let ranking = score_features(&model);
    let rules = to_logical_rules(&model, &["x", "y", "z"], 2)?;
    let rows: Vec<RuleRow> = ranking
        .order
        .iter()
        .map(|&j| {
            let r = &rules[j];
            RuleRow {
                hidden_index: j,
                score: r.score,
                pattern: r.sign_pattern(),
                rule: r.to_string(),
                consistent: rule_consistency(r, &table),
            }
        })
        .collect();
    let samples: &Array2<f64> = &data.samples;
    let result = XorSeedResult {
        seed,
        top_rule_consistent: rows[0].consistent,
        rules: rows,
        log_likelihood_init: rbm::exact_log_likelihood(&init, samples.view())?,
        log_likelihood_final: rbm::exact_log_likelihood(&model, samples.view())?,
        reconstruction_init: rbm::reconstruction_error(&init, samples.view())?,
        reconstruction_final: rbm::reconstruction_error(&model, samples.view())?,
    };
    Ok((model, result))
}

/// Repeats [`xor_run`] over `settings.seeds` derived seeds and aggregates.
pub fn run_xor(settings: &XorSettings, master_seed: u64) -> Result<XorReport> {
    let runs = (0..settings.seeds)
        .map(|i| xor_run(settings.hidden, &settings.train, derive_seed(master_seed, &[i as u64])).map(|(_, r)| r))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&runs);
    Ok(XorReport {
        settings: settings.clone(),
        master_seed,
        runs,
        summary,
    })
}

fn summarize(runs: &[XorSeedResult]) -> XorSummary {
    let (mut cs, mut cn, mut is, mut inn) = (0.0, 0usize, 0.0, 0usize);
    for row in runs.iter().flat_map(|r| &r.rules) {
        if row.consistent {
            cs += row.score;
            cn += 1;
        } else {
            is += row.score;
            inn += 1;
        }
    }
    let mean = |s: f64, n: usize| if n == 0 { f64::NAN } else { s / n as f64 };
    XorSummary {
        seeds: runs.len(),
        rules_consistent: cn,
        rules_inconsistent: inn,
        mean_consistent_score: mean(cs, cn),
        mean_inconsistent_score: mean(is, inn),
        top_rule_consistent_fraction: runs.iter().filter(|r| r.top_rule_consistent).count() as f64 / runs.len().max(1) as f64,
        likelihood_improved: runs.iter().filter(|r| r.log_likelihood_final > r.log_likelihood_init).count(),
        reconstruction_improved: runs.iter().filter(|r| r.reconstruction_final < r.reconstruction_init).count(),
    }
}

/// Score / sub-network / rule listing for one run.
pub fn format_rule_table(run: &XorSeedResult) -> String {
    let mut out = format!("seed {}\n{:>8}  {:<14} {:<16} consistent\n", run.seed, "score", "sub-network", "rule");
    for r in &run.rules {
        out.push_str(&format!(
            "{:>8.3}  h{:<2} ~ {:<9} {:<16} {}\n",
            r.score,
            r.hidden_index + 1,
            r.pattern,
            r.rule,
            if r.consistent { "yes" } else { "NO" }
        ));
    }
    out
}
