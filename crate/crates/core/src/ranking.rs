//! Magnitude scores of hidden-unit sub-networks.
//!
//! Replacing every weight `w_ij` of hidden unit `j` by `c_j·s_ij` with `s_ij ∈ {−1,+1}`
//! loses `Σ_i (w_ij − c_j s_ij)²`. That loss is minimized by `s_ij = sign(w_ij)` and
//! `c_j = Σ_i |w_ij| / n_visible`, which is the score used to rank units.

use std::fmt;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rbm::Rbm;

/// Largest visible layer accepted by the exhaustive sign search.
pub const MAX_EXHAUSTIVE_VISIBLE: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRanking {
    /// `c_j`, one per hidden unit.
    pub scores: Array1<f64>,
    /// `s_ij ∈ {−1, +1}`, shaped like the weights.
    pub signs: Array2<i8>,
    /// Hidden indices by descending score, ties by ascending index.
    pub order: Vec<usize>,
    /// Information loss at the optimum, summed over units.
    pub total_loss: f64,
}

/// `+1` for `w ≥ 0`, `−1` otherwise.
#[inline]
pub fn weight_sign(w: f64) -> i8 {
    if w < 0.0 {
        -1
    } else {
        1
    }
}

fn order_by_score(scores: &Array1<f64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

pub fn score_features(rbm: &Rbm) -> FeatureRanking {
    let n_vis = rbm.n_visible() as f64;
    let w = &rbm.weights;
    let scores = w.map_axis(Axis(0), |col| col.iter().map(|x| x.abs()).sum::<f64>() / n_vis);
    let signs = w.mapv(weight_sign);
    let total_loss = w
        .columns()
        .into_iter()
        .zip(scores.iter())
        .map(|(col, &c)| col.dot(&col) - n_vis * c * c)
        .sum();
    FeatureRanking {
        order: order_by_score(&scores),
        scores,
        signs,
        total_loss,
    }
}

/// `Σ_i (w_i − c·s_i)²` for one unit.
pub fn unit_loss(weights: ArrayView1<'_, f64>, c: f64, signs: ArrayView1<'_, i8>) -> f64 {
    weights
        .iter()
        .zip(signs.iter())
        .map(|(&w, &s)| {
            let d = w - c * f64::from(s);
            d * d
        })
        .sum()
}

/// Information loss summed directly over all units and weights.
pub fn information_loss(weights: &Array2<f64>, scores: &Array1<f64>, signs: &Array2<i8>) -> f64 {
    weights
        .columns()
        .into_iter()
        .zip(signs.columns())
        .zip(scores.iter())
        .map(|((w, s), &c)| unit_loss(w, c, s))
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizerReport {
    pub passed: bool,
    /// Smallest `loss(alternative) − loss(optimum)` seen; negative means a better point was found.
    pub worst_margin: f64,
    pub worst_unit: usize,
    pub perturbation_checks: usize,
    pub exhaustive_checks: usize,
}

/// Checks that the closed-form `(c_j, s_j)` cannot be beaten.
///
/// Always tries `trials` random perturbations of each `c_j` with the signs held fixed.
/// With `exhaustive`, also visits every sign vector together with its stationary
/// scale `Σ_i w_ij s_ij / n_visible`. Passes when no margin falls below `−1e-12`.
pub fn verify_minimizer<R: Rng + ?Sized>(rbm: &Rbm, trials: usize, exhaustive: bool, rng: &mut R) -> Result<MinimizerReport> {
    let n_vis = rbm.n_visible();
    if exhaustive && n_vis > MAX_EXHAUSTIVE_VISIBLE {
        return Err(Error::TooLarge(format!(
            "exhaustive sign search over {n_vis} visible units (max {MAX_EXHAUSTIVE_VISIBLE})"
        )));
    }
    let ranking = score_features(rbm);
    let mut report = MinimizerReport {
        passed: true,
        worst_margin: f64::INFINITY,
        worst_unit: 0,
        perturbation_checks: 0,
        exhaustive_checks: 0,
    };
    let note = |margin: f64, unit: usize, r: &mut MinimizerReport| {
        if margin < r.worst_margin {
            r.worst_margin = margin;
            r.worst_unit = unit;
        }
    };
    let mut alt_signs = Array1::<i8>::zeros(n_vis);
    for j in 0..rbm.n_hidden() {
        let w = rbm.weights.column(j);
        let s = ranking.signs.column(j);
        let c = ranking.scores[j];
        let best = unit_loss(w, c, s);
        for _ in 0..trials {
            let delta: f64 = StandardNormal.sample(rng);
            let delta = delta * (c.abs() + 1e-3);
            note(unit_loss(w, c + delta, s) - best, j, &mut report);
            report.perturbation_checks += 1;
        }
        if exhaustive {
            for pattern in 0..1u32 << n_vis {
                for (i, sv) in alt_signs.iter_mut().enumerate() {
                    *sv = if (pattern >> i) & 1 == 1 { -1 } else { 1 };
                }
                let c_alt = w.iter().zip(alt_signs.iter()).map(|(&x, &sv)| x * f64::from(sv)).sum::<f64>() / n_vis as f64;
                note(unit_loss(w, c_alt, alt_signs.view()) - best, j, &mut report);
                report.exhaustive_checks += 1;
            }
        }
    }
    report.passed = report.worst_margin >= -1e-12;
    Ok(report)
}

/// Hidden indices in rank order.
pub fn rank(ranking: &FeatureRanking) -> &[usize] {
    &ranking.order
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneDirection {
    /// Remove low scores, keep the top of the ranking.
    DropLowest,
    /// Remove high scores, keep the bottom of the ranking.
    DropHighest,
}

impl fmt::Display for PruneDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PruneDirection::DropLowest => "drop_lowest",
            PruneDirection::DropHighest => "drop_highest",
        })
    }
}

/// Hidden indices that survive pruning to `keep` units, in ascending index order.
pub fn kept_units(ranking: &FeatureRanking, keep: usize, direction: PruneDirection) -> Result<Vec<usize>> {
    let n = ranking.order.len();
    if keep == 0 || keep > n {
        return Err(Error::InvalidArgument(format!("keep={keep} must be in 1..={n}")));
    }
    let mut kept: Vec<usize> = match direction {
        PruneDirection::DropLowest => ranking.order[..keep].to_vec(),
        PruneDirection::DropHighest => ranking.order[n - keep..].to_vec(),
    };
    kept.sort_unstable();
    Ok(kept)
}

/// The sub-model made of the kept hidden units (columns and hidden biases), in their
/// original order. Visible biases are unchanged.
pub fn prune(rbm: &Rbm, keep: usize, direction: PruneDirection) -> Result<Rbm> {
    let kept = kept_units(&score_features(rbm), keep, direction)?;
    Ok(Rbm {
        weights: rbm.weights.select(Axis(1), &kept),
        visible_bias: rbm.visible_bias.clone(),
        hidden_bias: rbm.hidden_bias.select(Axis(0), &kept),
        visible_type: rbm.visible_type,
    })
}

/// Hidden unit `j` with its connections to the visible layer and its bias.
#[derive(Clone, Debug, PartialEq)]
pub struct SubNetwork {
    pub hidden_index: usize,
    pub weights: Array1<f64>,
    pub hidden_bias: f64,
    pub score: f64,
    pub signs: Array1<i8>,
}

pub fn extract_subnetworks(rbm: &Rbm, indices: &[usize]) -> Result<Vec<SubNetwork>> {
    let n_vis = rbm.n_visible() as f64;
    indices
        .iter()
        .map(|&j| {
            if j >= rbm.n_hidden() {
                return Err(Error::InvalidArgument(format!(
                    "hidden index {j} out of range for {} units",
                    rbm.n_hidden()
                )));
            }
            let weights = rbm.weights.column(j).to_owned();
            Ok(SubNetwork {
                hidden_index: j,
                score: weights.iter().map(|x| x.abs()).sum::<f64>() / n_vis,
                signs: weights.mapv(weight_sign),
                hidden_bias: rbm.hidden_bias[j],
                weights,
            })
        })
        .collect()
}

/// A possibly negated variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Literal {
    pub index: usize,
    pub name: String,
    pub positive: bool,
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.name)
        } else {
            write!(f, "¬{}", self.name)
        }
    }
}

/// `head = body₁ ∧ body₂ ∧ …`, read off the weight signs of one hidden unit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicalRule {
    pub hidden_index: usize,
    pub head: Literal,
    pub body: Vec<Literal>,
    pub score: f64,
}

impl LogicalRule {
    /// Sign pattern over all variables in index order, e.g. `{+x,-y,+z}`.
    pub fn sign_pattern(&self) -> String {
        let mut lits: Vec<&Literal> = self.body.iter().chain(std::iter::once(&self.head)).collect();
        lits.sort_by_key(|l| l.index);
        let parts: Vec<String> = lits
            .iter()
            .map(|l| format!("{}{}", if l.positive { '+' } else { '-' }, l.name))
            .collect();
        format!("{{{}}}", parts.join(","))
    }
}

impl fmt::Display for LogicalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = ", self.head)?;
        for (i, lit) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∧ ")?;
            }
            write!(f, "{lit}")?;
        }
        Ok(())
    }
}

/// One rule per hidden unit; variable `i` takes polarity `sign(w_ij)`.
pub fn to_logical_rules(rbm: &Rbm, var_names: &[&str], head_index: usize) -> Result<Vec<LogicalRule>> {
    if var_names.len() != rbm.n_visible() {
        return Err(Error::InvalidArgument(format!(
            "{} variable names for {} visible units",
            var_names.len(),
            rbm.n_visible()
        )));
    }
    if head_index >= var_names.len() {
        return Err(Error::InvalidArgument(format!(
            "head index {head_index} out of range for {} variables",
            var_names.len()
        )));
    }
    let ranking = score_features(rbm);
    Ok((0..rbm.n_hidden())
        .map(|j| {
            let lit = |i: usize| Literal {
                index: i,
                name: var_names[i].to_string(),
                positive: ranking.signs[[i, j]] > 0,
            };
            LogicalRule {
                hidden_index: j,
                head: lit(head_index),
                body: (0..var_names.len()).filter(|&i| i != head_index).map(lit).collect(),
                score: ranking.scores[j],
            }
        })
        .collect())
}

/// Boolean truth table with named columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthTable {
    pub vars: Vec<String>,
    pub rows: Vec<Vec<bool>>,
}

impl TruthTable {
    /// `z = x XOR y` over columns `(x, y, z)`.
    pub fn xor() -> TruthTable {
        TruthTable {
            vars: vec!["x".into(), "y".into(), "z".into()],
            rows: vec![
                vec![false, false, false],
                vec![false, true, true],
                vec![true, false, true],
                vec![true, true, false],
            ],
        }
    }

    /// Rows as 0/1 reals, for training.
    pub fn to_matrix(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.rows.len(), self.vars.len()), |(r, c)| f64::from(u8::from(self.rows[r][c])))
    }
}

/// True iff every row satisfying the body also satisfies the head.
pub fn rule_consistency(rule: &LogicalRule, table: &TruthTable) -> bool {
    let holds = |lit: &Literal, row: &[bool]| row[lit.index] == lit.positive;
    table
        .rows
        .iter()
        .filter(|row| rule.body.iter().all(|l| holds(l, row)))
        .all(|row| holds(&rule.head, row))
}

/// Ranking as CSV with columns `hidden_index,score,rank` (rank 0 is the highest score).
pub fn ranking_csv(ranking: &FeatureRanking) -> String {
    let mut rank_of = vec![0; ranking.order.len()];
    for (r, &j) in ranking.order.iter().enumerate() {
        rank_of[j] = r;
    }
    let mut out = String::from("hidden_index,score,rank\n");
    for (j, s) in ranking.scores.iter().enumerate() {
        out.push_str(&format!("{j},{s},{}\n", rank_of[j]));
    }
    out
}

/// Binary PGM (P5) image of one unit's weights, mapped affinely so the minimum is 0
/// and the maximum 255. A constant column renders black.
pub fn filter_pgm(weights: ArrayView1<'_, f64>, height: usize, width: usize) -> Result<Vec<u8>> {
    if height * width != weights.len() {
        return Err(Error::Shape(format!(
            "{height}x{width} image for {} weights",
            weights.len()
        )));
    }
    let (lo, hi) = weights
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &w| (lo.min(w), hi.max(w)));
    let span = hi - lo;
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(weights.iter().map(|&w| {
        if span > 0.0 {
            ((w - lo) / span * 255.0).round() as u8
        } else {
            0
        }
    }));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rbm::VisibleType;
    use ndarray::array;

    fn model(w: Array2<f64>) -> Rbm {
        let (v, h) = w.dim();
        Rbm::from_parts(w, Array1::zeros(v), Array1::zeros(h), VisibleType::Binary).unwrap()
    }

    #[test]
    fn two_term_column() {
        let r = score_features(&model(array![[0.5], [-1.5]]));
        assert_eq!(r.scores[0], 1.0);
        assert_eq!(r.signs.column(0).to_vec(), vec![1, -1]);
        assert!((r.total_loss - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_column() {
        let r = score_features(&model(array![[0.0], [0.0], [0.0]]));
        assert_eq!(r.scores[0], 0.0);
        assert!(r.signs.iter().all(|&s| s == 1));
        assert_eq!(r.total_loss, 0.0);
    }

    #[test]
    fn single_weight_optimum() {
        let rbm = model(array![[0.7]]);
        let r = score_features(&rbm);
        assert_eq!((r.scores[0], r.signs[[0, 0]]), (0.7, 1));
        assert_eq!(r.total_loss, 0.0);
        let rep = verify_minimizer(&rbm, 10, true, &mut crate::rng::seeded(0)).unwrap();
        assert!(rep.passed);
    }

    #[test]
    fn flipped_sign_costs_eight_thirds() {
        let w = array![1.0, 1.0, 1.0];
        let s = array![1i8, 1, -1];
        let c: f64 = w.iter().zip(s.iter()).map(|(&x, &sv)| x * f64::from(sv)).sum::<f64>() / 3.0;
        assert!((c - 1.0 / 3.0).abs() < 1e-15);
        assert!((unit_loss(w.view(), c, s.view()) - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_guard() {
        let rbm = model(Array2::zeros((13, 1)));
        assert!(verify_minimizer(&rbm, 0, true, &mut crate::rng::seeded(0)).is_err());
        assert!(verify_minimizer(&rbm, 3, false, &mut crate::rng::seeded(0)).is_ok());
    }

    #[test]
    fn rank_ties_by_index() {
        let r = score_features(&model(array![[0.2, 0.9, -0.9]]));
        assert_eq!(rank(&r), &[1, 2, 0]);
        let single = score_features(&model(array![[0.3]]));
        assert_eq!(rank(&single), &[0]);
    }

    #[test]
    fn prune_keeps_original_order() {
        let rbm = model(array![[3.0, 1.0, 2.0]]);
        let p = prune(&rbm, 2, PruneDirection::DropLowest).unwrap();
        assert_eq!(p.weights, array![[3.0, 2.0]]);
        let q = prune(&rbm, 2, PruneDirection::DropHighest).unwrap();
        assert_eq!(q.weights, array![[1.0, 2.0]]);
        assert_eq!(prune(&rbm, 3, PruneDirection::DropLowest).unwrap(), rbm);
        assert!(prune(&rbm, 0, PruneDirection::DropLowest).is_err());
        assert!(prune(&rbm, 4, PruneDirection::DropLowest).is_err());
    }

    #[test]
    fn subnetworks() {
        let mut rbm = model(array![[1.0, -2.0], [3.0, 0.0]]);
        rbm.hidden_bias[1] = 0.25;
        let all = extract_subnetworks(&rbm, &[0, 1]).unwrap();
        assert_eq!(all.len(), 2);
        assert_eq!(all[1].hidden_bias, 0.25);
        assert_eq!(all[1].score, 1.0);
        assert_eq!(all[1].signs.to_vec(), vec![-1, 1]);
        assert!(extract_subnetworks(&rbm, &[]).unwrap().is_empty());
        assert!(extract_subnetworks(&rbm, &[2]).is_err());
    }

    #[test]
    fn xor_rules_render() {
        let rbm = model(array![[1.0, -1.0, 0.0], [-1.0, 1.0, 0.0], [1.0, -1.0, 0.0]]);
        let rules = to_logical_rules(&rbm, &["x", "y", "z"], 2).unwrap();
        assert_eq!(rules[0].to_string(), "z = x ∧ ¬y");
        assert_eq!(rules[0].sign_pattern(), "{+x,-y,+z}");
        assert_eq!(rules[1].to_string(), "¬z = ¬x ∧ y");
        assert_eq!(rules[2].to_string(), "z = x ∧ y");
        assert_eq!(rules[2].score, 0.0);
        assert!(to_logical_rules(&rbm, &["x", "y", "z"], 3).is_err());
        assert!(to_logical_rules(&rbm, &["x", "y"], 0).is_err());
    }

    #[test]
    fn consistency_against_xor() {
        let rbm = model(array![[1.0, -1.0], [-1.0, 1.0], [1.0, -1.0]]);
        let rules = to_logical_rules(&rbm, &["x", "y", "z"], 2).unwrap();
        let xor = TruthTable::xor();
        assert!(rule_consistency(&rules[0], &xor));
        assert!(!rule_consistency(&rules[1], &xor));
        let partial = TruthTable { vars: xor.vars.clone(), rows: vec![vec![false, false, false]] };
        // the body x ∧ ¬y never holds here
        assert!(rule_consistency(&rules[0], &partial));
    }

    #[test]
    fn csv_and_pgm() {
        let r = score_features(&model(array![[0.2, 0.9, -0.9]]));
        assert_eq!(ranking_csv(&r), "hidden_index,score,rank\n0,0.2,2\n1,0.9,0\n2,0.9,1\n");
        let pgm = filter_pgm(array![-1.0, 0.0, 1.0, 0.5].view(), 2, 2).unwrap();
        assert_eq!(&pgm[..11], b"P5\n2 2\n255\n");
        assert_eq!(&pgm[11..], &[0, 128, 255, 191]);
        assert!(filter_pgm(array![1.0].view(), 2, 2).is_err());
    }
}
