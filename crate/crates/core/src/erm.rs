//! Exact empirical ranking-risk minimization over finite rule classes.
//!
//! Co-minimizers are broken by the lexicographically smallest rule id.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LabeledSample, RankingRule, RuleClass, ThresholdFamily, ThresholdGrid};
use crate::risk::empirical_risk;
use crate::stats::{label_ranks, Fenwick};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleRisk {
    pub id: String,
    pub risk: f64,
    pub error_pair_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErmResult {
    pub minimizer: RankingRule,
    pub min_risk: f64,
    pub min_error_count: u64,
    /// Every rule id attaining the minimum, sorted.
    pub ties: Vec<String>,
    pub per_rule_risks: Option<Vec<RuleRisk>>,
}

fn select(rules: &[RankingRule], counts: &[u64], pairs: u64) -> ErmResult {
    let min = *counts.iter().min().expect("non-empty class");
    let mut ties: Vec<&RankingRule> = rules.iter().zip(counts).filter(|(_, &c)| c == min).map(|(r, _)| r).collect();
    ties.sort_by(|a, b| a.id.cmp(&b.id));
    ErmResult {
        minimizer: ties[0].clone(),
        min_risk: min as f64 / pairs as f64,
        min_error_count: min,
        ties: ties.iter().map(|r| r.id.clone()).collect(),
        per_rule_risks: Some(
            rules
                .iter()
                .zip(counts)
                .map(|(r, &c)| RuleRisk {
                    id: r.id.clone(),
                    risk: c as f64 / pairs as f64,
                    error_pair_count: c,
                })
                .collect(),
        ),
    }
}

/// Evaluates `L_n` for every rule (inversion counting where eligible, the
/// pair loop otherwise).
pub fn erm_exhaustive(sample: &LabeledSample, class: &RuleClass) -> Result<ErmResult> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    let counts = class
        .rules()
        .par_iter()
        .map(|r| empirical_risk(sample, r).map(|rep| rep.error_pair_count))
        .collect::<Result<Vec<_>>>()?;
    Ok(select(class.rules(), &counts, sample.ordered_pairs()))
}

fn distinct_label_pairs(rank_counts: &[i64]) -> i64 {
    let n: i64 = rank_counts.iter().sum();
    n * (n - 1) / 2 - rank_counts.iter().map(|c| c * (c - 1) / 2).sum::<i64>()
}

/// Misranked ordered-pair counts of a threshold family as a function of how
/// many distinct feature values lie at or below `θ`. Entry `c` holds the
/// count when exactly the `c` smallest distinct values are `<= θ`.
fn cell_counts(xs: &[f64], ranks: &[usize], levels: usize, family: ThresholdFamily) -> (Vec<f64>, Vec<i64>) {
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for &i in &order {
        match groups.last_mut() {
            Some((v, members)) if *v == xs[i] => members.push(i),
            _ => groups.push((xs[i], vec![i])),
        }
    }
    let values: Vec<f64> = groups.iter().map(|g| g.0).collect();
    let mut rank_counts = vec![0i64; levels];
    for &r in ranks {
        rank_counts[r] += 1;
    }
    let all_tied = distinct_label_pairs(&rank_counts);
    let mut counts = vec![0i64; groups.len() + 1];
    match family {
        ThresholdFamily::Floor => {
            // Start with every point tied at θ, then release groups from the
            // top; a released point is ordered by x against the tied block.
            let mut tied = Fenwick::new(levels);
            for &r in ranks {
                tied.add(r, 1);
            }
            let mut errors = all_tied;
            counts[groups.len()] = errors;
            for (g, (_, members)) in groups.iter().enumerate().rev() {
                for &j in members {
                    tied.add(ranks[j], -1);
                }
                for &j in members {
                    let (below, above) = tied.split(ranks[j]);
                    errors += above - below;
                }
                counts[g] = errors;
            }
        }
        ThresholdFamily::Step => {
            // Two tied blocks; move groups from the upper block to the lower.
            let mut lower = Fenwick::new(levels);
            let mut upper = Fenwick::new(levels);
            for &r in ranks {
                upper.add(r, 1);
            }
            let mut errors = all_tied;
            counts[0] = errors;
            for (g, (_, members)) in groups.iter().enumerate() {
                for &j in members {
                    let r = ranks[j];
                    upper.add(r, -1);
                    let (ub, ua) = upper.split(r);
                    let (lb, la) = lower.split(r);
                    errors -= ub + ua; // tied pairs in the upper block
                    errors -= 2 * la; // j above a lower point with larger label
                    errors += 2 * ub; // j now below an upper point with smaller label
                    errors += lb + la; // tied pairs in the lower block
                    lower.add(r, 1);
                }
                counts[g + 1] = errors;
            }
        }
    }
    (values, counts)
}

/// Exact minimizer over a threshold grid in `O(n log n + m log n)` for `m`
/// thresholds. Agrees with [`erm_exhaustive`] on `grid.class()`.
pub fn erm_threshold_scan(sample: &LabeledSample, grid: &ThresholdGrid) -> Result<ErmResult> {
    if sample.dim() != 1 {
        return Err(Error::NonScalarFeatures(sample.dim()));
    }
    let class = grid.class()?;
    let xs: Vec<f64> = (0..sample.len()).map(|i| sample.x(i)[0]).collect();
    let (ranks, levels) = label_ranks(sample.labels());
    let (values, cells) = cell_counts(&xs, &ranks, levels, grid.family);
    let counts: Vec<u64> = grid
        .thetas
        .iter()
        .map(|t| cells[values.partition_point(|v| v <= t)] as u64)
        .collect();
    Ok(select(class.rules(), &counts, sample.ordered_pairs()))
}
