//! Empirical ranking risk `L_n(r)` and excess-risk U-statistics.
//!
//! Error counts are kept as integers over ordered pairs `(i, j)`, `i != j`,
//! and divided by `n(n-1)` once at the end, so the naive `O(n²)` path and
//! the `O(n log n)` inversion-counting path agree bit for bit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DiscreteDistribution, GenerativeModel, LabeledSample, QuadratureOracle, RankingRule, ScoreFn};
use crate::stats::{label_ranks, mean_stderr, Fenwick};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub l_n: f64,
    pub ordered_pair_count: u64,
    pub error_pair_count: u64,
}

impl RiskReport {
    fn from_counts(error_pair_count: u64, ordered_pair_count: u64) -> Self {
        RiskReport {
            l_n: error_pair_count as f64 / ordered_pair_count as f64,
            ordered_pair_count,
            error_pair_count,
        }
    }
}

/// Outcome of the inversion-counting path. Ties in scores or labels are
/// refused rather than resolved, and the caller falls back to the naive path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FastRisk {
    Exact(RiskReport),
    Ties { score_ties: bool, label_ties: bool },
}

#[inline]
fn misranked(y: f64, yp: f64, sign: i8) -> bool {
    (y - yp) * f64::from(sign) < 0.0
}

pub fn empirical_risk_naive(sample: &LabeledSample, rule: &RankingRule) -> Result<RiskReport> {
    rule.validate(Some(sample.dim()))?;
    let prepared = rule.prepare_sample(sample);
    let ys = sample.labels();
    let errors: u64 = (0..sample.len())
        .into_par_iter()
        .map(|i| {
            (0..ys.len())
                .filter(|&j| j != i && misranked(ys[i], ys[j], prepared.rank(i, j)))
                .count() as u64
        })
        .sum();
    Ok(RiskReport::from_counts(errors, sample.ordered_pairs()))
}

/// Sorts by score and counts label inversions; each inversion is one
/// discordant unordered pair, i.e. two misranked ordered pairs.
pub fn empirical_risk_fast(sample: &LabeledSample, score: &ScoreFn) -> Result<FastRisk> {
    score.validate(Some(sample.dim()))?;
    let n = sample.len();
    let scores: Vec<f64> = (0..n).map(|i| score.eval(sample.x(i))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let score_ties = order.windows(2).any(|w| scores[w[0]] == scores[w[1]]);
    let mut sorted_labels = sample.labels().to_vec();
    sorted_labels.sort_by(f64::total_cmp);
    let label_ties = sorted_labels.windows(2).any(|w| w[0] == w[1]);
    if score_ties || label_ties {
        return Ok(FastRisk::Ties {
            score_ties,
            label_ties,
        });
    }
    let mut labels: Vec<f64> = order.iter().map(|&i| sample.y(i)).collect();
    let inversions = count_inversions(&mut labels);
    Ok(FastRisk::Exact(RiskReport::from_counts(
        2 * inversions,
        sample.ordered_pairs(),
    )))
}

/// `O(n log n)` count for any scorer, ties included. A pair with
/// `s_i > s_j` is misranked in both orders iff `y_i < y_j` (two errors); a
/// pair with `s_i = s_j` gets `r = +1` both ways, one error iff `y_i != y_j`.
pub fn empirical_risk_ranked(sample: &LabeledSample, score: &ScoreFn) -> Result<RiskReport> {
    score.validate(Some(sample.dim()))?;
    let n = sample.len();
    let scores: Vec<f64> = (0..n).map(|i| score.eval(sample.x(i))).collect();
    let (ranks, levels) = label_ranks(sample.labels());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut below = Fenwick::new(levels);
    let mut tied = vec![0i64; levels];
    let mut errors = 0i64;
    for group in order.chunk_by(|&a, &b| scores[a] == scores[b]) {
        let mut same_label = 0;
        for &i in group {
            errors += 2 * below.split(ranks[i]).1;
            same_label += tied[ranks[i]];
            tied[ranks[i]] += 1;
        }
        let g = group.len() as i64;
        errors += g * (g - 1) / 2 - same_label;
        for &i in group {
            below.add(ranks[i], 1);
            tied[ranks[i]] = 0;
        }
    }
    Ok(RiskReport::from_counts(errors as u64, sample.ordered_pairs()))
}

/// Counting path for scorers, pair loop otherwise.
pub fn empirical_risk(sample: &LabeledSample, rule: &RankingRule) -> Result<RiskReport> {
    match rule.as_scorer() {
        Some(score) => empirical_risk_ranked(sample, score),
        None => empirical_risk_naive(sample, rule),
    }
}

/// Number of pairs `i < j` with `values[i] > values[j]`; sorts `values`.
pub fn count_inversions(values: &mut [f64]) -> u64 {
    let mut scratch = values.to_vec();
    merge_count(values, &mut scratch)
}

fn merge_count(v: &mut [f64], scratch: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = {
        let (l, r) = v.split_at_mut(mid);
        let (sl, sr) = scratch.split_at_mut(mid);
        merge_count(l, sl) + merge_count(r, sr)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            scratch[k] = v[j];
            inv += (mid - i) as u64;
            j += 1;
        } else {
            scratch[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    scratch[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    scratch[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&scratch[..n]);
    inv
}

/// `q_r(z, z') = 1[(y - y') r(x, x') < 0] - 1[(y - y') r*(x, x') < 0]`.
pub fn excess_kernel_q(rule: &RankingRule, bayes: &RankingRule, z: (&[f64], f64), zp: (&[f64], f64)) -> i8 {
    let d = z.1 - zp.1;
    let wrong = |r: &RankingRule| i8::from(d * f64::from(r.rank(z.0, zp.0)) < 0.0);
    wrong(rule) - wrong(bayes)
}

/// `Λ_n(r) = (1 / n(n-1)) Σ_{i≠j} q_r(Z_i, Z_j)`.
pub fn empirical_excess_risk(sample: &LabeledSample, rule: &RankingRule, bayes: &RankingRule) -> Result<f64> {
    rule.validate(Some(sample.dim()))?;
    bayes.validate(Some(sample.dim()))?;
    let (pr, pb) = (rule.prepare_sample(sample), bayes.prepare_sample(sample));
    let ys = sample.labels();
    let total: i64 = (0..sample.len())
        .into_par_iter()
        .map(|i| {
            (0..ys.len())
                .filter(|&j| j != i)
                .map(|j| {
                    i64::from(misranked(ys[i], ys[j], pr.rank(i, j)))
                        - i64::from(misranked(ys[i], ys[j], pb.rank(i, j)))
                })
                .sum::<i64>()
        })
        .sum();
    Ok(total as f64 / sample.ordered_pairs() as f64)
}

/// Where true risks come from.
#[derive(Debug, Clone, Copy)]
pub enum RiskOracle<'a> {
    Exact(&'a DiscreteDistribution),
    MonteCarlo {
        model: &'a GenerativeModel,
        reps: usize,
        seed: u64,
    },
    Quadrature(&'a QuadratureOracle),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcessEstimate {
    pub value: f64,
    /// Zero for deterministic oracles.
    pub stderr: f64,
}

/// `Λ(r) = L(r) - L*` against the oracle's own Bayes rule.
pub fn true_excess(rule: &RankingRule, oracle: RiskOracle<'_>) -> Result<ExcessEstimate> {
    match oracle {
        RiskOracle::Exact(dist) => {
            let bayes = dist.bayes_rule();
            Ok(ExcessEstimate {
                value: dist.true_risk(rule) - dist.true_risk(&bayes),
                stderr: 0.0,
            })
        }
        RiskOracle::Quadrature(q) => Ok(ExcessEstimate {
            value: q.excess(rule, &q.model().bayes_rule())?,
            stderr: 0.0,
        }),
        RiskOracle::MonteCarlo { model, reps, seed } => {
            if reps < 2 {
                return Err(Error::InvalidArgument(format!("MC excess needs reps >= 2, got {reps}")));
            }
            let bayes = model.bayes_rule();
            let pairs = model.sample(2 * reps, seed)?;
            let q: Vec<f64> = (0..reps)
                .map(|k| {
                    let (a, b) = (2 * k, 2 * k + 1);
                    f64::from(excess_kernel_q(
                        rule,
                        &bayes,
                        (pairs.x(a), pairs.y(a)),
                        (pairs.x(b), pairs.y(b)),
                    ))
                })
                .collect();
            let (value, stderr) = mean_stderr(&q);
            Ok(ExcessEstimate { value, stderr })
        }
    }
}
