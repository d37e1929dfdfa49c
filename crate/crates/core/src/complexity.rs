//! Rademacher chaos `Z_ε`, the linear relative `U_ε` and the column maximum
//! `M` over a rule class, their Monte-Carlo expectations, and the
//! right-hand side of the moment inequality for `sup_r |W_n(r)|`.
//!
//! All three statistics are functions of the column sums
//! `g_j(r) = Σ_{i≠j} ε_i ĥ_r[i][j]`:
//!
//! ```text
//! Z_ε = max_r |Σ_j ε_j g_j(r)|
//! U_ε = max_r ||g(r)||₂        (sup over ||α||₂ ≤ 1 of Σ_j α_j g_j)
//! M   = max_r max_j |g_j(r)|
//! ```
//!
//! Sums run over `i != j` unless `include_diagonal` is set.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hoeffding::{decompose_with, ExpectationOracle, HatMatrix, KernelTable, Projector};
use crate::model::{LabeledSample, RankingRule, RuleClass};
use crate::rng::{self, replicate_seed};
use crate::stats::mean_stderr;

pub fn draw_rademacher(n: usize, seed: u64) -> Vec<i8> {
    use rand::Rng as _;
    let mut rng = rng::seeded(seed);
    (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

/// `(z, u, m)` contributions of a single rule.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ChaosTerms {
    pub z: f64,
    pub u: f64,
    pub m: f64,
}

pub fn chaos_terms<K: HatMatrix + ?Sized>(kernel: &K, eps: &[i8], include_diagonal: bool) -> ChaosTerms {
    let g = kernel.column_sums(eps, include_diagonal);
    let z: f64 = g.iter().zip(eps).map(|(g, e)| g * f64::from(*e)).sum();
    ChaosTerms {
        z: z.abs(),
        u: g.iter().map(|v| v * v).sum::<f64>().sqrt(),
        m: g.iter().fold(0.0, |acc, v| acc.max(v.abs())),
    }
}

fn class_terms<K: HatMatrix + Sync>(kernels: &[K], eps: &[i8], include_diagonal: bool) -> Result<ChaosTerms> {
    if kernels.is_empty() {
        return Err(Error::EmptyClass);
    }
    for k in kernels {
        if k.len() != eps.len() {
            return Err(Error::InvalidArgument(format!(
                "{} signs for a kernel on {} points",
                eps.len(),
                k.len()
            )));
        }
    }
    Ok(kernels
        .iter()
        .map(|k| chaos_terms(k, eps, include_diagonal))
        .fold(ChaosTerms::default(), |acc, t| ChaosTerms {
            z: acc.z.max(t.z),
            u: acc.u.max(t.u),
            m: acc.m.max(t.m),
        }))
}

/// `Z_ε = sup_r |Σ_{i≠j} ε_i ε_j ĥ_r[i][j]|`.
pub fn z_chaos<K: HatMatrix + Sync>(kernels: &[K], eps: &[i8], include_diagonal: bool) -> Result<f64> {
    Ok(class_terms(kernels, eps, include_diagonal)?.z)
}

/// `U_ε = sup_r sup_{||α||₂≤1} Σ_{i≠j} ε_i α_j ĥ_r[i][j] = sup_r ||g(r)||₂`.
pub fn u_chaos<K: HatMatrix + Sync>(kernels: &[K], eps: &[i8], include_diagonal: bool) -> Result<f64> {
    Ok(class_terms(kernels, eps, include_diagonal)?.u)
}

/// `M = sup_{r, k} |Σ_{i≠k} ε_i ĥ_r[i][k]|`.
pub fn m_stat<K: HatMatrix + Sync>(kernels: &[K], eps: &[i8], include_diagonal: bool) -> Result<f64> {
    Ok(class_terms(kernels, eps, include_diagonal)?.m)
}

/// Kernel tables of every rule of a class on one sample.
pub fn class_kernels(
    sample: &LabeledSample,
    class: &RuleClass,
    bayes: &RankingRule,
    oracle: ExpectationOracle<'_>,
) -> Result<Vec<KernelTable>> {
    let reference = oracle.resolve()?;
    let oracle = ExpectationOracle::Exact(reference.dist.as_ref());
    class
        .rules()
        .iter()
        .map(|r| {
            let p = Projector::new(r, bayes, oracle)?;
            let mut t = decompose_with(sample, &p);
            t.backend = reference.backend;
            Ok(t)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    Z,
    U,
    M,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RademacherEstimate {
    pub quantity: Quantity,
    pub mean: f64,
    pub stderr: f64,
    pub reps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityEstimates {
    pub z: RademacherEstimate,
    pub u: RademacherEstimate,
    pub m: RademacherEstimate,
    /// Per-replicate values, in replicate order.
    pub replicates: Vec<ChaosTerms>,
}

/// Monte-Carlo means over fresh sign vectors with the sample (and so the
/// kernels) held fixed. Replicate `k` draws its signs from seed `seed + k`.
pub fn estimate_complexities<K: HatMatrix + Sync>(
    kernels: &[K],
    reps: usize,
    seed: u64,
    include_diagonal: bool,
) -> Result<ComplexityEstimates> {
    if reps < 2 {
        return Err(Error::InvalidArgument(format!("complexity estimation needs reps >= 2, got {reps}")));
    }
    let n = kernels.first().ok_or(Error::EmptyClass)?.len();
    let replicates = (0..reps)
        .into_par_iter()
        .map(|k| {
            let eps = draw_rademacher(n, replicate_seed(seed, k as u64));
            class_terms(kernels, &eps, include_diagonal)
        })
        .collect::<Result<Vec<_>>>()?;
    let est = |quantity, pick: fn(&ChaosTerms) -> f64| {
        let values: Vec<f64> = replicates.iter().map(pick).collect();
        let (mean, stderr) = mean_stderr(&values);
        RademacherEstimate {
            quantity,
            mean,
            stderr,
            reps,
            seed,
        }
    };
    Ok(ComplexityEstimates {
        z: est(Quantity::Z, |t| t.z),
        u: est(Quantity::U, |t| t.u),
        m: est(Quantity::M, |t| t.m),
        replicates,
    })
}

/// Shape of the moment-inequality bound (without its universal constant)
/// next to the observed `sup_r |W_n(r)|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub delta: f64,
    pub ez: RademacherEstimate,
    pub eu: RademacherEstimate,
    pub em: RademacherEstimate,
    /// `E Z / n²`
    pub z_term: f64,
    /// `E U sqrt(log(1/δ)) / n²`
    pub u_term: f64,
    /// `E M log(1/δ) / n²`
    pub m_term: f64,
    /// `log(1/δ) / n`
    pub tail_term: f64,
    pub rhs_shape: f64,
    pub observed_sup_wn: f64,
}

pub fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {delta}")))
    }
}

pub fn assemble_bound(
    n: usize,
    delta: f64,
    estimates: &ComplexityEstimates,
    observed_sup_wn: f64,
) -> Result<BoundReport> {
    check_delta(delta)?;
    let log_inv = (1.0 / delta).ln();
    let n2 = (n * n) as f64;
    let z_term = estimates.z.mean / n2;
    let u_term = estimates.u.mean * log_inv.sqrt() / n2;
    let m_term = estimates.m.mean * log_inv / n2;
    let tail_term = log_inv / n as f64;
    Ok(BoundReport {
        n,
        delta,
        ez: estimates.z,
        eu: estimates.u,
        em: estimates.m,
        z_term,
        u_term,
        m_term,
        tail_term,
        rhs_shape: z_term + u_term + m_term + tail_term,
        observed_sup_wn,
    })
}

/// Settings of [`bound_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundOptions {
    pub delta: f64,
    pub reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub include_diagonal: bool,
}

pub fn bound_report(
    sample: &LabeledSample,
    class: &RuleClass,
    bayes: &RankingRule,
    oracle: ExpectationOracle<'_>,
    options: &BoundOptions,
) -> Result<(BoundReport, ComplexityEstimates)> {
    check_delta(options.delta)?;
    let kernels = class_kernels(sample, class, bayes, oracle)?;
    let estimates = estimate_complexities(&kernels, options.reps, options.seed, options.include_diagonal)?;
    let sup_wn = kernels.iter().fold(0.0, |acc: f64, k| acc.max(k.w_n.abs()));
    let report = assemble_bound(sample.len(), options.delta, &estimates, sup_wn)?;
    Ok((report, estimates))
}
