//! Seeded Monte-Carlo studies of the decomposition and of the excess risk of
//! the empirical minimizer.
//!
//! Every study is a pure function of its [`ExperimentConfig`]. Cell
//! `(n, rep)` draws its sample from seed `cell_seed(base_seed, n, rep)`;
//! cells run in parallel and are collected in grid order, so results do not
//! depend on the number of worker threads.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexity::{assemble_bound, check_delta, estimate_complexities};
use crate::erm::{erm_exhaustive, erm_threshold_scan};
use crate::error::{Error, Result};
use crate::hoeffding::{atom_counts, AtomKernel, ExpectationOracle, HatMatrix, Projector};
use crate::model::{
    DiscreteDistribution, GenerativeModel, LabeledSample, QuadratureOracle, RankingRule, RuleClass, ClassSpec,
};
use crate::risk::{true_excess, RiskOracle};
use crate::rng::{cell_seed, substream};
use crate::stats::{mean_stderr, upper_quantile};

pub const SCHEMA_VERSION: u32 = 1;

/// How true risks of a continuous model are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evaluation {
    /// Deterministic pair quadrature; one-dimensional uniform `X` only.
    Quadrature { panels: usize, order: usize },
    /// Expectations against `budget` model draws.
    MonteCarlo { budget: usize, seed: u64 },
}

impl Default for Evaluation {
    fn default() -> Self {
        Evaluation::Quadrature { panels: 64, order: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleSpec {
    Discrete {
        distribution: DiscreteDistribution,
    },
    Model {
        model: GenerativeModel,
        #[serde(default)]
        evaluation: Evaluation,
    },
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}
fn default_delta() -> f64 {
    0.1
}
fn default_complexity_reps() -> usize {
    50
}
fn default_alpha_grid() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 0.75, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub oracle: OracleSpec,
    pub class: ClassSpec,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub base_seed: u64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Rate parameter of the excess-risk bound, exponent `1 / (1 + epsilon)`.
    #[serde(default = "default_delta")]
    pub epsilon: f64,
    /// Sign vectors per sample when estimating `E Z`, `E U`, `E M`.
    #[serde(default = "default_complexity_reps")]
    pub complexity_reps: usize,
    #[serde(default)]
    pub include_diagonal: bool,
    #[serde(default = "default_alpha_grid")]
    pub alpha_grid: Vec<f64>,
}

impl ExperimentConfig {
    pub fn new(oracle: OracleSpec, class: ClassSpec, n_grid: Vec<usize>, reps: usize, base_seed: u64) -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            oracle,
            class,
            n_grid,
            reps,
            base_seed,
            delta: default_delta(),
            epsilon: default_delta(),
            complexity_reps: default_complexity_reps(),
            include_diagonal: false,
            alpha_grid: default_alpha_grid(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        if self.n_grid.is_empty() || self.n_grid[0] < 2 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "n_grid must be non-empty, strictly increasing, with every n >= 2".into(),
            ));
        }
        if self.reps < 2 {
            return Err(Error::InvalidArgument(format!("reps must be >= 2, got {}", self.reps)));
        }
        check_delta(self.delta)?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if self.alpha_grid.is_empty() || self.alpha_grid.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::InvalidArgument("alpha_grid values must lie in [0, 1]".into()));
        }
        if let OracleSpec::Model { model, .. } = &self.oracle {
            model.validate()?;
        }
        Ok(())
    }

    fn cells(&self) -> Vec<(usize, usize, u64)> {
        self.n_grid
            .iter()
            .flat_map(|&n| (0..self.reps).map(move |rep| (n, rep)))
            .map(|(n, rep)| (n, rep, cell_seed(self.base_seed, n, rep)))
            .collect()
    }
}

/// An [`OracleSpec`] resolved into something that can sample, name the
/// Bayes rule and evaluate true risks.
pub enum Truth {
    Exact(DiscreteDistribution),
    Quadrature(Box<QuadratureOracle>),
    MonteCarlo { model: GenerativeModel, budget: usize, seed: u64 },
}

impl Truth {
    pub fn new(spec: &OracleSpec) -> Result<Self> {
        Ok(match spec {
            OracleSpec::Discrete { distribution } => Truth::Exact(distribution.clone()),
            OracleSpec::Model { model, evaluation } => match *evaluation {
                Evaluation::Quadrature { panels, order } => {
                    Truth::Quadrature(Box::new(QuadratureOracle::new(model.clone(), panels, order)?))
                }
                Evaluation::MonteCarlo { budget, seed } => Truth::MonteCarlo {
                    model: model.clone(),
                    budget,
                    seed,
                },
            },
        })
    }

    pub fn bayes(&self) -> RankingRule {
        match self {
            Truth::Exact(d) => d.bayes_rule(),
            Truth::Quadrature(q) => q.model().bayes_rule(),
            Truth::MonteCarlo { model, .. } => model.bayes_rule(),
        }
    }

    pub fn risk_oracle(&self) -> RiskOracle<'_> {
        match self {
            Truth::Exact(d) => RiskOracle::Exact(d),
            Truth::Quadrature(q) => RiskOracle::Quadrature(q),
            Truth::MonteCarlo { model, budget, seed } => RiskOracle::MonteCarlo {
                model,
                reps: *budget,
                seed: *seed,
            },
        }
    }

    pub fn expectation_oracle(&self) -> Result<ExpectationOracle<'_>> {
        match self {
            Truth::Exact(d) => Ok(ExpectationOracle::Exact(d)),
            Truth::MonteCarlo { model, budget, seed } => Ok(ExpectationOracle::MonteCarlo {
                model,
                budget: *budget,
                seed: *seed,
            }),
            Truth::Quadrature(_) => Err(Error::InvalidArgument(
                "this study needs a discrete oracle or monte_carlo evaluation".into(),
            )),
        }
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<LabeledSample> {
        match self {
            Truth::Exact(d) => d.sample(n, seed),
            Truth::Quadrature(q) => q.model().sample(n, seed),
            Truth::MonteCarlo { model, .. } => model.sample(n, seed),
        }
    }
}

/// Ordinary least squares of `ln value` on `ln n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_log_log(ns: &[usize], values: &[f64]) -> Result<RateFit> {
    if ns.len() != values.len() {
        return Err(Error::InvalidArgument("fit needs one value per n".into()));
    }
    let positive = values.iter().filter(|v| **v > 0.0 && v.is_finite()).count();
    if ns.len() < 3 || positive < ns.len() {
        return Err(Error::TooFewFitPoints(positive.min(ns.len())));
    }
    let points: Vec<(f64, f64)> = ns.iter().zip(values).map(|(&n, &v)| ((n as f64).ln(), v.ln())).collect();
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(RateFit {
        points,
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
}

fn summarize(n_grid: &[usize], reps: usize, values: &[f64]) -> Vec<PointSummary> {
    n_grid
        .iter()
        .zip(values.chunks(reps))
        .map(|(&n, chunk)| {
            let (mean, stderr) = mean_stderr(chunk);
            PointSummary { n, mean, stderr }
        })
        .collect()
}

fn class_of(config: &ExperimentConfig) -> Result<RuleClass> {
    config.class.enumerate()
}

fn f(v: f64) -> String {
    format!("{v:.16e}")
}

fn summary_csv(label: &str, rows: &[PointSummary], out: &mut String) {
    for r in rows {
        let _ = writeln!(out, "{label},{},{},{}", r.n, f(r.mean), f(r.stderr));
    }
}

fn fit_rows(label: &str, fit: &RateFit, out: &mut String) {
    let _ = writeln!(out, "slope_{label},,{},", f(fit.slope));
    let _ = writeln!(out, "intercept_{label},,{},", f(fit.intercept));
    let _ = writeln!(out, "r_squared_{label},,{},", f(fit.r_squared));
}

fn plot_data(fit: &RateFit) -> String {
    let mut out = String::from("# ln_n ln_value\n");
    for (x, y) in &fit.points {
        let _ = writeln!(out, "{} {}", f(*x), f(*y));
    }
    out
}

// ---------------------------------------------------------------------------
// sup |W_n| decay

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WnCell {
    pub n: usize,
    pub rep: usize,
    pub seed: u64,
    pub sup_wn: f64,
    pub sup_tn: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WnDecayResult {
    pub cells: Vec<WnCell>,
    pub wn: Vec<PointSummary>,
    pub tn: Vec<PointSummary>,
    pub wn_fit: RateFit,
    pub tn_fit: RateFit,
}

impl WnDecayResult {
    pub fn cells_csv(&self) -> String {
        let mut out = String::from("n,rep,seed,sup_abs_wn,sup_abs_tn\n");
        for c in &self.cells {
            let _ = writeln!(out, "{},{},{},{},{}", c.n, c.rep, c.seed, f(c.sup_wn), f(c.sup_tn));
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("statistic,n,value,stderr\n");
        summary_csv("sup_abs_wn", &self.wn, &mut out);
        summary_csv("sup_abs_tn", &self.tn, &mut out);
        fit_rows("wn", &self.wn_fit, &mut out);
        fit_rows("tn", &self.tn_fit, &mut out);
        out
    }

    pub fn plot_data(&self) -> String {
        plot_data(&self.wn_fit)
    }
}

/// `E sup_r |W_n(r)|` and `E sup_r |T_n(r)|` across `n_grid`, with log-log
/// slopes. Needs an exact discrete oracle.
pub fn wn_decay_study(config: &ExperimentConfig) -> Result<WnDecayResult> {
    config.validate()?;
    let OracleSpec::Discrete { distribution: dist } = &config.oracle else {
        return Err(Error::InexactOracle);
    };
    let class = class_of(config)?;
    let bayes = dist.bayes_rule();
    let kernels = class
        .rules()
        .iter()
        .map(|r| AtomKernel::new(dist, r, &bayes))
        .collect::<Result<Vec<_>>>()?;
    let cells = config
        .cells()
        .into_par_iter()
        .map(|(n, rep, seed)| {
            let counts = atom_counts(&dist.sample_indices(n, seed)?, dist.len());
            let (mut sup_wn, mut sup_tn) = (0.0f64, 0.0f64);
            for k in &kernels {
                let d = k.decompose_counts(&counts);
                sup_wn = sup_wn.max(d.w_n.abs());
                sup_tn = sup_tn.max(d.t_n.abs());
            }
            Ok(WnCell {
                n,
                rep,
                seed,
                sup_wn,
                sup_tn,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let wn = summarize(&config.n_grid, config.reps, &cells.iter().map(|c| c.sup_wn).collect::<Vec<_>>());
    let tn = summarize(&config.n_grid, config.reps, &cells.iter().map(|c| c.sup_tn).collect::<Vec<_>>());
    if wn.iter().all(|p| p.mean == 0.0) {
        return Err(Error::DegenerateStudy("sup |W_n| is identically zero".into()));
    }
    let wn_fit = fit_log_log(&config.n_grid, &wn.iter().map(|p| p.mean).collect::<Vec<_>>())?;
    let tn_fit = fit_log_log(&config.n_grid, &tn.iter().map(|p| p.mean).collect::<Vec<_>>())?;
    Ok(WnDecayResult {
        cells,
        wn,
        tn,
        wn_fit,
        tn_fit,
    })
}

// ---------------------------------------------------------------------------
// variance condition

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub id: String,
    pub lambda: f64,
    pub var_h: f64,
    /// `Λ(r) = 0`: the rule does not constrain `c`.
    pub excluded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaFit {
    pub alpha: f64,
    /// Whether some finite `c` covers every rule at this exponent.
    pub feasible: bool,
    /// Smallest such `c` (`max_r Var h_r / Λ(r)^α` over fitted rules).
    pub c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceResult {
    pub rows: Vec<VarianceRow>,
    pub fits: Vec<AlphaFit>,
    /// Largest feasible exponent; the condition at a larger `α` implies it
    /// at every smaller one since `Λ <= 1`.
    pub best: Option<AlphaFit>,
}

impl VarianceResult {
    pub fn rules_csv(&self) -> String {
        let mut out = String::from("rule_id,lambda,var_h,excluded\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.id, f(r.lambda), f(r.var_h), r.excluded);
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("alpha,feasible,c\n");
        for a in &self.fits {
            let _ = writeln!(out, "{},{},{}", f(a.alpha), a.feasible, a.c.map(f).unwrap_or_default());
        }
        out
    }

    /// `(ln Λ, ln Var h)` for every fitted rule.
    pub fn plot_data(&self) -> String {
        let mut out = String::from("# ln_lambda ln_var_h\n");
        for r in self.rows.iter().filter(|r| !r.excluded && r.var_h > 0.0) {
            let _ = writeln!(out, "{} {}", f(r.lambda.ln()), f(r.var_h.ln()));
        }
        out
    }
}

const ZERO_TOL: f64 = 1e-12;

/// `Var h_r` against `Λ(r)` for every rule, and the constant `c` needed at
/// each exponent of `alpha_grid`.
pub fn variance_condition_study(
    class: &RuleClass,
    bayes: &RankingRule,
    oracle: ExpectationOracle<'_>,
    alpha_grid: &[f64],
) -> Result<VarianceResult> {
    let reference = oracle.resolve()?;
    let dist = reference.dist.as_ref();
    let p = dist.probs();
    let rows = class
        .rules()
        .par_iter()
        .map(|r| {
            let proj = Projector::new(r, bayes, ExpectationOracle::Exact(dist))?;
            let h = proj.atom_projections();
            let mean: f64 = h.iter().zip(p).map(|(h, p)| h * p).sum();
            let var_h: f64 = h.iter().zip(p).map(|(h, p)| p * (h - mean).powi(2)).sum();
            let lambda = proj.lambda();
            Ok(VarianceRow {
                id: r.id.clone(),
                lambda,
                var_h,
                excluded: lambda.abs() <= ZERO_TOL,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.iter().all(|r| r.excluded) {
        return Err(Error::DegenerateStudy("every rule has zero excess risk".into()));
    }
    let zero_excess_with_variance = rows.iter().any(|r| r.excluded && r.var_h > ZERO_TOL);
    let fits: Vec<AlphaFit> = alpha_grid
        .iter()
        .map(|&alpha| {
            let feasible = alpha == 0.0 || !zero_excess_with_variance;
            let c = rows
                .iter()
                .filter(|r| !r.excluded || alpha == 0.0)
                .map(|r| r.var_h / r.lambda.max(0.0).powf(alpha))
                .fold(0.0f64, f64::max);
            AlphaFit {
                alpha,
                feasible: feasible && c.is_finite(),
                c: (feasible && c.is_finite()).then_some(c),
            }
        })
        .collect();
    let best = fits
        .iter()
        .filter(|a| a.feasible)
        .max_by(|a, b| a.alpha.total_cmp(&b.alpha))
        .copied();
    Ok(VarianceResult { rows, fits, best })
}

pub fn variance_study_from_config(config: &ExperimentConfig) -> Result<VarianceResult> {
    config.validate()?;
    let truth = Truth::new(&config.oracle)?;
    let class = class_of(config)?;
    variance_condition_study(&class, &truth.bayes(), truth.expectation_oracle()?, &config.alpha_grid)
}

// ---------------------------------------------------------------------------
// excess risk of the empirical minimizer

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCell {
    pub n: usize,
    pub rep: usize,
    pub seed: u64,
    pub minimizer: String,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleExcess {
    pub id: String,
    pub excess: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub cells: Vec<RateCell>,
    pub summary: Vec<PointSummary>,
    /// `None` when some mean excess is zero (nothing to fit on a log scale).
    pub fit: Option<RateFit>,
    pub rule_excess: Vec<RuleExcess>,
    /// `-1 / (1 + epsilon)`, the exponent of the excess-risk bound.
    pub bound_exponent: f64,
    /// Grid indices `k` where the mean at `n_grid[k + 1]` exceeds the mean at
    /// `n_grid[k]` by more than two joint standard errors.
    pub monotonicity_violations: Vec<usize>,
}

impl RateResult {
    pub fn cells_csv(&self) -> String {
        let mut out = String::from("n,rep,seed,minimizer,excess\n");
        for c in &self.cells {
            let _ = writeln!(out, "{},{},{},{},{}", c.n, c.rep, c.seed, c.minimizer, f(c.excess));
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("statistic,n,value,stderr\n");
        summary_csv("excess", &self.summary, &mut out);
        if let Some(fit) = &self.fit {
            fit_rows("excess", fit, &mut out);
        }
        let _ = writeln!(out, "bound_exponent,,{},", f(self.bound_exponent));
        out
    }

    pub fn plot_data(&self) -> String {
        self.fit.as_ref().map(plot_data).unwrap_or_else(|| "# ln_n ln_value\n".into())
    }
}

/// Largest excess risk a class member may have and still count as
/// containing the Bayes rule.
pub const NEAR_BAYES_TOL: f64 = 1e-9;

/// Mean `L(r_n) - L*` across `n_grid`. Each class member's excess risk is
/// computed once by the oracle; a replicate only runs the minimization.
pub fn excess_risk_rate_study(config: &ExperimentConfig) -> Result<RateResult> {
    config.validate()?;
    let truth = Truth::new(&config.oracle)?;
    let class = class_of(config)?;
    let bayes = truth.bayes();
    let rule_excess = class
        .rules()
        .par_iter()
        .map(|r| {
            let e = match &truth {
                // against the configured Bayes rule, not the oracle's own
                Truth::Quadrature(q) => crate::risk::ExcessEstimate {
                    value: q.excess(r, &bayes)?,
                    stderr: 0.0,
                },
                _ => true_excess(r, truth.risk_oracle())?,
            };
            Ok(RuleExcess {
                id: r.id.clone(),
                excess: e.value,
                stderr: e.stderr,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = rule_excess.iter().map(|r| r.excess).fold(f64::INFINITY, f64::min);
    if best > NEAR_BAYES_TOL {
        return Err(Error::InvalidArgument(format!(
            "class has no near-Bayes rule (smallest excess risk {best:e}); approximation error would mask the rate"
        )));
    }
    let scan_grid = config.class.threshold_grid().cloned();
    let cells = config
        .cells()
        .into_par_iter()
        .map(|(n, rep, seed)| {
            let sample = truth.sample(n, seed)?;
            let res = match &scan_grid {
                Some(g) if sample.dim() == 1 => erm_threshold_scan(&sample, g)?,
                _ => erm_exhaustive(&sample, &class)?,
            };
            let k = class.position(&res.minimizer.id).expect("minimizer is a class member");
            Ok(RateCell {
                n,
                rep,
                seed,
                minimizer: res.minimizer.id,
                excess: rule_excess[k].excess.max(0.0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&config.n_grid, config.reps, &cells.iter().map(|c| c.excess).collect::<Vec<_>>());
    let means: Vec<f64> = summary.iter().map(|p| p.mean).collect();
    let fit = if means.iter().all(|m| *m > 0.0) && means.len() >= 3 {
        Some(fit_log_log(&config.n_grid, &means)?)
    } else {
        None
    };
    let monotonicity_violations = summary
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].mean - w[0].mean > 2.0 * w[0].stderr.hypot(w[1].stderr))
        .map(|(k, _)| k)
        .collect();
    Ok(RateResult {
        cells,
        summary,
        fit,
        rule_excess,
        bound_exponent: -1.0 / (1.0 + config.epsilon),
        monotonicity_violations,
    })
}

// ---------------------------------------------------------------------------
// coverage of the moment inequality

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Batch {
    Calibration,
    Evaluation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageRun {
    pub batch: Batch,
    pub rep: usize,
    pub seed: u64,
    pub sup_wn: f64,
    pub rhs_shape: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub n: usize,
    pub delta: f64,
    /// `1 - δ` quantile of the calibration ratios `sup|W_n| / rhs_shape`.
    pub fitted_c: f64,
    /// Fraction of evaluation runs with `sup|W_n| <= fitted_c · rhs_shape`.
    pub coverage: f64,
    /// Binomial standard error at the nominal level, `sqrt(δ(1-δ)/runs)`.
    pub nominal_stderr: f64,
    /// 95% Wilson interval of the observed coverage.
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub runs: Vec<CoverageRun>,
}

impl CoverageResult {
    pub fn evaluation_ratios(&self) -> impl Iterator<Item = f64> + '_ {
        self.runs.iter().filter(|r| r.batch == Batch::Evaluation).map(|r| r.ratio)
    }

    /// Coverage of the evaluation runs at an arbitrary constant.
    pub fn coverage_at(&self, c: f64) -> f64 {
        let (hit, total) = self
            .evaluation_ratios()
            .fold((0usize, 0usize), |(h, t), r| (h + usize::from(r <= c), t + 1));
        hit as f64 / total as f64
    }
}

fn wilson(p: f64, m: usize) -> (f64, f64) {
    let z = 1.959_963_984_540_054;
    let m = m as f64;
    let denom = 1.0 + z * z / m;
    let centre = (p + z * z / (2.0 * m)) / denom;
    let half = z * (p * (1.0 - p) / m + z * z / (4.0 * m * m)).sqrt() / denom;
    (centre - half, centre + half)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageOutput {
    pub results: Vec<CoverageResult>,
}

impl CoverageOutput {
    pub fn cells_csv(&self) -> String {
        let mut out = String::from("n,batch,rep,seed,sup_abs_wn,rhs_shape,ratio\n");
        for r in &self.results {
            for run in &r.runs {
                let batch = match run.batch {
                    Batch::Calibration => "calibration",
                    Batch::Evaluation => "evaluation",
                };
                let _ = writeln!(
                    out,
                    "{},{batch},{},{},{},{},{}",
                    r.n,
                    run.rep,
                    run.seed,
                    f(run.sup_wn),
                    f(run.rhs_shape),
                    f(run.ratio)
                );
            }
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("n,delta,fitted_c,coverage,nominal_stderr,wilson_low,wilson_high\n");
        for r in &self.results {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.n,
                f(r.delta),
                f(r.fitted_c),
                f(r.coverage),
                f(r.nominal_stderr),
                f(r.wilson_low),
                f(r.wilson_high)
            );
        }
        out
    }

    /// `(rhs_shape, sup|W_n|)` of every evaluation run.
    pub fn plot_data(&self) -> String {
        let mut out = String::from("# rhs_shape sup_abs_wn\n");
        for r in &self.results {
            for run in r.runs.iter().filter(|r| r.batch == Batch::Evaluation) {
                let _ = writeln!(out, "{} {}", f(run.rhs_shape), f(run.sup_wn));
            }
        }
        out
    }
}

/// For each `n`: fits `C` on `reps` calibration samples and measures how
/// often `sup|W_n| <= C · rhs_shape` on `reps` fresh samples. Rademacher
/// expectations are re-estimated on every sample with `complexity_reps`
/// sign vectors.
pub fn coverage_study(config: &ExperimentConfig) -> Result<CoverageOutput> {
    config.validate()?;
    let OracleSpec::Discrete { distribution: dist } = &config.oracle else {
        return Err(Error::InexactOracle);
    };
    if config.complexity_reps < 2 {
        return Err(Error::InvalidArgument("complexity_reps must be >= 2".into()));
    }
    let class = class_of(config)?;
    let bayes = dist.bayes_rule();
    let kernels = class
        .rules()
        .iter()
        .map(|r| AtomKernel::new(dist, r, &bayes))
        .collect::<Result<Vec<_>>>()?;
    let mut results = Vec::with_capacity(config.n_grid.len());
    for &n in &config.n_grid {
        let runs = (0..2 * config.reps)
            .into_par_iter()
            .map(|rep| {
                let seed = cell_seed(config.base_seed, n, rep);
                let idx = dist.sample_indices(n, seed)?;
                let counts = atom_counts(&idx, dist.len());
                let sup_wn = kernels
                    .iter()
                    .map(|k| k.decompose_counts(&counts).w_n.abs())
                    .fold(0.0, f64::max);
                let views: Vec<_> = kernels.iter().map(|k| k.on_sample(&idx)).collect();
                debug_assert!(views.iter().all(|v| v.len() == n));
                let est = estimate_complexities(
                    &views,
                    config.complexity_reps,
                    substream(seed, 1),
                    config.include_diagonal,
                )?;
                let bound = assemble_bound(n, config.delta, &est, sup_wn)?;
                Ok(CoverageRun {
                    batch: if rep < config.reps { Batch::Calibration } else { Batch::Evaluation },
                    rep,
                    seed,
                    sup_wn,
                    rhs_shape: bound.rhs_shape,
                    ratio: sup_wn / bound.rhs_shape,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let calibration: Vec<f64> = runs
            .iter()
            .filter(|r| r.batch == Batch::Calibration)
            .map(|r| r.ratio)
            .collect();
        let fitted_c = upper_quantile(&calibration, 1.0 - config.delta);
        let mut result = CoverageResult {
            n,
            delta: config.delta,
            fitted_c,
            coverage: 0.0,
            nominal_stderr: (config.delta * (1.0 - config.delta) / config.reps as f64).sqrt(),
            wilson_low: 0.0,
            wilson_high: 0.0,
            runs,
        };
        result.coverage = result.coverage_at(fitted_c);
        (result.wilson_low, result.wilson_high) = wilson(result.coverage, config.reps);
        results.push(result);
    }
    Ok(CoverageOutput { results })
}

/// The configurations used by the bundled examples and acceptance checks.
pub mod reference {
    use super::*;
    use crate::model::{ScoreFn, ThresholdFamily, ThresholdGrid, XDist};

    /// `η(x) = x` on three equally spaced features, labels `±1`: six atoms.
    pub fn six_atom_model() -> DiscreteDistribution {
        DiscreteDistribution::discretize_binary(&ScoreFn::identity(), &[1.0 / 6.0, 0.5, 5.0 / 6.0])
            .expect("valid discretization")
    }

    /// Floor and step thresholds at the cell edges of [`six_atom_model`].
    pub fn six_atom_class() -> ClassSpec {
        let thetas = [0.0, 1.0 / 3.0, 2.0 / 3.0];
        let mut rules = Vec::new();
        for family in [ThresholdFamily::Floor, ThresholdFamily::Step] {
            let grid = ThresholdGrid::new(family, thetas.to_vec());
            rules.extend(grid.class().expect("finite thresholds").rules().iter().cloned());
        }
        ClassSpec::Explicit { rules, vc_dim: Some(1) }
    }

    pub fn wn_decay(reps: usize, base_seed: u64) -> ExperimentConfig {
        ExperimentConfig::new(
            OracleSpec::Discrete {
                distribution: six_atom_model(),
            },
            six_atom_class(),
            vec![50, 100, 200, 400, 800],
            reps,
            base_seed,
        )
    }

    pub fn coverage(n: usize, reps: usize, base_seed: u64) -> ExperimentConfig {
        let mut c = wn_decay(reps, base_seed);
        c.n_grid = vec![n];
        c
    }

    /// `η(x) = x` discretized on ten midpoints, with a floor-threshold class.
    pub fn variance() -> ExperimentConfig {
        let xs = DiscreteDistribution::midpoint_grid(0.0, 1.0, 10);
        let dist = DiscreteDistribution::discretize_binary(&ScoreFn::identity(), &xs).expect("valid discretization");
        let thetas = (0..=10).map(|k| k as f64 / 10.0).collect();
        let mut c = ExperimentConfig::new(
            OracleSpec::Discrete { distribution: dist },
            ClassSpec::Thresholds(ThresholdGrid::new(ThresholdFamily::Floor, thetas)),
            vec![2],
            2,
            0,
        );
        c.alpha_grid = vec![0.0, 0.25, 0.5, 0.75, 1.0];
        c
    }

    /// Rules ranking by `x` except that the window `(center, center + w]` is
    /// moved above everything else, one rule per width. Width 0 is the
    /// identity, which is a Bayes rule for both reference models.
    pub fn lift_class(center: f64, widths: &[f64]) -> ClassSpec {
        let rules = widths
            .iter()
            .enumerate()
            .map(|(k, &w)| {
                RankingRule::scorer(
                    format!("lift-{k:04}"),
                    ScoreFn::Lift {
                        coord: 0,
                        low: center,
                        high: center + w,
                        shift: 2.0,
                    },
                )
            })
            .collect();
        ClassSpec::Explicit { rules, vc_dim: Some(2) }
    }

    /// Width 0 and 20 geometrically spaced widths from `1e-4` to `0.3`.
    pub fn rate_class() -> ClassSpec {
        let mut widths = vec![0.0];
        widths.extend((0..20).map(|k| 1e-4 * 3000f64.powf(k as f64 / 19.0)));
        lift_class(0.5, &widths)
    }

    fn rate(model: GenerativeModel, reps: usize, base_seed: u64) -> ExperimentConfig {
        ExperimentConfig::new(
            OracleSpec::Model {
                model,
                evaluation: Evaluation::default(),
            },
            rate_class(),
            vec![50, 100, 200, 400, 800, 1600],
            reps,
            base_seed,
        )
    }

    /// Binary labels with `η(x) = x`, `X` uniform on `[0, 1]` (density bound 1).
    pub fn rate_binary(reps: usize, base_seed: u64) -> ExperimentConfig {
        let mut model = GenerativeModel::binary_eta(ScoreFn::identity(), XDist::unit_interval());
        if let GenerativeModel::BinaryEta { density_bound, .. } = &mut model {
            *density_bound = Some(1.0);
        }
        rate(model, reps, base_seed)
    }

    /// `Y = X + 0.5 N`, `X` uniform on `[0, 1]`.
    pub fn rate_gaussian(reps: usize, base_seed: u64) -> ExperimentConfig {
        let model = GenerativeModel::gaussian(ScoreFn::identity(), ScoreFn::constant(0.5), XDist::unit_interval());
        rate(model, reps, base_seed)
    }
}
