use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LabeledSample, RankingRule, ScoreFn};
use crate::rng::{self, Rng};
use crate::stats::mean_stderr;

/// Distribution of the feature vector `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum XDist {
    /// Independent coordinates, each uniform on `[low, high)`.
    Uniform {
        low: f64,
        high: f64,
        #[serde(default = "one")]
        dim: usize,
    },
}

fn one() -> usize {
    1
}

impl XDist {
    pub fn unit_interval() -> Self {
        XDist::Uniform {
            low: 0.0,
            high: 1.0,
            dim: 1,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            XDist::Uniform { dim, .. } => *dim,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            XDist::Uniform { low, high, dim } => {
                if !(low.is_finite() && high.is_finite() && low < high) {
                    return Err(Error::InvalidModel("uniform X needs finite low < high".into()));
                }
                if *dim == 0 {
                    return Err(Error::InvalidModel("X dimension must be positive".into()));
                }
                Ok(())
            }
        }
    }

    fn draw_into(&self, rng: &mut Rng, out: &mut Vec<f64>) {
        match self {
            XDist::Uniform { low, high, dim } => {
                for _ in 0..*dim {
                    let u: f64 = rng.random();
                    out.push(low + (high - low) * u);
                }
            }
        }
    }
}

/// A data-generating process with oracle access to its regression
/// function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenerativeModel {
    /// `Y ∈ {-1, +1}` with `P{Y = 1 | X = x} = η(x)`; `η` is clamped into
    /// `[0, 1]`. `density_bound` records a known bound on the density of
    /// `η(X)`.
    BinaryEta {
        eta: ScoreFn,
        x: XDist,
        #[serde(default)]
        density_bound: Option<f64>,
    },
    /// `Y = m(X) + σ(X) N` with `N` standard normal, independent of `X`.
    /// `σ` is taken in absolute value.
    GaussianRegression { mean: ScoreFn, sigma: ScoreFn, x: XDist },
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub reps: usize,
}

impl GenerativeModel {
    pub fn binary_eta(eta: ScoreFn, x: XDist) -> Self {
        GenerativeModel::BinaryEta {
            eta,
            x,
            density_bound: None,
        }
    }

    pub fn gaussian(mean: ScoreFn, sigma: ScoreFn, x: XDist) -> Self {
        GenerativeModel::GaussianRegression { mean, sigma, x }
    }

    pub fn x_dist(&self) -> &XDist {
        match self {
            GenerativeModel::BinaryEta { x, .. } | GenerativeModel::GaussianRegression { x, .. } => x,
        }
    }

    pub fn dim(&self) -> usize {
        self.x_dist().dim()
    }

    pub fn validate(&self) -> Result<()> {
        self.x_dist().validate()?;
        let dim = Some(self.dim());
        match self {
            GenerativeModel::BinaryEta {
                eta, density_bound, ..
            } => {
                eta.validate(dim)?;
                if let Some(b) = density_bound {
                    if !(b.is_finite() && *b > 0.0) {
                        return Err(Error::InvalidModel("density bound must be positive".into()));
                    }
                }
            }
            GenerativeModel::GaussianRegression { mean, sigma, .. } => {
                mean.validate(dim)?;
                sigma.validate(dim)?;
            }
        }
        Ok(())
    }

    /// `η(x)` clamped into `[0, 1]`; `None` for regression models.
    pub fn eta(&self, x: &[f64]) -> Option<f64> {
        match self {
            GenerativeModel::BinaryEta { eta, .. } => Some(eta.eval(x).clamp(0.0, 1.0)),
            GenerativeModel::GaussianRegression { .. } => None,
        }
    }

    fn draw_into(&self, rng: &mut Rng, features: &mut Vec<f64>, labels: &mut Vec<f64>) {
        let start = features.len();
        self.x_dist().draw_into(rng, features);
        let x = &features[start..];
        let y = match self {
            GenerativeModel::BinaryEta { eta, .. } => {
                let u: f64 = rng.random();
                if u < eta.eval(x).clamp(0.0, 1.0) {
                    1.0
                } else {
                    -1.0
                }
            }
            GenerativeModel::GaussianRegression { mean, sigma, .. } => {
                let z: f64 = rng.sample(StandardNormal);
                mean.eval(x) + sigma.eval(x).abs() * z
            }
        };
        labels.push(y);
    }

    /// `n` i.i.d. draws; a pure function of `(self, n, seed)`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<LabeledSample> {
        self.validate()?;
        if n < 2 {
            return Err(Error::TooFewObservations(n));
        }
        let mut rng = rng::seeded(seed);
        let mut features = Vec::with_capacity(n * self.dim());
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            self.draw_into(&mut rng, &mut features, &mut labels);
        }
        LabeledSample::from_flat(self.dim(), features, labels)
    }

    /// The rule ranking by `η` (binary labels) or by `m` (regression).
    /// Both rank by `P{Y > Y' | X, X'}`, which minimizes the ranking risk.
    pub fn bayes_rule(&self) -> RankingRule {
        let score = match self {
            GenerativeModel::BinaryEta { eta, .. } => eta.clone().clamped(0.0, 1.0),
            GenerativeModel::GaussianRegression { mean, .. } => mean.clone(),
        };
        RankingRule::scorer("bayes", score)
    }

    /// `P{(Y - Y') · sign < 0 | X = x, X' = x'}` for a fixed rule output.
    pub fn pair_error_prob(&self, sign: i8, x: &[f64], xp: &[f64]) -> f64 {
        match self {
            GenerativeModel::BinaryEta { eta, .. } => {
                let (e, ep) = (eta.eval(x).clamp(0.0, 1.0), eta.eval(xp).clamp(0.0, 1.0));
                if sign > 0 {
                    (1.0 - e) * ep
                } else {
                    e * (1.0 - ep)
                }
            }
            GenerativeModel::GaussianRegression { mean, sigma, .. } => {
                // Y - Y' ~ N(m(x) - m(x'), σ(x)² + σ(x')²)
                let d = mean.eval(xp) - mean.eval(x);
                let s = sigma.eval(x).hypot(sigma.eval(xp));
                let p_below = if s > 0.0 {
                    normal_cdf(d / s)
                } else if d > 0.0 {
                    1.0
                } else {
                    0.0
                };
                if sign > 0 {
                    p_below
                } else if s > 0.0 {
                    normal_cdf(-d / s)
                } else if d < 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Monte-Carlo ranking risk from `reps` independent pairs. Pair `k` is
    /// observations `2k` and `2k + 1` of `self.sample(2 * reps, seed)`.
    pub fn mc_risk(&self, rule: &RankingRule, reps: usize, seed: u64) -> Result<McEstimate> {
        if reps < 2 {
            return Err(Error::InvalidArgument(format!("MC risk needs reps >= 2, got {reps}")));
        }
        let pairs = self.sample(2 * reps, seed)?;
        let errors: Vec<f64> = (0..reps)
            .map(|k| {
                let (a, b) = (2 * k, 2 * k + 1);
                let wrong = (pairs.y(a) - pairs.y(b)) * f64::from(rule.rank(pairs.x(a), pairs.x(b))) < 0.0;
                f64::from(u8::from(wrong))
            })
            .collect();
        let (estimate, stderr) = mean_stderr(&errors);
        Ok(McEstimate {
            estimate,
            stderr,
            reps,
        })
    }
}

pub(crate) fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eta_identity() -> GenerativeModel {
        GenerativeModel::binary_eta(ScoreFn::identity(), XDist::unit_interval())
    }

    #[test]
    fn degenerate_eta_gives_positive_labels() {
        let m = GenerativeModel::binary_eta(ScoreFn::constant(1.0), XDist::unit_interval());
        let s = m.sample(100, 3).unwrap();
        assert!(s.labels().iter().all(|&y| y == 1.0));
    }

    #[test]
    fn noiseless_regression_returns_mean() {
        let m = GenerativeModel::gaussian(ScoreFn::identity(), ScoreFn::constant(0.0), XDist::unit_interval());
        let s = m.sample(50, 9).unwrap();
        for (x, y) in s.iter() {
            assert_eq!(y, x[0]);
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let m = eta_identity();
        assert_eq!(m.sample(64, 11).unwrap(), m.sample(64, 11).unwrap());
        assert_ne!(m.sample(64, 11).unwrap(), m.sample(64, 12).unwrap());
    }

    #[test]
    fn too_few_draws_rejected() {
        assert!(matches!(eta_identity().sample(1, 0), Err(Error::TooFewObservations(1))));
        assert!(eta_identity().mc_risk(&eta_identity().bayes_rule(), 1, 0).is_err());
    }

    #[test]
    fn bayes_rule_orientation() {
        let up = eta_identity().bayes_rule();
        assert_eq!(up.rank(&[0.8], &[0.2]), 1);
        let down = GenerativeModel::gaussian(ScoreFn::linear(-1.0), ScoreFn::constant(1.0), XDist::unit_interval())
            .bayes_rule();
        assert_eq!(down.rank(&[0.8], &[0.2]), -1);
    }

    #[test]
    fn gaussian_pair_error_is_symmetric_on_ties() {
        let m = GenerativeModel::gaussian(ScoreFn::identity(), ScoreFn::constant(0.5), XDist::unit_interval());
        let p = m.pair_error_prob(1, &[0.3], &[0.3]);
        assert!((p - 0.5).abs() < 1e-15);
        let up = m.pair_error_prob(1, &[0.2], &[0.6]);
        let down = m.pair_error_prob(-1, &[0.2], &[0.6]);
        assert!((up + down - 1.0).abs() < 1e-15);
    }

    #[test]
    fn model_json_round_trip() {
        let m = GenerativeModel::gaussian(ScoreFn::identity(), ScoreFn::constant(0.5), XDist::unit_interval());
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<GenerativeModel>(&s).unwrap(), m);
    }
}
