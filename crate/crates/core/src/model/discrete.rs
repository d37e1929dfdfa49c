use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LabeledSample, RankingRule, ScoreFn, TableRule};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: Vec<f64>,
    pub y: f64,
}

impl Atom {
    pub fn new(x: Vec<f64>, y: f64) -> Self {
        Atom { x, y }
    }

    pub fn scalar(x: f64, y: f64) -> Self {
        Atom { x: vec![x], y }
    }
}

/// A finitely supported law of `(X, Y)`. All expectations against it are
/// exact sums over atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct DiscreteDistribution {
    atoms: Vec<Atom>,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawDistribution {
    atoms: Vec<Atom>,
    probs: Vec<f64>,
}

impl TryFrom<RawDistribution> for DiscreteDistribution {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        DiscreteDistribution::new(raw.atoms, raw.probs)
    }
}

const PROB_SUM_TOL: f64 = 1e-12;

impl DiscreteDistribution {
    pub fn new(atoms: Vec<Atom>, probs: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        if atoms.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} atoms but {} probabilities",
                atoms.len(),
                probs.len()
            )));
        }
        let dim = atoms[0].x.len();
        if dim == 0 || atoms.iter().any(|a| a.x.len() != dim) {
            return Err(Error::InvalidDistribution("atoms need a common positive dimension".into()));
        }
        if atoms
            .iter()
            .any(|a| !a.y.is_finite() || a.x.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::InvalidDistribution("non-finite atom coordinate".into()));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidDistribution("probabilities must be nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(DiscreteDistribution { atoms, probs })
    }

    /// Uniform weights on the observations of a sample.
    pub fn empirical(sample: &LabeledSample) -> Self {
        let w = 1.0 / sample.len() as f64;
        let atoms = sample.iter().map(|(x, y)| Atom::new(x.to_vec(), y)).collect();
        DiscreteDistribution {
            atoms,
            probs: vec![w; sample.len()],
        }
    }

    /// Binary-label law with `X` uniform on `xs` and `P{Y = 1 | x} = η(x)`.
    /// Atoms alternate `(x, +1), (x, -1)`; zero-probability atoms are kept.
    pub fn discretize_binary(eta: &ScoreFn, xs: &[f64]) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::InvalidDistribution("empty grid".into()));
        }
        let w = 1.0 / xs.len() as f64;
        let mut atoms = Vec::with_capacity(2 * xs.len());
        let mut probs = Vec::with_capacity(2 * xs.len());
        for &x in xs {
            let e = eta.eval(&[x]).clamp(0.0, 1.0);
            atoms.push(Atom::scalar(x, 1.0));
            probs.push(w * e);
            atoms.push(Atom::scalar(x, -1.0));
            probs.push(w * (1.0 - e));
        }
        Self::new(atoms, probs)
    }

    /// Midpoints of `k` equal cells of `[low, high]`.
    pub fn midpoint_grid(low: f64, high: f64, k: usize) -> Vec<f64> {
        (0..k)
            .map(|i| low + (high - low) * (i as f64 + 0.5) / k as f64)
            .collect()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].x.len()
    }

    /// Atom indices of `n` i.i.d. draws.
    pub fn sample_indices(&self, n: usize, seed: u64) -> Result<Vec<usize>> {
        let dist = WeightedIndex::new(&self.probs)
            .map_err(|e| Error::InvalidDistribution(e.to_string()))?;
        let mut rng = rng::seeded(seed);
        Ok((0..n).map(|_| dist.sample(&mut rng)).collect())
    }

    pub fn sample_from_indices(&self, idx: &[usize]) -> Result<LabeledSample> {
        let dim = self.dim();
        let mut features = Vec::with_capacity(idx.len() * dim);
        let mut labels = Vec::with_capacity(idx.len());
        for &i in idx {
            features.extend_from_slice(&self.atoms[i].x);
            labels.push(self.atoms[i].y);
        }
        LabeledSample::from_flat(dim, features, labels)
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<LabeledSample> {
        if n < 2 {
            return Err(Error::TooFewObservations(n));
        }
        self.sample_from_indices(&self.sample_indices(n, seed)?)
    }

    fn points(&self) -> Vec<&[f64]> {
        self.atoms.iter().map(|a| a.x.as_slice()).collect()
    }

    /// Exact `L(r) = Σ_a Σ_b p_a p_b 1[(y_a - y_b) r(x_a, x_b) < 0]` over
    /// independent copies, diagonal included.
    pub fn true_risk(&self, rule: &RankingRule) -> f64 {
        let prepared = rule.prepare(&self.points());
        let k = self.len();
        let mut total = 0.0;
        for a in 0..k {
            let mut row = 0.0;
            for b in 0..k {
                if (self.atoms[a].y - self.atoms[b].y) * f64::from(prepared.rank(a, b)) < 0.0 {
                    row += self.probs[b];
                }
            }
            total += self.probs[a] * row;
        }
        total
    }

    /// `P{Y != Y'}` for independent copies.
    pub fn prob_labels_differ(&self) -> f64 {
        let k = self.len();
        let mut total = 0.0;
        for a in 0..k {
            for b in 0..k {
                if self.atoms[a].y != self.atoms[b].y {
                    total += self.probs[a] * self.probs[b];
                }
            }
        }
        total
    }

    /// The exact minimizer of `L` over all rules: for every ordered pair of
    /// support points `(u, v)`, `+1` iff `P{Y < Y'} <= P{Y > Y'}` given
    /// `X = u, X' = v`.
    pub fn bayes_rule(&self) -> RankingRule {
        let mut points: Vec<Vec<f64>> = Vec::new();
        let mut point_of = Vec::with_capacity(self.len());
        for a in &self.atoms {
            let idx = match points.iter().position(|p| *p == a.x) {
                Some(i) => i,
                None => {
                    points.push(a.x.clone());
                    points.len() - 1
                }
            };
            point_of.push(idx);
        }
        let m = points.len();
        let mut below = vec![vec![0.0; m]; m];
        let mut above = vec![vec![0.0; m]; m];
        for (a, atom_a) in self.atoms.iter().enumerate() {
            for (b, atom_b) in self.atoms.iter().enumerate() {
                let w = self.probs[a] * self.probs[b];
                let (u, v) = (point_of[a], point_of[b]);
                if atom_a.y < atom_b.y {
                    below[u][v] += w;
                } else if atom_a.y > atom_b.y {
                    above[u][v] += w;
                }
            }
        }
        let values = (0..m)
            .map(|u| {
                (0..m)
                    .map(|v| if below[u][v] <= above[u][v] { 1 } else { -1 })
                    .collect()
            })
            .collect();
        RankingRule::table(
            "bayes",
            TableRule {
                points,
                values,
                default: 1,
            },
        )
    }
}
