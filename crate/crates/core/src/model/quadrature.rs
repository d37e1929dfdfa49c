//! Deterministic pair-integral oracle for continuous one-dimensional models.
//!
//! `L(r) = ∫∫ f(x) f(x') P{(Y - Y') r(x, x') < 0 | x, x'} dx dx'` is computed
//! with composite Gauss–Legendre rules. Panel edges are placed at every
//! breakpoint of the rules involved, and panels on the diagonal are split
//! into two triangles (collapsed-coordinate rule), so each sub-integral has
//! a smooth integrand for scorer rules whose order only changes on the
//! diagonal and at declared breakpoints.

use crate::error::{Error, Result};
use crate::model::{GenerativeModel, RankingRule, XDist};

#[derive(Debug, Clone)]
pub struct QuadratureOracle {
    model: GenerativeModel,
    low: f64,
    high: f64,
    panels: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureOracle {
    /// `panels` is the number of panels across the whole support (each
    /// breakpoint segment gets at least one); `order` is the Gauss–Legendre
    /// order per panel axis.
    pub fn new(model: GenerativeModel, panels: usize, order: usize) -> Result<Self> {
        model.validate()?;
        let (low, high) = match model.x_dist() {
            XDist::Uniform { low, high, dim: 1 } => (*low, *high),
            other => {
                return Err(Error::InvalidModel(format!(
                    "quadrature needs a one-dimensional uniform X, got {other:?}"
                )))
            }
        };
        if panels == 0 || order == 0 {
            return Err(Error::InvalidArgument("quadrature needs panels, order >= 1".into()));
        }
        let (nodes, weights) = gauss_legendre(order);
        Ok(QuadratureOracle {
            model,
            low,
            high,
            panels,
            nodes,
            weights,
        })
    }

    pub fn model(&self) -> &GenerativeModel {
        &self.model
    }

    pub fn risk(&self, rule: &RankingRule) -> Result<f64> {
        let breaks = self.breaks(&[rule])?;
        Ok(self.integrate(&breaks, |x, xp| {
            self.model.pair_error_prob(rule.rank(&[x], &[xp]), &[x], &[xp])
        }))
    }

    /// `Λ(r) = L(r) - L(bayes)`, integrating the pointwise difference.
    pub fn excess(&self, rule: &RankingRule, bayes: &RankingRule) -> Result<f64> {
        let breaks = self.breaks(&[rule, bayes])?;
        Ok(self.integrate(&breaks, |x, xp| {
            let (a, b) = (rule.rank(&[x], &[xp]), bayes.rank(&[x], &[xp]));
            if a == b {
                0.0
            } else {
                self.model.pair_error_prob(a, &[x], &[xp]) - self.model.pair_error_prob(b, &[x], &[xp])
            }
        }))
    }

    fn breaks(&self, rules: &[&RankingRule]) -> Result<Vec<f64>> {
        let mut cuts = vec![self.low, self.high];
        for r in rules {
            let b = r.breakpoints().ok_or_else(|| {
                Error::InvalidRule(format!("quadrature supports scorer rules only, got {:?}", r.id))
            })?;
            cuts.extend(b.into_iter().filter(|t| *t > self.low && *t < self.high));
        }
        if let GenerativeModel::BinaryEta { eta, .. } = &self.model {
            let clamped = eta.clone().clamped(0.0, 1.0);
            cuts.extend(clamped.breakpoints().into_iter().filter(|t| *t > self.low && *t < self.high));
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let width = self.high - self.low;
        let mut edges = vec![self.low];
        for w in cuts.windows(2) {
            let k = ((self.panels as f64 * (w[1] - w[0]) / width).ceil() as usize).max(1);
            for i in 1..=k {
                edges.push(w[0] + (w[1] - w[0]) * i as f64 / k as f64);
            }
        }
        Ok(edges)
    }

    fn integrate(&self, edges: &[f64], f: impl Fn(f64, f64) -> f64) -> f64 {
        let density = 1.0 / (self.high - self.low);
        let mut total = 0.0;
        for (i, pi) in edges.windows(2).enumerate() {
            for (j, pj) in edges.windows(2).enumerate() {
                total += if i == j {
                    self.diagonal_panel(pi[0], pi[1], &f)
                } else {
                    self.square_panel(pi[0], pi[1], pj[0], pj[1], &f)
                };
            }
        }
        total * density * density
    }

    fn square_panel(&self, a: f64, b: f64, c: f64, d: f64, f: &impl Fn(f64, f64) -> f64) -> f64 {
        let (hx, hy) = (0.5 * (b - a), 0.5 * (d - c));
        let mut s = 0.0;
        for (u, wu) in self.nodes.iter().zip(&self.weights) {
            let x = a + hx * (u + 1.0);
            for (v, wv) in self.nodes.iter().zip(&self.weights) {
                s += wu * wv * f(x, c + hy * (v + 1.0));
            }
        }
        s * hx * hy
    }

    // Both triangles of [a, b]² via x = a + (b-a)u, x' = a + (x-a)v (and the
    // mirror), Jacobian (b-a)² u.
    fn diagonal_panel(&self, a: f64, b: f64, f: &impl Fn(f64, f64) -> f64) -> f64 {
        let h = b - a;
        let mut s = 0.0;
        for (u, wu) in self.nodes.iter().zip(&self.weights) {
            let uu = 0.5 * (u + 1.0);
            let x = a + h * uu;
            for (v, wv) in self.nodes.iter().zip(&self.weights) {
                let xp = a + (x - a) * 0.5 * (v + 1.0);
                s += wu * wv * uu * (f(x, xp) + f(xp, x));
            }
        }
        s * 0.25 * h * h
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScoreFn;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(5);
        // exact up to degree 9: ∫ t^8 = 2/9
        let s: f64 = x.iter().zip(&w).map(|(t, w)| w * t.powi(8)).sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn bayes_risk_of_linear_eta() {
        // L* = 2 ∫∫_{x > x'} (1 - x) x' = 1/12
        let m = GenerativeModel::binary_eta(ScoreFn::identity(), XDist::unit_interval());
        let q = QuadratureOracle::new(m.clone(), 16, 8).unwrap();
        let l = q.risk(&m.bayes_rule()).unwrap();
        assert!((l - 1.0 / 12.0).abs() < 1e-13, "{l}");
    }

    #[test]
    fn floor_excess_is_cubic() {
        // both below θ: excess x' - x on x < x' < θ, integral θ³/6
        let m = GenerativeModel::binary_eta(ScoreFn::identity(), XDist::unit_interval());
        let q = QuadratureOracle::new(m.clone(), 16, 8).unwrap();
        for theta in [0.01, 0.1, 0.37, 0.9] {
            let r = RankingRule::scorer("f", ScoreFn::Floor { coord: 0, theta });
            let e = q.excess(&r, &m.bayes_rule()).unwrap();
            let want = theta.powi(3) / 6.0;
            assert!((e - want).abs() < 1e-14 + 1e-10 * want, "θ={theta}: {e} vs {want}");
        }
    }

    #[test]
    fn rejects_table_rules_and_vector_x() {
        let m = GenerativeModel::binary_eta(
            ScoreFn::identity(),
            XDist::Uniform { low: 0.0, high: 1.0, dim: 2 },
        );
        assert!(QuadratureOracle::new(m, 8, 4).is_err());
    }
}
