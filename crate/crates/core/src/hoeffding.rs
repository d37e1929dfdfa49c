//! Hoeffding decomposition of the excess-risk U-statistic
//! `Λ_n(r) - Λ(r) = 2 T_n(r) + W_n(r)`.
//!
//! The working kernel is the symmetrized `q̄(z, z') = (q_r(z, z') + q_r(z', z)) / 2`.
//! It equals `q_r` whenever both rules are antisymmetric on the pair, and
//! `Λ_n` is unchanged by the symmetrization since ordered-pair sums visit
//! both orders. From `q̄`:
//!
//! - `h_r(z) = E q̄(z, Z') - Λ(r)` (centered projection),
//! - `ĥ_r(z, z') = q̄(z, z') - Λ(r) - h_r(z) - h_r(z')` (degenerate kernel),
//! - `T_n = (1/n) Σ h_r(Z_i)`, `W_n = (1/n(n-1)) Σ_{i≠j} ĥ_r(Z_i, Z_j)`.
//!
//! Every expectation is a finite sum against a reference law: the discrete
//! distribution itself (exact backend), or an empirical law of `budget`
//! model draws (Monte-Carlo backend). On the Monte-Carlo backend the
//! identity is exact for the reference law and holds for the true law only
//! up to Monte-Carlo error.

use std::borrow::Cow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DiscreteDistribution, GenerativeModel, LabeledSample, PreparedRule, RankingRule};

#[derive(Debug, Clone, Copy)]
pub enum ExpectationOracle<'a> {
    Exact(&'a DiscreteDistribution),
    MonteCarlo {
        model: &'a GenerativeModel,
        budget: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Backend {
    Exact,
    MonteCarlo { budget: usize, seed: u64 },
}

impl Backend {
    pub fn is_exact(self) -> bool {
        self == Backend::Exact
    }
}

/// Reference law against which expectations are summed.
#[derive(Debug, Clone)]
pub struct Reference<'a> {
    pub dist: Cow<'a, DiscreteDistribution>,
    pub backend: Backend,
}

impl<'a> ExpectationOracle<'a> {
    pub fn resolve(self) -> Result<Reference<'a>> {
        match self {
            ExpectationOracle::Exact(d) => Ok(Reference {
                dist: Cow::Borrowed(d),
                backend: Backend::Exact,
            }),
            ExpectationOracle::MonteCarlo { model, budget, seed } => {
                if budget < 2 {
                    return Err(Error::InvalidArgument(format!("MC budget must be >= 2, got {budget}")));
                }
                let draws = model.sample(budget, seed)?;
                Ok(Reference {
                    dist: Cow::Owned(DiscreteDistribution::empirical(&draws)),
                    backend: Backend::MonteCarlo { budget, seed },
                })
            }
        }
    }
}

#[inline]
fn wrong(y: f64, yp: f64, sign: i8) -> f64 {
    if (y - yp) * f64::from(sign) < 0.0 {
        1.0
    } else {
        0.0
    }
}

/// `q̄` from prepared rules on a shared point list.
#[inline]
fn qbar_at(pr: &PreparedRule<'_>, pb: &PreparedRule<'_>, ys: &[f64], i: usize, j: usize) -> f64 {
    let (y, yp) = (ys[i], ys[j]);
    let fwd = wrong(y, yp, pr.rank(i, j)) - wrong(y, yp, pb.rank(i, j));
    let bwd = wrong(yp, y, pr.rank(j, i)) - wrong(yp, y, pb.rank(j, i));
    0.5 * (fwd + bwd)
}

/// The symmetrized excess kernel `q̄_r(z, z')`.
pub fn sym_kernel(rule: &RankingRule, bayes: &RankingRule, z: (&[f64], f64), zp: (&[f64], f64)) -> f64 {
    let q = |a: (&[f64], f64), b: (&[f64], f64)| {
        wrong(a.1, b.1, rule.rank(a.0, b.0)) - wrong(a.1, b.1, bayes.rank(a.0, b.0))
    };
    0.5 * (q(z, zp) + q(zp, z))
}

/// `h_r` and `ĥ_r` for a fixed `(rule, bayes)` against a reference law.
pub struct Projector<'a> {
    rule: &'a RankingRule,
    bayes: &'a RankingRule,
    reference: Reference<'a>,
    lambda: f64,
}

impl<'a> Projector<'a> {
    pub fn new(rule: &'a RankingRule, bayes: &'a RankingRule, oracle: ExpectationOracle<'a>) -> Result<Self> {
        let reference = oracle.resolve()?;
        let dim = Some(reference.dist.dim());
        rule.validate(dim)?;
        bayes.validate(dim)?;
        let dist = reference.dist.as_ref();
        let points: Vec<&[f64]> = dist.atoms().iter().map(|a| a.x.as_slice()).collect();
        let ys: Vec<f64> = dist.atoms().iter().map(|a| a.y).collect();
        let (pr, pb) = (rule.prepare(&points), bayes.prepare(&points));
        let p = dist.probs();
        let lambda = (0..p.len())
            .map(|a| p[a] * (0..p.len()).map(|b| p[b] * qbar_at(&pr, &pb, &ys, a, b)).sum::<f64>())
            .sum();
        Ok(Projector {
            rule,
            bayes,
            reference,
            lambda,
        })
    }

    /// `Λ(r) = E q_r(Z, Z')` under the reference law.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn backend(&self) -> Backend {
        self.reference.backend
    }

    pub fn reference(&self) -> &DiscreteDistribution {
        &self.reference.dist
    }

    /// `E q̄(z, Z')` for every point of `sample`, in one batched pass.
    fn conditional_means(&self, xs: &[&[f64]], ys: &[f64]) -> Vec<f64> {
        let dist = self.reference();
        let n = xs.len();
        let mut points: Vec<&[f64]> = xs.to_vec();
        points.extend(dist.atoms().iter().map(|a| a.x.as_slice()));
        let mut labels = ys.to_vec();
        labels.extend(dist.atoms().iter().map(|a| a.y));
        let (pr, pb) = (self.rule.prepare(&points), self.bayes.prepare(&points));
        let p = dist.probs();
        (0..n)
            .into_par_iter()
            .map(|i| {
                (0..p.len())
                    .map(|b| p[b] * qbar_at(&pr, &pb, &labels, i, n + b))
                    .sum()
            })
            .collect()
    }

    /// `h_r(z) = E q̄(z, Z') - Λ(r)`.
    pub fn h(&self, z: (&[f64], f64)) -> f64 {
        self.conditional_means(&[z.0], &[z.1])[0] - self.lambda
    }

    /// `ĥ_r(z, z') = q̄(z, z') - Λ(r) - h_r(z) - h_r(z')`.
    pub fn hat(&self, z: (&[f64], f64), zp: (&[f64], f64)) -> f64 {
        sym_kernel(self.rule, self.bayes, z, zp) - self.lambda - self.h(z) - self.h(zp)
    }

    fn h_on_sample(&self, sample: &LabeledSample) -> Vec<f64> {
        let xs: Vec<&[f64]> = (0..sample.len()).map(|i| sample.x(i)).collect();
        self.conditional_means(&xs, sample.labels())
            .into_iter()
            .map(|m| m - self.lambda)
            .collect()
    }

    /// `h_r` at every reference atom.
    pub fn atom_projections(&self) -> Vec<f64> {
        let dist = self.reference();
        let xs: Vec<&[f64]> = dist.atoms().iter().map(|a| a.x.as_slice()).collect();
        let ys: Vec<f64> = dist.atoms().iter().map(|a| a.y).collect();
        self.conditional_means(&xs, &ys).into_iter().map(|m| m - self.lambda).collect()
    }

    /// Projection table over the reference atoms themselves.
    pub fn atom_kernel(&self) -> AtomKernel {
        let dist = self.reference();
        let k = dist.len();
        let points: Vec<&[f64]> = dist.atoms().iter().map(|a| a.x.as_slice()).collect();
        let ys: Vec<f64> = dist.atoms().iter().map(|a| a.y).collect();
        let (pr, pb) = (self.rule.prepare(&points), self.bayes.prepare(&points));
        let mut qbar = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..k {
                qbar[a * k + b] = qbar_at(&pr, &pb, &ys, a, b);
            }
        }
        let p = dist.probs();
        let h: Vec<f64> = (0..k)
            .map(|a| (0..k).map(|b| p[b] * qbar[a * k + b]).sum::<f64>() - self.lambda)
            .collect();
        let mut hat = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..k {
                hat[a * k + b] = qbar[a * k + b] - self.lambda - h[a] - h[b];
            }
        }
        AtomKernel {
            k,
            qbar,
            hat,
            h,
            lambda: self.lambda,
        }
    }
}

pub fn h_projection(
    rule: &RankingRule,
    bayes: &RankingRule,
    point: (&[f64], f64),
    oracle: ExpectationOracle<'_>,
) -> Result<f64> {
    Ok(Projector::new(rule, bayes, oracle)?.h(point))
}

pub fn degenerate_kernel(
    rule: &RankingRule,
    bayes: &RankingRule,
    z: (&[f64], f64),
    zp: (&[f64], f64),
    oracle: ExpectationOracle<'_>,
) -> Result<f64> {
    Ok(Projector::new(rule, bayes, oracle)?.hat(z, zp))
}

/// Contract for `n × n` tables of `ĥ_r` evaluated on a sample, as consumed
/// by the Rademacher statistics.
pub trait HatMatrix {
    fn len(&self) -> usize;

    /// `g_j = Σ_i ε_i ĥ[i][j]`, over `i != j` unless `include_diagonal`.
    fn column_sums(&self, eps: &[i8], include_diagonal: bool) -> Vec<f64>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Row-major dense table; the diagonal is stored but only used on request.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHat {
    n: usize,
    values: Vec<f64>,
}

impl DenseHat {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "{} values for a {n}x{n} table",
                values.len()
            )));
        }
        Ok(DenseHat { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(f(i, j));
            }
        }
        DenseHat { n, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n)
    }
}

impl HatMatrix for DenseHat {
    fn len(&self) -> usize {
        self.n
    }

    fn column_sums(&self, eps: &[i8], include_diagonal: bool) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        for (i, row) in self.rows().enumerate() {
            let e = f64::from(eps[i]);
            for (gj, v) in g.iter_mut().zip(row) {
                *gj += e * v;
            }
            if !include_diagonal {
                g[i] -= e * row[i];
            }
        }
        g
    }
}

/// Decomposition of `Λ_n(r)` on one sample.
#[derive(Debug, Clone)]
pub struct KernelTable {
    /// `ĥ_r(Z_i, Z_j)`; diagonal entries are `ĥ_r(Z_i, Z_i)`.
    pub hat: DenseHat,
    /// `h_r(Z_i)`.
    pub h: Vec<f64>,
    pub lambda: f64,
    pub lambda_n: f64,
    pub t_n: f64,
    pub w_n: f64,
    pub backend: Backend,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSummary {
    pub n: usize,
    pub lambda: f64,
    pub lambda_n: f64,
    pub t_n: f64,
    pub w_n: f64,
    pub identity_residual: f64,
    pub backend: Backend,
}

impl KernelTable {
    /// `Λ_n - Λ - 2 T_n - W_n`.
    pub fn identity_residual(&self) -> f64 {
        self.lambda_n - self.lambda - 2.0 * self.t_n - self.w_n
    }

    pub fn summary(&self) -> KernelSummary {
        KernelSummary {
            n: self.h.len(),
            lambda: self.lambda,
            lambda_n: self.lambda_n,
            t_n: self.t_n,
            w_n: self.w_n,
            identity_residual: self.identity_residual(),
            backend: self.backend,
        }
    }
}

impl HatMatrix for KernelTable {
    fn len(&self) -> usize {
        self.hat.len()
    }

    fn column_sums(&self, eps: &[i8], include_diagonal: bool) -> Vec<f64> {
        self.hat.column_sums(eps, include_diagonal)
    }
}

pub fn decompose(
    sample: &LabeledSample,
    rule: &RankingRule,
    bayes: &RankingRule,
    oracle: ExpectationOracle<'_>,
) -> Result<KernelTable> {
    let projector = Projector::new(rule, bayes, oracle)?;
    if projector.reference().dim() != sample.dim() {
        return Err(Error::InvalidArgument(format!(
            "sample dimension {} does not match oracle dimension {}",
            sample.dim(),
            projector.reference().dim()
        )));
    }
    Ok(decompose_with(sample, &projector))
}

/// [`decompose`] reusing a projector, e.g. across many samples.
pub fn decompose_with(sample: &LabeledSample, projector: &Projector<'_>) -> KernelTable {
    let n = sample.len();
    let lambda = projector.lambda();
    let h = projector.h_on_sample(sample);
    let (pr, pb) = (
        projector.rule.prepare_sample(sample),
        projector.bayes.prepare_sample(sample),
    );
    let ys = sample.labels();
    let mut values = vec![0.0; n * n];
    // rows: (Σ_{j≠i} q_ij as integer, Σ_{j≠i} ĥ_ij)
    let row_sums: Vec<(i64, f64)> = values
        .par_chunks_mut(n)
        .enumerate()
        .map(|(i, row)| {
            let mut q_sum = 0i64;
            let mut hat_sum = 0.0;
            for (j, cell) in row.iter_mut().enumerate() {
                let qbar = qbar_at(&pr, &pb, ys, i, j);
                *cell = qbar - lambda - h[i] - h[j];
                if j != i {
                    q_sum += (wrong(ys[i], ys[j], pr.rank(i, j)) - wrong(ys[i], ys[j], pb.rank(i, j))) as i64;
                    hat_sum += *cell;
                }
            }
            (q_sum, hat_sum)
        })
        .collect();
    let pairs = sample.ordered_pairs() as f64;
    let q_total: i64 = row_sums.iter().map(|r| r.0).sum();
    let hat_total: f64 = row_sums.iter().map(|r| r.1).sum();
    KernelTable {
        hat: DenseHat { n, values },
        t_n: h.iter().sum::<f64>() / n as f64,
        h,
        lambda,
        lambda_n: q_total as f64 / pairs,
        w_n: hat_total / pairs,
        backend: projector.backend(),
    }
}

/// `q̄`, `ĥ` and `h` tabulated over the atoms of a discrete law. A sample
/// drawn from that law is a list of atom indices, and every statistic of
/// the decomposition reduces to sums over atom counts.
#[derive(Debug, Clone)]
pub struct AtomKernel {
    k: usize,
    qbar: Vec<f64>,
    hat: Vec<f64>,
    h: Vec<f64>,
    lambda: f64,
}

/// `(Λ_n, T_n, W_n)` of one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub lambda_n: f64,
    pub t_n: f64,
    pub w_n: f64,
}

impl AtomKernel {
    pub fn new(dist: &DiscreteDistribution, rule: &RankingRule, bayes: &RankingRule) -> Result<Self> {
        Ok(Projector::new(rule, bayes, ExpectationOracle::Exact(dist))?.atom_kernel())
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn atoms(&self) -> usize {
        self.k
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn hat(&self, a: usize, b: usize) -> f64 {
        self.hat[a * self.k + b]
    }

    /// Exact decomposition of the sample with atom counts `counts`.
    pub fn decompose_counts(&self, counts: &[usize]) -> Decomposition {
        let n: usize = counts.iter().sum();
        let k = self.k;
        let quad = |m: &[f64]| -> f64 {
            let mut s = 0.0;
            for a in 0..k {
                if counts[a] == 0 {
                    continue;
                }
                let ca = counts[a] as f64;
                let mut row = 0.0;
                for b in 0..k {
                    row += counts[b] as f64 * m[a * k + b];
                }
                s += ca * (row - m[a * k + a]);
            }
            s
        };
        let pairs = (n * (n - 1)) as f64;
        Decomposition {
            lambda_n: quad(&self.qbar) / pairs,
            t_n: counts.iter().zip(&self.h).map(|(&c, h)| c as f64 * h).sum::<f64>() / n as f64,
            w_n: quad(&self.hat) / pairs,
        }
    }

    /// View of the kernel on a sample given by atom indices.
    pub fn on_sample<'s>(&'s self, atom_of: &'s [usize]) -> IndexedAtomKernel<'s> {
        IndexedAtomKernel { kernel: self, atom_of }
    }
}

pub fn atom_counts(atom_of: &[usize], k: usize) -> Vec<usize> {
    let mut counts = vec![0; k];
    for &a in atom_of {
        counts[a] += 1;
    }
    counts
}

/// `ĥ` on a sample of atom indices, with `O(n + K²)` column sums.
#[derive(Debug, Clone, Copy)]
pub struct IndexedAtomKernel<'a> {
    kernel: &'a AtomKernel,
    atom_of: &'a [usize],
}

impl HatMatrix for IndexedAtomKernel<'_> {
    fn len(&self) -> usize {
        self.atom_of.len()
    }

    fn column_sums(&self, eps: &[i8], include_diagonal: bool) -> Vec<f64> {
        let k = self.kernel.k;
        let mut by_atom = vec![0.0; k];
        for (&a, &e) in self.atom_of.iter().zip(eps) {
            by_atom[a] += f64::from(e);
        }
        let col: Vec<f64> = (0..k)
            .map(|b| (0..k).map(|a| by_atom[a] * self.kernel.hat(a, b)).sum())
            .collect();
        self.atom_of
            .iter()
            .zip(eps)
            .map(|(&a, &e)| {
                if include_diagonal {
                    col[a]
                } else {
                    col[a] - f64::from(e) * self.kernel.hat(a, a)
                }
            })
            .collect()
    }
}

/// `ℓ(r, z) = 2 E 1[(y - Y) r(x, X) < 0] - L(r)`.
pub fn pointwise_loss_l(rule: &RankingRule, point: (&[f64], f64), oracle: ExpectationOracle<'_>) -> Result<f64> {
    let reference = oracle.resolve()?;
    Ok(loss_values(rule, &[point.0], &[point.1], &reference.dist)?[0])
}

fn loss_values(rule: &RankingRule, xs: &[&[f64]], ys: &[f64], dist: &DiscreteDistribution) -> Result<Vec<f64>> {
    rule.validate(Some(dist.dim()))?;
    let risk = dist.true_risk(rule);
    let n = xs.len();
    let mut points = xs.to_vec();
    points.extend(dist.atoms().iter().map(|a| a.x.as_slice()));
    let prepared = rule.prepare(&points);
    let p = dist.probs();
    Ok((0..n)
        .map(|i| {
            let e: f64 = dist
                .atoms()
                .iter()
                .enumerate()
                .map(|(b, atom)| p[b] * wrong(ys[i], atom.y, prepared.rank(i, n + b)))
                .sum();
            2.0 * e - risk
        })
        .collect())
}

/// `ν_n(r) = (1/n) Σ ℓ(r, Z_i) - L(r)`.
pub fn empirical_process_nu(sample: &LabeledSample, rule: &RankingRule, oracle: ExpectationOracle<'_>) -> Result<f64> {
    let reference = oracle.resolve()?;
    let xs: Vec<&[f64]> = (0..sample.len()).map(|i| sample.x(i)).collect();
    let losses = loss_values(rule, &xs, sample.labels(), &reference.dist)?;
    Ok(losses.iter().sum::<f64>() / sample.len() as f64 - reference.dist.true_risk(rule))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Atom, ScoreFn};

    fn two_atoms() -> DiscreteDistribution {
        DiscreteDistribution::new(vec![Atom::scalar(0.0, 0.0), Atom::scalar(1.0, 1.0)], vec![0.5, 0.5]).unwrap()
    }

    fn up() -> RankingRule {
        RankingRule::scorer("up", ScoreFn::identity())
    }

    fn down() -> RankingRule {
        RankingRule::scorer("down", ScoreFn::linear(-1.0))
    }

    #[test]
    fn bayes_against_itself_is_zero() {
        let d = two_atoms();
        let s = d.sample(10, 1).unwrap();
        let t = decompose(&s, &up(), &up(), ExpectationOracle::Exact(&d)).unwrap();
        assert_eq!((t.lambda, t.lambda_n, t.t_n, t.w_n), (0.0, 0.0, 0.0, 0.0));
        assert!(t.hat.rows().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn two_atom_projection_by_hand() {
        // reversed rule: q̄ is 1 on the cross pairs and 0 on same-atom pairs,
        // so Λ = 1/2 and E q̄(z_a, Z') = 1/2 at both atoms: h ≡ 0
        let d = two_atoms();
        let o = ExpectationOracle::Exact(&d);
        let (dn, u) = (down(), up());
        let p = Projector::new(&dn, &u, o).unwrap();
        assert_eq!(p.lambda(), 0.5);
        assert_eq!(p.h((&[0.0], 0.0)), 0.0);
        assert_eq!(p.h((&[1.0], 1.0)), 0.0);
        // ĥ = q̄ - 1/2: +1/2 across, -1/2 on the same atom
        assert_eq!(p.hat((&[0.0], 0.0), (&[1.0], 1.0)), 0.5);
        assert_eq!(p.hat((&[0.0], 0.0), (&[0.0], 0.0)), -0.5);
    }

    #[test]
    fn two_atom_loss_by_hand() {
        // L(down) = 1/2; at (0,0): E 1[(0 - Y) r(0, X) < 0] = P{X = 1} = 1/2
        let d = two_atoms();
        let o = ExpectationOracle::Exact(&d);
        assert_eq!(pointwise_loss_l(&down(), (&[0.0], 0.0), o).unwrap(), 0.5);
        assert_eq!(pointwise_loss_l(&up(), (&[0.0], 0.0), o).unwrap(), 0.0);
    }

    #[test]
    fn dense_column_sums_exclude_diagonal() {
        let h = DenseHat::from_fn(3, |i, j| if i == j { 10.0 } else { 1.0 });
        assert_eq!(h.column_sums(&[1, 1, 1], false), vec![2.0, 2.0, 2.0]);
        assert_eq!(h.column_sums(&[1, 1, 1], true), vec![12.0, 12.0, 12.0]);
    }

    #[test]
    fn atom_kernel_matches_dense_table() {
        let d = DiscreteDistribution::discretize_binary(&ScoreFn::identity(), &[0.2, 0.5, 0.8]).unwrap();
        let rule = RankingRule::scorer("f", ScoreFn::Floor { coord: 0, theta: 0.6 });
        let bayes = d.bayes_rule();
        let idx = d.sample_indices(25, 4).unwrap();
        let s = d.sample_from_indices(&idx).unwrap();
        let table = decompose(&s, &rule, &bayes, ExpectationOracle::Exact(&d)).unwrap();
        let ak = AtomKernel::new(&d, &rule, &bayes).unwrap();
        let dec = ak.decompose_counts(&atom_counts(&idx, d.len()));
        assert!((dec.lambda_n - table.lambda_n).abs() < 1e-14);
        assert!((dec.t_n - table.t_n).abs() < 1e-14);
        assert!((dec.w_n - table.w_n).abs() < 1e-14);
        let eps: Vec<i8> = (0..25).map(|i| if i % 3 == 0 { -1 } else { 1 }).collect();
        for diag in [false, true] {
            let a = ak.on_sample(&idx).column_sums(&eps, diag);
            let b = table.column_sums(&eps, diag);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn monte_carlo_backend_is_flagged() {
        use crate::model::{GenerativeModel, XDist};
        let m = GenerativeModel::binary_eta(ScoreFn::identity(), XDist::unit_interval());
        let s = m.sample(20, 1).unwrap();
        let rule = RankingRule::scorer("f", ScoreFn::Floor { coord: 0, theta: 0.5 });
        let o = ExpectationOracle::MonteCarlo { model: &m, budget: 200, seed: 9 };
        let t = decompose(&s, &rule, &m.bayes_rule(), o).unwrap();
        assert!(!t.backend.is_exact());
        assert!(t.identity_residual().abs() < 1e-12);
        let bad = ExpectationOracle::MonteCarlo { model: &m, budget: 1, seed: 9 };
        assert!(bad.resolve().is_err());
    }
}
