#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use urank::model::{Atom, DiscreteDistribution, LabeledSample, RankingRule, ScoreFn};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Up to `max_atoms` scalar atoms on a coarse grid, so shared `x` or `y`
/// values occur regularly.
pub fn random_distribution(rng: &mut ChaCha8Rng, max_atoms: usize) -> DiscreteDistribution {
    let k = rng.random_range(1..=max_atoms);
    let mut atoms: Vec<Atom> = Vec::new();
    while atoms.len() < k {
        let a = Atom::scalar(rng.random_range(0..5) as f64 / 4.0, rng.random_range(0..4) as f64);
        if !atoms.contains(&a) {
            atoms.push(a);
        }
    }
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    DiscreteDistribution::new(atoms, w.iter().map(|v| v / total).collect()).unwrap()
}

/// Floor, step or lift scorer with a random threshold in `[-0.1, 1.1]`.
pub fn random_threshold_rule(rng: &mut ChaCha8Rng) -> RankingRule {
    let theta = rng.random_range(-0.1..1.1);
    let score = match rng.random_range(0..3) {
        0 => ScoreFn::Floor { coord: 0, theta },
        1 => ScoreFn::Step { coord: 0, theta },
        _ => ScoreFn::Lift { coord: 0, low: theta, high: theta + 0.3, shift: 2.0 },
    };
    let rule = RankingRule::scorer("t", score);
    if rng.random_bool(0.3) { rule.negated() } else { rule }
}

/// Scalar sample with distinct features and distinct labels.
pub fn tie_free_sample(rng: &mut ChaCha8Rng, n: usize) -> LabeledSample {
    let mut xs: Vec<f64> = (0..n).map(|i| i as f64 + rng.random_range(0.0..0.5)).collect();
    let mut ys: Vec<f64> = (0..n).map(|i| i as f64 * 0.5 + rng.random_range(0.0..0.25)).collect();
    xs.shuffle(rng);
    // labels loosely follow features
    for i in 0..n {
        let j = (i + rng.random_range(0..=n / 4 + 1)).min(n - 1);
        ys.swap(i, j);
    }
    LabeledSample::from_scalar(&xs, &ys).unwrap()
}

/// Scalar sample on a small grid of features and labels (ties everywhere).
pub fn tied_sample(rng: &mut ChaCha8Rng, n: usize) -> LabeledSample {
    let xs: Vec<f64> = (0..n).map(|_| rng.random_range(0..8) as f64 / 8.0).collect();
    let ys: Vec<f64> = (0..n).map(|_| rng.random_range(0..3) as f64).collect();
    LabeledSample::from_scalar(&xs, &ys).unwrap()
}

/// Brute-force `L(r)` over ordered atom pairs.
pub fn brute_true_risk(d: &DiscreteDistribution, r: &RankingRule) -> f64 {
    let mut s = 0.0;
    for (a, pa) in d.atoms().iter().zip(d.probs()) {
        for (b, pb) in d.atoms().iter().zip(d.probs()) {
            if (a.y - b.y) * f64::from(r.rank(&a.x, &b.x)) < 0.0 {
                s += pa * pb;
            }
        }
    }
    s
}

/// Brute-force misranked ordered-pair count.
pub fn brute_errors(s: &LabeledSample, r: &RankingRule) -> u64 {
    let mut c = 0;
    for i in 0..s.len() {
        for j in 0..s.len() {
            if i != j && (s.y(i) - s.y(j)) * f64::from(r.rank(s.x(i), s.x(j))) < 0.0 {
                c += 1;
            }
        }
    }
    c
}

/// Midpoint rule for `∫∫_{[0,1]²} f`.
pub fn double_integral(m: usize, f: impl Fn(f64, f64) -> f64) -> f64 {
    let h = 1.0 / m as f64;
    let mut s = 0.0;
    for i in 0..m {
        let x = (i as f64 + 0.5) * h;
        for j in 0..m {
            s += f(x, (j as f64 + 0.5) * h);
        }
    }
    s * h * h
}
