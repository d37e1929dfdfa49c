//! Worked values checked against independent computations in test code.

mod common;

use common::*;
use rand::Rng;
use urank::complexity::{
    bound_report, draw_rademacher, estimate_complexities, m_stat, u_chaos, z_chaos, BoundOptions,
};
use urank::erm::{erm_exhaustive, erm_threshold_scan};
use urank::experiments::{fit_log_log, reference};
use urank::hoeffding::{
    decompose, empirical_process_nu, pointwise_loss_l, DenseHat, ExpectationOracle, Projector,
};
use urank::model::{
    Atom, DiscreteDistribution, GenerativeModel, LabeledSample, RankingRule, RuleClass, ScoreFn, ThresholdFamily,
    ThresholdGrid, XDist,
};
use urank::risk::{
    empirical_excess_risk, empirical_risk_fast, empirical_risk_naive, excess_kernel_q, true_excess, FastRisk,
    RiskOracle,
};

fn two_atoms() -> DiscreteDistribution {
    DiscreteDistribution::new(vec![Atom::scalar(0.0, 0.0), Atom::scalar(1.0, 1.0)], vec![0.5, 0.5]).unwrap()
}

fn up() -> RankingRule {
    RankingRule::scorer("up", ScoreFn::identity())
}

fn down() -> RankingRule {
    RankingRule::scorer("down", ScoreFn::linear(-1.0))
}

fn eta_x() -> GenerativeModel {
    GenerativeModel::binary_eta(ScoreFn::identity(), XDist::unit_interval())
}

// `L* = 2 ∫∫_{x > x'} (1 - x) x' dx dx'` for η(x) = x.
fn bayes_risk_by_integration() -> f64 {
    double_integral(2000, |x, xp| {
        let w = if x > xp {
            1.0
        } else if x == xp {
            0.5
        } else {
            0.0
        };
        2.0 * w * (1.0 - x) * xp
    })
}

#[test]
fn binary_eta_label_mean() {
    let s = eta_x().sample(10_000, 21).unwrap();
    let ones: Vec<f64> = s.labels().iter().map(|y| (y + 1.0) / 2.0).collect();
    let m = ones.iter().sum::<f64>() / ones.len() as f64;
    let sd = (ones.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (ones.len() - 1) as f64).sqrt();
    assert!((m - 0.5).abs() < 3.0 * sd / 100.0, "mean {m}");
}

#[test]
fn bayes_rule_beats_random_threshold_class() {
    let model = eta_x();
    let xs = DiscreteDistribution::midpoint_grid(0.0, 1.0, 20);
    let dist = DiscreteDistribution::discretize_binary(&ScoreFn::identity(), &xs).unwrap();
    let bayes = model.bayes_rule();
    let l_star = brute_true_risk(&dist, &bayes);
    let mut g = rng(5);
    for _ in 0..100 {
        let r = random_threshold_rule(&mut g);
        assert!(l_star <= brute_true_risk(&dist, &r) + 1e-15, "{r:?}");
    }
    assert!((dist.true_risk(&bayes) - l_star).abs() < 1e-15);
}

#[test]
fn reversed_rule_on_two_atoms() {
    let d = two_atoms();
    assert_eq!(brute_true_risk(&d, &down()), 0.5);
    assert_eq!(d.true_risk(&down()), 0.5);
    assert_eq!(d.true_risk(&up()), 0.0);
    let e = true_excess(&down(), RiskOracle::Exact(&d)).unwrap();
    assert_eq!((e.value, e.stderr), (0.5, 0.0));
}

#[test]
fn mc_bayes_risk_is_one_twelfth() {
    let l_star = bayes_risk_by_integration();
    assert!((l_star - 1.0 / 12.0).abs() < 1e-6);
    let m = eta_x();
    let est = m.mc_risk(&m.bayes_rule(), 1_000_000, 17).unwrap();
    assert!((est.estimate - l_star).abs() < 4.0 * est.stderr, "{est:?}");
}

#[test]
fn rule_and_negation_cover_distinct_label_pairs() {
    let m = eta_x();
    let r = RankingRule::scorer("f", ScoreFn::Floor { coord: 0, theta: 0.3 });
    let (reps, seed) = (20_000, 4);
    let a = m.mc_risk(&r, reps, seed).unwrap();
    let b = m.mc_risk(&r.negated(), reps, seed).unwrap();
    let draws = m.sample(2 * reps, seed).unwrap();
    let differ = (0..reps).filter(|k| draws.y(2 * k) != draws.y(2 * k + 1)).count() as f64 / reps as f64;
    assert!((a.estimate + b.estimate - differ).abs() < 1e-12);
}

#[test]
fn fast_path_on_worked_sample() {
    let s = LabeledSample::from_scalar(&[0.1, 0.2, 0.3, 0.4], &[1.0, 3.0, 2.0, 4.0]).unwrap();
    assert_eq!(brute_errors(&s, &up()), 2);
    let FastRisk::Exact(fast) = empirical_risk_fast(&s, &ScoreFn::identity()).unwrap() else {
        panic!("tie-free sample");
    };
    assert_eq!(fast.l_n, 1.0 / 6.0);
    assert_eq!(fast, empirical_risk_naive(&s, &up()).unwrap());
}

#[test]
fn fast_equals_naive_on_random_tie_free_samples() {
    let mut g = rng(99);
    for _ in 0..200 {
        let n = g.random_range(2..=64);
        let s = tie_free_sample(&mut g, n);
        let score = ScoreFn::linear(if g.random_bool(0.5) { 1.0 } else { -1.0 });
        let FastRisk::Exact(fast) = empirical_risk_fast(&s, &score).unwrap() else {
            panic!("tie-free sample");
        };
        let rule = RankingRule::scorer("s", score);
        assert_eq!(fast, empirical_risk_naive(&s, &rule).unwrap());
        assert_eq!(fast.error_pair_count, brute_errors(&s, &rule));
    }
}

#[test]
fn excess_kernel_worked_case() {
    // y > y', r = -1, r* = +1
    let (z, zp) = (([0.0].as_slice(), 2.0), ([1.0].as_slice(), 1.0));
    assert_eq!(excess_kernel_q(&up(), &down(), z, zp), 1);
    assert_eq!(excess_kernel_q(&down(), &up(), z, zp), -1);
}

#[test]
fn excess_of_anti_monotone_rule() {
    let s = LabeledSample::from_scalar(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
    let by_risks = brute_errors(&s, &down()) as f64 / 6.0 - brute_errors(&s, &up()) as f64 / 6.0;
    assert_eq!(by_risks, 1.0);
    assert_eq!(empirical_excess_risk(&s, &down(), &up()).unwrap(), by_risks);
}

#[test]
fn mc_excess_of_step_rule_matches_integral() {
    // Λ = L(step) - L*; for an ordered pair ranked +1 the error probability
    // is (1 - η(x)) η(x'), for -1 it is η(x)(1 - η(x'))
    let step = |x: f64| if x > 0.5 { 1.0 } else { 0.0 };
    let l_step = double_integral(2000, |x, xp| {
        if step(x) >= step(xp) {
            (1.0 - x) * xp
        } else {
            x * (1.0 - xp)
        }
    });
    let lambda = l_step - bayes_risk_by_integration();
    let m = eta_x();
    let rule = RankingRule::scorer("step", ScoreFn::Step { coord: 0, theta: 0.5 });
    let est = true_excess(&rule, RiskOracle::MonteCarlo { model: &m, reps: 400_000, seed: 8 }).unwrap();
    assert!((est.value - lambda).abs() < 4.0 * est.stderr, "{est:?} vs {lambda}");
}

#[test]
fn two_atom_projection_by_enumeration() {
    let d = two_atoms();
    let o = ExpectationOracle::Exact(&d);
    let (r, b) = (down(), up());
    let p = Projector::new(&r, &b, o).unwrap();
    let atoms: Vec<(&[f64], f64)> = d.atoms().iter().map(|a| (a.x.as_slice(), a.y)).collect();
    // E q over ordered pairs, both orders averaged
    let q = |u: (&[f64], f64), v: (&[f64], f64)| f64::from(excess_kernel_q(&r, &b, u, v));
    let lambda: f64 = atoms.iter().flat_map(|&u| atoms.iter().map(move |&v| 0.25 * q(u, v))).sum();
    assert_eq!(p.lambda(), lambda);
    for &z in &atoms {
        let cond: f64 = atoms.iter().map(|&v| 0.5 * 0.5 * (q(z, v) + q(v, z))).sum();
        assert_eq!(p.h(z), cond - lambda);
    }
}

#[test]
fn degenerate_kernel_is_symmetric() {
    let mut g = rng(12);
    for _ in 0..50 {
        let d = random_distribution(&mut g, 6);
        let r = random_threshold_rule(&mut g);
        let b = d.bayes_rule();
        let p = Projector::new(&r, &b, ExpectationOracle::Exact(&d)).unwrap();
        let pick = |g: &mut rand_chacha::ChaCha8Rng| (vec![g.random_range(-0.2..1.2)], g.random_range(0..4) as f64);
        let (u, v) = (pick(&mut g), pick(&mut g));
        let a = p.hat((&u.0, u.1), (&v.0, v.1));
        let c = p.hat((&v.0, v.1), (&u.0, u.1));
        assert!((a - c).abs() < 1e-15);
    }
}

#[test]
fn w_n_by_direct_pair_average() {
    let mut g = rng(31);
    for _ in 0..10 {
        let d = random_distribution(&mut g, 6);
        let r = random_threshold_rule(&mut g);
        let b = d.bayes_rule();
        let s = d.sample(20, g.random()).unwrap();
        let o = ExpectationOracle::Exact(&d);
        let table = decompose(&s, &r, &b, o).unwrap();
        let p = Projector::new(&r, &b, o).unwrap();
        let mut sum = 0.0;
        for i in 0..s.len() {
            for j in 0..s.len() {
                if i != j {
                    sum += p.hat((s.x(i), s.y(i)), (s.x(j), s.y(j)));
                }
            }
        }
        assert!((sum / 380.0 - table.w_n).abs() < 1e-13);
    }
}

#[test]
fn two_atom_loss_by_enumeration() {
    let d = two_atoms();
    let o = ExpectationOracle::Exact(&d);
    let r = down();
    let risk = brute_true_risk(&d, &r);
    for a in d.atoms() {
        let e: f64 = d
            .atoms()
            .iter()
            .map(|b| if (a.y - b.y) * f64::from(r.rank(&a.x, &b.x)) < 0.0 { 0.5 } else { 0.0 })
            .sum();
        assert_eq!(pointwise_loss_l(&r, (&a.x, a.y), o).unwrap(), 2.0 * e - risk);
    }
}

#[test]
fn nu_n_is_centered() {
    let d = reference::six_atom_model();
    let o = ExpectationOracle::Exact(&d);
    let r = RankingRule::scorer("f", ScoreFn::Floor { coord: 0, theta: 0.6 });
    let v: Vec<f64> = (0..500).map(|k| empirical_process_nu(&d.sample(30, k).unwrap(), &r, o).unwrap()).collect();
    let m = v.iter().sum::<f64>() / 500.0;
    let se = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 499.0).sqrt() / 500f64.sqrt();
    assert!(m.abs() < 4.0 * se, "{m} ± {se}");
}

#[test]
fn nu_n_from_two_losses() {
    let d = reference::six_atom_model();
    let o = ExpectationOracle::Exact(&d);
    let r = RankingRule::scorer("s", ScoreFn::Step { coord: 0, theta: 0.4 });
    let s = d.sample(2, 3).unwrap();
    let l0 = pointwise_loss_l(&r, (s.x(0), s.y(0)), o).unwrap();
    let l1 = pointwise_loss_l(&r, (s.x(1), s.y(1)), o).unwrap();
    let nu = empirical_process_nu(&s, &r, o).unwrap();
    assert!((nu - ((l0 + l1) / 2.0 - d.true_risk(&r))).abs() < 1e-15);
}

#[test]
fn rademacher_mean_is_small() {
    let n = 100_000;
    let e = draw_rademacher(n, 77);
    let m = e.iter().map(|&v| f64::from(v)).sum::<f64>() / n as f64;
    assert!(m.abs() < 4.0 / (n as f64).sqrt());
}

fn pair_table() -> DenseHat {
    DenseHat::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap()
}

#[test]
fn chaos_hand_values() {
    let mut v = vec![0.0; 9];
    v[1] = 1.0;
    v[3] = 1.0;
    let t = DenseHat::new(3, v).unwrap();
    // Σ_{i≠j} ε_i ε_j ĥ_ij = ĥ_12 + ĥ_21
    assert_eq!(z_chaos(&[t], &[1, 1, 1], false).unwrap(), 2.0);
    assert_eq!(m_stat(&[pair_table()], &[1, 1], false).unwrap(), 1.0);
}

#[test]
fn u_closed_form_matches_circle_search() {
    let u = u_chaos(&[pair_table()], &[1, 1], false).unwrap();
    let best = (0..360)
        .map(|deg| {
            let t = (deg as f64).to_radians();
            // Σ_{i≠j} ε_i α_j ĥ_ij with α = (cos t, sin t)
            t.sin() + t.cos()
        })
        .fold(f64::MIN, f64::max);
    assert!((u - best).abs() < 1e-3);
    assert!((u - 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn doubling_replicates_is_consistent() {
    let d = reference::six_atom_model();
    let class = reference::six_atom_class().enumerate().unwrap();
    let s = d.sample(80, 2).unwrap();
    let kernels = urank::complexity::class_kernels(&s, &class, &d.bayes_rule(), ExpectationOracle::Exact(&d)).unwrap();
    let a = estimate_complexities(&kernels, 200, 1000, false).unwrap();
    let b = estimate_complexities(&kernels, 400, 1000, false).unwrap();
    for (x, y) in [(a.z, b.z), (a.u, b.u), (a.m, b.m)] {
        assert!((x.mean - y.mean).abs() < 3.0 * x.stderr.hypot(y.stderr), "{x:?} {y:?}");
    }
}

#[test]
fn expected_chaos_scales_like_one_over_n() {
    let d = reference::six_atom_model();
    let class = reference::six_atom_class().enumerate().unwrap();
    let ns = [50, 100, 200, 400];
    let vals: Vec<f64> = ns
        .iter()
        .map(|&n| {
            // average over data seeds too: the unconditional expectation
            let per_sample: Vec<f64> = (0..20)
                .map(|k| {
                    let s = d.sample(n, 1000 * n as u64 + k).unwrap();
                    let kernels =
                        urank::complexity::class_kernels(&s, &class, &d.bayes_rule(), ExpectationOracle::Exact(&d)).unwrap();
                    estimate_complexities(&kernels, 20, k, false).unwrap().z.mean
                })
                .collect();
            per_sample.iter().sum::<f64>() / per_sample.len() as f64 / (n * n) as f64
        })
        .collect();
    let fit = fit_log_log(&ns, &vals).unwrap();
    assert!((fit.slope + 1.0).abs() <= 0.3, "slope {}", fit.slope);
}

#[test]
fn moment_bound_coverage_at_n_100() {
    let d = reference::six_atom_model();
    let class = reference::six_atom_class().enumerate().unwrap();
    let bayes = d.bayes_rule();
    let delta = 0.1;
    let ratio = |seed: u64| {
        let s = d.sample(100, seed).unwrap();
        let opts = BoundOptions { delta, reps: 30, seed: seed ^ 0xABCD, include_diagonal: false };
        let (b, _) = bound_report(&s, &class, &bayes, ExpectationOracle::Exact(&d), &opts).unwrap();
        b.observed_sup_wn / b.rhs_shape
    };
    let mut calib: Vec<f64> = (0..200).map(ratio).collect();
    calib.sort_by(f64::total_cmp);
    let c = calib[(0.9f64 * 200.0).ceil() as usize - 1];
    let hits = (200..400).filter(|&s| ratio(s) <= c).count() as f64;
    assert!(hits >= 0.9 * 200.0 - 3.0 * (200.0f64 * 0.1 * 0.9).sqrt(), "{hits}");
}

#[test]
fn erm_matches_sorted_reimplementation() {
    let mut g = rng(50);
    let rules: Vec<RankingRule> = (0..50)
        .map(|k| {
            let mut r = random_threshold_rule(&mut g);
            r.id = format!("r{:02}", 49 - k);
            r
        })
        .collect();
    let class = RuleClass::new(rules.clone(), None).unwrap();
    for _ in 0..20 {
        let s = tied_sample(&mut g, 30);
        let mut scored: Vec<(u64, String)> = rules.iter().map(|r| (brute_errors(&s, r), r.id.clone())).collect();
        scored.sort();
        let res = erm_exhaustive(&s, &class).unwrap();
        assert_eq!(res.minimizer.id, scored[0].1);
        assert_eq!(res.min_error_count, scored[0].0);
    }
}

#[test]
fn scan_matches_exhaustive_on_random_samples() {
    let mut g = rng(8);
    for _ in 0..100 {
        let n = g.random_range(2..=40);
        let s = tied_sample(&mut g, n);
        let family = if g.random_bool(0.5) { ThresholdFamily::Floor } else { ThresholdFamily::Step };
        let thetas = (0..g.random_range(1..12)).map(|_| g.random_range(-0.2..1.2)).collect();
        let grid = ThresholdGrid::new(family, thetas);
        assert_eq!(erm_threshold_scan(&s, &grid).unwrap(), erm_exhaustive(&s, &grid.class().unwrap()).unwrap());
    }
}

#[test]
fn five_cell_scan_on_worked_sample() {
    let s = LabeledSample::from_scalar(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
    let grid = ThresholdGrid::new(ThresholdFamily::Floor, vec![0.5, 1.5, 2.5, 3.5, 4.5]);
    let res = erm_threshold_scan(&s, &grid).unwrap();
    let best = grid.class().unwrap().rules().iter().map(|r| brute_errors(&s, r)).min().unwrap();
    assert_eq!(res.min_error_count, best);
    assert_eq!(res.min_risk, 1.0 / 6.0);
}
