//! Study-level checks: degenerate inputs, stability and the shipped configs.

mod common;

use std::path::PathBuf;

use common::*;
use urank::experiments::{
    coverage_study, excess_risk_rate_study, reference, variance_condition_study, variance_study_from_config,
    wn_decay_study, Evaluation, ExperimentConfig, OracleSpec,
};
use urank::hoeffding::ExpectationOracle;
use urank::model::{ClassSpec, GenerativeModel, RuleClass, ScoreFn, XDist};
use urank::Error;

fn bayes_only(config: &mut ExperimentConfig) {
    let OracleSpec::Discrete { distribution } = &config.oracle else {
        unreachable!()
    };
    config.class = ClassSpec::Explicit {
        rules: vec![distribution.bayes_rule()],
        vc_dim: Some(1),
    };
}

#[test]
fn wn_study_on_bayes_class_is_degenerate() {
    let mut c = reference::wn_decay(4, 1);
    bayes_only(&mut c);
    assert!(matches!(wn_decay_study(&c), Err(Error::DegenerateStudy(_))));
}

#[test]
fn wn_study_rejects_continuous_oracle() {
    let mut c = reference::wn_decay(4, 1);
    c.oracle = reference::rate_binary(2, 0).oracle;
    assert!(matches!(wn_decay_study(&c), Err(Error::InexactOracle)));
}

#[test]
fn wn_slope_is_stable_when_reps_double() {
    let a = wn_decay_study(&reference::wn_decay(200, 1)).unwrap();
    let b = wn_decay_study(&reference::wn_decay(400, 1)).unwrap();
    assert!((a.wn_fit.slope - b.wn_fit.slope).abs() < 0.1, "{} {}", a.wn_fit.slope, b.wn_fit.slope);
}

#[test]
fn coverage_on_bayes_class_is_one() {
    let mut c = reference::coverage(60, 20, 2);
    bayes_only(&mut c);
    let out = coverage_study(&c).unwrap();
    assert_eq!(out.results[0].coverage, 1.0);
}

#[test]
fn coverage_is_monotone_in_c() {
    let out = coverage_study(&reference::coverage(60, 40, 2)).unwrap();
    let r = &out.results[0];
    let mut cs: Vec<f64> = r.evaluation_ratios().collect();
    cs.extend([0.0, r.fitted_c, 2.0 * r.fitted_c]);
    cs.sort_by(f64::total_cmp);
    let cov: Vec<f64> = cs.iter().map(|&c| r.coverage_at(c)).collect();
    assert!(cov.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn bayes_rule_is_excluded_from_variance_fit() {
    let c = reference::variance();
    let OracleSpec::Discrete { distribution } = &c.oracle else {
        unreachable!()
    };
    let mut rules = c.class.enumerate().unwrap().rules().to_vec();
    rules.push(distribution.bayes_rule());
    let class = RuleClass::new(rules, None).unwrap();
    let res = variance_condition_study(&class, &distribution.bayes_rule(), ExpectationOracle::Exact(distribution), &[1.0])
        .unwrap();
    let b = res.rows.iter().find(|r| r.id == "bayes").unwrap();
    assert!(b.excluded && b.lambda.abs() < 1e-12 && b.var_h < 1e-12);
}

#[test]
fn variance_condition_holds_with_alpha_one() {
    let res = variance_study_from_config(&reference::variance()).unwrap();
    let best = res.best.unwrap();
    assert_eq!(best.alpha, 1.0);
    let c = best.c.unwrap();
    for r in res.rows.iter().filter(|r| !r.excluded) {
        assert!(r.var_h <= c * r.lambda + 1e-15, "{r:?}");
    }
}

#[test]
fn projection_variance_never_exceeds_one() {
    let mut g = rng(2024);
    let mut max = 0.0f64;
    for _ in 0..300 {
        let d = random_distribution(&mut g, 8);
        let rules = (0..5)
            .map(|k| {
                let mut r = random_threshold_rule(&mut g);
                r.id = format!("r{k}");
                r
            })
            .collect();
        let class = RuleClass::new(rules, None).unwrap();
        match variance_condition_study(&class, &d.bayes_rule(), ExpectationOracle::Exact(&d), &[0.0]) {
            Ok(res) => max = res.rows.iter().map(|r| r.var_h).fold(max, f64::max),
            Err(Error::DegenerateStudy(_)) => {}
            Err(e) => panic!("{e}"),
        }
    }
    assert!(max > 0.0 && max <= 1.0, "{max}");
}

#[test]
fn noiseless_model_has_zero_excess() {
    let model = GenerativeModel::gaussian(ScoreFn::identity(), ScoreFn::constant(0.0), XDist::unit_interval());
    let mut c = reference::rate_gaussian(5, 3);
    c.oracle = OracleSpec::Model {
        model,
        evaluation: Evaluation::default(),
    };
    c.n_grid = vec![20, 40, 80];
    let res = excess_risk_rate_study(&c).unwrap();
    assert!(res.cells.iter().all(|cell| cell.excess == 0.0));
    assert!(res.fit.is_none());
}

#[test]
fn rate_study_flags_class_without_bayes_rule() {
    let mut c = reference::rate_binary(2, 0);
    c.class = reference::lift_class(0.5, &[0.1, 0.2]);
    assert!(matches!(excess_risk_rate_study(&c), Err(Error::InvalidArgument(_))));
}

fn shipped(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    urank::io::read_document(&path).unwrap()
}

#[test]
fn shipped_configs_match_reference() {
    assert_eq!(shipped("wn_decay.json"), reference::wn_decay(200, 1));
    assert_eq!(shipped("coverage.json"), reference::coverage(100, 500, 3));
    assert_eq!(shipped("variance.json"), reference::variance());
    assert_eq!(shipped("rate_binary.json"), reference::rate_binary(200, 1));
    assert_eq!(shipped("rate_gaussian.json"), reference::rate_gaussian(200, 1));
}
