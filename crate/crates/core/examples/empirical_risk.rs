//! `L_n` three ways: the pair loop, inversion counting (tie-free samples
//! only) and the tie-aware ranked count.
//!
//! ```bash
//! cargo run --release --example empirical_risk
//! ```

use std::time::Instant;

use urank::model::{GenerativeModel, LabeledSample, RankingRule, ScoreFn, XDist};
use urank::risk::{empirical_risk_fast, empirical_risk_naive, empirical_risk_ranked, FastRisk};

fn main() -> urank::Result<()> {
    let s = LabeledSample::from_scalar(&[0.1, 0.2, 0.3, 0.4], &[1.0, 3.0, 2.0, 4.0])?;
    let up = RankingRule::scorer("up", ScoreFn::identity());
    let naive = empirical_risk_naive(&s, &up)?;
    println!("naive: {} of {} ordered pairs misranked, L_n = {}", naive.error_pair_count, naive.ordered_pair_count, naive.l_n);
    if let FastRisk::Exact(fast) = empirical_risk_fast(&s, &ScoreFn::identity())? {
        println!("fast:  L_n = {}", fast.l_n);
    }

    // continuous labels, so no ties
    let model = GenerativeModel::gaussian(ScoreFn::identity(), ScoreFn::constant(0.5), XDist::unit_interval());
    let big = model.sample(5_000, 1)?;
    let t = Instant::now();
    let a = empirical_risk_naive(&big, &up)?;
    let t_naive = t.elapsed();
    let t = Instant::now();
    let b = empirical_risk_ranked(&big, &ScoreFn::identity())?;
    let t_ranked = t.elapsed();
    assert_eq!(a, b);
    println!("n = 5000: L_n = {:.6}, pair loop {t_naive:?}, ranked {t_ranked:?}", a.l_n);
    Ok(())
}
