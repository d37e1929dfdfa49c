//! Bayes rule of `η(x) = x` with `X` uniform: `L* = 1/12`, by quadrature and
//! by Monte Carlo, and the excess risk of a floor threshold (`θ³/6`).
//!
//! ```bash
//! cargo run --release --example bayes_rule
//! ```

use urank::model::{GenerativeModel, QuadratureOracle, RankingRule, ScoreFn, XDist};

fn main() -> urank::Result<()> {
    let model = GenerativeModel::binary_eta(ScoreFn::identity(), XDist::unit_interval());
    let bayes = model.bayes_rule();
    let quad = QuadratureOracle::new(model.clone(), 64, 8)?;
    println!("L* by quadrature  {:.15}  (1/12 = {:.15})", quad.risk(&bayes)?, 1.0 / 12.0);

    let mc = model.mc_risk(&bayes, 1_000_000, 3)?;
    println!("L* by Monte Carlo {:.5} ± {:.5}", mc.estimate, mc.stderr);

    for theta in [0.1, 0.3, 0.5] {
        let r = RankingRule::scorer(format!("floor{theta}"), ScoreFn::Floor { coord: 0, theta });
        println!("Λ(floor θ={theta}) = {:.10}, θ³/6 = {:.10}", quad.excess(&r, &bayes)?, theta.powi(3) / 6.0);
    }
    Ok(())
}
