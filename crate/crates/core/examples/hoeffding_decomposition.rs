//! `Λ_n - Λ = 2 T_n + W_n` on a sample from a six-atom distribution, with
//! exact projections.
//!
//! ```bash
//! cargo run --example hoeffding_decomposition
//! ```

use urank::experiments::reference::six_atom_model;
use urank::hoeffding::{decompose, ExpectationOracle};
use urank::model::{RankingRule, ScoreFn};

fn main() -> urank::Result<()> {
    let dist = six_atom_model();
    let bayes = dist.bayes_rule();
    let sample = dist.sample(40, 11)?;
    let oracle = ExpectationOracle::Exact(&dist);

    for theta in [0.0, 0.6, 0.9] {
        let rule = RankingRule::scorer(format!("floor-{theta}"), ScoreFn::Floor { coord: 0, theta });
        let t = decompose(&sample, &rule, &bayes, oracle)?;
        println!(
            "θ = {theta}: Λ = {:.6}  Λ_n = {:.6}  T_n = {:+.6}  W_n = {:+.6}  residual = {:.1e}",
            t.lambda,
            t.lambda_n,
            t.t_n,
            t.w_n,
            t.identity_residual()
        );
    }
    Ok(())
}
