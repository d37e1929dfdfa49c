//! `Var h_r <= c Λ(r)^α` over a threshold class on a discretized `η(x) = x`.
//!
//! ```bash
//! cargo run --example variance_condition
//! ```

use urank::experiments::{reference, variance_study_from_config};

fn main() -> urank::Result<()> {
    let v = variance_study_from_config(&reference::variance())?;
    for row in &v.rows {
        println!("{:12} Λ = {:.5}  Var h = {:.3e}{}", row.id, row.lambda, row.var_h, if row.excluded { "  (excluded)" } else { "" });
    }
    for a in &v.fits {
        println!("α = {:.2}: feasible = {}, c = {:?}", a.alpha, a.feasible, a.c);
    }
    println!("largest feasible α: {:?}", v.best.map(|b| b.alpha));
    Ok(())
}
