//! Monte-Carlo `E Z_ε`, `E U_ε`, `E M` for a threshold class and the shape
//! of the moment bound on `sup_r |W_n(r)|`.
//!
//! ```bash
//! cargo run --release --example rademacher_complexity
//! ```

use urank::complexity::{bound_report, BoundOptions};
use urank::experiments::reference::{six_atom_class, six_atom_model};
use urank::hoeffding::ExpectationOracle;

fn main() -> urank::Result<()> {
    let dist = six_atom_model();
    let class = six_atom_class().enumerate()?;
    let options = BoundOptions {
        delta: 0.1,
        reps: 200,
        seed: 5,
        include_diagonal: false,
    };
    for n in [50, 100, 200, 400] {
        let sample = dist.sample(n, n as u64)?;
        let (b, _) = bound_report(&sample, &class, &dist.bayes_rule(), ExpectationOracle::Exact(&dist), &options)?;
        println!(
            "n = {n:4}: EZ/n² = {:.2e}  EU·√log/n² = {:.2e}  EM·log/n² = {:.2e}  log/n = {:.2e}  sup|W_n| = {:.2e}",
            b.z_term, b.u_term, b.m_term, b.tail_term, b.observed_sup_wn
        );
    }
    Ok(())
}
