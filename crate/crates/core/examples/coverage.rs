//! Fit the constant of the moment bound on one batch of samples and check
//! its coverage on a fresh batch.
//!
//! ```bash
//! cargo run --release --example coverage
//! ```

use urank::experiments::{coverage_study, reference};

fn main() -> urank::Result<()> {
    let out = coverage_study(&reference::coverage(100, 500, 3))?;
    for r in &out.results {
        println!(
            "n = {}: C = {:.4}, coverage {:.3} (95% CI {:.3}..{:.3}), target {:.2}",
            r.n,
            r.fitted_c,
            r.coverage,
            r.wilson_low,
            r.wilson_high,
            1.0 - r.delta
        );
        for c in [0.5 * r.fitted_c, r.fitted_c, 2.0 * r.fitted_c] {
            println!("  coverage at C = {c:.4}: {:.3}", r.coverage_at(c));
        }
    }
    Ok(())
}
