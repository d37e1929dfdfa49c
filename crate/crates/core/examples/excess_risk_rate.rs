//! Mean excess risk `L(r_n) - L*` of the empirical minimizer against `n`
//! for both reference models, with log-log slopes.
//!
//! ```bash
//! cargo run --release --example excess_risk_rate
//! ```

use urank::experiments::{excess_risk_rate_study, reference};

fn main() -> urank::Result<()> {
    for (name, config) in [("binary η(x) = x", reference::rate_binary(200, 1)), ("Y = X + N/2", reference::rate_gaussian(200, 1))] {
        let r = excess_risk_rate_study(&config)?;
        println!("{name}");
        for p in &r.summary {
            println!("  n = {:5}  excess = {:.3e} ± {:.1e}", p.n, p.mean, p.stderr);
        }
        let fit = r.fit.expect("positive means");
        println!("  slope {:.3} (r² {:.3}); bound exponent {:.3}", fit.slope, fit.r_squared, r.bound_exponent);
    }
    Ok(())
}
