//! `E sup_r |W_n(r)|` decays like `1/n`, `E sup_r |T_n(r)|` like `1/√n`.
//!
//! ```bash
//! cargo run --release --example wn_decay
//! ```

use urank::experiments::{reference, wn_decay_study};

fn main() -> urank::Result<()> {
    let r = wn_decay_study(&reference::wn_decay(200, 1))?;
    for (w, t) in r.wn.iter().zip(&r.tn) {
        println!("n = {:4}  sup|W_n| = {:.3e} ± {:.1e}  sup|T_n| = {:.3e} ± {:.1e}", w.n, w.mean, w.stderr, t.mean, t.stderr);
    }
    println!("slope W_n {:.3} (r² {:.3}), T_n {:.3} (r² {:.3})", r.wn_fit.slope, r.wn_fit.r_squared, r.tn_fit.slope, r.tn_fit.r_squared);
    Ok(())
}
