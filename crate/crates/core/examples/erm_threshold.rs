//! Exact empirical minimizer over a 1-D threshold grid: the incremental scan
//! and the exhaustive evaluation agree.
//!
//! ```bash
//! cargo run --release --example erm_threshold
//! ```

use urank::erm::{erm_exhaustive, erm_threshold_scan};
use urank::model::{GenerativeModel, ScoreFn, ThresholdFamily, ThresholdGrid, XDist};

fn main() -> urank::Result<()> {
    let model = GenerativeModel::binary_eta(ScoreFn::identity(), XDist::unit_interval());
    let sample = model.sample(2_000, 8)?;
    for family in [ThresholdFamily::Floor, ThresholdFamily::Step] {
        let grid = ThresholdGrid::new(family, (0..=50).map(|k| k as f64 / 50.0).collect());
        let scan = erm_threshold_scan(&sample, &grid)?;
        let full = erm_exhaustive(&sample, &grid.class()?)?;
        assert_eq!(scan, full);
        println!(
            "{:5}: minimizer {} (θ = {}), L_n = {:.6}, {} co-minimizer(s)",
            family.name(),
            scan.minimizer.id,
            scan.minimizer.as_scorer().and_then(|s| s.breakpoints().first().copied()).unwrap_or(f64::NAN),
            scan.min_risk,
            scan.ties.len()
        );
    }
    Ok(())
}
