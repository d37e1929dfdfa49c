//! Empirical minimization of the pairwise ranking risk
//! `L(r) = P{(Y - Y') r(X, X') < 0}` estimated by the U-statistic
//! `L_n(r) = (1/n(n-1)) Σ_{i≠j} 1[(Y_i - Y_j) r(X_i, X_j) < 0]`.
//!
//! - [`model`]: samples, ranking rules and classes, generative models and
//!   discrete distributions with exact oracles.
//! - [`risk`]: `L_n` (pair loop and inversion counting) and the excess-risk
//!   U-statistic `Λ_n`.
//! - [`hoeffding`]: `Λ_n - Λ = 2 T_n + W_n` with the projection `h_r` and
//!   the degenerate kernel `ĥ_r`.
//! - [`complexity`]: Rademacher quantities `Z_ε`, `U_ε`, `M` and the shape of
//!   the moment bound on `sup_r |W_n(r)|`.
//! - [`erm`]: exact empirical minimizers.
//! - [`experiments`]: seeded rate and coverage studies.
//! - [`cli`]: the `urank` binary.

pub mod cli;
pub mod complexity;
pub mod erm;
pub mod error;
pub mod experiments;
pub mod hoeffding;
pub mod io;
pub mod model;
pub mod risk;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
