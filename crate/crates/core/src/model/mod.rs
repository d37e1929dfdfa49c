//! Samples, ranking rules, rule classes and the data-generating models
//! with oracle access to their Bayes rule and true risks.

mod discrete;
mod generative;
mod quadrature;
mod rule;
mod sample;

pub use discrete::{Atom, DiscreteDistribution};
pub use generative::{GenerativeModel, McEstimate, XDist};
pub use quadrature::{gauss_legendre, QuadratureOracle};
pub use rule::{
    score_sign, ClassSpec, PreparedRule, RankingRule, RuleClass, RuleKind, ScoreFn, TableRule,
    ThresholdFamily, ThresholdGrid,
};
pub use sample::LabeledSample;
