use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LabeledSample;

/// A real-valued scoring function on feature vectors.
///
/// Serialized with a `kind` tag so rule and model configs can name scorers
/// in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScoreFn {
    /// `intercept + weights · x`
    Affine { intercept: f64, weights: Vec<f64> },
    /// `1 / (1 + exp(-(intercept + weights · x)))`
    Logistic { intercept: f64, weights: Vec<f64> },
    /// `max(x[coord], theta)`: the identity above `theta`, constant below it.
    Floor {
        #[serde(default)]
        coord: usize,
        theta: f64,
    },
    /// `1[x[coord] > theta]`
    Step {
        #[serde(default)]
        coord: usize,
        theta: f64,
    },
    /// `x[coord] + shift · 1[low < x[coord] <= high]`: the identity with one
    /// window moved up by `shift`.
    Lift {
        #[serde(default)]
        coord: usize,
        low: f64,
        high: f64,
        shift: f64,
    },
    /// `inner` clamped into `[low, high]`.
    Clamp {
        inner: Box<ScoreFn>,
        low: f64,
        high: f64,
    },
}

fn dot(intercept: f64, weights: &[f64], x: &[f64]) -> f64 {
    intercept + weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
}

impl ScoreFn {
    pub fn identity() -> Self {
        ScoreFn::linear(1.0)
    }

    /// Scalar `slope * x`.
    pub fn linear(slope: f64) -> Self {
        ScoreFn::Affine {
            intercept: 0.0,
            weights: vec![slope],
        }
    }

    pub fn constant(value: f64) -> Self {
        ScoreFn::Affine {
            intercept: value,
            weights: Vec::new(),
        }
    }

    pub fn clamped(self, low: f64, high: f64) -> Self {
        ScoreFn::Clamp {
            inner: Box::new(self),
            low,
            high,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ScoreFn::Affine { intercept, weights } => dot(*intercept, weights, x),
            ScoreFn::Logistic { intercept, weights } => {
                1.0 / (1.0 + (-dot(*intercept, weights, x)).exp())
            }
            ScoreFn::Floor { coord, theta } => x[*coord].max(*theta),
            ScoreFn::Step { coord, theta } => {
                if x[*coord] > *theta {
                    1.0
                } else {
                    0.0
                }
            }
            ScoreFn::Lift { coord, low, high, shift } => {
                let v = x[*coord];
                if *low < v && v <= *high {
                    v + shift
                } else {
                    v
                }
            }
            ScoreFn::Clamp { inner, low, high } => inner.eval(x).clamp(*low, *high),
        }
    }

    pub fn validate(&self, dim: Option<usize>) -> Result<()> {
        let check_coord = |coord: usize| match dim {
            Some(d) if coord >= d => Err(Error::InvalidRule(format!(
                "coordinate {coord} out of range for dimension {d}"
            ))),
            _ => Ok(()),
        };
        match self {
            ScoreFn::Affine { intercept, weights } | ScoreFn::Logistic { intercept, weights } => {
                if !intercept.is_finite() || weights.iter().any(|w| !w.is_finite()) {
                    return Err(Error::InvalidRule("non-finite scorer coefficient".into()));
                }
                if let Some(d) = dim {
                    if weights.len() > d {
                        return Err(Error::InvalidRule(format!(
                            "{} weights for dimension {d}",
                            weights.len()
                        )));
                    }
                }
                Ok(())
            }
            ScoreFn::Floor { coord, theta } | ScoreFn::Step { coord, theta } => {
                if !theta.is_finite() {
                    return Err(Error::InvalidRule("non-finite threshold".into()));
                }
                check_coord(*coord)
            }
            ScoreFn::Lift { coord, low, high, shift } => {
                if ![low, high, shift].iter().all(|v| v.is_finite()) || low > high {
                    return Err(Error::InvalidRule("lift needs finite low <= high and shift".into()));
                }
                check_coord(*coord)
            }
            ScoreFn::Clamp { inner, low, high } => {
                if low.is_nan() || high.is_nan() || low > high {
                    return Err(Error::InvalidRule("clamp requires low <= high".into()));
                }
                inner.validate(dim)
            }
        }
    }

    /// Scalar inputs at which the function stops being smooth.
    /// Only meaningful for one-dimensional features.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            ScoreFn::Affine { .. } | ScoreFn::Logistic { .. } => Vec::new(),
            ScoreFn::Floor { theta, .. } | ScoreFn::Step { theta, .. } => vec![*theta],
            ScoreFn::Lift { low, high, .. } => vec![*low, *high],
            ScoreFn::Clamp { inner, low, high } => {
                let mut out = inner.breakpoints();
                match inner.as_ref() {
                    ScoreFn::Affine { intercept, weights } if weights.len() == 1 && weights[0] != 0.0 => {
                        out.push((low - intercept) / weights[0]);
                        out.push((high - intercept) / weights[0]);
                    }
                    ScoreFn::Logistic { intercept, weights } if weights.len() == 1 && weights[0] != 0.0 => {
                        for v in [*low, *high] {
                            if v > 0.0 && v < 1.0 {
                                out.push(((v / (1.0 - v)).ln() - intercept) / weights[0]);
                            }
                        }
                    }
                    _ => {}
                }
                out.retain(|v| v.is_finite());
                out
            }
        }
    }
}

/// `sign(a - b)` with `sign(0) = +1`.
#[inline]
pub fn score_sign(a: f64, b: f64) -> i8 {
    if a - b >= 0.0 {
        1
    } else {
        -1
    }
}

/// Explicit `±1` values over a finite set of points. Pairs involving a point
/// outside the table get `default`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRule {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<Vec<i8>>,
    #[serde(default = "plus_one")]
    pub default: i8,
}

fn plus_one() -> i8 {
    1
}

impl TableRule {
    pub fn new(points: Vec<Vec<f64>>, values: Vec<Vec<i8>>) -> Result<Self> {
        let t = TableRule {
            points,
            values,
            default: 1,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.points.len();
        if self.values.len() != k || self.values.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidRule(format!("table values must be {k}x{k}")));
        }
        if self
            .values
            .iter()
            .flatten()
            .chain(std::iter::once(&self.default))
            .any(|v| *v != 1 && *v != -1)
        {
            return Err(Error::InvalidRule("table entries must be +1 or -1".into()));
        }
        for (i, p) in self.points.iter().enumerate() {
            if self.points[..i].contains(p) {
                return Err(Error::InvalidRule("duplicate table point".into()));
            }
        }
        Ok(())
    }

    pub fn index_of(&self, x: &[f64]) -> Option<usize> {
        self.points.iter().position(|p| p.as_slice() == x)
    }

    fn lookup(&self, a: Option<usize>, b: Option<usize>) -> i8 {
        match (a, b) {
            (Some(i), Some(j)) => self.values[i][j],
            _ => self.default,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RuleKind {
    /// `r(x, x') = sign(s(x) - s(x'))`, `sign(0) = +1`.
    Scorer { score: ScoreFn },
    Table(TableRule),
    /// `-r(x, x')` pointwise.
    Negated { inner: Box<RuleKind> },
}

impl RuleKind {
    fn rank(&self, x: &[f64], xp: &[f64]) -> i8 {
        match self {
            RuleKind::Scorer { score } => score_sign(score.eval(x), score.eval(xp)),
            RuleKind::Table(t) => t.lookup(t.index_of(x), t.index_of(xp)),
            RuleKind::Negated { inner } => -inner.rank(x, xp),
        }
    }

    fn validate(&self, dim: Option<usize>) -> Result<()> {
        match self {
            RuleKind::Scorer { score } => score.validate(dim),
            RuleKind::Table(t) => t.validate(),
            RuleKind::Negated { inner } => inner.validate(dim),
        }
    }
}

/// A ranking rule `r: X × X → {-1, +1}` with a stable identifier.
/// `+1` means the first argument is ranked higher.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingRule {
    pub id: String,
    pub kind: RuleKind,
}

impl RankingRule {
    pub fn scorer(id: impl Into<String>, score: ScoreFn) -> Self {
        RankingRule {
            id: id.into(),
            kind: RuleKind::Scorer { score },
        }
    }

    pub fn table(id: impl Into<String>, table: TableRule) -> Self {
        RankingRule {
            id: id.into(),
            kind: RuleKind::Table(table),
        }
    }

    /// The pointwise negation `-r`, with id `neg(<id>)`.
    pub fn negated(&self) -> Self {
        RankingRule {
            id: format!("neg({})", self.id),
            kind: RuleKind::Negated {
                inner: Box::new(self.kind.clone()),
            },
        }
    }

    pub fn rank(&self, x: &[f64], xp: &[f64]) -> i8 {
        self.kind.rank(x, xp)
    }

    /// The scorer if the rule is scorer-induced (not negated or tabulated).
    pub fn as_scorer(&self) -> Option<&ScoreFn> {
        match &self.kind {
            RuleKind::Scorer { score } => Some(score),
            _ => None,
        }
    }

    pub fn validate(&self, dim: Option<usize>) -> Result<()> {
        self.kind.validate(dim)
    }

    /// Precomputes per-point quantities so pair evaluation is O(1).
    pub fn prepare<'a>(&'a self, points: &[&[f64]]) -> PreparedRule<'a> {
        PreparedRule::new(&self.kind, points)
    }

    pub fn prepare_sample<'a>(&'a self, sample: &LabeledSample) -> PreparedRule<'a> {
        let points: Vec<&[f64]> = (0..sample.len()).map(|i| sample.x(i)).collect();
        self.prepare(&points)
    }

    /// Smooth-break locations of the rule as a function of either scalar
    /// argument, besides the diagonal.
    pub fn breakpoints(&self) -> Option<Vec<f64>> {
        fn go(kind: &RuleKind) -> Option<Vec<f64>> {
            match kind {
                RuleKind::Scorer { score } => Some(score.breakpoints()),
                RuleKind::Table(_) => None,
                RuleKind::Negated { inner } => go(inner),
            }
        }
        go(&self.kind)
    }
}

/// A rule evaluated on a fixed list of points.
pub enum PreparedRule<'a> {
    Scores(Vec<f64>),
    Table {
        table: &'a TableRule,
        index: Vec<Option<usize>>,
    },
    Negated(Box<PreparedRule<'a>>),
}

impl<'a> PreparedRule<'a> {
    fn new(kind: &'a RuleKind, points: &[&[f64]]) -> Self {
        match kind {
            RuleKind::Scorer { score } => {
                PreparedRule::Scores(points.iter().map(|x| score.eval(x)).collect())
            }
            RuleKind::Table(table) => PreparedRule::Table {
                table,
                index: points.iter().map(|x| table.index_of(x)).collect(),
            },
            RuleKind::Negated { inner } => {
                PreparedRule::Negated(Box::new(PreparedRule::new(inner, points)))
            }
        }
    }

    #[inline]
    pub fn rank(&self, i: usize, j: usize) -> i8 {
        match self {
            PreparedRule::Scores(s) => score_sign(s[i], s[j]),
            PreparedRule::Table { table, index } => table.lookup(index[i], index[j]),
            PreparedRule::Negated(inner) => -inner.rank(i, j),
        }
    }
}

/// A finite, non-empty, deterministically ordered family of ranking rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleClass {
    rules: Vec<RankingRule>,
    #[serde(default)]
    vc_dim: Option<u32>,
}

impl RuleClass {
    pub fn new(rules: Vec<RankingRule>, vc_dim: Option<u32>) -> Result<Self> {
        if rules.is_empty() {
            return Err(Error::EmptyClass);
        }
        for (i, r) in rules.iter().enumerate() {
            if rules[..i].iter().any(|o| o.id == r.id) {
                return Err(Error::InvalidRule(format!("duplicate rule id {:?}", r.id)));
            }
            r.validate(None)?;
        }
        if vc_dim == Some(0) {
            return Err(Error::InvalidArgument("VC dimension must be positive".into()));
        }
        Ok(RuleClass { rules, vc_dim })
    }

    pub fn singleton(rule: RankingRule) -> Self {
        RuleClass {
            rules: vec![rule],
            vc_dim: None,
        }
    }

    pub fn rules(&self) -> &[RankingRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn vc_dim(&self) -> Option<u32> {
        self.vc_dim
    }

    /// Appends a rule; the id must be new.
    pub fn with_rule(mut self, rule: RankingRule) -> Result<Self> {
        if self.rules.iter().any(|r| r.id == rule.id) {
            return Err(Error::InvalidRule(format!("duplicate rule id {:?}", rule.id)));
        }
        self.rules.push(rule);
        Ok(self)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.rules.iter().position(|r| r.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdFamily {
    /// `s_θ(x) = max(x, θ)`: ranks by `x` above the threshold, ties below.
    Floor,
    /// `s_θ(x) = 1[x > θ]`
    Step,
}

impl ThresholdFamily {
    pub fn name(self) -> &'static str {
        match self {
            ThresholdFamily::Floor => "floor",
            ThresholdFamily::Step => "step",
        }
    }

    pub fn scorer(self, coord: usize, theta: f64) -> ScoreFn {
        match self {
            ThresholdFamily::Floor => ScoreFn::Floor { coord, theta },
            ThresholdFamily::Step => ScoreFn::Step { coord, theta },
        }
    }
}

/// A one-parameter threshold family evaluated on a finite grid of θ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdGrid {
    pub family: ThresholdFamily,
    #[serde(default)]
    pub coord: usize,
    pub thetas: Vec<f64>,
}

impl ThresholdGrid {
    pub fn new(family: ThresholdFamily, thetas: Vec<f64>) -> Self {
        ThresholdGrid {
            family,
            coord: 0,
            thetas,
        }
    }

    /// Id of the `k`-th rule, zero-padded so lexicographic order is grid order.
    pub fn rule_id(&self, k: usize) -> String {
        format!("{}-{:04}", self.family.name(), k)
    }

    pub fn class(&self) -> Result<RuleClass> {
        if self.thetas.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidRule("non-finite threshold".into()));
        }
        let rules = self
            .thetas
            .iter()
            .enumerate()
            .map(|(k, &t)| RankingRule::scorer(self.rule_id(k), self.family.scorer(self.coord, t)))
            .collect();
        RuleClass::new(rules, Some(1))
    }
}

/// JSON description of a rule class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClassSpec {
    Explicit {
        rules: Vec<RankingRule>,
        #[serde(default)]
        vc_dim: Option<u32>,
    },
    Thresholds(ThresholdGrid),
}

impl ClassSpec {
    pub fn enumerate(&self) -> Result<RuleClass> {
        match self {
            ClassSpec::Explicit { rules, vc_dim } => RuleClass::new(rules.clone(), *vc_dim),
            ClassSpec::Thresholds(grid) => grid.class(),
        }
    }

    pub fn threshold_grid(&self) -> Option<&ThresholdGrid> {
        match self {
            ClassSpec::Thresholds(g) => Some(g),
            ClassSpec::Explicit { .. } => None,
        }
    }
}
