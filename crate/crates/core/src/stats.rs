//! Small summary-statistics helpers shared by the estimators.

/// Mean and standard error (sample standard deviation over `sqrt(len)`).
/// The standard error is zero for fewer than two values.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    (mean, sd / (n as f64).sqrt())
}

/// Empirical `q`-quantile as an order statistic: the smallest value `v`
/// such that at least `ceil(q * len)` values are `<= v`.
pub fn upper_quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[k - 1]
}

/// Binary indexed tree of counts over label ranks.
pub(crate) struct Fenwick {
    tree: Vec<i64>,
}

impl Fenwick {
    pub(crate) fn new(n: usize) -> Self {
        Fenwick { tree: vec![0; n + 1] }
    }

    pub(crate) fn add(&mut self, idx: usize, delta: i64) {
        let mut i = idx + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over ranks `< idx`.
    pub(crate) fn prefix(&self, idx: usize) -> i64 {
        let mut i = idx;
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i &= i - 1;
        }
        s
    }

    pub(crate) fn total(&self) -> i64 {
        self.prefix(self.tree.len() - 1)
    }

    /// `(#below, #above)` rank `r`.
    pub(crate) fn split(&self, r: usize) -> (i64, i64) {
        (self.prefix(r), self.total() - self.prefix(r + 1))
    }
}

/// Dense ranks of `values` (equal values share a rank) and the number of
/// distinct values.
pub(crate) fn label_ranks(values: &[f64]) -> (Vec<usize>, usize) {
    let mut levels = values.to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let ranks = values.iter().map(|y| levels.partition_point(|l| l < y)).collect();
    (ranks, levels.len())
}
