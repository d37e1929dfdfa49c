use crate::error::{Error, Result};

/// `n` observations `(x, y)` with real feature vectors of a common
/// dimension and real labels. Features are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    dim: usize,
    features: Vec<f64>,
    labels: Vec<f64>,
}

impl LabeledSample {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::InvalidSample(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        let dim = features.first().map_or(1, Vec::len);
        let mut flat = Vec::with_capacity(dim * features.len());
        for (i, row) in features.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidSample(format!(
                    "row {i} has {} features, expected {dim}",
                    row.len()
                )));
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(dim, flat, labels)
    }

    /// Sample with one scalar feature per observation.
    pub fn from_scalar(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidSample(format!(
                "{} features but {} labels",
                xs.len(),
                ys.len()
            )));
        }
        Self::from_flat(1, xs.to_vec(), ys.to_vec())
    }

    pub fn from_flat(dim: usize, features: Vec<f64>, labels: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSample("feature dimension must be positive".into()));
        }
        if features.len() != dim * labels.len() {
            return Err(Error::InvalidSample(format!(
                "{} feature values do not fill {} rows of dimension {dim}",
                features.len(),
                labels.len()
            )));
        }
        if labels.len() < 2 {
            return Err(Error::TooFewObservations(labels.len()));
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSample(format!(
                "non-finite feature in row {}",
                i / dim
            )));
        }
        if let Some(i) = labels.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSample(format!("non-finite label in row {i}")));
        }
        Ok(LabeledSample {
            dim,
            features,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn y(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.features
            .chunks_exact(self.dim)
            .zip(self.labels.iter().copied())
    }

    /// Number of ordered pairs `(i, j)`, `i != j`.
    pub fn ordered_pairs(&self) -> u64 {
        let n = self.len() as u64;
        n * (n - 1)
    }

    /// Reorders observations: row `k` of the result is row `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.len()];
        if perm.len() != self.len() || perm.iter().any(|&p| p >= self.len() || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument("not a permutation of the sample rows".into()));
        }
        let mut features = Vec::with_capacity(self.features.len());
        let mut labels = Vec::with_capacity(self.len());
        for &p in perm {
            features.extend_from_slice(self.x(p));
            labels.push(self.y(p));
        }
        Ok(LabeledSample {
            dim: self.dim,
            features,
            labels,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_samples() {
        assert!(matches!(
            LabeledSample::from_scalar(&[1.0], &[1.0]),
            Err(Error::TooFewObservations(1))
        ));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(LabeledSample::from_scalar(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
        assert!(LabeledSample::from_scalar(&[1.0, 2.0], &[f64::INFINITY, 2.0]).is_err());
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = LabeledSample::new(vec![vec![1.0, 2.0], vec![3.0]], vec![0.0, 1.0]);
        assert!(err.is_err());
    }

    #[test]
    fn permutation_moves_rows() {
        let s = LabeledSample::new(vec![vec![1.0, 2.0], vec![3.0, 4.0]], vec![5.0, 6.0]).unwrap();
        let p = s.permuted(&[1, 0]).unwrap();
        assert_eq!(p.x(0), &[3.0, 4.0]);
        assert_eq!(p.y(1), 5.0);
        assert!(s.permuted(&[0, 0]).is_err());
    }
}
