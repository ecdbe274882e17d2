//! Embedding geometry on the unit sphere.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Maximum deviation from unit norm accepted at the API boundary.
pub const UNIT_NORM_TOL: f64 = 1e-9;

pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    libm::sqrt(dot(v, v))
}

/// Scales `v` to unit Euclidean norm.
pub fn normalize(v: &[f64]) -> Result<Vec<f64>> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteEmbedding);
    }
    let n = norm(v);
    if n == 0.0 {
        return Err(Error::DegenerateEmbedding);
    }
    Ok(v.iter().map(|x| x / n).collect())
}

/// `1 - u·v`, clamped to `[0, 2]`.
///
/// Both inputs are assumed unit norm; only the dimensions are checked.
pub fn cosine_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    Ok(unit_distance(u, v))
}

#[inline]
pub(crate) fn unit_distance(u: &[f64], v: &[f64]) -> f64 {
    (1.0 - dot(u, v)).clamp(0.0, 2.0)
}

/// `N` unit vectors of a common dimension, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    data: Vec<f64>,
    dim: usize,
}

impl EmbeddingMatrix {
    /// Wraps rows that are already unit norm (within [`UNIT_NORM_TOL`]).
    pub fn new<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::build(rows, |row, i| {
            let n = norm(row);
            if !n.is_finite() {
                return Err(Error::NonFiniteEmbedding);
            }
            if (n - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::NotUnitNorm { row: i, norm: n });
            }
            Ok(row.to_vec())
        })
    }

    /// Normalizes every row first.
    pub fn from_raw<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::build(rows, |row, _| normalize(row))
    }

    fn build<R, F>(rows: &[R], mut prepare: F) -> Result<Self>
    where
        R: AsRef<[f64]>,
        F: FnMut(&[f64], usize) -> Result<Vec<f64>>,
    {
        let first = rows.first().ok_or(Error::Empty("embedding matrix"))?;
        let dim = first.as_ref().len();
        if dim == 0 {
            return Err(Error::DegenerateEmbedding);
        }
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: row.len(),
                });
            }
            data.extend(prepare(row, i)?);
        }
        Ok(Self { data, dim })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// Cosine distance between rows `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        unit_distance(self.row(i), self.row(j))
    }

    /// Returns a matrix with rows taken in `order`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let mut data = Vec::with_capacity(order.len() * self.dim);
        for &i in order {
            data.extend_from_slice(self.row(i));
        }
        Self {
            data,
            dim: self.dim,
        }
    }
}

/// Mean cosine distance over all unordered pairs of rows.
pub fn pairwise_diversity(e: &EmbeddingMatrix) -> Result<f64> {
    let n = e.len();
    if n < 2 {
        return Err(Error::SingleResponse);
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            total += e.distance(i, j);
        }
    }
    Ok(total / (n * (n - 1) / 2) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const E1: [f64; 2] = [1.0, 0.0];
    const E2: [f64; 2] = [0.0, 1.0];

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&[3.0, 4.0]).unwrap(), vec![0.6, 0.8]);
        assert_eq!(normalize(&[1.0, 0.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(normalize(&[0.0, 0.0]), Err(Error::DegenerateEmbedding));
        assert_eq!(normalize(&[f64::NAN, 1.0]), Err(Error::NonFiniteEmbedding));
    }

    #[test]
    fn cosine_distance_examples() {
        assert_eq!(cosine_distance(&E1, &E1).unwrap(), 0.0);
        assert_eq!(cosine_distance(&E1, &E2).unwrap(), 1.0);
        assert_eq!(cosine_distance(&E1, &[-1.0, 0.0]).unwrap(), 2.0);
        assert!(matches!(
            cosine_distance(&E1, &[1.0, 0.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pairwise_diversity_examples() {
        let same = EmbeddingMatrix::new(&[E1, E1, E1]).unwrap();
        assert_eq!(pairwise_diversity(&same).unwrap(), 0.0);

        let pair = EmbeddingMatrix::new(&[E1, E2]).unwrap();
        assert_eq!(pairwise_diversity(&pair).unwrap(), 1.0);

        // pairs: (0,1)=0, (0,2)=1, (1,2)=1
        let three = EmbeddingMatrix::new(&[E1, E1, E2]).unwrap();
        assert!((pairwise_diversity(&three).unwrap() - 2.0 / 3.0).abs() < 1e-15);

        let one = EmbeddingMatrix::new(&[E1]).unwrap();
        assert_eq!(pairwise_diversity(&one), Err(Error::SingleResponse));
    }

    #[test]
    fn matrix_rejects_off_sphere_rows() {
        assert!(matches!(
            EmbeddingMatrix::new(&[[3.0, 4.0]]),
            Err(Error::NotUnitNorm { row: 0, .. })
        ));
        let m = EmbeddingMatrix::from_raw(&[[3.0, 4.0]]).unwrap();
        assert_eq!(m.row(0), &[0.6, 0.8]);
        let empty: [[f64; 2]; 0] = [];
        assert!(EmbeddingMatrix::new(&empty).is_err());
    }
}
