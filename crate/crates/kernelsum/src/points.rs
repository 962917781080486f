//! Dense row-major point sets and the small dense-vector kernels the hot
//! loops are built from.

use crate::error::{Error, Result};

/// N points in R^d, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    data: Vec<f64>,
    n: usize,
    dim: usize,
}

impl PointSet {
    pub fn new(data: Vec<f64>, n: usize, dim: usize) -> Result<Self> {
        if data.len() != n * dim {
            return Err(Error::Contract(format!(
                "point buffer has {} entries, expected {} x {}",
                data.len(),
                n,
                dim
            )));
        }
        Ok(Self { data, n, dim })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Largest Euclidean norm over the rows.
    pub fn max_norm(&self) -> f64 {
        self.rows().map(|r| dot(r, r).sqrt()).fold(0.0, f64::max)
    }
}

/// Unrolled dot product; the fixed four-lane association keeps results
/// deterministic while letting the compiler vectorize.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut lanes = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        lanes[0] += a[i] * b[i];
        lanes[1] += a[i + 1] * b[i + 1];
        lanes[2] += a[i + 2] * b[i + 2];
        lanes[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]) + tail
}

/// Squared Euclidean distance with the same lane structure as [`dot`].
#[inline]
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut lanes = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        let d0 = a[i] - b[i];
        let d1 = a[i + 1] - b[i + 1];
        let d2 = a[i + 2] - b[i + 2];
        let d3 = a[i + 3] - b[i + 3];
        lanes[0] += d0 * d0;
        lanes[1] += d1 * d1;
        lanes[2] += d2 * d2;
        lanes[3] += d3 * d3;
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        let d = a[i] - b[i];
        tail += d * d;
    }
    (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]) + tail
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_validation() {
        assert!(PointSet::new(vec![0.0; 6], 2, 3).is_ok());
        assert!(PointSet::new(vec![0.0; 5], 2, 3).is_err());
    }

    #[test]
    fn dot_and_dist() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [5.0, 4.0, 3.0, 2.0, 1.0];
        assert_eq!(dot(&a, &b), 35.0);
        assert_eq!(dist_sq(&a, &b), 16.0 + 4.0 + 0.0 + 4.0 + 16.0);
    }

    #[test]
    fn max_norm() {
        let p = PointSet::new(vec![3.0, 4.0, 0.0, 1.0], 2, 2).unwrap();
        assert_eq!(p.max_norm(), 5.0);
    }
}
