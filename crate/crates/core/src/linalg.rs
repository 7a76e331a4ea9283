//! Invertible linear maps and the small dense eigenproblems used by the
//! closed-form evaluators.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// An invertible `n x n` map with its inverse, transpose and determinant
/// cached at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
    det: f64,
}

impl LinearMap {
    /// Builds a map from row-major entries.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::InvalidArgument(alloc::format!(
                "linear map needs dimension >= 2, got {n}"
            )));
        }
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("non-finite matrix entry".into()));
            }
        }
        Self::from_matrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        let det = matrix.determinant();
        if !(det.abs() > 1e-12) {
            return Err(Error::SingularMap { det });
        }
        let inverse = matrix
            .clone()
            .try_inverse()
            .ok_or(Error::SingularMap { det })?;
        Ok(Self {
            matrix,
            inverse,
            det,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::scaling(n, 1.0)
    }

    /// `c * I`; panics if `c == 0`.
    pub fn scaling(n: usize, c: f64) -> Self {
        assert!(c != 0.0, "zero scaling");
        Self::from_matrix(DMatrix::identity(n, n) * c).expect("nonzero scaling is invertible")
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::from_matrix(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    /// Haar-ish random orthogonal map: QR of a seeded Gaussian matrix with
    /// the signs of `R`'s diagonal folded into `Q`.
    pub fn random_orthogonal(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..n {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        Self::from_matrix(q).expect("orthogonal matrices are invertible")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        mat_vec(&self.matrix, x, false)
    }

    pub fn apply_inverse(&self, x: &[f64]) -> Vec<f64> {
        mat_vec(&self.inverse, x, false)
    }

    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        mat_vec(&self.matrix, x, true)
    }

    pub fn apply_inverse_transpose(&self, x: &[f64]) -> Vec<f64> {
        mat_vec(&self.inverse, x, true)
    }

    pub fn inverse(&self) -> Self {
        Self {
            matrix: self.inverse.clone(),
            inverse: self.matrix.clone(),
            det: 1.0 / self.det,
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            matrix: self.matrix.transpose(),
            inverse: self.inverse.transpose(),
            det: self.det,
        }
    }

    /// `self * other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix * &other.matrix,
            inverse: &other.inverse * &self.inverse,
            det: self.det * other.det,
        }
    }
}

fn mat_vec(m: &DMatrix<f64>, x: &[f64], transpose: bool) -> Vec<f64> {
    let n = m.nrows();
    debug_assert_eq!(x.len(), n);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if transpose { m[(j, i)] } else { m[(i, j)] } * x[j])
                .sum()
        })
        .collect()
}

/// Largest eigenvalue of a symmetric matrix given row-major.
pub(crate) fn top_eigenvalue(n: usize, entries: &[f64]) -> f64 {
    if n == 1 {
        return entries[0];
    }
    let m = DMatrix::from_row_slice(n, n, entries);
    m.symmetric_eigenvalues().max()
}

/// Eigen-decomposition of a symmetric 3x3 matrix, eigenvalues sorted in
/// decreasing order with matching unit eigenvectors.
pub(crate) fn symmetric_eigen3(entries: &[f64; 9]) -> ([f64; 3], [[f64; 3]; 3]) {
    let m = nalgebra::Matrix3::from_row_slice(entries);
    let eig = m.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut values = [0.0; 3];
    let mut vectors = [[0.0; 3]; 3];
    for (k, &i) in order.iter().enumerate() {
        values[k] = eig.eigenvalues[i];
        let c = eig.eigenvectors.column(i);
        vectors[k] = [c[0], c[1], c[2]];
    }
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_relative_eq;

    #[test]
    fn inverse_and_transpose() {
        let m = LinearMap::from_rows(&[vec![2.0, 1.0], vec![0.0, 3.0]]).unwrap();
        assert_relative_eq!(m.det(), 6.0, max_relative = 1e-14);
        let x = [0.7, -1.3];
        let back = m.apply_inverse(&m.apply(&x));
        assert_relative_eq!(back[0], x[0], epsilon = 1e-14);
        assert_relative_eq!(back[1], x[1], epsilon = 1e-14);
        assert_eq!(m.apply_transpose(&[1.0, 0.0]), vec![2.0, 1.0]);
    }

    #[test]
    fn singular_rejected() {
        let err = LinearMap::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap_err();
        assert!(matches!(err, Error::SingularMap { .. }));
    }

    #[test]
    fn random_orthogonal_is_orthogonal() {
        let q = LinearMap::random_orthogonal(4, 11);
        assert_relative_eq!(q.det().abs(), 1.0, max_relative = 1e-12);
        let x = [1.0, 2.0, -0.5, 0.25];
        let y = q.apply_transpose(&q.apply(&x));
        for (a, b) in x.iter().zip(&y) {
            assert_relative_eq!(a, b, epsilon = 1e-13);
        }
        assert_eq!(q, LinearMap::random_orthogonal(4, 11));
    }

    #[test]
    fn eigen3_sorted() {
        let (vals, vecs) = symmetric_eigen3(&[2.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 5.0]);
        assert_eq!(vals, [5.0, 2.0, -1.0]);
        assert_relative_eq!(vecs[0][2].abs(), 1.0);
        assert_relative_eq!(top_eigenvalue(2, &[1.0, 0.0, 0.0, 4.0]), 4.0);
    }
}
