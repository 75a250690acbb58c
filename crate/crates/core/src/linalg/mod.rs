//! Dense complex linear algebra for 2x2 through 8x8 matrices.

mod eig;
mod matrix;

pub use eig::{
    biorthogonal_eig, eigenvalue_derivative, eigenvalues, eigenvector_perturbation, hermitian_eig,
    hermitian_eigenvalue_derivative, ray_overlap, BiorthogonalEig, HermitianEig,
    BIORTHOGONALITY_TOL, DEGENERACY_GAP, HERMITIAN_TOL,
};
pub use matrix::{inner, kron_vec, norm, ComplexMatrix, C64, I, ONE, ZERO};

use crate::error::{Result, TomoError};

/// Determinant and the first and second minors of a 4x4 matrix.
#[derive(Debug, Clone)]
pub struct Minors {
    pub determinant: C64,
    /// `first[i][j]`: determinant with row `i` and column `j` removed.
    pub first: [[C64; 4]; 4],
    /// `second[i][j][k][l]`: determinant with rows `i, k` and columns `j, l`
    /// removed. Zero when `i == k` or `j == l`.
    pub second: [[[[C64; 4]; 4]; 4]; 4],
}

impl Minors {
    pub fn first(&self, i: usize, j: usize) -> C64 {
        self.first[i][j]
    }

    pub fn second(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.second[i][j][k][l]
    }
}

pub fn det_and_minors(m: &ComplexMatrix) -> Result<Minors> {
    if m.dim() != 4 {
        return Err(TomoError::InvalidDimension {
            expected: 4,
            got: m.dim(),
        });
    }
    let mut first = [[ZERO; 4]; 4];
    let mut second = [[[[ZERO; 4]; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            first[i][j] = m.without(&[i], &[j]).determinant();
            for k in 0..4 {
                if k == i {
                    continue;
                }
                for l in 0..4 {
                    if l == j {
                        continue;
                    }
                    second[i][j][k][l] = m.without(&[i, k], &[j, l]).determinant();
                }
            }
        }
    }
    Ok(Minors {
        determinant: m.determinant(),
        first,
        second,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_identity_minors() {
        let m = det_and_minors(&ComplexMatrix::identity(4).scale_real(0.25)).unwrap();
        assert!((m.determinant - C64::new(1.0 / 256.0, 0.0)).norm() < 1e-15);
        for i in 0..4 {
            assert!((m.first(i, i) - C64::new(1.0 / 64.0, 0.0)).norm() < 1e-15);
        }
        assert!((m.second(0, 0, 1, 1) - C64::new(1.0 / 16.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rank_one_minors() {
        let m = det_and_minors(&ComplexMatrix::diagonal(&[ONE, ZERO, ZERO, ZERO])).unwrap();
        assert_eq!(m.determinant, ZERO);
        assert_eq!(m.first(0, 0), ZERO);
    }

    #[test]
    fn wrong_dimension() {
        assert!(matches!(
            det_and_minors(&ComplexMatrix::identity(3)),
            Err(TomoError::InvalidDimension {
                expected: 4,
                got: 3
            })
        ));
    }
}
