use std::sync::OnceLock;

use crate::error::{Result, TomoError};
use crate::linalg::{hermitian_eig, ComplexMatrix, HermitianEig, C64};

/// Tolerance on Hermiticity and unit trace for a density matrix.
pub const DENSITY_TOL: f64 = 1e-9;
/// Smallest eigenvalue still counted as physical.
pub const PHYSICAL_TOL: f64 = 1e-9;

/// Hermitian, unit-trace matrix. Positivity is reported, not required, so
/// that linear estimates can be held in the same type.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    eig: OnceLock<HermitianEig>,
}

impl DensityMatrix {
    /// Validates Hermiticity and trace, then stores the Hermitian part.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let dev = matrix.hermiticity_deviation();
        if dev > DENSITY_TOL {
            return Err(TomoError::NotHermitian { deviation: dev });
        }
        let tr = matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > DENSITY_TOL {
            return Err(TomoError::NotUnitTrace { trace: tr.re });
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
            eig: OnceLock::new(),
        })
    }

    /// Divides a Hermitian matrix by its trace.
    pub fn normalized(matrix: ComplexMatrix) -> Result<Self> {
        let tr = matrix.trace().re;
        if !(tr.abs() > 1e-300) || !tr.is_finite() {
            return Err(TomoError::NotUnitTrace { trace: tr });
        }
        Self::new(matrix.scale_real(1.0 / tr))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::new(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
            .expect("identity over dim is a density matrix")
    }

    /// `|v><v|` for a nonzero vector `v`.
    pub fn pure(v: &[C64]) -> Result<Self> {
        Self::normalized(ComplexMatrix::projector(v))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i, j)]
    }

    pub fn eig(&self) -> &HermitianEig {
        self.eig.get_or_init(|| {
            hermitian_eig(&self.matrix).expect("validated Hermitian on construction")
        })
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig().values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("non-empty")
    }

    pub fn is_physical(&self) -> bool {
        self.min_eigenvalue() >= -PHYSICAL_TOL
    }

    /// `Tr rho^2`
    pub fn purity(&self) -> f64 {
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

impl PartialEq for DensityMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

/// Spectrum summary of an estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalityReport {
    pub eigenvalues: Vec<f64>,
    pub trace_rho_squared: f64,
    pub physical: bool,
}

pub fn physicality_report(rho: &DensityMatrix) -> PhysicalityReport {
    PhysicalityReport {
        eigenvalues: rho.eigenvalues().to_vec(),
        trace_rho_squared: rho.purity(),
        physical: rho.is_physical(),
    }
}
