//! Mixedness and entanglement measures of a two-qubit state.

use std::fmt;

use crate::density::DensityMatrix;
use crate::error::{Result, TomoError};
use crate::linalg::{biorthogonal_eig, eigenvalues, BiorthogonalEig, ComplexMatrix, C64};

/// Eigenvalues below this are treated as zero in logs and square roots.
pub const CLIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MeasureKind {
    Entropy,
    LinearEntropy,
    Concurrence,
    Tangle,
    EntanglementOfFormation,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 5] = [
        MeasureKind::Entropy,
        MeasureKind::LinearEntropy,
        MeasureKind::Concurrence,
        MeasureKind::Tangle,
        MeasureKind::EntanglementOfFormation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::Entropy => "entropy",
            MeasureKind::LinearEntropy => "linear_entropy",
            MeasureKind::Concurrence => "concurrence",
            MeasureKind::Tangle => "tangle",
            MeasureKind::EntanglementOfFormation => "eof",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureResult {
    pub value: f64,
    pub kind: MeasureKind,
}

fn check_physical(rho: &DensityMatrix) -> Result<()> {
    let min = rho.min_eigenvalue();
    if min < -CLIP_TOL {
        return Err(TomoError::NotPhysical {
            min_eigenvalue: min,
        });
    }
    Ok(())
}

/// `-sum p log2 p` over eigenvalues, after clipping small negatives to zero.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<MeasureResult> {
    check_physical(rho)?;
    let p: Vec<f64> = rho.eigenvalues().iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = p.iter().sum();
    let value = p
        .iter()
        .map(|&x| x / total)
        .filter(|&x| x > 0.0)
        .map(|x| -x * x.log2())
        .sum::<f64>()
        .max(0.0);
    Ok(MeasureResult {
        value,
        kind: MeasureKind::Entropy,
    })
}

/// `d/(d-1) (1 - Tr rho^2)`, which is `4/3 (1 - Tr rho^2)` for two qubits.
pub fn linear_entropy(rho: &DensityMatrix) -> MeasureResult {
    let d = rho.dim() as f64;
    MeasureResult {
        value: d / (d - 1.0) * (1.0 - rho.purity()),
        kind: MeasureKind::LinearEntropy,
    }
}

/// Anti-diagonal `(-1, 1, 1, -1)`: `sigma_y (x) sigma_y` in the
/// `HH, HV, VH, VV` basis.
pub fn spin_flip() -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(4);
    s[(0, 3)] = C64::new(-1.0, 0.0);
    s[(1, 2)] = C64::new(1.0, 0.0);
    s[(2, 1)] = C64::new(1.0, 0.0);
    s[(3, 0)] = C64::new(-1.0, 0.0);
    s
}

/// `rho Sigma rho^T Sigma`
pub fn spin_flip_product(rho: &ComplexMatrix) -> ComplexMatrix {
    let s = spin_flip();
    &(&(rho * &s) * &rho.transpose()) * &s
}

/// Intermediate results of [`concurrence`], kept for error propagation.
#[derive(Debug, Clone)]
pub struct ConcurrenceWork {
    pub rho: ComplexMatrix,
    pub r_matrix: ComplexMatrix,
    pub spin_flip: ComplexMatrix,
    /// Eigenvalues of `R`, descending by real part.
    pub eigenvalues: Vec<C64>,
    /// `sqrt r_1 - sqrt r_2 - sqrt r_3 - sqrt r_4` before clamping at zero.
    pub raw: f64,
}

impl ConcurrenceWork {
    /// Left and right eigenvectors of `R`; fails on a defective spectrum.
    pub fn eig(&self) -> Result<BiorthogonalEig> {
        biorthogonal_eig(&self.r_matrix)
    }
}

/// `sqrt r_1 - sum_{a>1} sqrt r_a`, with real parts below [`CLIP_TOL`] read as zero.
fn signed_root_sum(ev: &[C64]) -> f64 {
    ev.iter()
        .enumerate()
        .map(|(a, r)| {
            let s = if r.re < CLIP_TOL { 0.0 } else { r.re.sqrt() };
            if a == 0 {
                s
            } else {
                -s
            }
        })
        .sum()
}

/// Concurrence of any 4x4 matrix, without physicality checks.
pub fn concurrence_value(m: &ComplexMatrix) -> f64 {
    signed_root_sum(&eigenvalues(&spin_flip_product(m))).max(0.0)
}

pub fn concurrence(rho: &DensityMatrix) -> Result<(MeasureResult, ConcurrenceWork)> {
    if rho.dim() != 4 {
        return Err(TomoError::InvalidDimension {
            expected: 4,
            got: rho.dim(),
        });
    }
    check_physical(rho)?;
    let r_matrix = spin_flip_product(rho.matrix());
    let ev = eigenvalues(&r_matrix);
    let raw = signed_root_sum(&ev);
    Ok((
        MeasureResult {
            value: raw.max(0.0),
            kind: MeasureKind::Concurrence,
        },
        ConcurrenceWork {
            rho: rho.matrix().clone(),
            r_matrix,
            spin_flip: spin_flip(),
            eigenvalues: ev,
            raw,
        },
    ))
}

pub fn tangle(c: &MeasureResult) -> MeasureResult {
    MeasureResult {
        value: c.value * c.value,
        kind: MeasureKind::Tangle,
    }
}

/// `-x log2 x - (1-x) log2 (1-x)`, zero at the endpoints.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
    }
}

/// Argument of [`binary_entropy`] in the formation measure: `(1 + sqrt(1 - C^2)) / 2`.
pub fn eof_argument(c: f64) -> f64 {
    (1.0 + (1.0 - c * c).max(0.0).sqrt()) / 2.0
}

pub fn eof_from_concurrence(c: f64) -> f64 {
    binary_entropy(eof_argument(c.clamp(0.0, 1.0)))
}

pub fn entanglement_of_formation(c: &MeasureResult) -> MeasureResult {
    MeasureResult {
        value: eof_from_concurrence(c.value),
        kind: MeasureKind::EntanglementOfFormation,
    }
}

/// All five measures of a two-qubit state.
#[derive(Debug, Clone)]
pub struct MeasureSet {
    pub entropy: f64,
    pub linear_entropy: f64,
    pub concurrence: f64,
    pub tangle: f64,
    pub eof: f64,
    pub work: ConcurrenceWork,
}

impl MeasureSet {
    pub fn get(&self, kind: MeasureKind) -> f64 {
        match kind {
            MeasureKind::Entropy => self.entropy,
            MeasureKind::LinearEntropy => self.linear_entropy,
            MeasureKind::Concurrence => self.concurrence,
            MeasureKind::Tangle => self.tangle,
            MeasureKind::EntanglementOfFormation => self.eof,
        }
    }
}

pub fn all_measures(rho: &DensityMatrix) -> Result<MeasureSet> {
    let s = von_neumann_entropy(rho)?;
    let (c, work) = concurrence(rho)?;
    Ok(MeasureSet {
        entropy: s.value,
        linear_entropy: linear_entropy(rho).value,
        concurrence: c.value,
        tangle: tangle(&c).value,
        eof: entanglement_of_formation(&c).value,
        work,
    })
}
