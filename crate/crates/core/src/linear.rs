//! Linear tomographic inversion: the 16-state two-qubit scheme and the
//! Stokes-parameter scheme for one to three qubits.

use crate::counts::CountRecord;
use crate::density::DensityMatrix;
use crate::error::{Result, TomoError};
use crate::linalg::{ComplexMatrix, C64, I, ZERO};
use crate::projection::{
    state_angle_derivatives, table1_states, two_photon_state, ProjectionState, WaveplateSetting,
};

/// Designs whose B matrix has a 1-norm condition number above this are rejected.
pub const MAX_CONDITION: f64 = 1e8;

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[[ZERO, -I], [I, ZERO]])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, -1.0]])
}

/// Sixteen trace-orthonormal Hermitian 4x4 matrices spanning all operators.
#[derive(Debug, Clone)]
pub struct GammaBasis {
    pub matrices: Vec<ComplexMatrix>,
}

impl GammaBasis {
    /// `sigma_a (x) sigma_b / 2` in the order `(I,X) (I,Y) (I,Z) (X,I) (X,X) ...
    /// (Z,Z) (I,I)`, with the first factor acting on qubit 1.
    pub fn standard() -> Self {
        let id = ComplexMatrix::identity(2);
        let p = [id.clone(), pauli_x(), pauli_y(), pauli_z()];
        let mut order: Vec<(usize, usize)> = Vec::with_capacity(16);
        for a in 0..4 {
            for b in 0..4 {
                if (a, b) != (0, 0) {
                    order.push((a, b));
                }
            }
        }
        order.push((0, 0));
        let matrices = order
            .into_iter()
            .map(|(a, b)| p[a].kron(&p[b]).scale_real(0.5))
            .collect();
        Self { matrices }
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// Coordinates `r_mu = Tr(Gamma_mu A)`.
    pub fn coordinates(&self, a: &ComplexMatrix) -> Vec<C64> {
        self.matrices.iter().map(|g| (g * a).trace()).collect()
    }
}

/// A tomographically complete 16-state design with its dual basis.
#[derive(Debug, Clone)]
pub struct TomographySet {
    pub states: Vec<ProjectionState>,
    /// `B[nu][mu] = <psi_nu| Gamma_mu |psi_nu>`
    pub b_matrix: ComplexMatrix,
    /// Dual operators: `<psi_mu| M_nu |psi_mu> = delta_{mu nu}`.
    pub m_matrices: Vec<ComplexMatrix>,
    /// True for the four states whose counts fix the normalization.
    pub d_flags: Vec<bool>,
    /// `f[nu][mu][i] = 2 Re <d psi_nu / d theta_{nu,i}| M_mu |psi_nu>`
    pub f_coeffs: Vec<[[f64; 4]; 16]>,
    /// 1-norm condition number of `B`.
    pub condition: f64,
}

impl TomographySet {
    /// The standard 16-state design.
    pub fn table1() -> Self {
        build_tomography_set(table1_states(), &GammaBasis::standard())
            .expect("standard design is complete")
    }

    pub fn from_settings(settings: &[WaveplateSetting]) -> Result<Self> {
        let states = settings.iter().map(two_photon_state).collect();
        build_tomography_set(states, &GammaBasis::standard())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `s_nu = <psi_nu|rho|psi_nu>`
    pub fn probabilities(&self, rho: &ComplexMatrix) -> Vec<f64> {
        self.states.iter().map(|s| s.probability(rho)).collect()
    }

    /// `sum_nu M_nu s_nu`
    pub fn combine(&self, s: &[f64]) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(4);
        for (m, &x) in self.m_matrices.iter().zip(s) {
            out = &out + &m.scale_real(x);
        }
        out
    }
}

pub fn build_tomography_set(
    states: Vec<ProjectionState>,
    basis: &GammaBasis,
) -> Result<TomographySet> {
    let n = basis.len();
    if states.len() != n {
        return Err(TomoError::InvalidDimension {
            expected: n,
            got: states.len(),
        });
    }
    let b = ComplexMatrix::from_fn(n, |nu, mu| basis.matrices[mu].expectation(&states[nu].ket));
    let b_inv = b.inverse().ok_or(TomoError::NotTomographicallyComplete {
        condition: f64::INFINITY,
    })?;
    let condition = b.norm_one() * b_inv.norm_one();
    if !(condition <= MAX_CONDITION) {
        return Err(TomoError::NotTomographicallyComplete { condition });
    }

    let m_matrices: Vec<ComplexMatrix> = (0..n)
        .map(|nu| {
            let mut m = ComplexMatrix::zeros(4);
            for mu in 0..n {
                m = &m + &basis.matrices[mu].scale(b_inv[(mu, nu)]);
            }
            m
        })
        .collect();

    let f_coeffs = states
        .iter()
        .map(|st| {
            let grads = state_angle_derivatives(&st.setting);
            let mut f = [[0.0; 4]; 16];
            for (mu, m) in m_matrices.iter().enumerate() {
                let m_psi = m.mul_vec(&st.ket);
                for (i, g) in grads.iter().enumerate() {
                    let z: C64 = g.iter().zip(&m_psi).map(|(d, x)| d.conj() * x).sum();
                    f[mu][i] = 2.0 * z.re;
                }
            }
            f
        })
        .collect();

    Ok(TomographySet {
        states,
        b_matrix: b,
        m_matrices,
        d_flags: (0..n).map(|nu| nu < 4).collect(),
        f_coeffs,
        condition,
    })
}

/// `rho = sum_nu M_nu n_nu / sum_{nu<4} n_nu`, returned with that normalization.
pub fn linear_reconstruct(
    counts: &CountRecord,
    set: &TomographySet,
) -> Result<(DensityMatrix, f64)> {
    if counts.len() != set.len() {
        return Err(TomoError::InvalidDimension {
            expected: set.len(),
            got: counts.len(),
        });
    }
    let norm = counts.normalization();
    if !(norm > 0.0) {
        return Err(TomoError::ZeroFlux);
    }
    let s: Vec<f64> = counts.counts().iter().map(|n| n / norm).collect();
    let rho = DensityMatrix::new(set.combine(&s))?;
    Ok((rho, norm))
}

/// Stokes parameters of a single beam and the counts behind them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesVector {
    pub s: [f64; 4],
    pub counts: [f64; 4],
}

impl StokesVector {
    /// `(S1, S2, S3) / S0`
    pub fn normalized(&self) -> [f64; 3] {
        [
            self.s[1] / self.s[0],
            self.s[2] / self.s[0],
            self.s[3] / self.s[0],
        ]
    }
}

/// Pauli operators in the circular convention (`sigma_1 = |R><L| + |L><R|`,
/// and so on), written in the H/V basis: `I, Z, -X, -Y`.
pub fn stokes_paulis() -> [ComplexMatrix; 4] {
    [
        ComplexMatrix::identity(2),
        pauli_z(),
        pauli_x().scale_real(-1.0),
        pauli_y().scale_real(-1.0),
    ]
}

/// Single-beam reconstruction from counts behind a 50% neutral filter (`n0`),
/// and H, anti-diagonal and right-circular polarizers (`n1..n3`).
pub fn stokes_single_qubit(n: [f64; 4]) -> Result<(StokesVector, DensityMatrix)> {
    if !(n[0] > 0.0) {
        return Err(TomoError::ZeroFlux);
    }
    let s = [
        2.0 * n[0],
        2.0 * (n[1] - n[0]),
        2.0 * (n[2] - n[0]),
        2.0 * (n[3] - n[0]),
    ];
    let sig = stokes_paulis();
    let mut rho = ComplexMatrix::zeros(2);
    for i in 0..4 {
        rho = &rho + &sig[i].scale_real(0.5 * s[i] / s[0]);
    }
    Ok((StokesVector { s, counts: n }, DensityMatrix::new(rho)?))
}

/// Single-qubit measurement sets for the Stokes scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StokesDesign {
    /// Total intensity, `|H>`, `|D_bar>`, `|R>`.
    Standard,
    /// `|H>`, `|V>`, `|D>`, `|R>`.
    Primed,
}

impl StokesDesign {
    /// Single-qubit measurement operators `mu_0..mu_3`.
    pub fn operators(self) -> [ComplexMatrix; 4] {
        use crate::projection::{KET_D, KET_D_BAR, KET_H, KET_R, KET_V};
        let p = ComplexMatrix::projector;
        match self {
            StokesDesign::Standard => [
                ComplexMatrix::identity(2),
                p(&KET_H),
                p(&KET_D_BAR),
                p(&KET_R),
            ],
            StokesDesign::Primed => [p(&KET_H), p(&KET_V), p(&KET_D), p(&KET_R)],
        }
    }

    /// `Upsilon` with `mu_i = sum_j Upsilon_ij sigma_j`.
    pub fn upsilon(self) -> [[f64; 4]; 4] {
        match self {
            StokesDesign::Standard => [
                [1.0, 0.0, 0.0, 0.0],
                [0.5, 0.5, 0.0, 0.0],
                [0.5, 0.0, 0.5, 0.0],
                [0.5, 0.0, 0.0, 0.5],
            ],
            StokesDesign::Primed => [
                [0.5, 0.5, 0.0, 0.0],
                [0.5, -0.5, 0.0, 0.0],
                [0.5, 0.0, -0.5, 0.0],
                [0.5, 0.0, 0.0, 0.5],
            ],
        }
    }

    pub fn upsilon_inverse(self) -> [[f64; 4]; 4] {
        match self {
            StokesDesign::Standard => [
                [1.0, 0.0, 0.0, 0.0],
                [-1.0, 2.0, 0.0, 0.0],
                [-1.0, 0.0, 2.0, 0.0],
                [-1.0, 0.0, 0.0, 2.0],
            ],
            StokesDesign::Primed => {
                let u = ComplexMatrix::from_real_rows(&self.upsilon());
                let inv = u.inverse().expect("primed design is invertible");
                let mut out = [[0.0; 4]; 4];
                for (i, row) in out.iter_mut().enumerate() {
                    for (j, x) in row.iter_mut().enumerate() {
                        *x = inv[(i, j)].re;
                    }
                }
                out
            }
        }
    }
}

/// `n`-qubit Stokes parameters `S_{i1..in} = sum_j prod_k Uinv[i_k][j_k] n_{j1..jn}`.
///
/// Counts and parameters are indexed with qubit 1 as the most significant
/// base-4 digit.
pub fn nqubit_stokes(design: StokesDesign, qubits: usize, counts: &[f64]) -> Result<Vec<f64>> {
    if qubits == 0 || qubits > 3 {
        return Err(TomoError::UnsupportedSize { qubits });
    }
    let len = 4usize.pow(qubits as u32);
    if counts.len() != len {
        return Err(TomoError::InvalidDimension {
            expected: len,
            got: counts.len(),
        });
    }
    // Apply Upsilon^{-1} along one base-4 digit at a time.
    let u = design.upsilon_inverse();
    let mut cur = counts.to_vec();
    for k in 0..qubits {
        let stride = 4usize.pow((qubits - 1 - k) as u32);
        let mut next = vec![0.0; len];
        for (idx, out) in next.iter_mut().enumerate() {
            let digit = (idx / stride) % 4;
            let base = idx - digit * stride;
            *out = (0..4).map(|j| u[digit][j] * cur[base + j * stride]).sum();
        }
        cur = next;
    }
    Ok(cur)
}

/// `rho = 2^-n sum_i (S_i / S_0) sigma_{i1} (x) ... (x) sigma_{in}`
pub fn nqubit_linear_reconstruct_with(
    design: StokesDesign,
    qubits: usize,
    counts: &[f64],
) -> Result<DensityMatrix> {
    let s = nqubit_stokes(design, qubits, counts)?;
    if !(s[0] > 0.0) {
        return Err(TomoError::ZeroFlux);
    }
    let sig = stokes_paulis();
    let dim = 1usize << qubits;
    let mut rho = ComplexMatrix::zeros(dim);
    for (idx, &si) in s.iter().enumerate() {
        if si == 0.0 {
            continue;
        }
        let mut op = ComplexMatrix::identity(1);
        for k in 0..qubits {
            let digit = (idx / 4usize.pow((qubits - 1 - k) as u32)) % 4;
            op = op.kron(&sig[digit]);
        }
        rho = &rho + &op.scale_real(si / s[0]);
    }
    DensityMatrix::new(rho.scale_real(1.0 / dim as f64))
}

/// [`nqubit_linear_reconstruct_with`] on the standard design.
pub fn nqubit_linear_reconstruct(qubits: usize, counts: &[f64]) -> Result<DensityMatrix> {
    nqubit_linear_reconstruct_with(StokesDesign::Standard, qubits, counts)
}
