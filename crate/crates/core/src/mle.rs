//! Maximum-likelihood estimation over positive semidefinite matrices.
//!
//! A density matrix is written as `T^H T / Tr(T^H T)` with `T` lower
//! triangular, so every parameter vector maps to a physical state.

use crate::counts::CountRecord;
use crate::density::DensityMatrix;
use crate::error::{Result, TomoError};
use crate::linalg::{det_and_minors, ComplexMatrix, C64};
use crate::linear::{linear_reconstruct, TomographySet};
use crate::optimize::{powell, PowellOptions};

/// Below this, `rho_44` or a minor used by [`rho_to_t`] counts as zero.
pub const SINGULAR_TOL: f64 = 1e-12;
/// Floor on the predicted count in the likelihood denominator.
pub const COUNT_FLOOR: f64 = 0.5;
/// Mixing weights toward `I/4` tried in turn when inverting a rank-deficient matrix.
pub const REGULARIZATION: [f64; 4] = [1e-4, 1e-3, 1e-2, 1e-1];

/// Sixteen real parameters of the lower-triangular `T`.
///
/// `t[0..4]` is the diagonal; the off-diagonal entries follow as
/// (real, imaginary) pairs in the order `T21, T32, T43, T31, T42, T41`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TParams {
    pub t: [f64; 16],
}

const OFF_DIAGONAL: [(usize, usize); 6] = [(1, 0), (2, 1), (3, 2), (2, 0), (3, 1), (3, 0)];

impl TParams {
    pub fn new(t: [f64; 16]) -> Result<Self> {
        if t.iter().any(|x| !x.is_finite()) {
            return Err(TomoError::InvalidInput(
                "T parameters must be finite".into(),
            ));
        }
        Ok(Self { t })
    }

    pub fn t_matrix(&self) -> ComplexMatrix {
        let t = &self.t;
        let mut m = ComplexMatrix::zeros(4);
        for k in 0..4 {
            m[(k, k)] = C64::new(t[k], 0.0);
        }
        for (n, &(i, j)) in OFF_DIAGONAL.iter().enumerate() {
            m[(i, j)] = C64::new(t[4 + 2 * n], t[5 + 2 * n]);
        }
        m
    }

    /// Reads the real diagonal and complex subdiagonal entries of `T`.
    /// Imaginary parts of diagonal entries are dropped.
    pub fn from_t_matrix(m: &ComplexMatrix) -> Self {
        let mut t = [0.0; 16];
        for k in 0..4 {
            t[k] = m[(k, k)].re;
        }
        for (n, &(i, j)) in OFF_DIAGONAL.iter().enumerate() {
            t[4 + 2 * n] = m[(i, j)].re;
            t[5 + 2 * n] = m[(i, j)].im;
        }
        Self { t }
    }

    /// `Tr(T^H T)`, the squared Euclidean norm of `t`.
    pub fn norm_sqr(&self) -> f64 {
        self.t.iter().map(|x| x * x).sum()
    }
}

/// `T^H T / Tr(T^H T)`
pub fn t_to_rho(t: &TParams) -> Result<DensityMatrix> {
    DensityMatrix::new(t_to_matrix(t)?)
}

fn t_to_matrix(t: &TParams) -> Result<ComplexMatrix> {
    let n = t.norm_sqr();
    if !(n > 1e-300) {
        return Err(TomoError::ZeroParametrization);
    }
    let tm = t.t_matrix();
    Ok((&tm.adjoint() * &tm).scale_real(1.0 / n))
}

/// Inverse of [`t_to_rho`] from the determinant and first and second minors.
///
/// Square roots are complex, so a non-physical input still yields an
/// answer; the real parts of the resulting `T` entries are kept.
pub fn rho_to_t(rho: &DensityMatrix) -> Result<TParams> {
    let r = rho.matrix();
    let m = det_and_minors(r)?;
    let r44 = r[(3, 3)];
    let m11 = m.first(0, 0);
    let m1122 = m.second(0, 0, 1, 1);
    for (quantity, value) in [("rho_44", r44), ("M1_11", m11), ("M2_11,22", m1122)] {
        if value.norm() < SINGULAR_TOL {
            return Err(TomoError::SingularInverse {
                quantity,
                value: value.norm(),
            });
        }
    }
    let m12 = m.first(0, 1);
    let m1223 = m.second(0, 1, 1, 2);
    let m1123 = m.second(0, 0, 1, 2);
    let sr44 = r44.sqrt();
    let s1122 = m1122.sqrt();

    let mut t = ComplexMatrix::zeros(4);
    t[(0, 0)] = (m.determinant / m11).sqrt();
    t[(1, 0)] = m12 / (m11 * m1122).sqrt();
    t[(1, 1)] = (m11 / m1122).sqrt();
    t[(2, 0)] = m1223 / (sr44 * s1122);
    t[(2, 1)] = m1123 / (sr44 * s1122);
    t[(2, 2)] = (m1122 / r44).sqrt();
    for j in 0..3 {
        t[(3, j)] = r[(3, j)] / sr44;
    }
    t[(3, 3)] = sr44;
    let params = TParams::from_t_matrix(&t);
    if params.t.iter().any(|x| !x.is_finite()) {
        return Err(TomoError::SingularInverse {
            quantity: "T",
            value: f64::NAN,
        });
    }
    Ok(params)
}

/// [`rho_to_t`], retried on `(1 - eps) rho + eps I/4` with growing `eps`
/// while the inverse is singular.
pub fn rho_to_t_regularized(rho: &DensityMatrix) -> Result<TParams> {
    let mut last = match rho_to_t(rho) {
        Err(e @ TomoError::SingularInverse { .. }) => e,
        other => return other,
    };
    for eps in REGULARIZATION {
        let mixed = rho.matrix().scale_real(1.0 - eps);
        let floor = ComplexMatrix::identity(4).scale_real(eps / 4.0);
        match rho_to_t(&DensityMatrix::new(&mixed + &floor)?) {
            Err(e @ TomoError::SingularInverse { .. }) => last = e,
            other => return other,
        }
    }
    Err(last)
}

/// `sum_nu (N p_nu - n_nu)^2 / (2 max(N p_nu, 1/2))` with `p_nu = <psi_nu|rho|psi_nu>`.
pub fn likelihood_of(rho: &ComplexMatrix, counts: &CountRecord, set: &TomographySet) -> f64 {
    let norm = counts.normalization();
    set.states
        .iter()
        .zip(counts.counts())
        .map(|(st, &n)| {
            let pred = norm * st.probability(rho);
            let d = pred - n;
            d * d / (2.0 * pred.max(COUNT_FLOOR))
        })
        .sum()
}

pub fn likelihood(t: &TParams, counts: &CountRecord, set: &TomographySet) -> Result<f64> {
    Ok(likelihood_of(&t_to_matrix(t)?, counts, set))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    pub max_evals: usize,
    /// Stop when a full sweep lowers the objective by less than this, relatively...
    pub rel_tol: f64,
    /// ...and moves the parameters by less than this.
    pub param_tol: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            max_evals: 100_000,
            rel_tol: 1e-10,
            param_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MleFit {
    pub rho: DensityMatrix,
    pub t: TParams,
    pub likelihood: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Objective after the starting point and each sweep; non-increasing.
    pub history: Vec<f64>,
    /// True when the starting point needed the regularized inverse.
    pub regularized_start: bool,
}

impl MleFit {
    /// `Err(NotConverged)` if the evaluation budget ran out.
    pub fn ensure_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(TomoError::NotConverged {
                evaluations: self.evaluations,
            })
        }
    }
}

/// Linear estimate, inverse parametrization, then a Powell minimization of
/// [`likelihood`].
///
/// A fit that exhausts `max_evals` is returned with `converged == false`;
/// call [`MleFit::ensure_converged`] to turn that into an error.
pub fn mle_reconstruct(
    counts: &CountRecord,
    set: &TomographySet,
    opts: &OptimizerOptions,
) -> Result<MleFit> {
    let (linear, _) = linear_reconstruct(counts, set)?;
    let (start, regularized_start) = match rho_to_t(&linear) {
        Ok(t) => (t, false),
        Err(TomoError::SingularInverse { .. }) => (rho_to_t_regularized(&linear)?, true),
        Err(e) => return Err(e),
    };
    mle_from(start, counts, set, opts).map(|mut fit| {
        fit.regularized_start = regularized_start;
        fit
    })
}

/// Minimize from an explicit starting point.
pub fn mle_from(
    start: TParams,
    counts: &CountRecord,
    set: &TomographySet,
    opts: &OptimizerOptions,
) -> Result<MleFit> {
    if !(counts.normalization() > 0.0) {
        return Err(TomoError::ZeroFlux);
    }
    let mut x0 = start.t;
    normalize(&mut x0);
    if x0.iter().all(|&x| x == 0.0) {
        return Err(TomoError::ZeroParametrization);
    }
    let objective = |x: &[f64]| -> f64 {
        let mut t = [0.0; 16];
        t.copy_from_slice(x);
        match t_to_matrix(&TParams { t }) {
            Ok(rho) => likelihood_of(&rho, counts, set),
            Err(_) => f64::INFINITY,
        }
    };
    let popts = PowellOptions {
        max_evals: opts.max_evals,
        rel_tol: opts.rel_tol,
        param_tol: opts.param_tol,
    };
    // The objective is invariant under scaling of t; pinning |t| = 1 after
    // each sweep removes that flat direction.
    let res = powell(objective, &x0, &popts, |x| {
        let mut t = [0.0; 16];
        t.copy_from_slice(x);
        normalize(&mut t);
        x.copy_from_slice(&t);
    });
    let mut t = [0.0; 16];
    t.copy_from_slice(&res.x);
    let t = TParams::new(t)?;
    Ok(MleFit {
        rho: t_to_rho(&t)?,
        t,
        likelihood: res.f,
        iterations: res.iterations,
        evaluations: res.evaluations,
        converged: res.converged,
        history: res.history,
        regularized_start: false,
    })
}

fn normalize(t: &mut [f64; 16]) {
    let n: f64 = t.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 && n.is_finite() {
        for x in t.iter_mut() {
            *x /= n;
        }
    }
}
