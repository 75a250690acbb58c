//! First-order error propagation from count statistics and waveplate
//! setting errors.
//!
//! Everything is linearized in the sixteen normalized parameters
//! `s_nu = n_nu / N`, with `rho = sum_nu M_nu s_nu`. Errors intrinsic to the
//! maximum-likelihood fit itself are not modeled.

use crate::counts::CountRecord;
use crate::density::DensityMatrix;
use crate::error::{Result, TomoError};
use crate::linalg::{ComplexMatrix, C64};
use crate::linear::TomographySet;
use crate::measures::{
    concurrence, concurrence_value, eof_argument, eof_from_concurrence, ConcurrenceWork, CLIP_TOL,
};

/// Analytic concurrence derivatives need every eigenvalue of `R` above this.
pub const R_FLOOR: f64 = 1e-8;
/// The formation-measure chain rule needs `C` below `1 - EOF_EDGE`.
pub const EOF_EDGE: f64 = 1e-8;
/// Step for the symmetric finite-difference fallbacks.
pub const FD_STEP: f64 = 1e-5;

/// Where the `s_nu` entering the variances come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SPath {
    /// `s_nu = <psi_nu|rho|psi_nu>` of the estimate being reported.
    #[default]
    Estimated,
    /// `s_nu = n_nu / N` from the raw counts.
    Counts,
}

/// Count-noise covariance of the `s_nu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovarianceModel {
    /// `s_nu / N` on the diagonal only.
    #[default]
    Approximate,
    /// Adds the `s_nu s_mu (1 - D_nu - D_mu) / N` terms from the random normalization.
    Exact,
}

/// Covariance of the sixteen `s_nu`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBudget {
    /// `Lambda_nu`, the diagonal of [`ErrorBudget::covariance`].
    pub lambda: Vec<f64>,
    pub count_term: Vec<f64>,
    pub angle_term: Vec<f64>,
    /// Full 16x16 covariance. Off-diagonal entries vanish in the approximate model.
    pub covariance: Vec<Vec<f64>>,
}

impl ErrorBudget {
    /// A diagonal budget with the given variances, all attributed to counts.
    pub fn diagonal(lambda: Vec<f64>) -> Self {
        let n = lambda.len();
        let covariance = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { lambda[i] } else { 0.0 })
                    .collect()
            })
            .collect();
        Self {
            count_term: lambda.clone(),
            angle_term: vec![0.0; n],
            lambda,
            covariance,
        }
    }

    /// `g^T C g`
    pub fn variance_of(&self, g: &[f64]) -> f64 {
        let mut v = 0.0;
        for (i, row) in self.covariance.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if *c != 0.0 {
                    v += g[i] * c * g[j];
                }
            }
        }
        v.max(0.0)
    }

    pub fn sigma_of(&self, g: &[f64]) -> f64 {
        self.variance_of(g).sqrt()
    }
}

pub fn s_parameters(
    counts: &CountRecord,
    rho: Option<&DensityMatrix>,
    set: &TomographySet,
) -> Result<Vec<f64>> {
    let norm = counts.normalization();
    if !(norm > 0.0) {
        return Err(TomoError::ZeroFlux);
    }
    Ok(match rho {
        None => counts.counts().iter().map(|n| n / norm).collect(),
        Some(r) => set.probabilities(r.matrix()),
    })
}

/// `Lambda_nu = s_nu / N + dtheta^2 sum_i (sum_mu f^(i)_{nu mu} s_mu)^2`, with
/// `N` and `dtheta` taken from `counts`.
pub fn lambda_variances(
    counts: &CountRecord,
    s: &[f64],
    set: &TomographySet,
    model: CovarianceModel,
) -> Result<ErrorBudget> {
    let norm = counts.normalization();
    if !(norm > 0.0) {
        return Err(TomoError::ZeroFlux);
    }
    lambda_variances_with(norm, counts.delta_theta, s, set, model)
}

/// [`lambda_variances`] with explicit normalization and angle error.
pub fn lambda_variances_with(
    norm: f64,
    delta_theta: f64,
    s: &[f64],
    set: &TomographySet,
    model: CovarianceModel,
) -> Result<ErrorBudget> {
    let n = set.len();
    if s.len() != n {
        return Err(TomoError::InvalidDimension {
            expected: n,
            got: s.len(),
        });
    }
    let dt2 = delta_theta * delta_theta;
    let angle_term: Vec<f64> = (0..n)
        .map(|nu| {
            (0..4)
                .map(|i| {
                    let dot: f64 = (0..n).map(|mu| set.f_coeffs[nu][mu][i] * s[mu]).sum();
                    dot * dot
                })
                .sum::<f64>()
                * dt2
        })
        .collect();
    let d = |k: usize| if set.d_flags[k] { 1.0 } else { 0.0 };
    let mut covariance = vec![vec![0.0; n]; n];
    for nu in 0..n {
        for mu in 0..n {
            let mut c = if nu == mu {
                s[nu] / norm + angle_term[nu]
            } else {
                0.0
            };
            if model == CovarianceModel::Exact {
                c += s[nu] * s[mu] * (1.0 - d(nu) - d(mu)) / norm;
            }
            covariance[nu][mu] = c;
        }
    }
    let count_term: Vec<f64> = (0..n)
        .map(|nu| covariance[nu][nu] - angle_term[nu])
        .collect();
    let lambda = (0..n).map(|nu| count_term[nu] + angle_term[nu]).collect();
    Ok(ErrorBudget {
        lambda,
        count_term,
        angle_term,
        covariance,
    })
}

/// `Delta rho_ij = sqrt(sum_nu |M_nu(ij)|^2 Lambda_nu)`, using the full
/// covariance when it has off-diagonal terms.
pub fn rho_element_errors(budget: &ErrorBudget, set: &TomographySet) -> [[f64; 4]; 4] {
    let n = set.len();
    let mut out = [[0.0; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            let mut v = 0.0;
            for nu in 0..n {
                let a = set.m_matrices[nu][(i, j)];
                for mu in 0..n {
                    let c = budget.covariance[nu][mu];
                    if c != 0.0 {
                        v += (a * set.m_matrices[mu][(i, j)].conj()).re * c;
                    }
                }
            }
            *x = v.max(0.0).sqrt();
        }
    }
    out
}

/// `dS/ds_nu = -sum_a <phi_a|M_nu|phi_a> (1 + ln p_a) / ln 2`, summed over
/// eigenvalues above the clip tolerance.
pub fn entropy_gradient(rho: &DensityMatrix, set: &TomographySet) -> Result<Vec<f64>> {
    let min = rho.min_eigenvalue();
    if min < -CLIP_TOL {
        return Err(TomoError::NotPhysical {
            min_eigenvalue: min,
        });
    }
    let eig = rho.eig();
    Ok(set
        .m_matrices
        .iter()
        .map(|m| {
            -eig.values
                .iter()
                .zip(&eig.vectors)
                .filter(|(p, _)| **p > CLIP_TOL)
                .map(|(p, v)| m.expectation(v).re * (1.0 + p.ln()))
                .sum::<f64>()
                / std::f64::consts::LN_2
        })
        .collect())
}

pub fn entropy_error(
    rho: &DensityMatrix,
    budget: &ErrorBudget,
    set: &TomographySet,
) -> Result<f64> {
    Ok(budget.sigma_of(&entropy_gradient(rho, set)?))
}

/// `dP/ds_nu = -(8/3) sum_mu Re Tr(M_mu M_nu) s_mu` with `s_mu` the
/// projections of `rho`.
pub fn linear_entropy_gradient(rho: &DensityMatrix, set: &TomographySet) -> Vec<f64> {
    let s = set.probabilities(rho.matrix());
    let n = set.len();
    let d = rho.dim() as f64;
    let k = 2.0 * d / (d - 1.0);
    (0..n)
        .map(|nu| {
            -k * (0..n)
                .map(|mu| (&set.m_matrices[mu] * &set.m_matrices[nu]).trace().re * s[mu])
                .sum::<f64>()
        })
        .collect()
}

pub fn linear_entropy_error(rho: &DensityMatrix, budget: &ErrorBudget, set: &TomographySet) -> f64 {
    budget.sigma_of(&linear_entropy_gradient(rho, set))
}

/// How a derivative was obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum GradientMethod {
    Analytic,
    /// Symmetric finite differences, with the condition that ruled out the
    /// analytic formula.
    FiniteDifference(TomoError),
}

impl GradientMethod {
    pub fn is_fallback(&self) -> bool {
        matches!(self, GradientMethod::FiniteDifference(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub values: Vec<f64>,
    pub method: GradientMethod,
}

/// `dR/ds_nu = sum_mu q_{mu nu} s_mu = M_nu Sigma rho^T Sigma + rho Sigma M_nu^T Sigma`.
fn r_derivative(work: &ConcurrenceWork, m: &ComplexMatrix) -> ComplexMatrix {
    let s = &work.spin_flip;
    let a = &(&(m * s) * &work.rho.transpose()) * s;
    let b = &(&(&work.rho * s) * &m.transpose()) * s;
    &a + &b
}

fn symmetric_difference(s: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    (0..s.len())
        .map(|nu| {
            let mut sp = s.to_vec();
            let mut sm = s.to_vec();
            sp[nu] += FD_STEP;
            sm[nu] -= FD_STEP;
            (f(&sp) - f(&sm)) / (2.0 * FD_STEP)
        })
        .collect()
}

/// `dC/ds_nu = sum_a sgn(3/2 - a) <xi_a|dR/ds_nu|zeta_a> / (2 sqrt r_a)`.
///
/// Falls back to finite differences of `C(sum_mu M_mu s_mu)` when an
/// eigenvalue of `R` is below [`R_FLOOR`] or the eigenvectors are degenerate.
pub fn concurrence_gradient(work: &ConcurrenceWork, set: &TomographySet) -> Gradient {
    match analytic_concurrence_gradient(work, set) {
        Ok(values) => Gradient {
            values,
            method: GradientMethod::Analytic,
        },
        Err(reason) => {
            let s = set.probabilities(&work.rho);
            Gradient {
                values: symmetric_difference(&s, |x| concurrence_value(&set.combine(x))),
                method: GradientMethod::FiniteDifference(reason),
            }
        }
    }
}

fn analytic_concurrence_gradient(work: &ConcurrenceWork, set: &TomographySet) -> Result<Vec<f64>> {
    if let Some(r) = work.eigenvalues.iter().find(|r| r.re < R_FLOOR) {
        return Err(TomoError::DegenerateConcurrence { value: r.re });
    }
    if work.raw < 0.0 {
        return Ok(vec![0.0; set.len()]);
    }
    let eig = work.eig()?;
    Ok(set
        .m_matrices
        .iter()
        .map(|m| {
            let dr = r_derivative(work, m);
            (0..4)
                .map(|a| {
                    let sign = if a == 0 { 1.0 } else { -1.0 };
                    let d: C64 = dr.sandwich(&eig.left[a], &eig.right[a]);
                    sign * d.re / (2.0 * eig.values[a].re.sqrt())
                })
                .sum()
        })
        .collect())
}

/// Propagated errors on concurrence, tangle and entanglement of formation.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcurrenceErrors {
    pub concurrence: f64,
    pub tangle: f64,
    pub eof: f64,
    pub concurrence_method: GradientMethod,
    pub eof_method: GradientMethod,
}

/// `Delta T = 2 C Delta C`; `Delta E = |dE/dC| Delta C` with
/// `dE/dC = -C / (2 sqrt(1 - C^2)) h'(x)` and `h'(x) = log2((1 - x)/x)`.
pub fn concurrence_error(
    work: &ConcurrenceWork,
    budget: &ErrorBudget,
    set: &TomographySet,
) -> ConcurrenceErrors {
    let grad = concurrence_gradient(work, set);
    let dc = budget.sigma_of(&grad.values);
    let c = work.raw.max(0.0);
    let (de, eof_method) = if c >= 1.0 - EOF_EDGE {
        let s = set.probabilities(&work.rho);
        let g = symmetric_difference(&s, |x| {
            eof_from_concurrence(concurrence_value(&set.combine(x)))
        });
        (
            budget.sigma_of(&g),
            GradientMethod::FiniteDifference(TomoError::EofDerivativeSingular { concurrence: c }),
        )
    } else if c == 0.0 {
        (0.0, GradientMethod::Analytic)
    } else {
        let x = eof_argument(c);
        let h_prime = ((1.0 - x) / x).log2();
        let de_dc = c / (2.0 * (1.0 - c * c).sqrt()) * h_prime;
        (de_dc.abs() * dc, GradientMethod::Analytic)
    };
    ConcurrenceErrors {
        concurrence: dc,
        tangle: 2.0 * c * dc,
        eof: de,
        concurrence_method: grad.method,
        eof_method,
    }
}

/// Choices for a full error analysis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorOptions {
    pub s_path: SPath,
    pub covariance: CovarianceModel,
}

/// Error bars on an estimate and on all five measures.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub s: Vec<f64>,
    pub budget: ErrorBudget,
    pub rho_sigma: [[f64; 4]; 4],
    pub entropy: f64,
    pub linear_entropy: f64,
    pub concurrence: ConcurrenceErrors,
}

pub fn propagate_errors(
    rho: &DensityMatrix,
    counts: &CountRecord,
    set: &TomographySet,
    opts: &ErrorOptions,
) -> Result<ErrorReport> {
    let s = match opts.s_path {
        SPath::Estimated => s_parameters(counts, Some(rho), set)?,
        SPath::Counts => s_parameters(counts, None, set)?,
    };
    let budget = lambda_variances(counts, &s, set, opts.covariance)?;
    let (_, work) = concurrence(rho)?;
    Ok(ErrorReport {
        rho_sigma: rho_element_errors(&budget, set),
        entropy: entropy_error(rho, &budget, set)?,
        linear_entropy: linear_entropy_error(rho, &budget, set),
        concurrence: concurrence_error(&work, &budget, set),
        s,
        budget,
    })
}
