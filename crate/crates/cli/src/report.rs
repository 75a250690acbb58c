//! The analysis pipeline and its serializable report.

use serde::{Deserialize, Serialize};
use tomo_core::uncertainty::GradientMethod;
use tomo_core::{
    all_measures, linear_reconstruct, mle_reconstruct, physicality_report, propagate_errors,
    ComplexMatrix, CovarianceModel, DensityMatrix, ErrorOptions, OptimizerOptions, SPath,
};

use crate::ingest::Dataset;
use crate::validate::{validate, ValidationOptions, ValidationReport};

pub const REPORT_SCHEMA: &str = "tomo-report/1";
pub const TOOL: &str = "tomo-kit";

/// Attached to every error analysis.
pub const ERROR_CAVEAT: &str = "Error bars propagate counting noise and waveplate setting \
errors to first order through the linear reconstruction. Error contributed by the \
maximum-likelihood fit itself is not modeled.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SPathChoice {
    #[default]
    Estimated,
    Counts,
}

impl From<SPathChoice> for SPath {
    fn from(c: SPathChoice) -> Self {
        match c {
            SPathChoice::Estimated => SPath::Estimated,
            SPathChoice::Counts => SPath::Counts,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceChoice {
    #[default]
    Approximate,
    Exact,
}

impl From<CovarianceChoice> for CovarianceModel {
    fn from(c: CovarianceChoice) -> Self {
        match c {
            CovarianceChoice::Approximate => CovarianceModel::Approximate,
            CovarianceChoice::Exact => CovarianceModel::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub linear_only: bool,
    /// Overrides the default setting error when given.
    pub delta_theta_deg: Option<f64>,
    pub max_evals: usize,
    pub rel_tol: f64,
    pub param_tol: f64,
    pub s_path: SPathChoice,
    pub covariance: CovarianceChoice,
    /// Monte Carlo trials for an error-bar check, if any.
    pub mc_validate: Option<u64>,
    pub seed: u64,
    /// Relative tolerance for the Monte Carlo check.
    pub mc_tolerance: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        let opt = OptimizerOptions::default();
        Self {
            linear_only: false,
            delta_theta_deg: None,
            max_evals: opt.max_evals,
            rel_tol: opt.rel_tol,
            param_tol: opt.param_tol,
            s_path: SPathChoice::default(),
            covariance: CovarianceChoice::default(),
            mc_validate: None,
            seed: 0,
            mc_tolerance: 0.15,
        }
    }
}

impl AnalysisOptions {
    pub fn optimizer(&self) -> OptimizerOptions {
        OptimizerOptions {
            max_evals: self.max_evals,
            rel_tol: self.rel_tol,
            param_tol: self.param_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub dims: usize,
    pub data: Vec<Vec<Complex>>,
}

impl From<&ComplexMatrix> for Matrix {
    fn from(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        Self {
            dims: n,
            data: (0..n)
                .map(|i| {
                    m.row(i)
                        .iter()
                        .map(|z| Complex { re: z.re, im: z.im })
                        .collect()
                })
                .collect(),
        }
    }
}

impl Matrix {
    pub fn to_complex_matrix(&self) -> Option<ComplexMatrix> {
        let flat = self
            .data
            .iter()
            .flatten()
            .map(|z| tomo_core::C64::new(z.re, z.im))
            .collect();
        ComplexMatrix::from_vec(self.dims, flat).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub input_sha256: String,
    pub options: AnalysisOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRow {
    pub nu: usize,
    pub label: String,
    pub angles_deg: [f64; 4],
    pub count: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub rows: Vec<InputRow>,
    pub explicit_angles: bool,
    pub normalization: f64,
    pub delta_theta_deg: f64,
    pub design_condition: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Physicality {
    pub eigenvalues: Vec<f64>,
    pub trace_rho_squared: f64,
    pub physical: bool,
}

impl From<&DensityMatrix> for Physicality {
    fn from(rho: &DensityMatrix) -> Self {
        let r = physicality_report(rho);
        Self {
            eigenvalues: r.eigenvalues,
            trace_rho_squared: r.trace_rho_squared,
            physical: r.physical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSection {
    pub rho: Matrix,
    pub physicality: Physicality,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleSection {
    pub rho: Matrix,
    pub physicality: Physicality,
    pub likelihood: f64,
    pub converged: bool,
    pub evaluations: usize,
    pub iterations: usize,
    pub regularized_start: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Value {
    pub value: f64,
    /// Present iff the error analysis ran.
    pub error: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    Linear,
    Mle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuresSection {
    pub estimate: EstimateKind,
    pub entropy: Value,
    pub linear_entropy: Value,
    pub concurrence: Value,
    pub tangle: Value,
    pub eof: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaRow {
    pub nu: usize,
    pub label: String,
    pub s: f64,
    pub lambda: f64,
    pub count_term: f64,
    pub angle_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSection {
    pub s_path: SPathChoice,
    pub covariance: CovarianceChoice,
    pub lambda: Vec<LambdaRow>,
    /// Standard deviation of each element of the estimate.
    pub rho_sigma: [[f64; 4]; 4],
    pub concurrence_gradient: String,
    pub eof_gradient: String,
    pub caveat: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: String,
    pub provenance: Provenance,
    pub input: InputSummary,
    pub linear: LinearSection,
    pub mle: Option<MleSection>,
    pub measures: Option<MeasuresSection>,
    pub errors: Option<ErrorSection>,
    pub validation: Option<ValidationReport>,
    pub warnings: Vec<String>,
}

fn method_name(m: &GradientMethod) -> String {
    match m {
        GradientMethod::Analytic => "analytic".into(),
        GradientMethod::FiniteDifference(why) => format!("finite difference ({why})"),
    }
}

/// Linear estimate, then (unless `linear_only`) the maximum-likelihood fit,
/// the five measures, their error bars and an optional Monte Carlo check.
pub fn analyze(data: &Dataset, options: &AnalysisOptions) -> anyhow::Result<AnalysisReport> {
    use anyhow::Context;

    let mut record = data.record.clone();
    if let Some(deg) = options.delta_theta_deg {
        record = record
            .with_delta_theta(deg.to_radians())
            .context("setting the waveplate angle error")?;
    }
    let set = &data.set;
    let mut warnings = Vec::new();

    let (linear, norm) = linear_reconstruct(&record, set).context("linear reconstruction")?;
    let linear_section = LinearSection {
        rho: linear.matrix().into(),
        physicality: (&linear).into(),
    };
    if !linear_section.physicality.physical {
        warnings.push(format!(
            "linear estimate is not physical (min eigenvalue {:.4})",
            linear.min_eigenvalue()
        ));
    }

    let (estimate, estimate_kind, mle) = if options.linear_only {
        (linear.clone(), EstimateKind::Linear, None)
    } else {
        let fit = mle_reconstruct(&record, set, &options.optimizer())
            .context("maximum-likelihood fit")?;
        if !fit.converged {
            warnings.push(format!(
                "maximum-likelihood fit stopped at the evaluation budget ({}) before converging",
                fit.evaluations
            ));
        }
        let section = MleSection {
            rho: fit.rho.matrix().into(),
            physicality: (&fit.rho).into(),
            likelihood: fit.likelihood,
            converged: fit.converged,
            evaluations: fit.evaluations,
            iterations: fit.iterations,
            regularized_start: fit.regularized_start,
        };
        (fit.rho, EstimateKind::Mle, Some(section))
    };

    let mut measures = None;
    let mut errors = None;
    match all_measures(&estimate) {
        Err(e) => warnings.push(format!("measures skipped: {e}")),
        Ok(m) => {
            let opts = ErrorOptions {
                s_path: options.s_path.into(),
                covariance: options.covariance.into(),
            };
            let bars = match propagate_errors(&estimate, &record, set, &opts) {
                Ok(r) => Some(r),
                Err(e) => {
                    warnings.push(format!("error analysis skipped: {e}"));
                    None
                }
            };
            let v = |value: f64, err: Option<f64>| Value { value, error: err };
            measures = Some(MeasuresSection {
                estimate: estimate_kind,
                entropy: v(m.entropy, bars.as_ref().map(|b| b.entropy)),
                linear_entropy: v(m.linear_entropy, bars.as_ref().map(|b| b.linear_entropy)),
                concurrence: v(
                    m.concurrence,
                    bars.as_ref().map(|b| b.concurrence.concurrence),
                ),
                tangle: v(m.tangle, bars.as_ref().map(|b| b.concurrence.tangle)),
                eof: v(m.eof, bars.as_ref().map(|b| b.concurrence.eof)),
            });
            errors = bars.map(|b| ErrorSection {
                s_path: options.s_path,
                covariance: options.covariance,
                lambda: (0..set.len())
                    .map(|nu| LambdaRow {
                        nu: nu + 1,
                        label: data.labels[nu].clone(),
                        s: b.s[nu],
                        lambda: b.budget.lambda[nu],
                        count_term: b.budget.count_term[nu],
                        angle_term: b.budget.angle_term[nu],
                    })
                    .collect(),
                rho_sigma: b.rho_sigma,
                concurrence_gradient: method_name(&b.concurrence.concurrence_method),
                eof_gradient: method_name(&b.concurrence.eof_method),
                caveat: ERROR_CAVEAT.to_string(),
            });
        }
    }

    let validation = match options.mc_validate {
        None => None,
        Some(trials) if !estimate.is_physical() => {
            warnings.push(format!(
                "Monte Carlo check skipped for {trials} trials: the estimate is not physical"
            ));
            None
        }
        Some(trials) => {
            let vopts = ValidationOptions {
                trials,
                seed: options.seed,
                covariance: options.covariance.into(),
                tolerance: options.mc_tolerance,
                mle: !options.linear_only,
                optimizer: options.optimizer(),
            };
            Some(validate(&estimate, &record, data, &vopts).context("Monte Carlo check")?)
        }
    };

    let input = InputSummary {
        rows: (0..record.len())
            .map(|nu| InputRow {
                nu: nu + 1,
                label: data.labels[nu].clone(),
                angles_deg: record.settings()[nu].to_degrees(),
                count: record.counts()[nu],
            })
            .collect(),
        explicit_angles: data.explicit_angles,
        normalization: norm,
        delta_theta_deg: record.delta_theta.to_degrees(),
        design_condition: set.condition,
    };

    Ok(AnalysisReport {
        schema: REPORT_SCHEMA.to_string(),
        provenance: Provenance {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            input_sha256: data.sha256.clone(),
            options: options.clone(),
        },
        input,
        linear: linear_section,
        mle,
        measures,
        errors,
        validation,
        warnings,
    })
}
