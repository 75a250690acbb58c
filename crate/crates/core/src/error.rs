use thiserror::Error;

/// Errors produced anywhere in the reconstruction pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TomoError {
    #[error("invalid dimension: expected {expected}, got {got}")]
    InvalidDimension { expected: usize, got: usize },

    #[error("matrix is not Hermitian (max |m - m^H| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix trace is {trace:.6}, expected 1")]
    NotUnitTrace { trace: f64 },

    #[error("index {index} out of range for dimension {dim}")]
    InvalidIndex { index: usize, dim: usize },

    #[error("degenerate or defective spectrum (residual {residual:.3e})")]
    DegenerateSpectrum { residual: f64 },

    #[error(
        "measurement design is not tomographically complete (condition number {condition:.3e})"
    )]
    NotTomographicallyComplete { condition: f64 },

    #[error("zero normalization flux")]
    ZeroFlux,

    #[error("unsupported system size: {qubits} qubits")]
    UnsupportedSize { qubits: usize },

    #[error("all-zero parametrization has no density matrix")]
    ZeroParametrization,

    #[error("inverse parametrization is singular ({quantity} = {value:.3e})")]
    SingularInverse { quantity: &'static str, value: f64 },

    #[error("optimizer did not converge within {evaluations} evaluations")]
    NotConverged { evaluations: usize },

    #[error("density matrix is not physical (min eigenvalue {min_eigenvalue:.3e})")]
    NotPhysical { min_eigenvalue: f64 },

    #[error("concurrence eigenvalue {value:.3e} below floor, analytic derivative undefined")]
    DegenerateConcurrence { value: f64 },

    #[error("entanglement-of-formation derivative singular at C = {concurrence}")]
    EofDerivativeSingular { concurrence: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, TomoError>;
