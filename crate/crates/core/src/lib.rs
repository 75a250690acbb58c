//! Two-qubit polarization state tomography.
//!
//! Linear inversion of 16 projection counts, a positivity-preserving
//! maximum-likelihood fit, entanglement and mixedness measures, and
//! first-order error propagation from counting statistics and waveplate
//! setting errors.

pub mod counts;
pub mod density;
pub mod error;
pub mod linalg;
pub mod linear;
pub mod measures;
pub mod mle;
pub mod optimize;
pub mod projection;
pub mod synthetic;
pub mod uncertainty;

pub use counts::CountRecord;
pub use density::{physicality_report, DensityMatrix, PhysicalityReport};
pub use error::{Result, TomoError};
pub use linalg::{ComplexMatrix, C64};
pub use linear::{linear_reconstruct, GammaBasis, StokesVector, TomographySet};
pub use measures::{all_measures, MeasureKind, MeasureResult, MeasureSet};
pub use mle::{mle_reconstruct, MleFit, OptimizerOptions, TParams};
pub use projection::{ProjectionState, WaveplateSetting};
pub use synthetic::{generate_counts, GeneratorConfig, Moments, NoiseMode, SNormalization};
pub use uncertainty::{
    propagate_errors, CovarianceModel, ErrorBudget, ErrorOptions, ErrorReport, SPath,
};
