//! Counts-file ingestion, the analysis pipeline and report emission behind
//! the `tomo-kit` binary.

pub mod emit;
pub mod ingest;
pub mod report;
pub mod simulate;
pub mod validate;

pub use emit::{emit, emit_validation, Format};
pub use ingest::{ingest, ingest_bytes, write_counts, Dataset, IngestError};
pub use report::{analyze, AnalysisOptions, AnalysisReport, REPORT_SCHEMA};
pub use validate::{validate, ValidationOptions, ValidationReport};
