//! Shadow-job style CI build diagnostics.
//!
//! The pipeline ingests a corpus of CI builds, extracts compiler errors from
//! failing build logs, classifies them into a fourteen-type taxonomy, links
//! each run of failures to the patch of the first passing build, and measures
//! how long, how large and how far away each fix was.
//!
//! ```text
//! corpus::ingest -> link::build_series -> metrics::compute_resolutions
//!                -> stats -> report::render_report
//! ```
//!
//! `simulate` generates synthetic corpora together with the ground truth the
//! pipeline should recover.

pub mod classify;
pub mod cli;
pub mod corpus;
pub mod link;
pub mod logparse;
pub mod metrics;
pub mod report;
pub mod simulate;
pub mod stats;

pub use classify::{class_of, classify_message, ClassifiedError, ErrorClass, ErrorType};
pub use corpus::{ingest, parse_patch, render_patch, BuildRecord, CorpusStore, Patch};
pub use link::{build_series, FailureSeries, Linkage};
pub use logparse::{extract_diagnostics, normalize_message, Diagnostic};
pub use metrics::{compute_resolutions, MetricsError, ResolutionRecord};
pub use report::{render_report, Report, ReportOptions};
pub use simulate::{generate, ScenarioSpec, SyntheticCorpus};

pub type FiveNumberSummary = stats::FiveNumberSummary<f64>;
pub type FiveNumberSummary32 = stats::FiveNumberSummary<f32>;
pub type Correlation = stats::Correlation<f64>;
pub type CorrelationRow = stats::CorrelationRow<f64>;
pub type Distributions = stats::Distributions<f64>;

/// Links an ingested corpus into failure series and measures every error.
pub fn analyze(store: &CorpusStore) -> Result<(Linkage, Vec<ResolutionRecord>), MetricsError> {
    let linkage = build_series(store);
    let records = compute_resolutions(&linkage, store)?;
    Ok((linkage, records))
}
