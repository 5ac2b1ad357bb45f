//! Failure series construction and fix attribution.
//!
//! Within one change stream, every maximal run of consecutive failing builds
//! that is followed by a passing build forms a series; the passing build's
//! patch is taken as the fix. Errors are read from the last failing build.

use rayon::prelude::*;
use thiserror::Error;

use crate::classify::ClassifiedError;
use crate::corpus::{BuildRecord, CorpusStore, Patch};
use crate::logparse::extract_diagnostics;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailureSeries {
    pub change_id: String,
    /// Non-empty, in stream order.
    pub failing_builds: Vec<BuildRecord>,
    pub fixing_build: BuildRecord,
    /// Classified errors of the last failing build.
    pub errors: Vec<ClassifiedError>,
}

impl FailureSeries {
    pub fn last_failure(&self) -> &BuildRecord {
        self.failing_builds
            .last()
            .expect("a failure series has at least one failing build")
    }

    pub fn no_diagnostic(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Trailing failures of a change stream with no later passing build.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnresolvedRun {
    pub change_id: String,
    pub failing_builds: Vec<BuildRecord>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Linkage {
    /// Ordered by change id, then first failing build time.
    pub series: Vec<FailureSeries>,
    pub unresolved: Vec<UnresolvedRun>,
}

impl Linkage {
    pub fn no_diagnostic_count(&self) -> usize {
        self.series.iter().filter(|s| s.no_diagnostic()).count()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinkError {
    #[error("build {build_id}: fixing patch {patch_id} is not in the corpus")]
    DanglingPatch { build_id: String, patch_id: String },
}

fn classify_log(store: &CorpusStore, build: &BuildRecord) -> Vec<ClassifiedError> {
    let log = store.log(&build.build_id).unwrap_or("");
    extract_diagnostics(log, &build.build_id)
        .into_iter()
        .map(ClassifiedError::from_diagnostic)
        .collect()
}

fn stream_series(
    store: &CorpusStore,
    change_id: &str,
    builds: &[BuildRecord],
) -> (Vec<FailureSeries>, Option<UnresolvedRun>) {
    let mut series = Vec::new();
    let mut run: Vec<BuildRecord> = Vec::new();
    for build in builds {
        if build.is_fail() {
            run.push(build.clone());
        } else if !run.is_empty() {
            let failing_builds = std::mem::take(&mut run);
            let errors = classify_log(store, failing_builds.last().expect("non-empty run"));
            series.push(FailureSeries {
                change_id: change_id.to_string(),
                failing_builds,
                fixing_build: build.clone(),
                errors,
            });
        }
    }
    let unresolved = (!run.is_empty()).then(|| UnresolvedRun {
        change_id: change_id.to_string(),
        failing_builds: run,
    });
    (series, unresolved)
}

/// Groups the store's builds into failure series, one change stream at a time.
pub fn build_series(store: &CorpusStore) -> Linkage {
    let streams: Vec<(&str, &[BuildRecord])> = store.streams().collect();
    let per_stream: Vec<_> = streams
        .par_iter()
        .map(|(change_id, builds)| stream_series(store, change_id, builds))
        .collect();
    let mut linkage = Linkage::default();
    for (series, unresolved) in per_stream {
        linkage.series.extend(series);
        linkage.unresolved.extend(unresolved);
    }
    linkage
}

/// The patch of the series' fixing build.
pub fn fixing_patch<'s>(
    series: &FailureSeries,
    store: &'s CorpusStore,
) -> Result<&'s Patch, LinkError> {
    store
        .patch(&series.fixing_build.patch_id)
        .ok_or_else(|| LinkError::DanglingPatch {
            build_id: series.fixing_build.build_id.clone(),
            patch_id: series.fixing_build.patch_id.clone(),
        })
}
