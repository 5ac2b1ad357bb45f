//! Resolution time, size and distance of each classified error.
//!
//! Fix lines are expressed in the pre-fix (old file) numbering, the same
//! frame the compiler used when it reported the error line.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::classify::ClassifiedError;
use crate::corpus::{CorpusStore, FileChange, FileChangeKind, LineOp, Patch};
use crate::link::{fixing_patch, FailureSeries, LinkError, Linkage};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResolutionRecord {
    pub error: ClassifiedError,
    pub change_id: String,
    pub fixing_build_id: String,
    /// Seconds from the start of the last failing build to the start of the fix.
    pub resolution_time: i64,
    /// Added plus deleted lines.
    pub resolution_size: u64,
    /// Minimum absolute offset between the error line and any fix line.
    pub resolution_distance: Option<u64>,
    pub fix_lines: Vec<u32>,
    /// The fixing patch does not touch the diagnostic's file.
    pub fix_elsewhere: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("change {change_id}: fixing build {fixing_build_id} starts {seconds}s before the last failure")]
    NegativeTime {
        change_id: String,
        fixing_build_id: String,
        seconds: i64,
    },
    #[error(transparent)]
    Link(#[from] LinkError),
}

pub fn resolution_time(series: &FailureSeries) -> Result<i64, MetricsError> {
    let seconds = series.fixing_build.start_time - series.last_failure().start_time;
    if seconds < 0 {
        return Err(MetricsError::NegativeTime {
            change_id: series.change_id.clone(),
            fixing_build_id: series.fixing_build.build_id.clone(),
            seconds,
        });
    }
    Ok(seconds)
}

fn normalize_path(p: &str) -> &str {
    let mut p = p;
    while let Some(rest) = p.strip_prefix("./") {
        p = rest;
    }
    p
}

/// Finds the file change for a compiler-reported path.
///
/// Exact matches win; otherwise a unique match on a whole-component suffix
/// (compilers often print build-directory-relative or absolute paths).
pub fn find_file_change<'p>(patch: &'p Patch, file: &str) -> Option<&'p FileChange> {
    let file = normalize_path(file);
    if let Some(fc) = patch
        .file_changes
        .iter()
        .find(|fc| normalize_path(&fc.path) == file)
    {
        return Some(fc);
    }
    let suffix_of = |long: &str, short: &str| {
        long.len() > short.len()
            && long.ends_with(short)
            && long.as_bytes()[long.len() - short.len() - 1] == b'/'
    };
    let mut hits = patch.file_changes.iter().filter(|fc| {
        let path = normalize_path(&fc.path);
        suffix_of(file, path) || suffix_of(path, file)
    });
    match (hits.next(), hits.next()) {
        (Some(fc), None) => Some(fc),
        _ => None,
    }
}

/// Old-file line numbers touched by the change to `file`, sorted and
/// deduplicated. Deleted lines contribute their own number; a run of added
/// lines contributes the first old line after the insertion point.
pub fn fix_line_numbers(patch: &Patch, file: &str) -> Vec<u32> {
    let Some(fc) = find_file_change(patch, file) else {
        return Vec::new();
    };
    file_change_fix_lines(fc)
}

pub fn file_change_fix_lines(fc: &FileChange) -> Vec<u32> {
    if fc.kind != FileChangeKind::Text {
        return Vec::new();
    }
    let mut lines = Vec::new();
    for hunk in &fc.hunks {
        let mut next_old = if hunk.old_count == 0 {
            hunk.old_start + 1
        } else {
            hunk.old_start
        };
        let mut in_add_run = false;
        for l in &hunk.lines {
            match l.op {
                LineOp::Context => {
                    next_old += 1;
                    in_add_run = false;
                }
                LineOp::Del => {
                    lines.push(next_old);
                    next_old += 1;
                    in_add_run = false;
                }
                LineOp::Add => {
                    if !in_add_run {
                        lines.push(next_old.max(1));
                        in_add_run = true;
                    }
                }
            }
        }
    }
    lines.sort_unstable();
    lines.dedup();
    lines
}

/// `min |F - E|` over the fix lines, or `None` when there are none.
pub fn resolution_distance(error_line: u32, fix_lines: &[u32]) -> Option<u64> {
    fix_lines
        .iter()
        .map(|&f| u64::from(f.abs_diff(error_line)))
        .min()
}

fn change_size(fc: &FileChange) -> u64 {
    match fc.kind {
        FileChangeKind::Text => (fc.additions() + fc.deletions()) as u64,
        FileChangeKind::Binary | FileChangeKind::ModeOnly => 0,
    }
}

/// Added plus deleted lines of the change to `file`; 0 for binary and
/// mode-only changes and for files the patch does not touch.
pub fn resolution_size(patch: &Patch, file: &str) -> u64 {
    find_file_change(patch, file).map_or(0, change_size)
}

/// Added plus deleted lines across every file of the patch.
pub fn whole_patch_size(patch: &Patch) -> u64 {
    patch.file_changes.iter().map(change_size).sum()
}

fn series_records(
    series: &FailureSeries,
    store: &CorpusStore,
) -> Result<Vec<ResolutionRecord>, MetricsError> {
    let time = resolution_time(series)?;
    let patch = fixing_patch(series, store)?;
    Ok(series
        .errors
        .iter()
        .map(|error| {
            let diag = &error.diagnostic;
            let (size, fix_lines, fix_elsewhere) = match &diag.file {
                Some(file) => match find_file_change(patch, file) {
                    Some(fc) => (change_size(fc), file_change_fix_lines(fc), false),
                    None => (0, Vec::new(), true),
                },
                None => (whole_patch_size(patch), Vec::new(), false),
            };
            let distance = diag.line.and_then(|e| resolution_distance(e, &fix_lines));
            ResolutionRecord {
                error: error.clone(),
                change_id: series.change_id.clone(),
                fixing_build_id: series.fixing_build.build_id.clone(),
                resolution_time: time,
                resolution_size: size,
                resolution_distance: distance,
                fix_lines,
                fix_elsewhere,
            }
        })
        .collect())
}

/// One record per classified error, in series order.
pub fn compute_resolutions(
    linkage: &Linkage,
    store: &CorpusStore,
) -> Result<Vec<ResolutionRecord>, MetricsError> {
    let per_series: Vec<Vec<ResolutionRecord>> = linkage
        .series
        .par_iter()
        .map(|s| series_records(s, store))
        .collect::<Result<_, _>>()?;
    Ok(per_series.into_iter().flatten().collect())
}
