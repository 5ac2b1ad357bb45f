use std::fmt;

use serde::{Serialize, Serializer};

use super::{pearson, Correlation, Scalar, Undefined};
use crate::classify::{ErrorClass, ErrorType};
use crate::metrics::ResolutionRecord;

/// Size bins 0..=6 plus an open `>=7` bin.
pub const SIZE_BINS: usize = 8;
pub const DISTANCE_BIN_WIDTH: u64 = 10;
/// Ten 10-line bins covering `[0, 100)` plus an open `>=100` bin.
pub const DISTANCE_BINS: usize = 11;

pub fn size_bin(size: u64) -> usize {
    (size as usize).min(SIZE_BINS - 1)
}

pub fn distance_bin(distance: u64) -> usize {
    ((distance / DISTANCE_BIN_WIDTH) as usize).min(DISTANCE_BINS - 1)
}

pub fn size_bin_label(bin: usize) -> String {
    if bin + 1 >= SIZE_BINS {
        format!(">={}", SIZE_BINS - 1)
    } else {
        bin.to_string()
    }
}

pub fn distance_bin_label(bin: usize) -> String {
    let lo = bin as u64 * DISTANCE_BIN_WIDTH;
    if bin + 1 >= DISTANCE_BINS {
        format!(">={lo}")
    } else {
        format!("[{lo},{})", lo + DISTANCE_BIN_WIDTH)
    }
}

/// What a correlation row is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CorrelationSubject {
    Type(ErrorType),
    AllErrors,
}

impl fmt::Display for CorrelationSubject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorrelationSubject::Type(t) => f.write_str(t.name()),
            CorrelationSubject::AllErrors => f.write_str("AllErrors"),
        }
    }
}

impl Serialize for CorrelationSubject {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRow<T> {
    pub error_type: CorrelationSubject,
    pub distance_size: Correlation<T>,
    pub distance_time: Correlation<T>,
    pub size_time: Correlation<T>,
    pub sample_count: usize,
}

/// The `k` most frequent classified types, ties broken by taxonomy order.
pub fn top_types(records: &[ResolutionRecord], k: usize) -> Vec<ErrorType> {
    let mut counts = [0usize; ErrorType::CLASSIFIED.len()];
    for r in records {
        if r.error.error_type != ErrorType::Unclassified {
            counts[r.error.error_type.index()] += 1;
        }
    }
    let mut ranked: Vec<ErrorType> = ErrorType::CLASSIFIED
        .into_iter()
        .filter(|t| counts[t.index()] > 0)
        .collect();
    // stable sort keeps taxonomy order among equal counts
    ranked.sort_by_key(|t| std::cmp::Reverse(counts[t.index()]));
    ranked.truncate(k);
    ranked
}

fn correlation_row<'a, T: Scalar>(
    subject: CorrelationSubject,
    records: impl Iterator<Item = &'a ResolutionRecord>,
) -> CorrelationRow<T> {
    let (mut dist, mut size, mut time) = (Vec::new(), Vec::new(), Vec::new());
    for r in records {
        if let Some(d) = r.resolution_distance {
            dist.push(T::from_u64(d).expect("distance fits the scalar"));
            size.push(T::from_u64(r.resolution_size).expect("size fits the scalar"));
            time.push(T::from_i64(r.resolution_time).expect("time fits the scalar"));
        }
    }
    let n = dist.len();
    let coef = |a: &[T], b: &[T]| match pearson(a, b) {
        Ok(c) => c,
        Err(_) => Correlation::Undefined(Undefined::TooFewSamples),
    };
    CorrelationRow {
        error_type: subject,
        distance_size: coef(&dist, &size),
        distance_time: coef(&dist, &time),
        size_time: coef(&size, &time),
        sample_count: n,
    }
}

/// Pairwise correlations of distance, size and time for the `top_k` most
/// frequent types plus an all-errors row. Only records with every attribute
/// defined are used.
pub fn correlation_table<T: Scalar>(
    records: &[ResolutionRecord],
    top_k: usize,
) -> Vec<CorrelationRow<T>> {
    let mut rows: Vec<CorrelationRow<T>> = top_types(records, top_k)
        .into_iter()
        .map(|t| {
            correlation_row(
                CorrelationSubject::Type(t),
                records.iter().filter(|r| r.error.error_type == t),
            )
        })
        .collect();
    rows.push(correlation_row(
        CorrelationSubject::AllErrors,
        records.iter(),
    ));
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeShare<T> {
    pub error_type: ErrorType,
    pub class: ErrorClass,
    pub count: u64,
    pub percent: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassShare<T> {
    pub class: ErrorClass,
    pub count: u64,
    pub percent: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distributions<T> {
    pub total: u64,
    /// Every type including `Unclassified`, in taxonomy order.
    pub types: Vec<TypeShare<T>>,
    pub classes: Vec<ClassShare<T>>,
    /// Counts of resolution sizes 0..=6 and `>=7`.
    pub size_histogram: [u64; SIZE_BINS],
}

fn percent<T: Scalar>(count: u64, total: u64) -> T {
    if total == 0 {
        return T::zero();
    }
    T::from_u64(count).expect("count fits") * T::from_u64(100).expect("literal")
        / T::from_u64(total).expect("total fits")
}

/// Type and class frequencies plus the resolution size histogram.
pub fn distributions<T: Scalar>(records: &[ResolutionRecord]) -> Distributions<T> {
    let total = records.len() as u64;
    let mut type_counts = [0u64; ErrorType::ALL.len()];
    let mut class_counts = [0u64; ErrorClass::ALL.len()];
    let mut size_histogram = [0u64; SIZE_BINS];
    for r in records {
        type_counts[r.error.error_type.index()] += 1;
        class_counts[r.error.error_class as usize] += 1;
        size_histogram[size_bin(r.resolution_size)] += 1;
    }
    Distributions {
        total,
        types: ErrorType::ALL
            .into_iter()
            .map(|t| TypeShare {
                error_type: t,
                class: t.class(),
                count: type_counts[t.index()],
                percent: percent(type_counts[t.index()], total),
            })
            .collect(),
        classes: ErrorClass::ALL
            .into_iter()
            .map(|c| ClassShare {
                class: c,
                count: class_counts[c as usize],
                percent: percent(class_counts[c as usize], total),
            })
            .collect(),
        size_histogram,
    }
}

/// Size × distance counts for one error type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HeatmapGrid {
    pub error_type: ErrorType,
    /// `counts[distance_bin][size_bin]`.
    pub counts: Vec<Vec<u64>>,
    /// Records of this type without a defined distance.
    pub excluded: u64,
}

impl HeatmapGrid {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

pub fn heatmap(records: &[ResolutionRecord], error_type: ErrorType) -> HeatmapGrid {
    let mut counts = vec![vec![0u64; SIZE_BINS]; DISTANCE_BINS];
    let mut excluded = 0;
    for r in records.iter().filter(|r| r.error.error_type == error_type) {
        match r.resolution_distance {
            Some(d) => counts[distance_bin(d)][size_bin(r.resolution_size)] += 1,
            None => excluded += 1,
        }
    }
    HeatmapGrid {
        error_type,
        counts,
        excluded,
    }
}
