//! Machine-readable report: `report.json` plus CSV tables.
//!
//! Floats are rounded to six significant digits so reruns and platforms
//! agree byte for byte.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::classify::{ErrorClass, ErrorType};
use crate::link::Linkage;
use crate::metrics::ResolutionRecord;
use crate::stats::{
    self, correlation_table, distance_bin_label, distributions, heatmap, size_bin_label, top_types,
    Correlation, CorrelationRow, FiveNumberSummary, HeatmapGrid, DISTANCE_BINS, SIZE_BINS,
};

pub const REPORT_FILE: &str = "report.json";
pub const DEFAULT_TOP_K: usize = 4;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReportOptions {
    pub top_k: usize,
    /// Summarize resolution time min-max normalized to `[0, 1]`.
    pub normalize_time: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            top_k: DEFAULT_TOP_K,
            normalize_time: false,
        }
    }
}

/// Rounds to six significant digits.
pub fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.5e}").parse().expect("formatted float parses")
}

/// Six-significant-digit text without exponent notation.
pub fn fmt_sig6(x: f64) -> String {
    sig6(x).to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Totals {
    pub records: usize,
    pub series: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeRow {
    pub error_type: ErrorType,
    pub class: ErrorClass,
    pub count: u64,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassRow {
    pub class: ErrorClass,
    pub count: u64,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeBinRow {
    pub size_bin: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeSummary {
    pub error_type: ErrorType,
    pub count: usize,
    pub time: Option<FiveNumberSummary<f64>>,
    pub size: Option<FiveNumberSummary<f64>>,
    /// Over records with a defined distance only.
    pub distance: Option<FiveNumberSummary<f64>>,
    pub distance_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Anomalies {
    pub unresolved_series: usize,
    pub no_diagnostic_series: usize,
    pub fix_elsewhere: usize,
    pub undefined_distance: usize,
    pub unclassified: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptionsEcho {
    pub top_k: usize,
    pub normalize_time: bool,
    pub whiskers: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub corpus_digest: String,
    pub generated_with: String,
    pub totals: Totals,
    pub type_distribution: Vec<TypeRow>,
    pub class_distribution: Vec<ClassRow>,
    pub size_histogram: Vec<SizeBinRow>,
    pub per_type_summaries: Vec<TypeSummary>,
    pub correlations: Vec<CorrelationRow<f64>>,
    pub heatmaps: Vec<HeatmapGrid>,
    pub anomalies: Anomalies,
    pub options: OptionsEcho,
    pub warnings: Vec<String>,
}

fn summary(values: &[f64]) -> Option<FiveNumberSummary<f64>> {
    stats::quartiles(values).ok().map(|s| s.map(sig6))
}

fn round_corr(c: Correlation<f64>) -> Correlation<f64> {
    match c {
        Correlation::Defined(v) => Correlation::Defined(sig6(v)),
        u => u,
    }
}

/// Assembles the report from resolution records.
pub fn build_report(
    records: &[ResolutionRecord],
    linkage: &Linkage,
    corpus_digest: &str,
    options: &ReportOptions,
) -> Report {
    let mut warnings = Vec::new();
    if records.is_empty() {
        warnings.push("no resolution records; every section is empty".to_string());
    }
    let dist = distributions::<f64>(records);
    let times: Vec<f64> = if options.normalize_time {
        stats::normalize_times(records)
    } else {
        records.iter().map(|r| r.resolution_time as f64).collect()
    };

    let per_type_summaries = ErrorType::ALL
        .into_iter()
        .filter_map(|t| {
            let idx: Vec<usize> = (0..records.len())
                .filter(|&i| records[i].error.error_type == t)
                .collect();
            if idx.is_empty() {
                return None;
            }
            let time: Vec<f64> = idx.iter().map(|&i| times[i]).collect();
            let size: Vec<f64> = idx
                .iter()
                .map(|&i| records[i].resolution_size as f64)
                .collect();
            let distance: Vec<f64> = idx
                .iter()
                .filter_map(|&i| records[i].resolution_distance.map(|d| d as f64))
                .collect();
            Some(TypeSummary {
                error_type: t,
                count: idx.len(),
                time: summary(&time),
                size: summary(&size),
                distance: summary(&distance),
                distance_count: distance.len(),
            })
        })
        .collect();

    let correlations: Vec<CorrelationRow<f64>> = correlation_table::<f64>(records, options.top_k)
        .into_iter()
        .map(|row| {
            if !row.distance_size.is_defined()
                || !row.distance_time.is_defined()
                || !row.size_time.is_defined()
            {
                warnings.push(format!(
                    "{}: some correlations are undefined ({} usable records)",
                    row.error_type, row.sample_count
                ));
            }
            CorrelationRow {
                distance_size: round_corr(row.distance_size),
                distance_time: round_corr(row.distance_time),
                size_time: round_corr(row.size_time),
                ..row
            }
        })
        .collect();

    Report {
        corpus_digest: corpus_digest.to_string(),
        generated_with: format!("shadowjob {}", env!("CARGO_PKG_VERSION")),
        totals: Totals {
            records: records.len(),
            series: linkage.series.len(),
        },
        type_distribution: dist
            .types
            .iter()
            .map(|t| TypeRow {
                error_type: t.error_type,
                class: t.class,
                count: t.count,
                percent: sig6(t.percent),
            })
            .collect(),
        class_distribution: dist
            .classes
            .iter()
            .map(|c| ClassRow {
                class: c.class,
                count: c.count,
                percent: sig6(c.percent),
            })
            .collect(),
        size_histogram: dist
            .size_histogram
            .iter()
            .enumerate()
            .map(|(bin, &count)| SizeBinRow {
                size_bin: size_bin_label(bin),
                count,
            })
            .collect(),
        per_type_summaries,
        correlations,
        heatmaps: top_types(records, options.top_k)
            .into_iter()
            .map(|t| heatmap(records, t))
            .collect(),
        anomalies: Anomalies {
            unresolved_series: linkage.unresolved.len(),
            no_diagnostic_series: linkage.no_diagnostic_count(),
            fix_elsewhere: records.iter().filter(|r| r.fix_elsewhere).count(),
            undefined_distance: records
                .iter()
                .filter(|r| r.resolution_distance.is_none())
                .count(),
            unclassified: records
                .iter()
                .filter(|r| r.error.error_type == ErrorType::Unclassified)
                .count(),
        },
        options: OptionsEcho {
            top_k: options.top_k,
            normalize_time: options.normalize_time,
            whiskers: "min-max",
        },
        warnings,
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, ReportError> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|source| ReportError::Csv {
            path: path.to_path_buf(),
            source,
        })
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), ReportError> {
    let wrap = |source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(row).map_err(wrap)?;
    }
    w.flush().map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn corr_cell(c: &Correlation<f64>) -> String {
    c.value().map_or_else(|| "NA".to_string(), fmt_sig6)
}

fn summary_cells(s: &Option<FiveNumberSummary<f64>>) -> Vec<String> {
    match s {
        Some(s) => s.as_array().iter().map(|&v| fmt_sig6(v)).collect(),
        None => vec!["NA".to_string(); 5],
    }
}

/// Writes `report.json` and the CSV tables into `out_dir`.
pub fn write_report(
    report: &Report,
    records: &[ResolutionRecord],
    out_dir: &Path,
) -> Result<(), ReportError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ReportError::Io { path, source }
    };
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let json_path = out_dir.join(REPORT_FILE);
    let mut json = serde_json::to_string_pretty(report).expect("report serializes");
    json.push('\n');
    fs::write(&json_path, json).map_err(io_err(&json_path))?;

    write_csv(
        &out_dir.join("types.csv"),
        &strings(&["error_type", "class", "count", "percent"]),
        &report
            .type_distribution
            .iter()
            .map(|t| {
                vec![
                    t.error_type.to_string(),
                    t.class.name().to_string(),
                    t.count.to_string(),
                    fmt_sig6(t.percent),
                ]
            })
            .collect::<Vec<_>>(),
    )?;
    write_csv(
        &out_dir.join("classes.csv"),
        &strings(&["class", "count", "percent"]),
        &report
            .class_distribution
            .iter()
            .map(|c| {
                vec![
                    c.class.name().to_string(),
                    c.count.to_string(),
                    fmt_sig6(c.percent),
                ]
            })
            .collect::<Vec<_>>(),
    )?;
    write_csv(
        &out_dir.join("size_histogram.csv"),
        &strings(&["size_bin", "count"]),
        &report
            .size_histogram
            .iter()
            .map(|b| vec![b.size_bin.clone(), b.count.to_string()])
            .collect::<Vec<_>>(),
    )?;

    let mut rows = Vec::new();
    for s in &report.per_type_summaries {
        for (attr, summ, n) in [
            ("time", &s.time, s.count),
            ("size", &s.size, s.count),
            ("distance", &s.distance, s.distance_count),
        ] {
            let mut row = vec![s.error_type.to_string(), attr.to_string(), n.to_string()];
            row.extend(summary_cells(summ));
            rows.push(row);
        }
    }
    write_csv(
        &out_dir.join("summaries.csv"),
        &strings(&[
            "error_type",
            "attribute",
            "count",
            "min",
            "q1",
            "median",
            "q3",
            "max",
        ]),
        &rows,
    )?;

    write_csv(
        &out_dir.join("correlations.csv"),
        &strings(&[
            "error_type",
            "distance_size",
            "distance_time",
            "size_time",
            "sample_count",
        ]),
        &report
            .correlations
            .iter()
            .map(|r| {
                vec![
                    r.error_type.to_string(),
                    corr_cell(&r.distance_size),
                    corr_cell(&r.distance_time),
                    corr_cell(&r.size_time),
                    r.sample_count.to_string(),
                ]
            })
            .collect::<Vec<_>>(),
    )?;

    for grid in &report.heatmaps {
        let mut header = vec!["distance_bin".to_string()];
        header.extend((0..SIZE_BINS).map(size_bin_label));
        let rows: Vec<Vec<String>> = (0..DISTANCE_BINS)
            .map(|d| {
                let mut row = vec![distance_bin_label(d)];
                row.extend(grid.counts[d].iter().map(u64::to_string));
                row
            })
            .collect();
        write_csv(
            &out_dir.join(format!("heatmap_{}.csv", grid.error_type)),
            &header,
            &rows,
        )?;
    }

    write_csv(
        &out_dir.join("records.csv"),
        &strings(&[
            "change_id",
            "build_id",
            "fixing_build_id",
            "file",
            "line",
            "error_type",
            "class",
            "resolution_time",
            "resolution_size",
            "resolution_distance",
            "fix_elsewhere",
            "message",
        ]),
        &records
            .iter()
            .map(|r| {
                let d = &r.error.diagnostic;
                vec![
                    r.change_id.clone(),
                    d.build_id.clone(),
                    r.fixing_build_id.clone(),
                    d.file.clone().unwrap_or_default(),
                    d.line.map(|l| l.to_string()).unwrap_or_default(),
                    r.error.error_type.to_string(),
                    r.error.error_class.name().to_string(),
                    r.resolution_time.to_string(),
                    r.resolution_size.to_string(),
                    r.resolution_distance
                        .map_or_else(|| "NA".to_string(), |v| v.to_string()),
                    r.fix_elsewhere.to_string(),
                    d.message.clone(),
                ]
            })
            .collect::<Vec<_>>(),
    )
}

/// Builds the report and writes it to `out_dir`.
pub fn render_report(
    records: &[ResolutionRecord],
    linkage: &Linkage,
    corpus_digest: &str,
    options: &ReportOptions,
    out_dir: &Path,
) -> Result<Report, ReportError> {
    let report = build_report(records, linkage, corpus_digest, options);
    write_report(&report, records, out_dir)?;
    Ok(report)
}

fn num(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::Null => "NA".to_string(),
        other => other.to_string(),
    }
}

/// Plain-text overview of a `report.json` document.
pub fn text_summary(report: &serde_json::Value) -> String {
    let mut out = String::new();
    let get = |k: &str| &report[k];
    out.push_str(&format!(
        "corpus {}\n{} records from {} failure series\n\n",
        get("corpus_digest").as_str().unwrap_or("?"),
        num(&get("totals")["records"]),
        num(&get("totals")["series"]),
    ));
    out.push_str("error types\n");
    for t in get("type_distribution").as_array().into_iter().flatten() {
        if t["count"].as_u64().unwrap_or(0) > 0 {
            out.push_str(&format!(
                "  {:<26} {:<13} {:>7} {:>9}%\n",
                t["error_type"].as_str().unwrap_or("?"),
                t["class"].as_str().unwrap_or("?"),
                num(&t["count"]),
                num(&t["percent"]),
            ));
        }
    }
    out.push_str("\nclasses\n");
    for c in get("class_distribution").as_array().into_iter().flatten() {
        out.push_str(&format!(
            "  {:<13} {:>7} {:>9}%\n",
            c["class"].as_str().unwrap_or("?"),
            num(&c["count"]),
            num(&c["percent"]),
        ));
    }
    out.push_str("\ncorrelations (distance-size, distance-time, size-time)\n");
    for r in get("correlations").as_array().into_iter().flatten() {
        out.push_str(&format!(
            "  {:<26} {:>10} {:>10} {:>10}  n={}\n",
            r["error_type"].as_str().unwrap_or("?"),
            num(&r["distance_size"]),
            num(&r["distance_time"]),
            num(&r["size_time"]),
            num(&r["sample_count"]),
        ));
    }
    let a = get("anomalies");
    out.push_str(&format!(
        "\nunresolved {}, without diagnostics {}, fixed elsewhere {}, no distance {}, unclassified {}\n",
        num(&a["unresolved_series"]),
        num(&a["no_diagnostic_series"]),
        num(&a["fix_elsewhere"]),
        num(&a["undefined_distance"]),
        num(&a["unclassified"]),
    ));
    for w in get("warnings").as_array().into_iter().flatten() {
        out.push_str(&format!("warning: {}\n", w.as_str().unwrap_or("?")));
    }
    out
}
