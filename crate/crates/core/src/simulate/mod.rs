//! Seeded generator of synthetic CI corpora with known ground truth.
//!
//! Every change stream draws from its own sub-seed, so streams are generated
//! in parallel without affecting the output bytes.

pub mod fixes;
pub mod messages;
pub mod scenario;

use std::collections::HashMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::distributions::{Distribution as _, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::ErrorType;
use crate::corpus::{
    render_patch, BuildRecord, CompileStatus, CorpusStore, FileChange, FileChangeKind, IngestError,
    Patch, BUILDS_FILE, LOGS_DIR, PATCHES_DIR,
};
use fixes::{choose_shape, place, text_hunk, Placement};
pub use scenario::{reference_mixture, Distribution, ScenarioSpec, DEFAULT_SIZE_WEIGHTS};

pub const MANIFEST_FILE: &str = "manifest.jsonl";

/// Attempts at drawing a file length and error line that fit a fix.
const PLACEMENT_ATTEMPTS: usize = 256;
const MAX_EXTRA_FAILURES: u32 = 4;
const MODULES: &[&str] = &[
    "radio",
    "baseband",
    "transport",
    "platform",
    "oam",
    "timing",
];

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
    #[error("series {series}: no file layout fits size {size} at distance {distance}")]
    Infeasible {
        series: usize,
        size: u64,
        distance: u64,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// What the generator planted for one failure series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesTruth {
    pub change_id: String,
    pub failing_build_ids: Vec<String>,
    pub fixing_build_id: String,
    pub error_type: ErrorType,
    pub message: String,
    /// File the compiler reports, as printed in the log.
    pub file: Option<String>,
    pub error_line: Option<u32>,
    /// Length of the faulty file before the fix.
    pub file_length: Option<u32>,
    pub fix_lines: Vec<u32>,
    pub true_time: i64,
    pub true_size: u64,
    pub true_distance: Option<u64>,
}

impl SeriesTruth {
    /// The faulty file as the fixing patch expects to find it.
    pub fn pre_fix_source(&self) -> Option<Vec<String>> {
        let (len, e) = (self.file_length?, self.error_line?);
        Some(
            (1..=len)
                .map(|n| {
                    if n == e {
                        messages::broken_line(n)
                    } else {
                        messages::source_line(n)
                    }
                })
                .collect(),
        )
    }
}

/// Build ids of one change stream in emission order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamTruth {
    pub change_id: String,
    pub build_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroundTruthManifest {
    pub series: Vec<SeriesTruth>,
    pub streams: Vec<StreamTruth>,
    /// Trailing failing runs that were never fixed.
    pub unresolved_runs: usize,
}

/// A generated corpus held in memory.
#[derive(Debug, Clone, Default)]
pub struct SyntheticCorpus {
    /// Sorted by start time, then build id.
    pub builds: Vec<BuildRecord>,
    pub patches: Vec<(String, Patch)>,
    /// `(log_ref, text)`.
    pub logs: Vec<(String, String)>,
    pub manifest: GroundTruthManifest,
}

#[derive(Default)]
struct StreamOutput {
    builds: Vec<BuildRecord>,
    patches: Vec<(String, Patch)>,
    logs: Vec<(String, String)>,
    series: Vec<SeriesTruth>,
    unresolved: bool,
}

struct Stream<'a> {
    spec: &'a ScenarioSpec,
    rng: ChaCha8Rng,
    index: usize,
    change_id: String,
    module: &'static str,
    clock: i64,
    seq: u32,
    out: StreamOutput,
}

enum FixPlan {
    Text {
        len: u32,
        error_line: u32,
        placement: Placement,
    },
    Metadata {
        len: u32,
        error_line: u32,
        binary: bool,
    },
    Link,
}

impl<'a> Stream<'a> {
    fn emit(&mut self, status: CompileStatus, patch: Patch, log: String, at: i64) -> String {
        let build_id = format!("b{:06}-{:04}", self.index, self.seq);
        let patch_id = format!("p{:06}-{:04}", self.index, self.seq);
        self.seq += 1;
        let log_ref = format!("{LOGS_DIR}/{build_id}.log");
        self.out.builds.push(BuildRecord {
            build_id: build_id.clone(),
            change_id: self.change_id.clone(),
            patch_id: patch_id.clone(),
            start_time: at,
            compile_status: status,
            log_ref: log_ref.clone(),
        });
        self.out
            .patches
            .push((patch_id.clone(), Patch { patch_id, ..patch }));
        self.out.logs.push((log_ref, log));
        self.clock = at;
        build_id
    }

    fn pass_build(&mut self) {
        let at = self.clock + self.rng.gen_range(0..=3_600);
        let tag = self.seq;
        let patch = single_file(
            self.side_change(&format!("docs/{}/notes_{tag}.md", self.module), 1 + tag % 3),
        );
        let log = messages::pass_log(self.module);
        self.emit(CompileStatus::Pass, patch, log, at);
    }

    /// A text edit to an unrelated 40-line file.
    fn side_change(&mut self, path: &str, size: u32) -> FileChange {
        let shape = choose_shape(&mut self.rng, u64::from(size));
        let p = Placement {
            start: self.rng.gen_range(1..=40 - shape.0),
            dels: shape.0,
            adds: shape.1,
        };
        let seq = self.seq;
        FileChange {
            path: path.to_string(),
            kind: FileChangeKind::Text,
            hunks: vec![text_hunk(
                p,
                40,
                |n| format!("line {n}"),
                |k| format!("update {seq}.{k}"),
            )],
        }
    }

    fn distractor(&mut self, series: usize) -> FileChange {
        let m = self.module;
        match self.rng.gen_range(0..3) {
            0 => {
                let size = self.rng.gen_range(1..5);
                self.side_change(&format!("include/{m}/unit_{series}.h"), size)
            }
            1 => FileChange {
                path: format!("assets/{m}/calibration_{series}.bin"),
                kind: FileChangeKind::Binary,
                hunks: Vec::new(),
            },
            _ => FileChange {
                path: format!("scripts/{m}_flash_{series}.sh"),
                kind: FileChangeKind::ModeOnly,
                hunks: Vec::new(),
            },
        }
    }

    fn draw_layout(&mut self) -> Option<(u32, u32)> {
        for _ in 0..PLACEMENT_ATTEMPTS {
            let len = clamp_u32(self.spec.file_length_model.sample(&mut self.rng)).max(1);
            let e = match &self.spec.error_line_model {
                Some(m) => clamp_u32(m.sample(&mut self.rng)),
                None => self.rng.gen_range(1..=len),
            };
            if (1..=len).contains(&e) {
                return Some((len, e));
            }
        }
        None
    }

    fn plan_fix(
        &mut self,
        series: usize,
        error_type: ErrorType,
        size: u64,
        distance: u64,
    ) -> Result<FixPlan, SimulateError> {
        if error_type == ErrorType::LdReturned {
            return Ok(FixPlan::Link);
        }
        let infeasible = SimulateError::Infeasible {
            series,
            size,
            distance,
        };
        if size == 0 {
            let (len, error_line) = self.draw_layout().ok_or(infeasible)?;
            let binary = self.rng.gen_bool(0.5);
            return Ok(FixPlan::Metadata {
                len,
                error_line,
                binary,
            });
        }
        let shape = choose_shape(&mut self.rng, size);
        for _ in 0..PLACEMENT_ATTEMPTS {
            let Some((len, error_line)) = self.draw_layout() else {
                break;
            };
            if let Some(placement) = place(&mut self.rng, shape, distance, len, error_line) {
                return Ok(FixPlan::Text {
                    len,
                    error_line,
                    placement,
                });
            }
        }
        Err(infeasible)
    }

    /// Library edits spread over up to three build files, `size` lines in total.
    fn link_fix(&mut self, series: usize, size: u64) -> Vec<FileChange> {
        let m = self.module;
        if size == 0 {
            return vec![FileChange {
                path: format!("lib/{m}/libstub_{series}.a"),
                kind: FileChangeKind::Binary,
                hunks: Vec::new(),
            }];
        }
        let parts = self.rng.gen_range(1..=size.min(3));
        let mut left = size;
        (0..parts)
            .map(|i| {
                let part = if i + 1 == parts {
                    left
                } else {
                    self.rng.gen_range(1..=left - (parts - i - 1))
                };
                left -= part;
                let path = match i {
                    0 => format!("{m}/CMakeLists.txt"),
                    1 => format!("{m}/deps_{series}.cmake"),
                    _ => format!("cmake/{m}_link_{series}.cmake"),
                };
                let shape = choose_shape(&mut self.rng, part);
                let len = 60 + clamp_u32(part);
                let p = Placement {
                    start: self.rng.gen_range(1..=len - shape.0),
                    dels: shape.0,
                    adds: shape.1,
                };
                FileChange {
                    path,
                    kind: FileChangeKind::Text,
                    hunks: vec![text_hunk(
                        p,
                        len,
                        |n| format!("  {m}_dep_{n}"),
                        |k| format!("  target_link_libraries({m} PRIVATE dep_{series}_{k})"),
                    )],
                }
            })
            .collect()
    }

    fn failing_log(
        &mut self,
        error_type: ErrorType,
        message: &str,
        file: &str,
        error_line: u32,
    ) -> String {
        let mut log = if error_type == ErrorType::LdReturned {
            messages::linker_log(&mut self.rng, self.module)
        } else {
            let fatal = error_type == ErrorType::NoSuchFileOrDirectory;
            let text = messages::broken_line(error_line);
            messages::located_log(
                &mut self.rng,
                self.module,
                file,
                error_line,
                &text,
                message,
                fatal,
                None,
            )
        };
        if self.rng.gen_bool(0.05) {
            log = log.replace('\n', "\r\n");
        }
        log
    }

    /// Log of an earlier attempt that failed for an unrelated reason.
    fn earlier_log(&mut self, series: usize) -> String {
        let t = ErrorType::CLASSIFIED[self.rng.gen_range(0..ErrorType::CLASSIFIED.len())];
        let msg = messages::message_for(&mut self.rng, Some(t));
        let file = format!("src/{}/helper_{series}.cpp", self.module);
        let line = self.rng.gen_range(1..200);
        self.failing_log(t, &msg, &file, line)
    }

    fn series(
        &mut self,
        series: usize,
        mixture: &WeightedIndex<f64>,
        types: &[ErrorType],
    ) -> Result<(), SimulateError> {
        let spec = self.spec;
        let error_type = if self.rng.gen_bool(spec.alien_message_prob) {
            ErrorType::Unclassified
        } else {
            types[mixture.sample(&mut self.rng)]
        };
        let message = messages::message_for(&mut self.rng, Some(error_type));
        let delay = i64::try_from(spec.delay_model.sample(&mut self.rng)).unwrap_or(i64::MAX / 4);
        let size = spec.size_model.sample(&mut self.rng);
        let distance = spec.distance_model.sample(&mut self.rng);
        let plan = self.plan_fix(series, error_type, size, distance)?;

        let repo_path = format!("src/{}/unit_{series}.cpp", self.module);
        let printed_path = if self.rng.gen_bool(0.1) {
            format!("/workspace/repo/{repo_path}")
        } else {
            repo_path.clone()
        };
        let (len, error_line) = match plan {
            FixPlan::Text {
                len, error_line, ..
            }
            | FixPlan::Metadata {
                len, error_line, ..
            } => (Some(len), Some(error_line)),
            FixPlan::Link => (None, None),
        };

        let mut extra = 0;
        while extra < MAX_EXTRA_FAILURES && self.rng.gen_bool(spec.extra_fail_prob) {
            extra += 1;
        }
        let mut failing_build_ids = Vec::new();
        let mut at = self.clock + self.rng.gen_range(0..=1_800);
        for k in 0..=extra {
            let last = k == extra;
            let patch = if k == 0 {
                match error_line {
                    Some(e) => single_file(breaking_change(&repo_path, len.expect("layout"), e)),
                    None => {
                        single_file(self.side_change(&format!("src/{}/main.cpp", self.module), 2))
                    }
                }
            } else {
                single_file(
                    self.side_change(&format!("src/{}/helper_{series}.cpp", self.module), 1),
                )
            };
            let log = if last {
                self.failing_log(error_type, &message, &printed_path, error_line.unwrap_or(0))
            } else {
                self.earlier_log(series)
            };
            failing_build_ids.push(self.emit(CompileStatus::Fail, patch, log, at));
            if !last {
                at += self.rng.gen_range(0..=7_200);
            }
        }

        let mut changes = Vec::new();
        let mut fix_lines = Vec::new();
        let mut true_distance = None;
        match plan {
            FixPlan::Text {
                len,
                error_line,
                placement,
            } => {
                let hunk = text_hunk(
                    placement,
                    len,
                    |n| {
                        if n == error_line {
                            messages::broken_line(n)
                        } else {
                            messages::source_line(n)
                        }
                    },
                    |k| messages::fix_line(series, u64::from(k)),
                );
                changes.push(FileChange {
                    path: repo_path.clone(),
                    kind: FileChangeKind::Text,
                    hunks: vec![hunk],
                });
                fix_lines = placement.fix_lines();
                true_distance = Some(distance);
            }
            FixPlan::Metadata { binary, .. } => changes.push(FileChange {
                path: repo_path.clone(),
                kind: if binary {
                    FileChangeKind::Binary
                } else {
                    FileChangeKind::ModeOnly
                },
                hunks: Vec::new(),
            }),
            FixPlan::Link => changes = self.link_fix(series, size),
        }
        // the whole patch counts for linker errors, so only located fixes get distractors
        if error_type != ErrorType::LdReturned && self.rng.gen_bool(spec.distractor_prob) {
            let d = self.distractor(series);
            changes.push(d);
        }
        let fix_at = at.saturating_add(delay);
        let fixing_build_id = self.emit(
            CompileStatus::Pass,
            Patch {
                patch_id: String::new(),
                file_changes: changes,
            },
            messages::pass_log(self.module),
            fix_at,
        );

        self.out.series.push(SeriesTruth {
            change_id: self.change_id.clone(),
            failing_build_ids,
            fixing_build_id,
            error_type,
            message,
            file: error_line.map(|_| printed_path),
            error_line,
            file_length: len,
            fix_lines,
            true_time: delay,
            true_size: size,
            true_distance,
        });
        Ok(())
    }

    fn unresolved_tail(&mut self, series: usize) {
        let runs = self.rng.gen_range(1..=2);
        for _ in 0..runs {
            let at = self.clock + self.rng.gen_range(0..=3_600);
            let patch =
                single_file(self.side_change(&format!("src/{}/wip_{series}.cpp", self.module), 2));
            let log = self.earlier_log(series);
            self.emit(CompileStatus::Fail, patch, log, at);
        }
        self.out.unresolved = true;
    }
}

fn clamp_u32(v: u64) -> u32 {
    u32::try_from(v).unwrap_or(u32::MAX)
}

fn single_file(fc: FileChange) -> Patch {
    Patch {
        patch_id: String::new(),
        file_changes: vec![fc],
    }
}

/// The edit that turns line `e` into the broken line.
fn breaking_change(path: &str, len: u32, e: u32) -> FileChange {
    let hunk = text_hunk(
        Placement {
            start: e,
            dels: 1,
            adds: 1,
        },
        len,
        messages::source_line,
        |_| messages::broken_line(e),
    );
    FileChange {
        path: path.to_string(),
        kind: FileChangeKind::Text,
        hunks: vec![hunk],
    }
}

/// Generates a corpus in memory.
pub fn generate(spec: &ScenarioSpec) -> Result<SyntheticCorpus, SimulateError> {
    spec.validate().map_err(SimulateError::InvalidSpec)?;
    let (types, weights): (Vec<ErrorType>, Vec<f64>) =
        spec.type_mixture.iter().map(|(t, w)| (*t, *w)).unzip();
    let mixture =
        WeightedIndex::new(&weights).map_err(|e| SimulateError::InvalidSpec(e.to_string()))?;

    // stream layout and sub-seeds are drawn sequentially from the master seed
    let mut master = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut plan = Vec::new();
    let mut assigned = 0;
    while assigned < spec.n_series {
        let n = (spec.series_per_change.sample(&mut master) as usize)
            .clamp(1, spec.n_series - assigned);
        plan.push((assigned, n, master.gen::<u64>()));
        assigned += n;
    }

    let outputs: Vec<StreamOutput> = plan
        .par_iter()
        .enumerate()
        .map(|(index, &(first, n, seed))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let change_id = format!("I{index:08x}{:032x}", rng.gen::<u128>());
            let clock = spec.start_epoch + rng.gen_range(0..30 * 86_400);
            let mut stream = Stream {
                spec,
                rng,
                index,
                change_id,
                module: MODULES[index % MODULES.len()],
                clock,
                seq: 0,
                out: StreamOutput::default(),
            };
            if stream.rng.gen_bool(0.5) {
                stream.pass_build();
            }
            for s in first..first + n {
                stream.series(s, &mixture, &types)?;
                if stream.rng.gen_bool(0.2) {
                    stream.pass_build();
                }
            }
            if stream.rng.gen_bool(spec.unresolved_prob) {
                stream.unresolved_tail(first + n - 1);
            }
            Ok(stream.out)
        })
        .collect::<Result<_, SimulateError>>()?;

    let mut corpus = SyntheticCorpus::default();
    for out in outputs {
        corpus.manifest.streams.push(StreamTruth {
            change_id: out.builds[0].change_id.clone(),
            build_ids: out.builds.iter().map(|b| b.build_id.clone()).collect(),
        });
        corpus.manifest.series.extend(out.series);
        corpus.manifest.unresolved_runs += usize::from(out.unresolved);
        corpus.builds.extend(out.builds);
        corpus.patches.extend(out.patches);
        corpus.logs.extend(out.logs);
    }
    corpus
        .builds
        .sort_by(|a, b| (a.start_time, &a.build_id).cmp(&(b.start_time, &b.build_id)));
    Ok(corpus)
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> SimulateError + '_ {
    move |source| SimulateError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), SimulateError> {
    fs::write(path, contents).map_err(io_err(path))
}

impl SyntheticCorpus {
    /// The store [`crate::corpus::ingest`] would build from the written corpus.
    pub fn to_store(&self) -> Result<CorpusStore, IngestError> {
        let fail_logs: HashMap<&str, &str> = self
            .builds
            .iter()
            .filter(|b| b.is_fail())
            .map(|b| (b.log_ref.as_str(), b.build_id.as_str()))
            .collect();
        let logs = self
            .logs
            .iter()
            .filter_map(|(log_ref, text)| {
                fail_logs
                    .get(log_ref.as_str())
                    .map(|id| (id.to_string(), text.clone()))
            })
            .collect();
        CorpusStore::from_parts(
            self.builds.clone(),
            self.patches.iter().cloned().collect(),
            logs,
        )
    }

    /// Writes `builds.jsonl`, `patches/`, `logs/` and `manifest.jsonl`.
    pub fn write_to(&self, out_dir: &Path) -> Result<(), SimulateError> {
        for dir in [
            out_dir.to_path_buf(),
            out_dir.join(PATCHES_DIR),
            out_dir.join(LOGS_DIR),
        ] {
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        }
        let builds_path = out_dir.join(BUILDS_FILE);
        let mut lines = String::new();
        for b in &self.builds {
            lines.push_str(&serde_json::to_string(b).expect("build records serialize"));
            lines.push('\n');
        }
        write_file(&builds_path, lines.as_bytes())?;

        self.patches.par_iter().try_for_each(|(id, patch)| {
            write_file(
                &out_dir.join(PATCHES_DIR).join(format!("{id}.diff")),
                render_patch(patch).as_bytes(),
            )
        })?;
        self.logs
            .par_iter()
            .try_for_each(|(log_ref, text)| write_file(&out_dir.join(log_ref), text.as_bytes()))?;

        let manifest_path = out_dir.join(MANIFEST_FILE);
        let file = fs::File::create(&manifest_path).map_err(io_err(&manifest_path))?;
        let mut w = BufWriter::new(file);
        for s in &self.manifest.series {
            serde_json::to_writer(&mut w, s).map_err(|e| io_err(&manifest_path)(e.into()))?;
            w.write_all(b"\n").map_err(io_err(&manifest_path))?;
        }
        w.flush().map_err(io_err(&manifest_path))
    }
}

/// Reads a `manifest.jsonl` written by [`SyntheticCorpus::write_to`].
pub fn read_manifest(path: &Path) -> Result<Vec<SeriesTruth>, SimulateError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| io_err(path)(e.into())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CompileStatus;

    fn small(seed: u64, n: usize) -> ScenarioSpec {
        ScenarioSpec {
            seed,
            n_series: n,
            ..ScenarioSpec::default()
        }
    }

    #[test]
    fn series_count_matches_request() {
        let c = generate(&small(4, 57)).unwrap();
        assert_eq!(c.manifest.series.len(), 57);
        assert_eq!(c.builds.len(), c.patches.len());
        assert_eq!(c.builds.len(), c.logs.len());
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate(&small(9, 40)).unwrap();
        let b = generate(&small(9, 40)).unwrap();
        assert_eq!(a.builds, b.builds);
        assert_eq!(a.manifest, b.manifest);
        assert_ne!(a.builds, generate(&small(10, 40)).unwrap().builds);
    }

    #[test]
    fn streams_end_with_fix_unless_unresolved() {
        let c = generate(&small(2, 80)).unwrap();
        let status: std::collections::HashMap<_, _> = c
            .builds
            .iter()
            .map(|b| (b.build_id.as_str(), b.compile_status))
            .collect();
        for s in &c.manifest.streams {
            let last = s.build_ids.last().unwrap();
            assert_eq!(status[last.as_str()], CompileStatus::Pass);
        }
    }

    #[test]
    fn forced_layout() {
        let spec = ScenarioSpec {
            n_series: 20,
            type_mixture: [(ErrorType::WasNotDeclared, 1.0)].into_iter().collect(),
            size_model: Distribution::Fixed { value: 2 },
            distance_model: Distribution::Fixed { value: 2 },
            error_line_model: Some(Distribution::Fixed { value: 42 }),
            ..ScenarioSpec::default()
        };
        for s in generate(&spec).unwrap().manifest.series {
            assert_eq!(s.error_line, Some(42));
            assert_eq!(s.true_distance, Some(2));
            assert!(
                s.fix_lines.contains(&40) || s.fix_lines.contains(&44),
                "{:?}",
                s.fix_lines
            );
        }
    }

    #[test]
    fn infeasible_layout_is_an_error() {
        let spec = ScenarioSpec {
            n_series: 1,
            type_mixture: [(ErrorType::WasNotDeclared, 1.0)].into_iter().collect(),
            size_model: Distribution::Fixed { value: 1 },
            distance_model: Distribution::Fixed { value: 500 },
            file_length_model: Distribution::Fixed { value: 100 },
            ..ScenarioSpec::default()
        };
        assert!(matches!(
            generate(&spec),
            Err(SimulateError::Infeasible { .. })
        ));
    }
}
