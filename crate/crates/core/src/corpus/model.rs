//! Domain types for an ingested build corpus.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Outcome of the compilation stage of one CI build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompileStatus {
    Pass,
    Fail,
}

impl CompileStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CompileStatus::Pass => "pass",
            CompileStatus::Fail => "fail",
        }
    }
}

impl fmt::Display for CompileStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One CI invocation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildRecord {
    pub build_id: String,
    /// Review/change stream identity (Change-ID).
    pub change_id: String,
    pub patch_id: String,
    /// UTC epoch seconds.
    pub start_time: i64,
    pub compile_status: CompileStatus,
    /// Path of the raw log, relative to the corpus root.
    pub log_ref: String,
}

impl BuildRecord {
    pub fn is_fail(&self) -> bool {
        self.compile_status == CompileStatus::Fail
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FileChangeKind {
    Text,
    Binary,
    ModeOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineOp {
    Context,
    Add,
    Del,
}

impl LineOp {
    pub fn prefix(self) -> char {
        match self {
            LineOp::Context => ' ',
            LineOp::Add => '+',
            LineOp::Del => '-',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HunkLine {
    pub op: LineOp,
    pub text: String,
}

impl HunkLine {
    pub fn new(op: LineOp, text: impl Into<String>) -> Self {
        Self {
            op,
            text: text.into(),
        }
    }
}

/// A contiguous block of a unified diff with its old/new coordinates.
///
/// `old_start` is 0 only for hunks with an empty old side at the top of a
/// file (`@@ -0,0 +1,n @@`), matching what git emits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hunk {
    pub old_start: u32,
    pub old_count: u32,
    pub new_start: u32,
    pub new_count: u32,
    pub lines: Vec<HunkLine>,
}

impl Hunk {
    pub fn additions(&self) -> usize {
        self.lines.iter().filter(|l| l.op == LineOp::Add).count()
    }

    pub fn deletions(&self) -> usize {
        self.lines.iter().filter(|l| l.op == LineOp::Del).count()
    }

    /// Whether the op-line counts agree with the header counts.
    pub fn is_consistent(&self) -> bool {
        let old = self.lines.iter().filter(|l| l.op != LineOp::Add).count();
        let new = self.lines.iter().filter(|l| l.op != LineOp::Del).count();
        old == self.old_count as usize && new == self.new_count as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FileChange {
    pub path: String,
    pub kind: FileChangeKind,
    /// Always empty unless `kind` is `Text`.
    pub hunks: Vec<Hunk>,
}

impl FileChange {
    pub fn additions(&self) -> usize {
        self.hunks.iter().map(Hunk::additions).sum()
    }

    pub fn deletions(&self) -> usize {
        self.hunks.iter().map(Hunk::deletions).sum()
    }
}

/// A parsed unified diff.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Patch {
    pub patch_id: String,
    pub file_changes: Vec<FileChange>,
}

impl Patch {
    pub fn file(&self, path: &str) -> Option<&FileChange> {
        self.file_changes.iter().find(|fc| fc.path == path)
    }

    pub fn additions(&self) -> usize {
        self.file_changes.iter().map(FileChange::additions).sum()
    }

    pub fn deletions(&self) -> usize {
        self.file_changes.iter().map(FileChange::deletions).sum()
    }
}

/// Immutable in-memory view of an ingested corpus.
///
/// Builds are ordered by `(change_id, start_time, build_id)`.
#[derive(Debug, Clone, Default)]
pub struct CorpusStore {
    builds: Vec<BuildRecord>,
    patches: BTreeMap<String, Patch>,
    logs: BTreeMap<String, String>,
    digest: String,
}

impl CorpusStore {
    pub(crate) fn new(
        mut builds: Vec<BuildRecord>,
        patches: BTreeMap<String, Patch>,
        logs: BTreeMap<String, String>,
        digest: String,
    ) -> Self {
        builds.sort_by(|a, b| {
            (&a.change_id, a.start_time, &a.build_id).cmp(&(
                &b.change_id,
                b.start_time,
                &b.build_id,
            ))
        });
        Self {
            builds,
            patches,
            logs,
            digest,
        }
    }

    pub fn builds(&self) -> &[BuildRecord] {
        &self.builds
    }

    pub fn patches(&self) -> &BTreeMap<String, Patch> {
        &self.patches
    }

    pub fn patch(&self, patch_id: &str) -> Option<&Patch> {
        self.patches.get(patch_id)
    }

    pub fn logs(&self) -> &BTreeMap<String, String> {
        &self.logs
    }

    pub fn log(&self, build_id: &str) -> Option<&str> {
        self.logs.get(build_id).map(String::as_str)
    }

    /// SHA-256 over the canonicalized corpus contents, hex encoded.
    pub fn digest(&self) -> &str {
        &self.digest
    }

    /// Builds grouped by change stream, each group in time order.
    pub fn streams(&self) -> impl Iterator<Item = (&str, &[BuildRecord])> {
        self.builds
            .chunk_by(|a, b| a.change_id == b.change_id)
            .map(|chunk| (chunk[0].change_id.as_str(), chunk))
    }

    pub fn failed_count(&self) -> usize {
        self.builds.iter().filter(|b| b.is_fail()).count()
    }
}
