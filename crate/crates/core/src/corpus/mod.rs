//! Build corpus data model, diff parsing, and on-disk ingestion.

mod diff;
mod ingest;
mod model;

pub use diff::{parse_patch, render_patch, PatchParseError};
pub use ingest::{ingest, parse_build_line, IngestError, BUILDS_FILE, LOGS_DIR, PATCHES_DIR};
pub use model::{
    BuildRecord, CompileStatus, CorpusStore, FileChange, FileChangeKind, Hunk, HunkLine, LineOp,
    Patch,
};
