use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::io;
use std::path::{Component, Path, PathBuf};

use rayon::prelude::*;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::diff::{parse_patch, render_patch, PatchParseError};
use super::model::{BuildRecord, CompileStatus, CorpusStore, Patch};

pub const BUILDS_FILE: &str = "builds.jsonl";
pub const LOGS_DIR: &str = "logs";
pub const PATCHES_DIR: &str = "patches";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("no builds found in {0}")]
    NoBuilds(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{BUILDS_FILE} line {line}: {message}")]
    Json { line: usize, message: String },
    #[error("{BUILDS_FILE} line {line}: missing field build_id")]
    MissingBuildId { line: usize },
    #[error("{BUILDS_FILE} line {line}: build {build_id}: missing field {field}")]
    MissingField {
        line: usize,
        build_id: String,
        field: &'static str,
    },
    #[error("{BUILDS_FILE} line {line}: build {build_id}: invalid {field}: {reason}")]
    InvalidField {
        line: usize,
        build_id: String,
        field: &'static str,
        reason: String,
    },
    #[error("{BUILDS_FILE} line {line}: duplicate build_id {build_id}")]
    DuplicateBuild { line: usize, build_id: String },
    #[error("build {build_id}: patch {patch_id} not found ({path})")]
    DanglingPatch {
        build_id: String,
        patch_id: String,
        path: PathBuf,
    },
    #[error("build {build_id}: log {log_ref} is not readable: {source}")]
    MissingLog {
        build_id: String,
        log_ref: String,
        #[source]
        source: io::Error,
    },
    #[error("patch {patch_id}: {source}")]
    Patch {
        patch_id: String,
        #[source]
        source: PatchParseError,
    },
}

fn field_str(
    obj: &Map<String, Value>,
    line: usize,
    build_id: &str,
    field: &'static str,
) -> Result<String, IngestError> {
    match obj.get(field) {
        None | Some(Value::Null) => Err(IngestError::MissingField {
            line,
            build_id: build_id.to_string(),
            field,
        }),
        Some(Value::String(s)) => Ok(s.clone()),
        Some(other) => Err(IngestError::InvalidField {
            line,
            build_id: build_id.to_string(),
            field,
            reason: format!("expected string, got {other}"),
        }),
    }
}

fn is_contained_relative(p: &str) -> bool {
    let path = Path::new(p);
    !p.is_empty()
        && path
            .components()
            .all(|c| matches!(c, Component::Normal(_) | Component::CurDir))
}

/// Parses one non-empty line of `builds.jsonl` (1-based `line`).
pub fn parse_build_line(text: &str, line: usize) -> Result<BuildRecord, IngestError> {
    let value: Value = serde_json::from_str(text).map_err(|e| IngestError::Json {
        line,
        message: e.to_string(),
    })?;
    let Value::Object(obj) = value else {
        return Err(IngestError::Json {
            line,
            message: "expected a JSON object".into(),
        });
    };
    let build_id = match obj.get("build_id") {
        Some(Value::String(s)) if !s.is_empty() => s.clone(),
        _ => return Err(IngestError::MissingBuildId { line }),
    };
    let change_id = field_str(&obj, line, &build_id, "change_id")?;
    let patch_id = field_str(&obj, line, &build_id, "patch_id")?;
    if !is_contained_relative(&patch_id) || patch_id.contains(['/', '\\']) {
        return Err(IngestError::InvalidField {
            line,
            build_id,
            field: "patch_id",
            reason: format!("{patch_id:?} is not a plain file stem"),
        });
    }
    let start_time = match obj.get("start_time") {
        None | Some(Value::Null) => {
            return Err(IngestError::MissingField {
                line,
                build_id,
                field: "start_time",
            })
        }
        Some(v) => v.as_i64().ok_or_else(|| IngestError::InvalidField {
            line,
            build_id: build_id.clone(),
            field: "start_time",
            reason: format!("expected integer epoch seconds, got {v}"),
        })?,
    };
    let compile_status = match field_str(&obj, line, &build_id, "compile_status")?.as_str() {
        "pass" => CompileStatus::Pass,
        "fail" => CompileStatus::Fail,
        other => {
            return Err(IngestError::InvalidField {
                line,
                build_id,
                field: "compile_status",
                reason: format!("expected \"pass\" or \"fail\", got {other:?}"),
            })
        }
    };
    // passing builds are never read, so their log reference is optional
    let log_ref = match (compile_status, obj.get("log_ref")) {
        (CompileStatus::Pass, None | Some(Value::Null)) => String::new(),
        _ => field_str(&obj, line, &build_id, "log_ref")?,
    };
    if compile_status == CompileStatus::Fail && !is_contained_relative(&log_ref) {
        return Err(IngestError::InvalidField {
            line,
            build_id,
            field: "log_ref",
            reason: format!("{log_ref:?} must be a relative path inside the corpus"),
        });
    }
    Ok(BuildRecord {
        build_id,
        change_id,
        patch_id,
        start_time,
        compile_status,
        log_ref,
    })
}

fn read_text(path: &Path) -> io::Result<String> {
    let bytes = fs::read(path)?;
    String::from_utf8(bytes).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

/// Loads a corpus directory (`builds.jsonl`, `logs/`, `patches/`) into a store.
///
/// Patches and failed-build logs are read in parallel.
pub fn ingest(root: &Path) -> Result<CorpusStore, IngestError> {
    let builds_path = root.join(BUILDS_FILE);
    let text = match fs::read_to_string(&builds_path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            return Err(IngestError::NoBuilds(root.to_path_buf()))
        }
        Err(source) => {
            return Err(IngestError::Io {
                path: builds_path,
                source,
            })
        }
    };

    let mut builds = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let record = parse_build_line(raw, idx + 1)?;
        if !seen.insert(record.build_id.clone()) {
            return Err(IngestError::DuplicateBuild {
                line: idx + 1,
                build_id: record.build_id,
            });
        }
        builds.push(record);
    }
    if builds.is_empty() {
        return Err(IngestError::NoBuilds(root.to_path_buf()));
    }

    let patch_dir = root.join(PATCHES_DIR);
    let mut patch_owner: BTreeMap<&str, &str> = BTreeMap::new();
    for b in &builds {
        patch_owner.entry(&b.patch_id).or_insert(&b.build_id);
    }
    let loaded: Vec<(String, String, Patch)> = patch_owner
        .par_iter()
        .map(|(&patch_id, &build_id)| {
            let path = patch_dir.join(format!("{patch_id}.diff"));
            let raw = read_text(&path).map_err(|_| IngestError::DanglingPatch {
                build_id: build_id.to_string(),
                patch_id: patch_id.to_string(),
                path: path.clone(),
            })?;
            let patch = parse_patch(patch_id, &raw).map_err(|source| IngestError::Patch {
                patch_id: patch_id.to_string(),
                source,
            })?;
            Ok((patch_id.to_string(), raw, patch))
        })
        .collect::<Result<_, IngestError>>()?;

    let logs: Vec<(String, String)> = builds
        .par_iter()
        .filter(|b| b.is_fail())
        .map(|b| {
            let text =
                read_text(&root.join(&b.log_ref)).map_err(|source| IngestError::MissingLog {
                    build_id: b.build_id.clone(),
                    log_ref: b.log_ref.clone(),
                    source,
                })?;
            Ok((b.build_id.clone(), text))
        })
        .collect::<Result<_, IngestError>>()?;

    let digest = corpus_digest(&builds, &loaded, &logs);
    let mut patches = BTreeMap::new();
    for (id, _, patch) in loaded {
        patches.insert(id, patch);
    }
    let logs: BTreeMap<String, String> = logs.into_iter().collect();
    Ok(CorpusStore::new(builds, patches, logs, digest))
}

impl CorpusStore {
    /// Assembles a store from in-memory parts, enforcing the same
    /// referential checks as [`ingest`]. Patch text is hashed in rendered form.
    pub fn from_parts(
        builds: Vec<BuildRecord>,
        patches: BTreeMap<String, Patch>,
        logs: BTreeMap<String, String>,
    ) -> Result<CorpusStore, IngestError> {
        let mut seen = HashSet::new();
        for (idx, b) in builds.iter().enumerate() {
            if !seen.insert(b.build_id.as_str()) {
                return Err(IngestError::DuplicateBuild {
                    line: idx + 1,
                    build_id: b.build_id.clone(),
                });
            }
            if !patches.contains_key(&b.patch_id) {
                return Err(IngestError::DanglingPatch {
                    build_id: b.build_id.clone(),
                    patch_id: b.patch_id.clone(),
                    path: PathBuf::from(PATCHES_DIR).join(format!("{}.diff", b.patch_id)),
                });
            }
            if b.is_fail() && !logs.contains_key(&b.build_id) {
                return Err(IngestError::MissingLog {
                    build_id: b.build_id.clone(),
                    log_ref: b.log_ref.clone(),
                    source: io::Error::new(io::ErrorKind::NotFound, "no log text supplied"),
                });
            }
        }
        let rendered: Vec<(String, String, Patch)> = patches
            .into_iter()
            .map(|(id, p)| (id, render_patch(&p), p))
            .collect();
        let log_list: Vec<(String, String)> = logs.into_iter().collect();
        let digest = corpus_digest(&builds, &rendered, &log_list);
        Ok(CorpusStore::new(
            builds,
            rendered.into_iter().map(|(id, _, p)| (id, p)).collect(),
            log_list.into_iter().collect(),
            digest,
        ))
    }
}

/// Order-insensitive content hash of everything the analysis reads.
fn corpus_digest(
    builds: &[BuildRecord],
    patches: &[(String, String, Patch)],
    logs: &[(String, String)],
) -> String {
    let mut hasher = Sha256::new();
    let mut lines: BTreeSet<String> = BTreeSet::new();
    for b in builds {
        lines.insert(format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            b.build_id, b.change_id, b.patch_id, b.start_time, b.compile_status, b.log_ref
        ));
    }
    hasher.update(b"builds\n");
    for l in &lines {
        hasher.update(l.as_bytes());
    }
    let mut section = |name: &str, items: Vec<(&str, &str)>| {
        hasher.update(name.as_bytes());
        for (id, body) in items {
            hasher.update(format!("{id}\n{}\n", body.len()).as_bytes());
            hasher.update(body.as_bytes());
        }
    };
    let mut p: Vec<(&str, &str)> = patches
        .iter()
        .map(|(id, raw, _)| (id.as_str(), raw.as_str()))
        .collect();
    p.sort_unstable();
    section("patches\n", p);
    let mut l: Vec<(&str, &str)> = logs
        .iter()
        .map(|(id, t)| (id.as_str(), t.as_str()))
        .collect();
    l.sort_unstable();
    section("logs\n", l);
    hex::encode(hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_start_time_names_build() {
        let line = r#"{"build_id":"b1","change_id":"c","patch_id":"p","compile_status":"pass","log_ref":"logs/b1.log"}"#;
        let err = parse_build_line(line, 3).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("build b1: missing field start_time"), "{msg}");
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn unknown_keys_are_ignored() {
        let line = r#"{"build_id":"b1","change_id":"c","patch_id":"p","start_time":5,"compile_status":"fail","log_ref":"logs/b1.log","runner":"x"}"#;
        let b = parse_build_line(line, 1).unwrap();
        assert_eq!(b.start_time, 5);
        assert!(b.is_fail());
    }

    #[test]
    fn bad_status_and_time_are_rejected() {
        let line = r#"{"build_id":"b1","change_id":"c","patch_id":"p","start_time":"soon","compile_status":"fail","log_ref":"l"}"#;
        assert!(matches!(
            parse_build_line(line, 1),
            Err(IngestError::InvalidField {
                field: "start_time",
                ..
            })
        ));
        let line = r#"{"build_id":"b1","change_id":"c","patch_id":"p","start_time":1,"compile_status":"flaky","log_ref":"l"}"#;
        assert!(matches!(
            parse_build_line(line, 1),
            Err(IngestError::InvalidField {
                field: "compile_status",
                ..
            })
        ));
    }

    #[test]
    fn failing_build_needs_log_inside_corpus() {
        let line = r#"{"build_id":"b1","change_id":"c","patch_id":"p","start_time":1,"compile_status":"fail","log_ref":"../etc/passwd"}"#;
        assert!(matches!(
            parse_build_line(line, 1),
            Err(IngestError::InvalidField {
                field: "log_ref",
                ..
            })
        ));
        let line = r#"{"build_id":"b1","change_id":"c","patch_id":"p","start_time":1,"compile_status":"fail"}"#;
        assert!(matches!(
            parse_build_line(line, 1),
            Err(IngestError::MissingField {
                field: "log_ref",
                ..
            })
        ));
    }

    #[test]
    fn garbage_line_reports_line_number() {
        let err = parse_build_line("{not json", 7).unwrap_err();
        assert!(err.to_string().starts_with("builds.jsonl line 7:"));
    }
}
