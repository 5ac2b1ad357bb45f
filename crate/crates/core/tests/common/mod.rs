#![allow(dead_code)]

use std::fs;
use std::path::Path;

use shadowjob::corpus::{BuildRecord, CompileStatus, FileChange, FileChangeKind, LineOp};

pub fn build(id: &str, change: &str, t: i64, status: CompileStatus) -> BuildRecord {
    BuildRecord {
        build_id: id.into(),
        change_id: change.into(),
        patch_id: format!("p_{id}"),
        start_time: t,
        compile_status: status,
        log_ref: format!("logs/{id}.log"),
    }
}

pub fn fail(id: &str, change: &str, t: i64) -> BuildRecord {
    build(id, change, t, CompileStatus::Fail)
}

pub fn pass(id: &str, change: &str, t: i64) -> BuildRecord {
    build(id, change, t, CompileStatus::Pass)
}

pub const EMPTY_PATCH: &str = "";

/// Writes a corpus directory. `patches` and `logs` are keyed by build id;
/// builds missing from either get an empty patch / an empty log.
pub fn write_corpus(
    root: &Path,
    builds: &[BuildRecord],
    patches: &[(&str, &str)],
    logs: &[(&str, &str)],
) {
    fs::create_dir_all(root.join("patches")).unwrap();
    fs::create_dir_all(root.join("logs")).unwrap();
    let mut lines = String::new();
    for b in builds {
        lines.push_str(&serde_json::to_string(b).unwrap());
        lines.push('\n');
        let patch = patches
            .iter()
            .find(|(id, _)| *id == b.build_id)
            .map_or(EMPTY_PATCH, |p| p.1);
        fs::write(
            root.join("patches").join(format!("{}.diff", b.patch_id)),
            patch,
        )
        .unwrap();
        let log = logs
            .iter()
            .find(|(id, _)| *id == b.build_id)
            .map_or("", |l| l.1);
        fs::write(root.join(&b.log_ref), log).unwrap();
    }
    fs::write(root.join("builds.jsonl"), lines).unwrap();
}

/// Applies a text file change to `source`, checking every context and
/// deleted line against the old text.
pub fn apply(source: &[String], fc: &FileChange) -> Result<Vec<String>, String> {
    if fc.kind != FileChangeKind::Text {
        return Ok(source.to_vec());
    }
    let mut out = Vec::new();
    let mut cursor = 0usize; // 0-based index of the next unconsumed old line
    for h in &fc.hunks {
        let first = if h.old_count == 0 {
            h.old_start as usize
        } else {
            h.old_start as usize - 1
        };
        if first < cursor || first > source.len() {
            return Err(format!("hunk at {} out of order", h.old_start));
        }
        out.extend_from_slice(&source[cursor..first]);
        cursor = first;
        for l in &h.lines {
            match l.op {
                LineOp::Add => out.push(l.text.clone()),
                LineOp::Context | LineOp::Del => {
                    let Some(old) = source.get(cursor) else {
                        return Err(format!(
                            "hunk runs past end of file at old line {}",
                            cursor + 1
                        ));
                    };
                    if *old != l.text {
                        return Err(format!(
                            "old line {} is {:?}, hunk expects {:?}",
                            cursor + 1,
                            old,
                            l.text
                        ));
                    }
                    if l.op == LineOp::Context {
                        out.push(old.clone());
                    }
                    cursor += 1;
                }
            }
        }
    }
    out.extend_from_slice(&source[cursor..]);
    Ok(out)
}
