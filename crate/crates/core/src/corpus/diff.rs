//! Git-style unified diff parsing and rendering.
//!
//! The parser understands multi-file `diff --git` output including mode
//! changes, binary stanzas (`Binary files ... differ` and `GIT binary patch`),
//! renames, new/deleted files, and plain `---`/`+++` diffs without a git
//! header. A rename is split into two file changes: the old path keeps the
//! hunks (in old-file coordinates) and the new path is recorded as an added
//! text file without hunks.

use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

use super::model::{FileChange, FileChangeKind, Hunk, HunkLine, LineOp, Patch};

static HUNK_HEADER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@").expect("valid hunk regex")
});

const DEV_NULL: &str = "/dev/null";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatchParseError {
    #[error("byte {offset}: malformed hunk header {line:?}")]
    MalformedHunkHeader { offset: usize, line: String },
    #[error("byte {offset}: hunk body shorter than header counts (missing {missing_old} old, {missing_new} new lines)")]
    HunkTooShort {
        offset: usize,
        missing_old: u32,
        missing_new: u32,
    },
    #[error("byte {offset}: hunk body exceeds header counts")]
    HunkTooLong { offset: usize },
    #[error("byte {offset}: hunk outside of a file stanza")]
    OrphanHunk { offset: usize },
    #[error("byte {offset}: path {path:?} appears twice in one patch")]
    DuplicatePath { offset: usize, path: String },
}

impl PatchParseError {
    pub fn offset(&self) -> usize {
        match self {
            PatchParseError::MalformedHunkHeader { offset, .. }
            | PatchParseError::HunkTooShort { offset, .. }
            | PatchParseError::HunkTooLong { offset }
            | PatchParseError::OrphanHunk { offset }
            | PatchParseError::DuplicatePath { offset, .. } => *offset,
        }
    }
}

/// A line of diff text with the byte offset at which it starts.
struct RawLine<'a> {
    offset: usize,
    text: &'a str,
}

fn split_lines(text: &str) -> Vec<RawLine<'_>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for piece in text.split_inclusive('\n') {
        let body = piece.strip_suffix('\n').unwrap_or(piece);
        let body = body.strip_suffix('\r').unwrap_or(body);
        out.push(RawLine { offset, text: body });
        offset += piece.len();
    }
    out
}

#[derive(Default)]
struct Stanza {
    offset: usize,
    git_old: Option<String>,
    git_new: Option<String>,
    minus: Option<String>,
    plus: Option<String>,
    rename_from: Option<String>,
    rename_to: Option<String>,
    old_mode: Option<String>,
    new_mode: Option<String>,
    binary: bool,
    hunks: Vec<Hunk>,
}

impl Stanza {
    fn has_file_headers(&self) -> bool {
        self.minus.is_some() || self.plus.is_some()
    }

    fn old_path(&self) -> Option<String> {
        self.rename_from
            .clone()
            .or_else(|| self.minus.clone().filter(|p| p != DEV_NULL))
            .or_else(|| self.git_old.clone())
    }

    fn new_path(&self) -> Option<String> {
        self.rename_to
            .clone()
            .or_else(|| self.plus.clone().filter(|p| p != DEV_NULL))
            .or_else(|| self.git_new.clone())
    }

    fn into_changes(self) -> Vec<FileChange> {
        let old = self.old_path();
        let new = self.new_path();
        let kind = if self.binary {
            FileChangeKind::Binary
        } else if self.hunks.is_empty()
            && self.old_mode.is_some()
            && self.new_mode.is_some()
            && self.rename_from.is_none()
        {
            FileChangeKind::ModeOnly
        } else {
            FileChangeKind::Text
        };
        let hunks = if kind == FileChangeKind::Text {
            self.hunks
        } else {
            Vec::new()
        };
        match (old, new) {
            (Some(old), Some(new)) if old != new => {
                // rename: old path keeps old-coordinate hunks, new path is an added file
                vec![
                    FileChange {
                        path: old,
                        kind,
                        hunks,
                    },
                    FileChange {
                        path: new,
                        kind: if kind == FileChangeKind::Binary {
                            FileChangeKind::Binary
                        } else {
                            FileChangeKind::Text
                        },
                        hunks: Vec::new(),
                    },
                ]
            }
            (Some(path), _) | (None, Some(path)) => vec![FileChange { path, kind, hunks }],
            (None, None) => Vec::new(),
        }
    }
}

fn strip_side_prefix(path: &str, prefix: &str) -> String {
    let path = path.split('\t').next().unwrap_or(path).trim_end();
    if path == DEV_NULL {
        return path.to_string();
    }
    path.strip_prefix(prefix).unwrap_or(path).to_string()
}

/// Splits the `a/<old> b/<new>` tail of a `diff --git` header.
fn split_git_header(rest: &str) -> (Option<String>, Option<String>) {
    let candidates: Vec<usize> = rest.match_indices(" b/").map(|(i, _)| i).collect();
    let pick = candidates
        .iter()
        .copied()
        .find(|&i| rest[..i].strip_prefix("a/") == Some(&rest[i + 3..]))
        .or_else(|| candidates.first().copied());
    match pick {
        Some(i) => (
            Some(
                rest[..i]
                    .strip_prefix("a/")
                    .unwrap_or(&rest[..i])
                    .to_string(),
            ),
            Some(rest[i + 3..].to_string()),
        ),
        None => (None, None),
    }
}

fn parse_hunk_header(line: &RawLine<'_>) -> Result<(u32, u32, u32, u32), PatchParseError> {
    let malformed = || PatchParseError::MalformedHunkHeader {
        offset: line.offset,
        line: line.text.to_string(),
    };
    let caps = HUNK_HEADER.captures(line.text).ok_or_else(malformed)?;
    let num = |i: usize, default: u32| -> Result<u32, PatchParseError> {
        match caps.get(i) {
            Some(m) => m.as_str().parse().map_err(|_| malformed()),
            None => Ok(default),
        }
    };
    Ok((num(1, 0)?, num(2, 1)?, num(3, 0)?, num(4, 1)?))
}

/// Parses one unified diff into a [`Patch`].
pub fn parse_patch(patch_id: &str, diff_text: &str) -> Result<Patch, PatchParseError> {
    let lines = split_lines(diff_text);
    let mut stanzas: Vec<Stanza> = Vec::new();
    let mut i = 0;
    // set after a `GIT binary patch` marker; payload lines are skipped
    let mut in_binary_payload = false;

    while i < lines.len() {
        let line = &lines[i];
        let text = line.text;

        if let Some(rest) = text.strip_prefix("diff --git ") {
            let (git_old, git_new) = split_git_header(rest);
            stanzas.push(Stanza {
                offset: line.offset,
                git_old,
                git_new,
                ..Stanza::default()
            });
            in_binary_payload = false;
            i += 1;
            continue;
        }
        if in_binary_payload {
            i += 1;
            continue;
        }

        if text.starts_with("@@") {
            let (old_start, old_count, new_start, new_count) = parse_hunk_header(line)?;
            let stanza = stanzas.last_mut().ok_or(PatchParseError::OrphanHunk {
                offset: line.offset,
            })?;
            let mut hunk = Hunk {
                old_start,
                old_count,
                new_start,
                new_count,
                lines: Vec::new(),
            };
            let (mut old_left, mut new_left) = (old_count, new_count);
            i += 1;
            while old_left > 0 || new_left > 0 {
                let Some(body) = lines.get(i) else {
                    return Err(PatchParseError::HunkTooShort {
                        offset: diff_text.len(),
                        missing_old: old_left,
                        missing_new: new_left,
                    });
                };
                let mut chars = body.text.chars();
                let (op, content) = match chars.next() {
                    Some(' ') => (LineOp::Context, chars.as_str()),
                    Some('+') => (LineOp::Add, chars.as_str()),
                    Some('-') => (LineOp::Del, chars.as_str()),
                    Some('\\') => {
                        i += 1;
                        continue;
                    }
                    // some tools strip the space off blank context lines
                    None => (LineOp::Context, ""),
                    Some(_) => {
                        return Err(PatchParseError::HunkTooShort {
                            offset: body.offset,
                            missing_old: old_left,
                            missing_new: new_left,
                        })
                    }
                };
                let (takes_old, takes_new) = match op {
                    LineOp::Context => (true, true),
                    LineOp::Del => (true, false),
                    LineOp::Add => (false, true),
                };
                if (takes_old && old_left == 0) || (takes_new && new_left == 0) {
                    return Err(PatchParseError::HunkTooLong {
                        offset: body.offset,
                    });
                }
                old_left -= takes_old as u32;
                new_left -= takes_new as u32;
                hunk.lines.push(HunkLine::new(op, content));
                i += 1;
            }
            // a body line that still looks like hunk content means the header undercounted
            if let Some(next) = lines.get(i) {
                let t = next.text;
                let looks_like_body = (t.starts_with('+') && !t.starts_with("+++ "))
                    || (t.starts_with('-') && !t.starts_with("--- ") && t != "-- ")
                    || t.starts_with(' ');
                if looks_like_body {
                    return Err(PatchParseError::HunkTooLong {
                        offset: next.offset,
                    });
                }
            }
            stanza.hunks.push(hunk);
            continue;
        }

        if let Some(rest) = text.strip_prefix("--- ") {
            let starts_new = match stanzas.last() {
                None => true,
                Some(s) => s.has_file_headers() || !s.hunks.is_empty(),
            };
            if starts_new {
                stanzas.push(Stanza {
                    offset: line.offset,
                    ..Stanza::default()
                });
            }
            if let Some(s) = stanzas.last_mut() {
                s.minus = Some(strip_side_prefix(rest, "a/"));
            }
            i += 1;
            continue;
        }

        if let Some(stanza) = stanzas.last_mut() {
            if let Some(rest) = text.strip_prefix("+++ ") {
                stanza.plus = Some(strip_side_prefix(rest, "b/"));
            } else if let Some(mode) = text.strip_prefix("old mode ") {
                stanza.old_mode = Some(mode.trim().to_string());
            } else if let Some(mode) = text.strip_prefix("new mode ") {
                stanza.new_mode = Some(mode.trim().to_string());
            } else if let Some(p) = text.strip_prefix("rename from ") {
                stanza.rename_from = Some(p.to_string());
            } else if let Some(p) = text.strip_prefix("rename to ") {
                stanza.rename_to = Some(p.to_string());
            } else if text.starts_with("Binary files ") && text.ends_with(" differ") {
                stanza.binary = true;
            } else if text == "GIT binary patch" {
                stanza.binary = true;
                in_binary_payload = true;
            }
        }
        i += 1;
    }

    let mut file_changes: Vec<FileChange> = Vec::new();
    for stanza in stanzas {
        let offset = stanza.offset;
        for change in stanza.into_changes() {
            if file_changes.iter().any(|fc| fc.path == change.path) {
                return Err(PatchParseError::DuplicatePath {
                    offset,
                    path: change.path,
                });
            }
            file_changes.push(change);
        }
    }

    Ok(Patch {
        patch_id: patch_id.to_string(),
        file_changes,
    })
}

/// Renders a [`Patch`] as git-style unified diff text.
///
/// `parse_patch(id, &render_patch(p))` reproduces `p` for any patch whose
/// hunks are consistent and whose line texts contain no line breaks.
pub fn render_patch(patch: &Patch) -> String {
    let mut out = String::new();
    for fc in &patch.file_changes {
        let p = &fc.path;
        out.push_str(&format!("diff --git a/{p} b/{p}\n"));
        match fc.kind {
            FileChangeKind::Binary => {
                out.push_str("index 1111111..2222222 100644\n");
                out.push_str(&format!("Binary files a/{p} and b/{p} differ\n"));
            }
            FileChangeKind::ModeOnly => {
                out.push_str("old mode 100644\nnew mode 100755\n");
            }
            FileChangeKind::Text => {
                out.push_str(&format!("--- a/{p}\n+++ b/{p}\n"));
                for h in &fc.hunks {
                    out.push_str(&format!(
                        "@@ -{},{} +{},{} @@\n",
                        h.old_start, h.old_count, h.new_start, h.new_count
                    ));
                    for l in &h.lines {
                        out.push(l.op.prefix());
                        out.push_str(&l.text);
                        out.push('\n');
                    }
                }
            }
        }
    }
    out
}
