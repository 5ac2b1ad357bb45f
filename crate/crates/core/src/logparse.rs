//! Extraction of compiler error diagnostics from raw build logs.
//!
//! Recognized shapes, checked in this order on every log line:
//!
//! * linker failure: any line containing `ld returned <n> exit status`;
//! * located error: `<path>:<line>[:<col>]: [fatal ]error: <message>`;
//! * bare error: `[<tool>: ][fatal ]error: <message>` (e.g. `collect2:`,
//!   `g++:`), with no file information.
//!
//! Lines containing `warning:` are never diagnostics. Caret lines, `note:`
//! follow-ups and everything else are skipped.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

static LINKER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"ld returned (-?\d+) exit status").expect("valid regex"));

static LOCATED: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(?P<path>\S.*?):(?P<line>\d+)(?::(?P<col>\d+))?: (?:fatal )?error: (?P<msg>.*)$")
        .expect("valid regex")
});

static BARE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^\s*(?:[A-Za-z0-9_.+-]+: )?(?:fatal )?[Ee]rror: (?P<msg>.*)$")
        .expect("valid regex")
});

/// One compiler error occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Diagnostic {
    pub build_id: String,
    pub file: Option<String>,
    /// Line reported by the compiler, 1-based.
    pub line: Option<u32>,
    pub column: Option<u32>,
    pub message: String,
}

/// Collapses whitespace runs to a single space and trims both ends.
///
/// Text between a pair of quotes (`'...'` or `‘...’`) on the line is kept
/// verbatim.
pub fn normalize_message(raw: &str) -> String {
    let chars: Vec<char> = raw.chars().collect();
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            pending_space = true;
            i += 1;
            continue;
        }
        if pending_space && !out.is_empty() {
            out.push(' ');
        }
        pending_space = false;
        let close = match c {
            '\'' => Some('\''),
            '\u{2018}' => Some('\u{2019}'),
            _ => None,
        };
        if let Some(close) = close {
            if let Some(len) = chars[i + 1..].iter().position(|&d| d == close) {
                out.extend(&chars[i..=i + 1 + len]);
                i += len + 2;
                continue;
            }
        }
        out.push(c);
        i += 1;
    }
    out
}

fn parse_line(line: &str, build_id: &str) -> Option<Diagnostic> {
    if line.contains("warning:") {
        return None;
    }
    if let Some(caps) = LINKER.captures(line) {
        return Some(Diagnostic {
            build_id: build_id.to_string(),
            file: None,
            line: None,
            column: None,
            message: format!("ld returned {} exit status", &caps[1]),
        });
    }
    if let Some(caps) = LOCATED.captures(line) {
        let message = normalize_message(&caps["msg"]);
        let line_no: u32 = caps["line"].parse().ok().filter(|&n| n >= 1)?;
        let column = caps
            .name("col")
            .and_then(|m| m.as_str().parse().ok())
            .filter(|&c: &u32| c >= 1);
        if message.is_empty() {
            return None;
        }
        return Some(Diagnostic {
            build_id: build_id.to_string(),
            file: Some(caps["path"].to_string()),
            line: Some(line_no),
            column,
            message,
        });
    }
    if let Some(caps) = BARE.captures(line) {
        let message = normalize_message(&caps["msg"]);
        if message.is_empty() {
            return None;
        }
        return Some(Diagnostic {
            build_id: build_id.to_string(),
            file: None,
            line: None,
            column: None,
            message,
        });
    }
    None
}

/// Extracts diagnostics from a build log in log order, keeping duplicates.
pub fn extract_diagnostics(log_text: &str, build_id: &str) -> Vec<Diagnostic> {
    log_text
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .filter_map(|l| parse_line(l, build_id))
        .collect()
}
