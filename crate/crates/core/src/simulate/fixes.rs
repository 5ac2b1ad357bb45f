//! Construction of fix hunks with a prescribed size and distance.

use rand::Rng;

use crate::corpus::{Hunk, HunkLine, LineOp};

const CONTEXT: u32 = 3;

/// Where a text fix goes in the old file: `dels` lines are removed starting
/// at `start` and `adds` lines are inserted in their place (or before
/// `start` when nothing is removed).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub start: u32,
    pub dels: u32,
    pub adds: u32,
}

impl Placement {
    /// Number of distinct fix lines this placement produces.
    pub fn span(&self) -> u32 {
        match (self.dels, self.adds) {
            (0, _) => 1,
            (d, 0) => d,
            (d, _) => d + 1,
        }
    }

    /// Fix lines in old-file numbering.
    pub fn fix_lines(&self) -> Vec<u32> {
        (self.start..self.start + self.span()).collect()
    }
}

/// Splits `size` changed lines into deletions and additions.
pub fn choose_shape<R: Rng + ?Sized>(rng: &mut R, size: u64) -> (u32, u32) {
    let size = u32::try_from(size).unwrap_or(u32::MAX);
    let choice = if size == 1 {
        rng.gen_range(0..2)
    } else {
        rng.gen_range(0..3)
    };
    match choice {
        0 => (0, size),
        1 => (size, 0),
        _ => {
            let dels = size / 2;
            (dels, size - dels)
        }
    }
}

/// A placement in a file of `len` lines whose nearest fix line is exactly
/// `distance` lines from `error_line`, or `None` if the file is too short.
pub fn place<R: Rng + ?Sized>(
    rng: &mut R,
    (dels, adds): (u32, u32),
    distance: u64,
    len: u32,
    error_line: u32,
) -> Option<Placement> {
    let shape = Placement {
        start: 0,
        dels,
        adds,
    };
    let span = u64::from(shape.span());
    let (e, len) = (u64::from(error_line), u64::from(len));
    // above: last fix line is E - d
    let above = (e >= distance + span).then(|| e - distance - span + 1);
    // below: first fix line is E + d
    let below = (e + distance + span - 1 <= len).then_some(e + distance);
    let start = match (above, below) {
        (Some(a), Some(b)) => {
            if rng.gen_bool(0.5) {
                a
            } else {
                b
            }
        }
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => return None,
    };
    Some(Placement {
        start: u32::try_from(start).ok()?,
        ..shape
    })
}

/// A single hunk applying `p` to a file of `len` lines whose line `n` reads
/// `old(n)`, with up to three lines of context on each side.
pub fn text_hunk(
    p: Placement,
    len: u32,
    old: impl Fn(u32) -> String,
    added: impl Fn(u32) -> String,
) -> Hunk {
    let before = p.start.saturating_sub(CONTEXT).max(1)..p.start;
    let after_start = p.start + p.dels;
    let after = after_start..(after_start + CONTEXT).min(len + 1);
    let mut lines = Vec::new();
    lines.extend(
        before
            .clone()
            .map(|n| HunkLine::new(LineOp::Context, old(n))),
    );
    lines.extend((p.start..after_start).map(|n| HunkLine::new(LineOp::Del, old(n))));
    lines.extend((0..p.adds).map(|k| HunkLine::new(LineOp::Add, added(k))));
    lines.extend(
        after
            .clone()
            .map(|n| HunkLine::new(LineOp::Context, old(n))),
    );
    let ctx = before.len() as u32 + after.len() as u32;
    let old_count = ctx + p.dels;
    let new_count = ctx + p.adds;
    let old_start = if old_count == 0 {
        p.start - 1
    } else {
        before.start.min(p.start)
    };
    let new_start = if new_count == 0 {
        old_start - 1
    } else {
        old_start
    };
    Hunk {
        old_start,
        old_count,
        new_start,
        new_count,
        lines,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::resolution_distance;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn span_per_shape() {
        assert_eq!(
            Placement {
                start: 5,
                dels: 0,
                adds: 3
            }
            .fix_lines(),
            vec![5]
        );
        assert_eq!(
            Placement {
                start: 5,
                dels: 2,
                adds: 0
            }
            .fix_lines(),
            vec![5, 6]
        );
        assert_eq!(
            Placement {
                start: 5,
                dels: 2,
                adds: 1
            }
            .fix_lines(),
            vec![5, 6, 7]
        );
    }

    #[test]
    fn hunk_for_single_insertion() {
        let h = text_hunk(
            Placement {
                start: 40,
                dels: 0,
                adds: 1,
            },
            100,
            |n| format!("l{n}"),
            |_| "new".into(),
        );
        assert_eq!(
            (h.old_start, h.old_count, h.new_start, h.new_count),
            (37, 6, 37, 7)
        );
        assert!(h.is_consistent());
    }

    #[test]
    fn hunk_at_file_edges() {
        let h = text_hunk(
            Placement {
                start: 1,
                dels: 1,
                adds: 0,
            },
            1,
            |n| format!("l{n}"),
            |_| String::new(),
        );
        assert_eq!(
            (h.old_start, h.old_count, h.new_start, h.new_count),
            (1, 1, 0, 0)
        );
        let h = text_hunk(
            Placement {
                start: 10,
                dels: 1,
                adds: 2,
            },
            10,
            |n| format!("l{n}"),
            |_| "x".into(),
        );
        assert_eq!(
            (h.old_start, h.old_count, h.new_start, h.new_count),
            (7, 4, 7, 5)
        );
        assert!(h.is_consistent());
    }

    #[test]
    fn infeasible_in_short_file() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(place(&mut rng, (0, 1), 50, 20, 10), None);
    }

    proptest! {
        #[test]
        fn placement_hits_distance(
            seed: u64, size in 1u64..13, distance in 0u64..130,
            len in 1u32..700, e_frac in 0.0f64..1.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e = ((f64::from(len) * e_frac) as u32).clamp(1, len);
            let shape = choose_shape(&mut rng, size);
            prop_assert_eq!(u64::from(shape.0 + shape.1), size);
            if let Some(p) = place(&mut rng, shape, distance, len, e) {
                let lines = p.fix_lines();
                prop_assert!(lines[0] >= 1 && *lines.last().unwrap() <= len);
                prop_assert_eq!(resolution_distance(e, &lines), Some(distance));
                let h = text_hunk(p, len, |n| n.to_string(), |k| format!("+{k}"));
                prop_assert!(h.is_consistent());
                prop_assert_eq!(crate::metrics::file_change_fix_lines(&crate::corpus::FileChange {
                    path: "f".into(),
                    kind: crate::corpus::FileChangeKind::Text,
                    hunks: vec![h],
                }), lines);
            }
        }
    }
}
