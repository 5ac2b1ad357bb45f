//! GCC-style message and log text for synthetic builds.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::classify::ErrorType;

const IDENTS: &[&str] = &[
    "err",
    "frame_count",
    "kMaxRetries",
    "radio_cfg",
    "tx_power",
    "link_state",
    "carrier_id",
    "rx_buffer",
    "timer_handle",
    "slot_index",
    "beam_weight",
    "cell_mask",
];

const TYPES: &[&str] = &[
    "ProductError",
    "RadioUnit",
    "BasebandConfig",
    "CarrierSet",
    "FrameTimer",
    "LinkMonitor",
    "BeamTable",
    "SlotScheduler",
];

const HEADERS: &[&str] = &[
    "hw/product_error",
    "radio/unit_api",
    "platform/bsp_gpio",
    "fw/carrier_types",
    "dsp/beam_math",
];

const TOKENS: &[(&str, &str)] = &[
    ("';'", "'}'"),
    ("')'", "';'"),
    ("primary-expression", "')'"),
    ("','", "'{'"),
    ("unqualified-id", "'<'"),
];

const ALIENS: &[&str] = &[
    "invalid use of incomplete type 'struct Frame'",
    "redefinition of 'int slot_count'",
    "too many arguments to function 'void reset_link()'",
    "call of overloaded 'clamp(int, long int)' is ambiguous",
    "lvalue required as left operand of assignment",
];

fn pick<'a, R: Rng + ?Sized>(rng: &mut R, items: &'a [&'a str]) -> &'a str {
    items.choose(rng).expect("non-empty pool")
}

/// A message realizing `error_type`; `None` draws an unclassifiable one.
pub fn message_for<R: Rng + ?Sized>(rng: &mut R, error_type: Option<ErrorType>) -> String {
    let id = pick(rng, IDENTS);
    let ty = pick(rng, TYPES);
    match error_type {
        None | Some(ErrorType::Unclassified) => pick(rng, ALIENS).to_string(),
        Some(ErrorType::WasNotDeclared) => format!("'{id}' was not declared in this scope"),
        Some(ErrorType::HasNoMemberNamed) => format!("'class {ty}' has no member named '{id}'"),
        Some(ErrorType::ExpectedBeforeToken) => {
            let (a, b) = TOKENS.choose(rng).expect("non-empty pool");
            format!("expected {a} before {b} token")
        }
        Some(ErrorType::DoesNotNameAType) => format!("'{ty}' does not name a type"),
        Some(ErrorType::NoDeclarationMatches) => {
            format!("no declaration matches 'void {ty}::{id}(int)'")
        }
        Some(ErrorType::NoSuchFileOrDirectory) => {
            format!("{}.h: No such file or directory", pick(rng, HEADERS))
        }
        Some(ErrorType::LdReturned) => "ld returned 1 exit status".to_string(),
        Some(ErrorType::InvalidConversion) => {
            format!("invalid conversion from 'int' to '{ty}*' [-fpermissive]")
        }
        Some(ErrorType::UnusedVariable) => {
            format!("unused variable '{id}' [-Werror=unused-variable]")
        }
        Some(ErrorType::DoesNotHaveAnyFieldNamed) => {
            format!("class '{ty}' does not have any field named '{id}'")
        }
        Some(ErrorType::CannotAllocateAnObjectOf) => {
            format!("cannot allocate an object of abstract type '{ty}'")
        }
        Some(ErrorType::OfNonClassType) => {
            format!("request for member '{id}' in 'handle', which is of non-class type 'int'")
        }
        Some(ErrorType::CannotConvert) => format!("cannot convert '{ty}' to 'const char*'"),
        Some(ErrorType::StaticAssertionFailed) => {
            format!("static assertion failed: sizeof({ty}) must match the register map")
        }
    }
}

/// Line `n` (1-based) of a synthetic source file.
pub fn source_line(n: u32) -> String {
    format!(
        "    acc_{} = step(acc_{}, {});",
        n,
        n.saturating_sub(1),
        n % 17
    )
}

/// Replacement text for the line that breaks the build.
pub fn broken_line(n: u32) -> String {
    format!("    acc_{} = step_hw(acc_{}, cfg);", n, n.saturating_sub(1))
}

/// Text of the `k`-th line added by a fix.
pub fn fix_line(series: usize, k: u64) -> String {
    format!("    fix_{series}_{k}();")
}

/// Full compiler output of a build that failed at `file:line`.
#[allow(clippy::too_many_arguments)]
pub fn located_log<R: Rng + ?Sized>(
    rng: &mut R,
    target: &str,
    file: &str,
    line: u32,
    line_text: &str,
    message: &str,
    fatal: bool,
    extra: Option<String>,
) -> String {
    let col = rng.gen_range(5..30);
    let mut out = format!(
        "[ {}%] Building CXX object {target}.dir/{file}.o\n",
        rng.gen_range(10..90)
    );
    out.push_str(&format!(
        "{file}: In member function 'void {}::run()':\n",
        pick(rng, TYPES)
    ));
    if rng.gen_bool(0.4) {
        out.push_str(&format!(
            "{file}:{}:{}: warning: unused parameter 'ctx' [-Wunused-parameter]\n",
            rng.gen_range(1..=line),
            rng.gen_range(1..40)
        ));
    }
    if rng.gen_bool(0.2) {
        out.push_str(&format!(
            "{file}:{line}:3: warning: unused variable 'tmp' [-Wunused-variable]\n"
        ));
    }
    let kind = if fatal { "fatal error" } else { "error" };
    out.push_str(&format!("{file}:{line}:{col}: {kind}: {message}\n"));
    out.push_str(&format!(" {line:>4} | {line_text}\n      |     ^~~~~\n"));
    if fatal {
        out.push_str("compilation terminated.\n");
    } else if rng.gen_bool(0.3) {
        out.push_str(&format!(
            "{file}:{}:7: note: in expansion of macro 'CATCH_THROW_ERROR'\n",
            rng.gen_range(1..=line)
        ));
    }
    if let Some(extra) = extra {
        out.push_str(&extra);
    }
    out.push_str(&format!(
        "make[2]: *** [{target}.dir/build.make:{}: {target}.dir/{file}.o] Error 1\n",
        rng.gen_range(50..300)
    ));
    out.push_str("make: *** [Makefile:146: all] Error 2\n");
    out
}

/// Compiler output of a build that failed to link.
pub fn linker_log<R: Rng + ?Sized>(rng: &mut R, target: &str) -> String {
    let ty = pick(rng, TYPES);
    let id = pick(rng, IDENTS);
    format!(
        "[100%] Linking CXX executable {target}\n\
         /usr/bin/ld: {target}.dir/main.cpp.o: in function `main':\n\
         main.cpp:(.text+0x{:x}): undefined reference to `{ty}::{id}()'\n\
         collect2: error: ld returned 1 exit status\n\
         make[2]: *** [{target}.dir/build.make:97: {target}] Error 1\n",
        rng.gen_range(16..4096)
    )
}

pub fn pass_log(target: &str) -> String {
    format!("[100%] Built target {target}\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify_message;
    use crate::logparse::{extract_diagnostics, normalize_message};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn every_message_realizes_its_type() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            for t in ErrorType::CLASSIFIED {
                let m = message_for(&mut rng, Some(t));
                assert_eq!(classify_message(&normalize_message(&m)), t, "{m}");
            }
            let alien = message_for(&mut rng, None);
            assert_eq!(classify_message(&alien), ErrorType::Unclassified, "{alien}");
        }
    }

    #[test]
    fn logs_yield_exactly_one_diagnostic() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let log = located_log(
                &mut rng,
                "radio",
                "src/a.cpp",
                42,
                &source_line(42),
                "'x' was not declared in this scope",
                false,
                None,
            );
            let d = extract_diagnostics(&log, "b");
            assert_eq!(d.len(), 1, "{log}");
            assert_eq!(d[0].line, Some(42));
            let log = linker_log(&mut rng, "radio");
            let d = extract_diagnostics(&log, "b");
            assert_eq!(d.len(), 1, "{log}");
            assert_eq!(d[0].file, None);
        }
    }
}
