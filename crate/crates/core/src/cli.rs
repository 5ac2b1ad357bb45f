//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when the input fails validation or cannot be
//! processed, 2 on usage errors.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{ArgGroup, Parser, Subcommand};

use crate::classify::{classify_message, taxonomy_csv};
use crate::corpus::ingest;
use crate::logparse::normalize_message;
use crate::report::{render_report, text_summary, ReportOptions, DEFAULT_TOP_K, REPORT_FILE};
use crate::simulate::{generate, ScenarioSpec};

pub const THREADS_ENV: &str = "SHADOWJOB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "shadowjob",
    version,
    about = "Compiler error analytics for CI build corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a corpus directory without analyzing it.
    IngestCheck {
        #[arg(long)]
        input: PathBuf,
    },
    /// Run the full pipeline and write report.json plus CSV tables.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Number of most frequent types to correlate and plot.
        #[arg(long, default_value_t = DEFAULT_TOP_K)]
        top_k: usize,
        /// Summarize resolution time min-max normalized to [0, 1].
        #[arg(long)]
        normalize_time: bool,
    },
    /// Classify one message, or print the taxonomy as CSV.
    #[command(group(ArgGroup::new("what").required(true).args(["message", "taxonomy"])))]
    Classify {
        #[arg(long)]
        message: Option<String>,
        #[arg(long)]
        taxonomy: bool,
    },
    /// Generate a synthetic corpus with ground truth.
    Simulate {
        /// Scenario JSON; every field is optional.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        series: Option<usize>,
    },
    /// Print a text summary of a written report.
    Report {
        #[arg(long)]
        from: PathBuf,
    },
}

/// A failure to report on stderr with exit code 1.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure(format!("{THREADS_ENV}={raw:?} is not a thread count")))?;
    if n > 0 {
        // a pool may already exist when called in-process more than once
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::IngestCheck { input } => {
            let store = ingest(&input)?;
            println!(
                "ok: {} builds ({} failed), {} patches, {} logs, digest {}",
                store.builds().len(),
                store.failed_count(),
                store.patches().len(),
                store.logs().len(),
                store.digest()
            );
        }
        Command::Analyze {
            input,
            out,
            top_k,
            normalize_time,
        } => {
            let store = ingest(&input)?;
            let (linkage, records) = crate::analyze(&store)?;
            let options = ReportOptions {
                top_k,
                normalize_time,
            };
            let report = render_report(&records, &linkage, store.digest(), &options, &out)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "{} records from {} failure series written to {}",
                records.len(),
                linkage.series.len(),
                out.display()
            );
        }
        Command::Classify { message, taxonomy } => {
            if taxonomy {
                print!("{}", taxonomy_csv());
            }
            if let Some(m) = message {
                let t = classify_message(&normalize_message(&m));
                println!("{} {}", t, t.class().name());
            }
        }
        Command::Simulate {
            spec,
            out,
            seed,
            series,
        } => {
            let mut scenario = match spec {
                Some(path) => {
                    let text = fs::read_to_string(&path)
                        .map_err(|e| Failure(format!("{}: {e}", path.display())))?;
                    ScenarioSpec::from_json(&text)
                        .map_err(|e| Failure(format!("{}: {e}", path.display())))?
                }
                None => ScenarioSpec::default(),
            };
            if let Some(seed) = seed {
                scenario.seed = seed;
            }
            if let Some(n) = series {
                scenario.n_series = n;
            }
            let corpus = generate(&scenario)?;
            corpus.write_to(&out)?;
            println!(
                "{} builds, {} failure series written to {}",
                corpus.builds.len(),
                corpus.manifest.series.len(),
                out.display()
            );
        }
        Command::Report { from } => {
            let path = from.join(REPORT_FILE);
            let text = fs::read_to_string(&path)
                .map_err(|e| Failure(format!("{}: {e}", path.display())))?;
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| Failure(format!("{}: {e}", path.display())))?;
            print!("{}", text_summary(&value));
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match configure_threads().and_then(|()| execute(cli.command)) {
        Ok(()) => 0,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}
