//! Command-line driver: one discipline per invocation, shared JSON
//! diagnostic output, a corpus runner, and the differential harness.
//!
//! Exit codes: 0 accept/success, 1 reject/mismatch, 2 usage or parse error.

use crate::cap::CapChecker;
use crate::diag::{Diagnostic, Severity, Span};
use crate::diff::{run_diff, GenConfig};
use crate::effects::{check_heap_write_program, UiCapBoundChecker, UiChecker};
use crate::kernel;
use crate::proto;
use crate::rgref;
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const EXIT_ACCEPT: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Discipline {
    /// reference-capability checking with recovery and framing
    Refcap,
    /// race-freedom of every `par` under the heap-write lattice
    Heapwrite,
    /// UI-threading effects
    Ui,
    /// the capability-bound UI alternative (kept for contrast)
    UiCapbound,
    /// rely-guarantee reference declarations
    Rgref,
    /// fixed object layout with NC concretization
    Protolayout,
    /// the effect-variant object layout checker
    ProtolayoutEffect,
}

#[derive(Parser)]
#[command(name = "discipline-lab", version, about = "Static discipline laboratory")]
pub struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check one source file under one discipline.
    Check {
        #[arg(long, value_enum)]
        discipline: Discipline,
        /// emit machine-readable JSON on stdout
        #[arg(long)]
        json: bool,
        file: PathBuf,
    },
    /// Generate random parallel programs and report the verdict gap
    /// between the capability and effect disciplines.
    Diff {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// write the JSON report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every case in a corpus manifest and compare against the
    /// expected verdicts.
    Corpus { manifest: PathBuf },
}

/// Stable machine-readable envelope for `check --json`.
#[derive(Serialize)]
struct CheckOutput<'a> {
    diagnostics: &'a [Diagnostic],
    schema: u32,
    verdict: &'a str,
}

const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub diagnostics: Vec<Diagnostic>,
    pub accepted: bool,
    /// fails the parse/usage class rather than the discipline
    pub broken_input: bool,
}

/// Check one file under a discipline. This is the whole non-presentation
/// path of `check`, reused by the corpus runner.
pub fn check_file(discipline: Discipline, path: &Path) -> Result<CheckResult, String> {
    let source = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let file = path.to_string_lossy().to_string();
    Ok(match discipline {
        Discipline::Refcap | Discipline::Heapwrite | Discipline::Ui | Discipline::UiCapbound => {
            check_kernel_source(discipline, &source, &file)
        }
        Discipline::Rgref => {
            let (_, diagnostics) = rgref::run_decls(&source, &file);
            let broken_input = diagnostics.iter().any(|d| d.rule == "RG-PARSE");
            let accepted = diagnostics.iter().all(|d| !d.is_reject());
            CheckResult { diagnostics, accepted, broken_input }
        }
        Discipline::Protolayout | Discipline::ProtolayoutEffect => {
            match proto::parse_proto_named(&source, &file) {
                Err(e) => CheckResult {
                    diagnostics: vec![Diagnostic::reject(
                        "PARSE",
                        Span::new(file, e.line, e.col, 1),
                        e.message.clone(),
                    )],
                    accepted: false,
                    broken_input: true,
                },
                Ok(program) => {
                    let diagnostics = if discipline == Discipline::Protolayout {
                        proto::check_proto_program(&program)
                    } else {
                        proto::check_proto_program_effect(&program)
                    };
                    let accepted = diagnostics.iter().all(|d| !d.is_reject());
                    CheckResult { diagnostics, accepted, broken_input: false }
                }
            }
        }
    })
}

/// Check kernel-language source text under one of the kernel disciplines.
pub fn check_kernel_source(discipline: Discipline, source: &str, file: &str) -> CheckResult {
    let program = match kernel::parse_named(source, file) {
        Ok(p) => p,
        Err(e) => {
            let (line, col) = e.position();
            return CheckResult {
                diagnostics: vec![Diagnostic::reject(
                    "PARSE",
                    Span::new(file, line, col, 1),
                    e.to_string(),
                )],
                accepted: false,
                broken_input: true,
            };
        }
    };
    let wf = kernel::validate(&program);
    if wf.iter().any(Diagnostic::is_reject) {
        return CheckResult { diagnostics: wf, accepted: false, broken_input: true };
    }
    let diagnostics = match discipline {
        Discipline::Refcap => CapChecker::new(&program).check_program().diagnostics,
        Discipline::Heapwrite => check_heap_write_program(&program).diagnostics,
        Discipline::Ui => UiChecker::new(&program).check_program().diagnostics,
        Discipline::UiCapbound => UiCapBoundChecker::new(&program).check_program().diagnostics,
        _ => unreachable!("kernel disciplines only"),
    };
    let accepted = diagnostics.iter().all(|d| !d.is_reject());
    CheckResult { diagnostics, accepted, broken_input: false }
}

// -- corpus manifests ---------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
pub struct CorpusCase {
    pub path: String,
    pub discipline: String,
    pub expected: Expected,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Expected {
    /// the literal string "accept"
    Verdict(String),
    /// `{"reject": "RULE-NAME"}`
    Reject { reject: String },
}

fn parse_discipline(name: &str) -> Option<Discipline> {
    Discipline::from_str(name, false).ok()
}

/// Execute all manifest cases; returns (total, mismatch descriptions).
pub fn run_corpus(manifest_path: &Path) -> Result<(usize, Vec<String>), String> {
    let text = std::fs::read_to_string(manifest_path)
        .map_err(|e| format!("cannot read {}: {e}", manifest_path.display()))?;
    let cases: Vec<CorpusCase> =
        serde_json::from_str(&text).map_err(|e| format!("bad manifest: {e}"))?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut mismatches = Vec::new();
    for case in &cases {
        let Some(discipline) = parse_discipline(&case.discipline) else {
            mismatches.push(format!("{}: unknown discipline `{}`", case.path, case.discipline));
            continue;
        };
        let path = base.join(&case.path);
        let label = format!("{} ({})", case.path, case.discipline);
        match check_file(discipline, &path) {
            Err(e) => mismatches.push(format!("{label}: {e}")),
            Ok(result) => match &case.expected {
                Expected::Verdict(v) if v == "accept" => {
                    if !result.accepted {
                        let rules: Vec<&str> =
                            result.diagnostics.iter().map(|d| d.rule.as_str()).collect();
                        mismatches
                            .push(format!("{label}: expected accept, rejected with {rules:?}"));
                    }
                }
                Expected::Verdict(v) => {
                    mismatches.push(format!("{label}: bad expectation `{v}` in manifest"));
                }
                Expected::Reject { reject } => {
                    if result.accepted {
                        mismatches.push(format!("{label}: expected reject {reject}, got accept"));
                    } else if !result
                        .diagnostics
                        .iter()
                        .any(|d| d.is_reject() && d.rule == *reject)
                    {
                        let rules: Vec<&str> =
                            result.diagnostics.iter().map(|d| d.rule.as_str()).collect();
                        mismatches.push(format!(
                            "{label}: expected reject {reject}, got rules {rules:?}"
                        ));
                    }
                }
            },
        }
    }
    Ok((cases.len(), mismatches))
}

// -- presentation --------------------------------------------------------------

fn color_enabled() -> bool {
    std::env::var("DISCIPLINE_LAB_COLOR").map_or(true, |v| v != "0")
}

fn paint(text: &str, code: &str) -> String {
    if color_enabled() {
        format!("\x1b[{code}m{text}\x1b[0m")
    } else {
        text.to_string()
    }
}

fn print_human(result: &CheckResult) {
    for d in &result.diagnostics {
        let tag = match d.severity {
            Severity::Reject => paint("reject", "31"),
            Severity::Note => paint("note", "36"),
        };
        println!("{tag}[{}] {}: {}", d.rule, d.span, d.message);
    }
    let verdict = if result.accepted { paint("accept", "32") } else { paint("reject", "31") };
    println!("{verdict}");
}

fn print_json(result: &CheckResult) {
    let out = CheckOutput {
        diagnostics: &result.diagnostics,
        schema: SCHEMA_VERSION,
        verdict: if result.accepted { "accept" } else { "reject" },
    };
    println!("{}", serde_json::to_string(&out).expect("diagnostics serialize"));
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders help/version on stdout with exit 0
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_ACCEPT };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Cmd::Check { discipline, json, file } => match check_file(discipline, &file) {
            Err(message) => {
                eprintln!("error: {message}");
                EXIT_USAGE
            }
            Ok(result) => {
                if json {
                    print_json(&result);
                } else {
                    print_human(&result);
                }
                if result.broken_input {
                    EXIT_USAGE
                } else if result.accepted {
                    EXIT_ACCEPT
                } else {
                    EXIT_REJECT
                }
            }
        },
        Cmd::Diff { seed, count, out } => {
            let report = run_diff(&GenConfig::new(seed, count));
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, json + "\n") {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return EXIT_USAGE;
                    }
                    println!(
                        "seed {} count {}: bothAccept={} bothReject={} capOnly={} effectOnly={} illFormed={} -> {}",
                        report.seed,
                        report.count,
                        report.both_accept,
                        report.both_reject,
                        report.cap_only,
                        report.effect_only,
                        report.ill_formed,
                        path.display()
                    );
                }
                None => println!("{json}"),
            }
            EXIT_ACCEPT
        }
        Cmd::Corpus { manifest } => match run_corpus(&manifest) {
            Err(message) => {
                eprintln!("error: {message}");
                EXIT_USAGE
            }
            Ok((total, mismatches)) => {
                for m in &mismatches {
                    println!("{} {m}", paint("MISMATCH", "31"));
                }
                println!(
                    "{total} cases, {} mismatches: {}",
                    mismatches.len(),
                    if mismatches.is_empty() { paint("ok", "32") } else { paint("failed", "31") }
                );
                if mismatches.is_empty() {
                    EXIT_ACCEPT
                } else {
                    EXIT_REJECT
                }
            }
        },
    }
}
