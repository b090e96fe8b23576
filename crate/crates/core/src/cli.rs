//! Command-line front end: `prove`, `check`, `bench` and `oracle`.
//!
//! Exit codes: 0 for success (proved, accepted, no countermodel), 1 for the
//! negative answer, 2 for usage and input errors.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::formula::{parse, parse_suite, print, Formula};
use crate::kernel::{check, from_json, to_json_with_semantics, CheckOptions, Extra};
use crate::relsolve::Budget;
use crate::search::{prove, Outcome, SearchOptions, StopReason};
use crate::semantics::countermodel;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "lsbbi", version, about = "Labelled sequent prover and proof checker for Boolean BI")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Search for a proof of a formula.
    Prove {
        formula: String,
        #[command(flatten)]
        semantics: SemanticsFlags,
        #[command(flatten)]
        budget: BudgetFlags,
        /// Write the kernel-checked proof as JSON.
        #[arg(long, value_name = "PATH")]
        emit_proof: Option<PathBuf>,
    },
    /// Validate a proof file.
    Check {
        path: PathBuf,
        /// Rules enabled on top of those the file declares.
        #[command(flatten)]
        semantics: SemanticsFlags,
        /// Accept cut nodes.
        #[arg(long)]
        allow_cut: bool,
    },
    /// Prove every formula of a suite file and print a result table.
    Bench {
        path: PathBuf,
        #[command(flatten)]
        semantics: SemanticsFlags,
        #[command(flatten)]
        budget: BudgetFlags,
        /// Formulas searched at once.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Search finite models for a countermodel.
    Oracle {
        formula: String,
        #[command(flatten)]
        semantics: SemanticsFlags,
        #[arg(long, value_name = "N", default_value_t = 3)]
        max_model_size: usize,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct SemanticsFlags {
    /// Partial-deterministic composition (adds P).
    #[arg(long)]
    pd: bool,
    /// Total-deterministic composition (adds P and T).
    #[arg(long)]
    td: bool,
    /// Indivisible unit (adds IU).
    #[arg(long)]
    indivisible_unit: bool,
    /// Cancellative composition (adds C and P).
    #[arg(long)]
    cancellative: bool,
}

impl SemanticsFlags {
    fn extras(self) -> BTreeSet<Extra> {
        let mut out = BTreeSet::new();
        if self.pd || self.td || self.cancellative {
            out.insert(Extra::P);
        }
        if self.td {
            out.insert(Extra::T);
        }
        if self.indivisible_unit {
            out.insert(Extra::IU);
        }
        if self.cancellative {
            out.insert(Extra::C);
        }
        out
    }
}

#[derive(Args, Debug, Clone, Copy)]
struct BudgetFlags {
    /// Expansions per separating-conjunction/wand occurrence on a branch.
    #[arg(long, value_name = "N", default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    depth: u64,
    /// Associativity steps per relational query.
    #[arg(long, value_name = "N", default_value_t = 4)]
    a_budget: usize,
    /// Wall-clock limit in milliseconds.
    #[arg(long, value_name = "MS", default_value_t = 10_000)]
    timeout: u64,
}

fn options(sem: SemanticsFlags, b: BudgetFlags, emit_proof: bool) -> SearchOptions {
    SearchOptions {
        multiplicity: b.depth as usize,
        r_budget: Budget {
            max_a: b.a_budget,
            ..Budget::default()
        },
        extras: sem.extras(),
        timeout: Duration::from_millis(b.timeout),
        emit_proof,
        ..SearchOptions::default()
    }
}

fn verdict(out: &Outcome) -> &'static str {
    match out {
        Outcome::Proved(..) => "PROVED",
        Outcome::Unproved(StopReason::Exhausted, _) => "UNPROVED",
        Outcome::Unproved(StopReason::Timeout, _) => "UNPROVED (timeout)",
    }
}

/// Runs the command line `args` (program name first), writing to `out` and
/// `err`, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

fn read(path: &PathBuf) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<i32, String> {
    let io = |e: std::io::Error| e.to_string();
    match cmd {
        Command::Prove {
            formula,
            semantics,
            budget,
            emit_proof,
        } => {
            let f = parse(&formula).map_err(|e| e.to_string())?;
            let opts = options(semantics, budget, emit_proof.is_some());
            let res = prove(&f, &opts);
            writeln!(out, "{}", verdict(&res)).map_err(io)?;
            writeln!(out, "{}", res.stats()).map_err(io)?;
            match (&res, emit_proof) {
                (Outcome::Proved(p, _), Some(path)) => {
                    let text = to_json_with_semantics(&p.derivation, &opts.extras);
                    std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;
                    Ok(EXIT_OK)
                }
                (Outcome::Proved(..), None) => Ok(EXIT_OK),
                (Outcome::Unproved(..), _) => Ok(EXIT_NO),
            }
        }
        Command::Check {
            path,
            semantics,
            allow_cut,
        } => {
            let text = read(&path)?;
            let file = match from_json(&text) {
                Ok(f) => f,
                Err(e) => {
                    writeln!(out, "REJECTED: {e}").map_err(io)?;
                    return Ok(EXIT_NO);
                }
            };
            let report = check(
                &file.root,
                &CheckOptions {
                    allow_cut,
                    extras: file.semantics.union(&semantics.extras()).copied().collect(),
                },
            );
            match &report.violation {
                None => {
                    writeln!(out, "ACCEPTED nodes={} height={} cuts={}", report.nodes, report.height, report.cuts)
                        .map_err(io)?;
                    Ok(EXIT_OK)
                }
                Some(v) => {
                    writeln!(out, "REJECTED at {:?} ({}): {}", v.path, v.rule, v.reason).map_err(io)?;
                    Ok(EXIT_NO)
                }
            }
        }
        Command::Bench {
            path,
            semantics,
            budget,
            jobs,
        } => {
            let entries = parse_suite(&read(&path)?).map_err(|e| format!("{}: {e}", path.display()))?;
            let formulas: Vec<Formula> = entries.iter().map(|e| e.formula.clone()).collect();
            let results = bench(&formulas, &options(semantics, budget, false), jobs.max(1));
            let texts: Vec<String> = entries.iter().map(|e| print(&e.formula)).collect();
            let width = texts.iter().map(|t| t.chars().count()).max().unwrap_or(0).max("formula".len());
            writeln!(out, "{:>3}  {:<width$}  {:<8}  {:>8}  {:>8}", "#", "formula", "result", "branches", "time(s)").map_err(io)?;
            let mut all = true;
            for (i, (text, r)) in texts.iter().zip(&results).enumerate() {
                all &= r.is_proved();
                let s = r.stats();
                writeln!(
                    out,
                    "{:>3}  {:<width$}  {:<8}  {:>8}  {:>8.3}",
                    i + 1,
                    text,
                    if r.is_proved() { "PROVED" } else { "UNPROVED" },
                    s.branches,
                    s.elapsed.as_secs_f64()
                )
                .map_err(io)?;
            }
            let proved = results.iter().filter(|r| r.is_proved()).count();
            writeln!(out, "proved {proved}/{}", results.len()).map_err(io)?;
            Ok(if all { EXIT_OK } else { EXIT_NO })
        }
        Command::Oracle {
            formula,
            semantics,
            max_model_size,
        } => {
            let f = parse(&formula).map_err(|e| e.to_string())?;
            match countermodel(&f, max_model_size, &semantics.extras()).map_err(|e| e.to_string())? {
                None => {
                    writeln!(out, "NO COUNTERMODEL up to size {max_model_size}").map_err(io)?;
                    Ok(EXIT_OK)
                }
                Some(c) => {
                    writeln!(out, "COUNTERMODEL").map_err(io)?;
                    writeln!(out, "{c}").map_err(io)?;
                    Ok(EXIT_NO)
                }
            }
        }
    }
}

/// Proves each formula, `jobs` at a time; results are in input order.
pub fn bench(formulas: &[Formula], opts: &SearchOptions, jobs: usize) -> Vec<Outcome> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Outcome>>> = formulas.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..jobs.min(formulas.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(f) = formulas.get(i) else {
                    break;
                };
                let r = prove(f, opts);
                *slots[i].lock().expect("slot lock") = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("slot lock").expect("every formula was run"))
        .collect()
}
