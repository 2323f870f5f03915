//! The `mub` command line. Every subcommand delegates to the library; this
//! module only parses arguments, moves documents in and out, and maps
//! outcomes to exit codes (0 success, 1 verification failure or
//! non-convergence, 2 usage or input error).

use crate::algebra::MubFamily;
use crate::construct::{build_family, ConstructionRequest};
use crate::error::MubError;
use crate::gauss::{gauss_sum, GaussSumParams};
use crate::io::{
    content_hash, parse_document, write_json, FamilyDocument, ReportDocument, SearchLog, TOOL_VERSION,
};
use crate::reconstruct::reconstruct_all;
use crate::search::{polish, run_search, SearchConfig, StepControl};
use crate::verify::{verify_family_with, VerifyOptions, DEFAULT_TOL};
use clap::{Parser, Subcommand};
use serde::Serialize;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mub", version, about = "Mutually unbiased bases: construct, verify, reconstruct, search")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the closed-form complete family for prime d.
    Construct {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a family document and emit a report.
    Verify {
        family: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        full_gram: bool,
    },
    /// Recover state vectors from the projectors of a family document.
    Reconstruct {
        family: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Numerical search for a family (or refinement of one with --from).
    Search {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        bases: usize,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 100_000)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-16)]
        target: f64,
        /// Rows of each projector factor (1 = rank-one parameterization).
        #[arg(long, default_value_t = 1)]
        rank: usize,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        #[arg(long, default_value_t = 0.5)]
        shrink: f64,
        #[arg(long, default_value_t = 1e-4)]
        slope: f64,
        /// Start every line search from `--step` instead of the Barzilai-Borwein step.
        #[arg(long)]
        no_bb: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        from: Option<PathBuf>,
    },
    /// Evaluate the Gauss sum S(u, v, w).
    Gauss {
        #[arg(long, allow_hyphen_values = true)]
        u: i64,
        #[arg(long, allow_hyphen_values = true)]
        v: i64,
        #[arg(long, allow_hyphen_values = true)]
        w: i64,
    },
}

/// Argument parsing only; no side effects.
pub fn parse_args<I, T>(argv: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Cli::try_parse_from(argv)
}

/// Runs the CLI against the process streams.
pub fn cli_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI with explicit output (machine output) and error
/// (diagnostics) streams.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match parse_args(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl From<MubError> for Failure {
    fn from(e: MubError) -> Self {
        let code = match &e {
            MubError::AtProjector { .. }
            | MubError::DegenerateTop { .. }
            | MubError::NotRankOne(_)
            | MubError::UnverifiedConstruction(_) => EXIT_FAIL,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }
}

fn usage(message: String) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message,
    }
}

fn emit<T: Serialize>(value: &T, path: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => write_json(value, p)?,
        None => {
            let text = serde_json::to_string_pretty(value).map_err(MubError::from)?;
            writeln!(out, "{text}")?;
        }
    }
    Ok(())
}

fn read_input(path: &Path) -> Result<(String, String), Failure> {
    let bytes = std::fs::read(path).map_err(|source| MubError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let hash = content_hash(&bytes);
    let text = String::from_utf8(bytes).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok((text, hash))
}

fn load(path: &Path) -> Result<(FamilyDocument, MubFamily, String), Failure> {
    let (text, hash) = read_input(path)?;
    let doc = parse_document(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let family = doc
        .to_family()
        .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok((doc, family, hash))
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Construct { d, out: path } => {
            let family = build_family(&ConstructionRequest::complete(d))?;
            let doc = FamilyDocument::from_family(&family)
                .with_metadata("generator", "mub construct")
                .with_metadata("tool_version", TOOL_VERSION);
            emit(&doc, path.as_deref(), out)?;
            writeln!(err, "constructed {} bases in dimension {d}", family.num_bases())?;
            Ok(EXIT_OK)
        }
        Command::Verify {
            family,
            tol,
            report,
            full_gram,
        } => {
            let (_, f, hash) = load(&family)?;
            let r = verify_family_with(&f, &VerifyOptions { tol, full_gram })?;
            writeln!(err, "{}", r.summary())?;
            let passed = r.passed;
            let doc = ReportDocument {
                tool_version: TOOL_VERSION.to_string(),
                input_sha256: hash,
                report: r,
            };
            emit(&doc, report.as_deref(), out)?;
            Ok(if passed { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Reconstruct { family, out: path, tol } => {
            let (mut doc, f, _) = load(&family)?;
            let states = reconstruct_all(&f, tol)?;
            doc = doc.with_states(&states);
            emit(&doc, path.as_deref(), out)?;
            writeln!(err, "reconstructed {} states", states.iter().map(Vec::len).sum::<usize>())?;
            Ok(EXIT_OK)
        }
        Command::Search {
            d,
            bases,
            restarts,
            iters,
            seed,
            target,
            rank,
            step,
            shrink,
            slope,
            no_bb,
            out: path,
            log,
            from,
        } => {
            let cfg = SearchConfig {
                d,
                num_bases: bases,
                restarts,
                max_iterations: iters,
                seed,
                target_residual: target,
                step: StepControl {
                    initial_step: step,
                    shrink,
                    slope,
                    barzilai_borwein: !no_bb,
                },
                factor_rank: rank,
                record_trace: false,
            };
            let result = match &from {
                Some(p) => {
                    let (_, f, _) = load(p)?;
                    if f.dim() != d || f.num_bases() != bases {
                        return Err(usage(format!(
                            "{}: family has d={} with {} bases, but --d {d} --bases {bases} was given",
                            p.display(),
                            f.dim(),
                            f.num_bases()
                        )));
                    }
                    cfg.validate()?;
                    polish(&f, &cfg)?
                }
                None => run_search(&cfg)?,
            };
            let doc = FamilyDocument::from_family(&result.best_family)
                .with_metadata("generator", if from.is_some() { "mub search --from" } else { "mub search" })
                .with_metadata("tool_version", TOOL_VERSION)
                .with_metadata("seed", seed)
                .with_metadata("best_objective", result.best_objective)
                .with_metadata("status", result.status());
            emit(&doc, path.as_deref(), out)?;
            if let Some(log) = &log {
                write_json(&SearchLog::new(&cfg, &result), log)?;
            }
            writeln!(
                err,
                "{}: best objective {:e} after {} restart(s), {} iterations",
                result.status(),
                result.best_objective,
                result.restarts_used,
                result.iterations_used
            )?;
            Ok(if result.converged { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Gauss { u, v, w } => {
            let params = GaussSumParams::new(u, v, w)?;
            let s = gauss_sum(&params);
            writeln!(out, "S({u}, {v}, {w}) = {:.15} {:+.15}i", s.re, s.im)?;
            writeln!(out, "|S|^2 = {:.12}", s.norm_sqr())?;
            Ok(EXIT_OK)
        }
    }
}
