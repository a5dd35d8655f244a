//! `fgamma` — divergence estimation, concentration bounds, Rademacher
//! complexities, GAN training, and brute-force verification suites behind
//! one deterministic binary.
//!
//! Exit codes: 0 on success; 1 on user error (bad flags, incompatible
//! generator/range, malformed files) with a one-line diagnostic on stderr;
//! 2 on an internal invariant violation, including verification suites
//! reporting failed checks.
//!
//! All randomness derives from `--seed`, and every parallel section uses
//! counter-based seeding, so a fixed argv produces byte-identical output
//! regardless of `--threads`.

mod bound;
mod estimate;
mod gan;
mod rademacher;
mod spec;
mod verify_cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use fgamma_core::bounds::BoundError;
use fgamma_core::cgf::CgfError;
use fgamma_core::discriminators::DiscError;
use fgamma_core::divergence::DivergenceError;
use fgamma_core::ganlab::GanError;
use fgamma_core::generators::GeneratorError;
use fgamma_core::rademacher::RademacherError;
use fgamma_core::verify::VerifyError;

/// Failures bubbled to `main`, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// The caller's fault: exit 1, one-line diagnostic.
    User(String),
    /// The library's fault — a violated internal invariant: exit 2.
    Internal(String),
}

impl CliError {
    pub fn user(msg: impl Into<String>) -> Self {
        CliError::User(msg.into())
    }
}

impl From<GeneratorError> for CliError {
    fn from(e: GeneratorError) -> Self {
        CliError::User(e.to_string())
    }
}

impl From<CgfError> for CliError {
    fn from(e: CgfError) -> Self {
        CliError::User(e.to_string())
    }
}

impl From<DiscError> for CliError {
    fn from(e: DiscError) -> Self {
        CliError::User(e.to_string())
    }
}

impl From<BoundError> for CliError {
    fn from(e: BoundError) -> Self {
        CliError::User(e.to_string())
    }
}

impl From<DivergenceError> for CliError {
    fn from(e: DivergenceError) -> Self {
        match e {
            DivergenceError::Internal(_) => CliError::Internal(e.to_string()),
            _ => CliError::User(e.to_string()),
        }
    }
}

impl From<RademacherError> for CliError {
    fn from(e: RademacherError) -> Self {
        match &e {
            RademacherError::Divergence(DivergenceError::Internal(_)) => {
                CliError::Internal(e.to_string())
            }
            _ => CliError::User(e.to_string()),
        }
    }
}

impl From<GanError> for CliError {
    fn from(e: GanError) -> Self {
        match &e {
            GanError::NonFinite { .. }
            | GanError::Divergence(DivergenceError::Internal(_)) => {
                CliError::Internal(e.to_string())
            }
            _ => CliError::User(e.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match &e {
            VerifyError::Divergence(DivergenceError::Internal(_)) => {
                CliError::Internal(e.to_string())
            }
            _ => CliError::User(e.to_string()),
        }
    }
}

/// Serializes `value` as pretty JSON (trailing newline) to `out` or stdout.
pub fn emit_json<T: serde::Serialize>(value: &T, out: Option<&PathBuf>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Internal(format!("serialization failed: {e}")))?;
    text.push('\n');
    emit_bytes(text.as_bytes(), out)
}

/// Writes raw bytes to `out` or stdout.
pub fn emit_bytes(bytes: &[u8], out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::User(format!("write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(bytes)
                .map_err(|e| CliError::User(format!("stdout: {e}")))
        }
    }
}

/// Shortest-round-trip decimal text for a float (CSV cells).
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

#[derive(Parser)]
#[command(
    name = "fgamma",
    version,
    about = "Variational (f,Γ)-divergence estimation with finite-sample certificates",
    propagate_version = true
)]
struct Cli {
    /// Worker threads for parallel sections (default: machine parallelism).
    /// Output bytes never depend on this value.
    #[arg(long, global = true, env = "FGAMMA_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate the variational divergence between two CSV samples
    Estimate(estimate::EstimateArgs),
    /// Evaluate a finite-sample concentration bound
    Bound(bound::BoundArgs),
    /// Empirical Rademacher complexity and Dudley certificates for a class
    Rademacher(rademacher::RademacherArgs),
    /// Train a small GAN against a synthetic target
    Gan(gan::GanArgs),
    /// Run brute-force verification suites against independent oracles
    Verify(verify_cmd::VerifyArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            // One-line diagnostic: the first non-empty line of clap's render.
            let rendered = e.to_string();
            let line = rendered
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("error: invalid arguments");
            eprintln!("{line}");
            return ExitCode::from(1);
        }
    };

    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        // Pool size never affects output bytes; a failure here means a pool
        // already exists, which is equally fine.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }

    match run(cli.cmd) {
        Ok(code) => code,
        Err(CliError::User(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Cmd) -> Result<ExitCode, CliError> {
    match cmd {
        Cmd::Estimate(args) => estimate::run(args).map(|()| ExitCode::SUCCESS),
        Cmd::Bound(args) => bound::run(args).map(|()| ExitCode::SUCCESS),
        Cmd::Rademacher(args) => rademacher::run(args).map(|()| ExitCode::SUCCESS),
        Cmd::Gan(args) => gan::run(args).map(|()| ExitCode::SUCCESS),
        Cmd::Verify(args) => verify_cmd::run(args),
    }
}
