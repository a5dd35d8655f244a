//! `fgamma verify` — the brute-force oracle suites.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;

use fgamma_core::verify::{run_suite, Budget};

use crate::{emit_json, CliError};

#[derive(Args)]
pub struct VerifyArgs {
    /// Suite: generators, cgf, divergence, rademacher, bounds, or all
    #[arg(long, default_value = "all")]
    suite: String,

    /// Monte Carlo budget: quick or full
    #[arg(long, default_value = "quick")]
    budget: String,

    /// Root seed
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: VerifyArgs) -> Result<ExitCode, CliError> {
    let budget = Budget::parse(&args.budget)?;
    let report = run_suite(&args.suite, budget, args.seed)?;
    emit_json(&report, args.out.as_ref())?;
    // A failed check is a violated library invariant, not a user mistake.
    Ok(if report.failed > 0 {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}
