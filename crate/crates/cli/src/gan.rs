//! `fgamma gan` — train a small GAN on a synthetic target; `fgamma gan
//! sweep` — the replicated consistency table across sample sizes.

use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde::Serialize;

use fgamma_core::ganlab::{consistency_experiment, train_gan, ConsistencyRow, Ordering, TrainTrace};

use crate::spec::{load_json, GanFileConfig, SweepFileConfig};
use crate::{emit_bytes, emit_json, fmt_f64, CliError};

#[derive(Args)]
pub struct GanArgs {
    #[command(subcommand)]
    sub: Option<GanSub>,

    /// JSON training config
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,

    /// Write the summary JSON here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,

    /// Write the per-round trace CSV here
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GanSub {
    /// Replicated trainings across sample sizes: observed held-out error
    /// next to the certificate columns
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep config (training template plus ns/reps)
    #[arg(long)]
    config: PathBuf,

    /// Override the sweep seed
    #[arg(long)]
    seed: Option<u64>,

    /// Write the consistency CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Stable summary schema of `fgamma gan`.
#[derive(Serialize)]
struct GanSummary {
    generator: String,
    ordering: Ordering,
    n: usize,
    m: usize,
    rounds: usize,
    seed: u64,
    restarts: usize,
    heldout_initial: f64,
    heldout_final: f64,
    eps_opt_proxy: f64,
    final_objective: f64,
    final_theta_norm: f64,
}

pub fn run(args: GanArgs) -> Result<(), CliError> {
    match args.sub {
        Some(GanSub::Sweep(sweep_args)) => run_sweep(sweep_args),
        None => run_train(args),
    }
}

fn run_train(args: GanArgs) -> Result<(), CliError> {
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| CliError::user("gan needs --config <file>"))?;
    let fc: GanFileConfig = load_json(path)?;
    let (mut cfg, target) = fc.into_train_config()?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }

    let trace = train_gan(&cfg, &target)?;

    if let Some(trace_path) = &args.trace_out {
        emit_bytes(&trace_csv(&trace)?, Some(trace_path))?;
    }

    let summary = GanSummary {
        generator: cfg.gen.name().to_string(),
        ordering: cfg.ordering,
        n: cfg.n,
        m: cfg.m,
        rounds: cfg.rounds,
        seed: cfg.seed,
        restarts: trace.restarts,
        heldout_initial: trace.heldout_initial,
        heldout_final: trace.heldout_final,
        eps_opt_proxy: trace.eps_opt_proxy,
        final_objective: *trace.objective.last().unwrap_or(&f64::NAN),
        final_theta_norm: *trace.theta_norm.last().unwrap_or(&f64::NAN),
    };
    emit_json(&summary, args.out.as_ref())
}

fn trace_csv(trace: &TrainTrace) -> Result<Vec<u8>, CliError> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Internal(format!("csv: {e}"));
    wtr.write_record(["round", "objective", "heldout", "theta_norm", "nu_star"])
        .map_err(err)?;
    for i in 0..trace.objective.len() {
        wtr.write_record([
            (i + 1).to_string(),
            fmt_f64(trace.objective[i]),
            fmt_f64(trace.heldout[i]),
            fmt_f64(trace.theta_norm[i]),
            fmt_f64(trace.nu_star[i]),
        ])
        .map_err(err)?;
    }
    wtr.into_inner()
        .map_err(|e| CliError::Internal(format!("csv: {e}")))
}

fn run_sweep(args: SweepArgs) -> Result<(), CliError> {
    let fc: SweepFileConfig = load_json(&args.config)?;
    let seed = args.seed.unwrap_or(fc.seed);
    let (template, target) = fc.template.into_train_config()?;
    let rows = consistency_experiment(&template, &target, &fc.ns, fc.reps, seed)?;
    emit_bytes(&consistency_csv(&rows)?, args.out.as_ref())
}

fn consistency_csv(rows: &[ConsistencyRow]) -> Result<Vec<u8>, CliError> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Internal(format!("csv: {e}"));
    wtr.write_record(["n", "m", "mean", "stderr", "dudley_r_q_n", "k_m", "threshold"])
        .map_err(err)?;
    for row in rows {
        wtr.write_record([
            row.n.to_string(),
            row.m.to_string(),
            fmt_f64(row.mean),
            fmt_f64(row.stderr),
            fmt_f64(row.dudley_r_q_n),
            fmt_f64(row.k_m),
            fmt_f64(row.threshold),
        ])
        .map_err(err)?;
    }
    wtr.into_inner()
        .map_err(|e| CliError::Internal(format!("csv: {e}")))
}
