//! `fgamma bound` — finite-sample concentration reports and sweep tables.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use fgamma_core::bounds::{
    bound_report, epsilon_for_confidence, BoundInputs, BoundReport, Provenance, Setting,
};
use fgamma_core::generators::{make_generator, DivergenceGenerator};

use crate::{emit_bytes, emit_json, fmt_f64, CliError};

#[derive(Args)]
pub struct BoundArgs {
    /// Setting: forward-gan, forward-gan-zero-approx, reverse-gan,
    /// reverse-gan-zero-approx, estimation-lower, estimation-upper,
    /// estimation (both sides), or gan (alias for forward-gan)
    #[arg(long)]
    setting: String,

    /// Generator spec: kl, js, or alpha:<a>
    #[arg(long)]
    gen: String,

    /// Data-side sample size
    #[arg(long)]
    n: usize,

    /// Model-side sample size
    #[arg(long)]
    m: usize,

    /// Lower end α of the discriminator range
    #[arg(long)]
    alpha: f64,

    /// Upper end β of the discriminator range
    #[arg(long)]
    beta: f64,

    /// Deviation threshold ε (exactly one of --epsilon/--delta)
    #[arg(long, conflicts_with = "delta")]
    epsilon: Option<f64>,

    /// Tail probability δ to invert into ε
    #[arg(long)]
    delta: Option<f64>,

    /// Rademacher-type quantity R
    #[arg(long, default_value_t = 0.0)]
    r: f64,

    /// ULLN quantity K
    #[arg(long, default_value_t = 0.0)]
    k: f64,

    /// Approximation error ε_approx (GAN settings)
    #[arg(long, default_value_t = 0.0)]
    eps_approx: f64,

    /// Optimization error ε_opt (GAN settings)
    #[arg(long, default_value_t = 0.0)]
    eps_opt: f64,

    /// Override the internally computed Δ_f constant
    #[arg(long)]
    delta_f: Option<f64>,

    /// Write a CSV sweep table to this path instead of a JSON report
    #[arg(long, requires = "sweep")]
    csv: Option<PathBuf>,

    /// Sweep axis: epsilon or n
    #[arg(long, requires = "csv", requires = "values")]
    sweep: Option<String>,

    /// Comma-separated sweep values for the chosen axis
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<String>>,

    /// Write the JSON report here instead of stdout (non-sweep mode)
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Which report(s) a `--setting` value asks for.
enum Selection {
    One(Setting),
    EstimationPair,
}

fn parse_selection(s: &str) -> Result<Selection, CliError> {
    match s {
        "gan" => Ok(Selection::One(Setting::ForwardGan)),
        "estimation" => Ok(Selection::EstimationPair),
        other => Setting::parse(other)
            .map(Selection::One)
            .map_err(|e| CliError::User(format!("{e} (or use 'gan' / 'estimation')"))),
    }
}

/// Output of `--setting estimation`: both one-sided reports.
#[derive(Serialize)]
struct PairReport {
    lower: BoundReport,
    upper: BoundReport,
}

fn provenance_str(p: Provenance) -> &'static str {
    match p {
        Provenance::Certified => "certified",
        Provenance::Estimated => "estimated",
        Provenance::UserSupplied => "user-supplied",
    }
}

/// Builds the shared inputs at a given (n, m); `epsilon` is filled per call.
fn inputs_at<'a>(args: &BoundArgs, gen: &'a DivergenceGenerator, n: usize) -> BoundInputs<'a> {
    let mut inputs = BoundInputs::new(gen, n, args.m, args.alpha, args.beta, 0.0);
    inputs.eps_approx = args.eps_approx;
    inputs.eps_opt = args.eps_opt;
    inputs.r = args.r;
    inputs.k = args.k;
    if let Some(d) = args.delta_f {
        inputs.delta_f = Some(d);
        inputs.delta_provenance = Some(Provenance::UserSupplied);
    }
    inputs
}

/// Resolves ε for one setting at the given inputs: the flag value, or the
/// inversion of --delta through that setting's tail.
fn epsilon_for(
    args: &BoundArgs,
    setting: Setting,
    inputs: &BoundInputs,
) -> Result<f64, CliError> {
    match (args.epsilon, args.delta) {
        (Some(e), None) => Ok(e),
        (None, Some(d)) => Ok(epsilon_for_confidence(setting, inputs, d)?),
        _ => Err(CliError::user("exactly one of --epsilon or --delta is required")),
    }
}

fn report_for(
    args: &BoundArgs,
    setting: Setting,
    gen: &DivergenceGenerator,
    n: usize,
) -> Result<BoundReport, CliError> {
    let mut inputs = inputs_at(args, gen, n);
    inputs.epsilon = epsilon_for(args, setting, &inputs)?;
    Ok(bound_report(setting, &inputs)?)
}

pub fn run(args: BoundArgs) -> Result<(), CliError> {
    let selection = parse_selection(&args.setting)?;
    let gen = make_generator(&args.gen)?;

    if let Some(csv_path) = &args.csv {
        return sweep(&args, &selection, &gen, csv_path.clone());
    }

    match selection {
        Selection::One(setting) => {
            let report = report_for(&args, setting, &gen, args.n)?;
            emit_json(&report, args.out.as_ref())
        }
        Selection::EstimationPair => {
            let pair = PairReport {
                lower: report_for(&args, Setting::EstimationLower, &gen, args.n)?,
                upper: report_for(&args, Setting::EstimationUpper, &gen, args.n)?,
            };
            emit_json(&pair, args.out.as_ref())
        }
    }
}

fn sweep(
    args: &BoundArgs,
    selection: &Selection,
    gen: &DivergenceGenerator,
    csv_path: PathBuf,
) -> Result<(), CliError> {
    let axis = args.sweep.as_deref().expect("clap: --csv requires --sweep");
    let values = args.values.as_ref().expect("clap: --sweep requires --values");
    let settings: Vec<Setting> = match selection {
        Selection::One(s) => vec![*s],
        Selection::EstimationPair => vec![Setting::EstimationLower, Setting::EstimationUpper],
    };

    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record([
        "setting",
        "n",
        "m",
        "epsilon",
        "threshold",
        "tail_probability",
        "overall",
    ])
    .map_err(|e| CliError::Internal(format!("csv: {e}")))?;

    for value in values {
        let (n, fixed_eps) = match axis {
            "epsilon" => {
                if args.delta.is_some() {
                    return Err(CliError::user(
                        "sweeping over epsilon conflicts with --delta",
                    ));
                }
                let eps: f64 = value.parse().map_err(|_| {
                    CliError::User(format!("invalid epsilon sweep value '{value}'"))
                })?;
                (args.n, Some(eps))
            }
            "n" => {
                let n: usize = value
                    .parse()
                    .map_err(|_| CliError::User(format!("invalid n sweep value '{value}'")))?;
                (n, args.epsilon)
            }
            other => {
                return Err(CliError::User(format!(
                    "unknown sweep axis '{other}' (expected epsilon or n)"
                )))
            }
        };
        for &setting in &settings {
            let mut inputs = inputs_at(args, gen, n);
            inputs.epsilon = match fixed_eps {
                Some(e) => e,
                None => {
                    let d = args
                        .delta
                        .ok_or_else(|| CliError::user("a sweep over n needs --epsilon or --delta"))?;
                    epsilon_for_confidence(setting, &inputs, d)?
                }
            };
            let report = bound_report(setting, &inputs)?;
            wtr.write_record([
                setting.as_str(),
                &n.to_string(),
                &args.m.to_string(),
                &fmt_f64(inputs.epsilon),
                &fmt_f64(report.threshold),
                &fmt_f64(report.tail_probability),
                provenance_str(report.overall),
            ])
            .map_err(|e| CliError::Internal(format!("csv: {e}")))?;
        }
    }

    let bytes = wtr
        .into_inner()
        .map_err(|e| CliError::Internal(format!("csv: {e}")))?;
    emit_bytes(&bytes, Some(&csv_path))
}
