//! `fgamma rademacher` — Monte Carlo complexity estimates plus the Dudley
//! certificates for the same class.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use fgamma_core::divergence::Sample;
use fgamma_core::rademacher::{
    dudley_ball_bound, dudley_integral_bound, empirical_rademacher, estimate_el2_root, InnerSolver,
};

use crate::spec::{load_json, ClassFlags, ClassSpec};
use crate::{emit_json, CliError};

/// Covering diameter the quadrature entropy integral is truncated at.
const INTEGRAL_DIAMETER: f64 = 2.0;

#[derive(Args)]
pub struct RademacherArgs {
    /// CSV of evaluation points (one point per row)
    #[arg(long)]
    points: PathBuf,

    /// JSON class spec (alternative to the inline class flags)
    #[arg(
        long,
        conflicts_with_all = ["arch", "widths", "feature", "input_dim", "rho", "alpha", "beta"]
    )]
    config: Option<PathBuf>,

    #[command(flatten)]
    class: ClassFlags,

    /// Monte Carlo σ-draws
    #[arg(long, default_value_t = 200)]
    draws: usize,

    /// Root seed
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Stable output schema of `fgamma rademacher`. The Dudley fields are null
/// for dictionary classes, whose complexity has no parameter-ball covering
/// bound.
#[derive(Serialize)]
struct RademacherReport {
    mean: f64,
    stderr: f64,
    draws: usize,
    /// "exact-enumeration" (dictionaries) or "ascent" (parameterized).
    mode: InnerSolver,
    n_points: usize,
    dudley_ball: Option<f64>,
    dudley_integral: Option<f64>,
    seed: u64,
}

pub fn run(args: RademacherArgs) -> Result<(), CliError> {
    let class_spec: ClassSpec = match &args.config {
        Some(path) => load_json(path)?,
        None => args.class.to_spec()?,
    };
    let class = class_spec.build()?;
    let points = Sample::from_csv(&args.points)?;

    let estimate = empirical_rademacher(&class, &points, args.draws, args.seed)?;

    let (dudley_ball, dudley_integral) = if class.is_dictionary() {
        (None, None)
    } else {
        let el2 = estimate_el2_root(&class.lipschitz_profile()?, &points);
        let k = class.param_dim();
        (
            Some(dudley_ball_bound(k, points.len(), el2)?),
            Some(dudley_integral_bound(k, points.len(), el2, INTEGRAL_DIAMETER)?),
        )
    };

    let report = RademacherReport {
        mean: estimate.mean,
        stderr: estimate.stderr,
        draws: estimate.draws,
        mode: estimate.inner_solver,
        n_points: points.len(),
        dudley_ball,
        dudley_integral,
        seed: args.seed,
    };
    emit_json(&report, args.out.as_ref())
}
