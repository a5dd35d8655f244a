//! Brute-force verification suites behind the CLI `verify` subcommand.
//!
//! Each check re-derives a library quantity through an independent route —
//! dense grids, exhaustive enumeration, finite differences, or Monte Carlo
//! replication — and reports the measured slack against a pinned tolerance.
//! Checks never consult the code paths they audit for their reference
//! values.
//!
//! Checks are individually addressable by name through [`run_check`], and
//! grouped into suites through [`run_suite`]. Every check is deterministic
//! in `(budget, seed)`: randomness flows through counter-based generators
//! and the loops run in a fixed order, so reports are byte-identical
//! across thread counts.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{
    bound_report, epsilon_for_confidence, estimation_bounds, BoundError, BoundInputs, Provenance,
    Setting,
};
use crate::cgf::{
    delta_f, delta_f_detailed, lambda_empirical, lambda_lipschitz_const,
    perturbation_extremal_gap, CgfError,
};
use crate::discriminators::{
    project_to_ball, BoundedFunctionClass, DiscError, FeatureKind, GeneratorMap,
};
use crate::divergence::{
    divergence_objective, estimate_divergence, estimate_divergence_exact, estimate_ipm,
    f_divergence_discrete, objective_and_gradient, AscentConfig, DivergenceError, Sample,
};
use crate::generators::{validate_generator, DivergenceGenerator, GeneratorError};
use crate::rademacher::{
    dudley_ball_bound, dudley_integral_bound, empirical_rademacher, enumerate_rademacher,
    estimate_el2_root, k_quantity, rademacher_constant_interval, RademacherError,
};
use crate::rng::{derive_seed, stream, task_rng};

/// Verification failures that are not check failures: a check that finds a
/// violated invariant still returns `Ok` with `passed = false`; an `Err`
/// means the harness itself could not run (unknown suite or check name, or
/// a library call rejected its inputs).
#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(
        "unknown suite '{0}' (expected generators, cgf, divergence, rademacher, bounds, or all)"
    )]
    UnknownSuite(String),
    #[error("unknown check '{0}'")]
    UnknownCheck(String),
    #[error("unknown budget '{0}' (expected quick or full)")]
    UnknownBudget(String),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Cgf(#[from] CgfError),
    #[error(transparent)]
    Disc(#[from] DiscError),
    #[error(transparent)]
    Divergence(#[from] DivergenceError),
    #[error(transparent)]
    Rademacher(#[from] RademacherError),
    #[error(transparent)]
    Bound(#[from] BoundError),
}

/// Monte Carlo effort level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Budget {
    /// Trimmed replication counts; finishes in a few seconds.
    Quick,
    /// Full replication counts.
    Full,
}

impl Budget {
    pub fn parse(s: &str) -> Result<Self, VerifyError> {
        match s {
            "quick" => Ok(Budget::Quick),
            "full" => Ok(Budget::Full),
            other => Err(VerifyError::UnknownBudget(other.to_string())),
        }
    }

    fn pick(self, quick: usize, full: usize) -> usize {
        match self {
            Budget::Quick => quick,
            Budget::Full => full,
        }
    }
}

/// One verified statement. `margin` is the slack to the check's tolerance
/// or bound in its native units; it is ≥ 0 exactly when the check passed
/// (exact-equality checks report 0 on success and minus the deviation on
/// failure).
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub margin: f64,
    pub detail: String,
}

fn check(name: &str, margin: f64, detail: String) -> Check {
    Check {
        name: name.to_string(),
        passed: margin >= 0.0,
        margin,
        detail,
    }
}

/// Outcome of one suite run.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub budget: Budget,
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<Check>,
}

type CheckFn = fn(Budget, u64) -> Result<Check, VerifyError>;

/// Every check, tagged with the suite it belongs to. Suite order is the
/// execution and report order.
const REGISTRY: &[(&str, &str, CheckFn)] = &[
    ("generators", "conjugate-fixed-point", conjugate_fixed_point),
    ("generators", "conjugate-unit-slope", conjugate_unit_slope),
    ("generators", "conjugate-majorizes-identity", conjugate_majorizes_identity),
    ("generators", "conjugate-monotonicity", conjugate_monotonicity),
    ("generators", "legendre-round-trip", legendre_round_trip),
    ("generators", "builtin-validation", builtin_validation),
    ("cgf", "kl-log-mean-exp", kl_log_mean_exp),
    ("cgf", "compact-bracket-vs-wide-grid", compact_bracket_vs_wide_grid),
    ("cgf", "lambda-lipschitz-pairs", lambda_lipschitz_pairs),
    ("cgf", "perturbation-extremal-equality", perturbation_extremal_equality),
    ("cgf", "perturbation-random-bounded", perturbation_random_bounded),
    ("cgf", "delta-sandwich", delta_sandwich),
    ("cgf", "delta-kl-n1-width", delta_kl_n1_width),
    ("divergence", "order-inequalities", order_inequalities),
    ("divergence", "two-atom-kl-reference", two_atom_kl_reference),
    ("divergence", "identical-samples-zero", identical_samples_zero),
    ("divergence", "gradient-architecture-matrix", gradient_architecture_matrix),
    ("rademacher", "interval-constant-exact", interval_constant_exact),
    ("rademacher", "mc-vs-enumeration", mc_vs_enumeration),
    ("rademacher", "dudley-quadrature-cap", dudley_quadrature_cap),
    ("rademacher", "dudley-ball-value", dudley_ball_value),
    ("rademacher", "mlp-under-dudley", mlp_under_dudley),
    ("rademacher", "ulln-k-bound", ulln_k_bound),
    ("bounds", "epsilon-confidence-round-trip", epsilon_confidence_round_trip),
    ("bounds", "threshold-tail-shapes", threshold_tail_shapes),
    ("bounds", "provenance-label-rules", provenance_label_rules),
    ("bounds", "qp-tail-validity", qp_tail_validity),
];

const SUITES: [&str; 5] = ["generators", "cgf", "divergence", "rademacher", "bounds"];

/// Runs one named check.
pub fn run_check(name: &str, budget: Budget, seed: u64) -> Result<Check, VerifyError> {
    for (_, n, f) in REGISTRY {
        if *n == name {
            return f(budget, seed);
        }
    }
    Err(VerifyError::UnknownCheck(name.to_string()))
}

/// Runs one verification suite. `suite` ∈ {generators, cgf, divergence,
/// rademacher, bounds, all}.
pub fn run_suite(suite: &str, budget: Budget, seed: u64) -> Result<SuiteReport, VerifyError> {
    if suite != "all" && !SUITES.contains(&suite) {
        return Err(VerifyError::UnknownSuite(suite.to_string()));
    }
    let mut checks = Vec::new();
    for (s, _, f) in REGISTRY {
        if suite == "all" || *s == suite {
            checks.push(f(budget, seed)?);
        }
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    Ok(SuiteReport {
        suite: suite.to_string(),
        budget,
        seed,
        passed,
        failed: checks.len() - passed,
        checks,
    })
}

// ---------------------------------------------------------------------------
// shared helpers
// ---------------------------------------------------------------------------

/// The six built-in generators every cross-family check runs over.
fn builtin_generators() -> Vec<DivergenceGenerator> {
    vec![
        DivergenceGenerator::kl(),
        DivergenceGenerator::js(),
        DivergenceGenerator::alpha(1.5).expect("valid order"),
        DivergenceGenerator::alpha(2.0).expect("valid order"),
        DivergenceGenerator::alpha(3.0).expect("valid order"),
        DivergenceGenerator::alpha(5.0).expect("valid order"),
    ]
}

/// Largest range width the checks may draw for this generator (js conjugates
/// blow up at width log 2; everything else handles width 2 comfortably).
fn width_cap(gen: &DivergenceGenerator) -> f64 {
    if gen.check_compatibility(0.0, 1.0).is_ok() {
        2.0
    } else {
        0.6
    }
}

/// Golden-section maximization of a unimodal function on [lo, hi],
/// tracking the best evaluated point including the endpoints.
fn golden_max(lo: f64, hi: f64, iters: usize, f: impl Fn(f64) -> f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut best = f(a).max(f(b));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        best = best.max(fc).max(fd);
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    best
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn l2_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Check-id prefixes keeping this module's counter streams disjoint.
mod ctr {
    pub const KL_LME: u64 = 0x01 << 32;
    pub const BRACKET: u64 = 0x02 << 32;
    pub const LIPSCHITZ: u64 = 0x03 << 32;
    pub const PERT_RANDOM: u64 = 0x04 << 32;
    pub const ORDER: u64 = 0x05 << 32;
    pub const GRAD: u64 = 0x06 << 32;
    pub const ZERO: u64 = 0x07 << 32;
    pub const MC_ENUM: u64 = 0x08 << 32;
    pub const MLP_DUDLEY: u64 = 0x09 << 32;
    pub const ULLN_SAMPLE: u64 = 0x0A << 32;
    pub const ULLN_R: u64 = 0x0B << 32;
    pub const QP_REP: u64 = 0x0C << 32;
}

/// Random dictionary over 1-D atoms {0, …, s−1} with values in [lo, hi].
fn random_dictionary(
    rng: &mut impl Rng,
    atoms: usize,
    members: usize,
    lo: f64,
    hi: f64,
    with_constant: bool,
) -> Result<BoundedFunctionClass, VerifyError> {
    let support: Vec<Vec<f64>> = (0..atoms).map(|i| vec![i as f64]).collect();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(members);
    if with_constant {
        rows.push(vec![0.5 * (lo + hi); atoms]);
    }
    while rows.len() < members {
        rows.push((0..atoms).map(|_| rng.random_range(lo..hi)).collect());
    }
    Ok(BoundedFunctionClass::dictionary(support, rows, (lo, hi))?)
}

/// n atom indices drawn uniformly, returned with their empirical pmf over
/// the s atoms and the matching 1-D sample.
fn draw_atoms(rng: &mut impl Rng, s: usize, n: usize) -> (Vec<f64>, Sample) {
    let mut counts = vec![0usize; s];
    let mut pts = Vec::with_capacity(n);
    for _ in 0..n {
        let i = rng.random_range(0..s);
        counts[i] += 1;
        pts.push(vec![i as f64]);
    }
    let pmf: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    (pmf, Sample::new(pts).expect("nonempty sample"))
}

// ---------------------------------------------------------------------------
// generators suite
// ---------------------------------------------------------------------------

fn conjugate_fixed_point(_budget: Budget, _seed: u64) -> Result<Check, VerifyError> {
    let mut worst = 0.0f64;
    for gen in builtin_generators() {
        let z0 = gen.z0();
        worst = worst.max((gen.f_star(z0) - z0).abs());
    }
    Ok(check(
        "conjugate-fixed-point",
        1e-9 - worst,
        format!("worst |f*(z0) - z0| = {worst:.3e} over the six built-ins (tol 1e-9)"),
    ))
}

fn conjugate_unit_slope(_budget: Budget, _seed: u64) -> Result<Check, VerifyError> {
    let mut worst = 0.0f64;
    for gen in builtin_generators() {
        worst = worst.max((gen.f_star_rprime(gen.z0())? - 1.0).abs());
    }
    Ok(check(
        "conjugate-unit-slope",
        1e-9 - worst,
        format!("worst |(f*)'(z0) - 1| = {worst:.3e} over the six built-ins (tol 1e-9)"),
    ))
}

/// Grid over [z0 − 12, z0 + 12] clipped into the conjugate's finite domain.
fn conjugate_grid(gen: &DivergenceGenerator, n: usize) -> Vec<f64> {
    let z0 = gen.z0();
    let hi = (z0 + 12.0).min(gen.fstar_finite_sup() - 1e-9);
    let lo = z0 - 12.0;
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn conjugate_majorizes_identity(budget: Budget, _seed: u64) -> Result<Check, VerifyError> {
    let grid_n = budget.pick(801, 4001);
    let mut min_gap = f64::INFINITY;
    for gen in builtin_generators() {
        for z in conjugate_grid(&gen, grid_n) {
            min_gap = min_gap.min(gen.f_star(z) - z);
        }
    }
    Ok(check(
        "conjugate-majorizes-identity",
        min_gap + 1e-12,
        format!("min f*(z) - z = {min_gap:.3e} on [z0-12, z0+12] grids ({grid_n} points)"),
    ))
}

fn conjugate_monotonicity(budget: Budget, _seed: u64) -> Result<Check, VerifyError> {
    let grid_n = budget.pick(801, 4001);
    let mut min_mono = f64::INFINITY;
    for gen in builtin_generators() {
        let mut prev: Option<(f64, f64)> = None;
        for z in conjugate_grid(&gen, grid_n) {
            let v = gen.f_star(z);
            let d = gen.f_star_rprime(z)?;
            if let Some((pv, pd)) = prev {
                min_mono = min_mono.min(v - pv).min(d - pd);
            }
            prev = Some((v, d));
        }
    }
    Ok(check(
        "conjugate-monotonicity",
        min_mono + 1e-12,
        format!("worst adjacent-pair decrease of f* or (f*)' = {min_mono:.3e}"),
    ))
}

fn legendre_round_trip(_budget: Budget, _seed: u64) -> Result<Check, VerifyError> {
    // f(t) = sup_z { z·t − f*(z) }, the sup taken by golden-section search
    // over a bracket generous enough to contain the maximizer f'(t) for
    // every t probed (alpha(5) at t = 3 peaks at z ≈ 20).
    let ts = [0.05, 0.2, 0.5, 1.0, 1.5, 3.0];
    let mut worst = 0.0f64;
    for gen in builtin_generators() {
        let z0 = gen.z0();
        let hi = (z0 + 80.0).min(gen.fstar_finite_sup() - 1e-9);
        let lo = z0 - 80.0;
        for &t in &ts {
            let sup = golden_max(lo, hi, 160, |z| z * t - gen.f_star(z));
            worst = worst.max((sup - gen.f(t)).abs());
        }
    }
    Ok(check(
        "legendre-round-trip",
        1e-6 - worst,
        format!("worst |sup_z(zt - f*(z)) - f(t)| = {worst:.3e} over t in {ts:?} (tol 1e-6)"),
    ))
}

fn builtin_validation(_budget: Budget, _seed: u64) -> Result<Check, VerifyError> {
    let failed: Vec<String> = builtin_generators()
        .iter()
        .filter(|g| !validate_generator(g).all_passed())
        .map(|g| g.name().to_string())
        .collect();
    Ok(check(
        "builtin-validation",
        if failed.is_empty() { 0.0 } else { -1.0 },
        if failed.is_empty() {
            "validation report clean for all six built-ins".to_string()
        } else {
            format!("validation failures: {failed:?}")
        },
    ))
}

// ---------------------------------------------------------------------------
// cgf suite
// ---------------------------------------------------------------------------

fn kl_log_mean_exp(budget: Budget, seed: u64) -> Result<Check, VerifyError> {
    let kl = DivergenceGenerator::kl();
    let vectors = budget.pick(200, 1000);
    let mut worst = 0.0f64;
    for i in 0..vectors {
        let mut rng = task_rng(seed, stream::VERIFY, ctr::KL_LME | i as u64);
        let n = rng.random_range(1..=64);
        let vals: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let lam = lambda_empirical(&vals, &kl, 1e-12)?.value;
        let lme = (vals.iter().map(|v| v.exp()).sum::<f64>() / n as f64).ln();
        worst = worst.max((lam - lme).abs());
    }
    Ok(check(
        "kl-log-mean-exp",
        1e-9 - worst,
        format!("worst |Λ_kl - log-mean-exp| = {worst:.3e} over {vectors} vectors (tol 1e-9)"),
    ))
}

fn compact_bracket_vs_wide_grid(budget: Budget, seed: u64) -> Result<Check, VerifyError> {
    // The grid stays at 10⁵ points under every budget: the 1e-6 tolerance
    // needs that resolution (the grid's own discretization error is
    // quadratic in the step), so the budget knob is the instance count.
    let instances = budget.pick(10, 100);
    let grid = 100_000;
    let mut worst = 0.0f64;
    for (g, gen) in builtin_generators().iter().enumerate() {
        let cap = width_cap(gen);
        for i in 0..instances {
            let mut rng = task_rng(
                seed,
                stream::VERIFY,
                ctr::BRACKET | (g as u64) << 16 | i as u64,
            );
            let a = rng.random_range(-1.0..1.0);
            let b = a + rng.random_range(0.05..cap);
            let n = rng.random_range(1..=16);
            let vals: Vec<f64> = (0..n).map(|_| rng.random_range(a..b)).collect();
            let restricted = lambda_empirical(&vals, gen, 1e-9)?.value;
            let z0 = gen.z0();
            let (lo, hi) = (a - z0 - 10.0, b - z0 + 10.0);
            let mut grid_min = f64::INFINITY;
            for k in 0..grid {
                let nu = lo + (hi - lo) * k as f64 / (grid - 1) as f64;
                let v = nu + vals.iter().map(|&x| gen.f_star(x - nu)).sum::<f64>() / n as f64;
                if v.is_finite() {
                    grid_min = grid_min.min(v);
                }
            }
            worst = worst.max((restricted - grid_min).abs());
        }
    }
    Ok(check(
        "compact-bracket-vs-wide-grid",
        1e-6 - worst,
        format!(
            "worst |bracket min - {grid}-point wide-grid min| = {worst:.3e} \
             over {instances} instances per generator (tol 1e-6)"
        ),
    ))
}

fn lambda_lipschitz_pairs(budget: Budget, seed: u64) -> Result<Check, VerifyError> {
    // |Λ(x̃) − Λ(x)| ≤ (f*)'₊(z0 + β − α)·(1/n)Σ|x̃ᵢ − xᵢ| on random pairs.
    let gens = builtin_generators();
    let pairs = budget.pick(1000, 10_000);
    let mut min_slack = f64::INFINITY;
    let mut violations = 0usize;
    for i in 0..pairs {
        let mut rng = task_rng(seed, stream::VERIFY, ctr::LIPSCHITZ | i as u64);
        let gen = &gens[rng.random_range(0..gens.len())];
        let cap = width_cap(gen);
        let a = rng.random_range(-1.0..1.0);
        let b = a + rng.random_range(0.05..cap);
        let n = rng.random_range(1..=32);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(a..b)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(a..b)).collect();
        let tol = 1e-12 * (b - a).max(1.0);
        let lx = lambda_empirical(&x, gen, tol)?.value;
        let ly = lambda_empirical(&y, gen, tol)?.value;
        let l1: f64 = x.iter().zip(&y).map(|(u, v)| (u - v).abs()).sum::<f64>() / n as f64;
        let rhs = lambda_lipschitz_const(gen, a, b)? * l1 + 2.0 * tol + 1e-12;
        let slack = rhs - (lx - ly).abs();
        if slack < 0.0 {
            violations += 1;
        }
        min_slack = min_slack.min(slack);
    }
    Ok(check(
        "lambda-lipschitz-pairs",
        min_slack,
        format!("{violations} violations over {pairs} random pairs; min slack {min_slack:.3e}"),
    ))
}

fn perturbation_extremal_equality(_budget: Budget, _seed: u64) -> Result<Check, VerifyError> {
    let mut worst = 0.0f64;
    for gen in builtin_generators() {
        let (a, b) = (0.0, width_cap(&gen).min(1.0) * 0.9);
        for &n in &[1usize, 2, 4, 10, 100] {
            let gap = perturbation_extremal_gap(&gen, n, a, b)?;
            let delta = delta_f(&gen, n, a, b, 1e-10)? / n as f64;
            worst = worst.max((gap - delta).abs());
        }
    }
    Ok(check(
        "perturbation-extremal-equality",
        1e-6 - worst,
        format!(
            "worst |extremal gap - Δ/n| = {worst:.3e} over n in {{1,2,4,10,100}} \
             and six generators (tol 1e-6)"
        ),
    ))
}

fn perturbation_random_bounded(budget: Budget, seed: u64) -> Result<Check, VerifyError> {
    let gens = builtin_generators();
    let cases = budget.pick(300, 2000);
    let mut min_slack = f64::INFINITY;
    let mut violations = 0usize;
    for i in 0..cases {
        let mut rng = task_rng(seed, stream::VERIFY, ctr::PERT_RANDOM | i as u64);
        let gen = &gens[rng.random_range(0..gens.len())];
        let cap = width_cap(gen);
        let a = rng.random_range(-1.0..1.0);
        let b = a + rng.random_range(0.05..cap);
        let n = rng.random_range(1..=64);
        let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(a..b)).collect();
        let tol = 1e-12 * (b - a).max(1.0);
        let before = lambda_empirical(&x, gen, tol)?.value;
        let j = rng.random_range(0..n);
        x[j] = rng.random_range(a..b);
        let after = lambda_empirical(&x, gen, tol)?.value;
        let bound = delta_f(gen, n, a, b, tol)? / n as f64 + 1e-9;
        let slack = bound - (after - before).abs();
        if slack < 0.0 {
            violations += 1;
        }
        min_slack = min_slack.min(slack);
    }
    Ok(check(
        "perturbation-random-bounded",
        min_slack,
        format!(
            "{violations} exceedances of Δ/n + 1e-9 over {cases} random perturbations; \
             min slack {min_slack:.3e}"
        ),
    ))
}

fn delta_sandwich(_budget: Budget, _seed: u64) -> Result<Check, VerifyError> {
    // β − α ≤ Δ_{f,n} ≤ f*(β − α + z0) − z0 ≤ (f*)'₊(β − α + z0)(β − α),
    // checked on the raw solver value (the shipped value is clamped, so
    // auditing the clamp's input is the honest version of this check).
    let trio = [
        (DivergenceGenerator::kl(), 0.0, 1.0),
        (DivergenceGenerator::js(), 0.0, 0.6),
        (DivergenceGenerator::alpha(2.0).expect("valid order"), 0.0, 1.0),
    ];
    let mut min_slack = f64::INFINITY;
    for (gen, a, b) in &trio {
        let w = b - a;
        let z0 = gen.z0();
        let upper = gen.f_star(w + z0) - z0;
        let cap = gen.f_star_rprime(w + z0)? * w;
        for n in 1..=100usize {
            let d = delta_f_detailed(gen, n, *a, *b, 1e-12)?;
            min_slack = min_slack
                .min(d.raw - w + 1e-9)
                .min(upper - d.raw + 1e-9)
                .min(cap - upper + 1e-12);
        }
    }
    Ok(check(
        "delta-sandwich",
        min_slack,
        format!(
            "min slack of the three sandwich inequalities (raw solver values, \
             n = 1..=100, kl/js/alpha(2)) = {min_slack:.3e}"
        ),
    ))
}

fn delta_kl_n1_width(_budget: Budget, _seed: u64) -> Result<Check, VerifyError> {
    let kl = DivergenceGenerator::kl();
    let mut worst = 0.0f64;
    for (a, b) in [(0.0, 1.0), (-0.5, 1.0), (2.0, 3.5)] {
        let d = delta_f_detailed(&kl, 1, a, b, 1e-12)?;
        worst = worst.max((d.raw - (b - a)).abs());
    }
    Ok(check(
        "delta-kl-n1-width",
        1e-9 - worst,
        format!("worst |Δ_kl,1 - (β-α)| = {worst:.3e} over three ranges (tol 1e-9)"),
    ))
}

// ---------------------------------------------------------------------------
// divergence suite
// ---------------------------------------------------------------------------

fn order_inequalities(budget: Budget, seed: u64) -> Result<Check, VerifyError> {
    // D_f^Γ ≤ min(D_f, d_Γ) on random discrete pairs, with D_f^Γ computed
    // by exact dictionary enumeration, D_f by the discrete formula on the
    // empirical pmfs, and d_Γ by the exact IPM.
    let gens = builtin_generators();
    let cases = budget.pick(30, 100);
    let mut min_slack = f64::INFINITY;
    let mut violations = 0usize;
    for i in 0..cases {
        let mut rng = task_rng(seed, stream::VERIFY, ctr::ORDER | i as u64);
        let gen = &gens[rng.random_range(0..gens.len())];
        let hi = width_cap(gen).min(1.0) * 0.9;
        let s = rng.random_range(2..=6);
        let members = rng.random_range(3..=8);
        let dict = random_dictionary(&mut rng, s, members, 0.0, hi, false)?;
        let nq = rng.random_range(5..=40);
        let np = rng.random_range(5..=40);
        let (q_pmf, q) = draw_atoms(&mut rng, s, nq);
        let (p_pmf, p) = draw_atoms(&mut rng, s, np);
        let d_gamma = estimate_divergence_exact(gen, &dict, &q, &p)?;
        let d_f = f_divergence_discrete(gen, &q_pmf, &p_pmf)?;
        let ipm = estimate_ipm(&dict, &q, &p)?;
        let slack = d_f.min(ipm) + 1e-9 - d_gamma;
        if slack < 0.0 {
            violations += 1;
        }
        min_slack = min_slack.min(slack);
    }
    Ok(check(
        "order-inequalities",
        min_slack,
        format!(
            "{violations} violations of D_f^Γ ≤ min(D_f, IPM) + 1e-9 over {cases} \
             discrete pairs; min slack {min_slack:.3e}"
        ),
    ))
}

fn two_atom_kl_reference(_budget: Budget, _seed: u64) -> Result<Check, VerifyError> {
    // A rich tabulated dictionary over two atoms recovers the discrete KL
    // value of Q = (3/4, 1/4) vs P = (1/2, 1/2).
    let kl = DivergenceGenerator::kl();
    let support = vec![vec![0.0], vec![1.0]];
    let levels: Vec<f64> = (0..=120).map(|i| 1.2 * i as f64 / 120.0).collect();
    let mut rows = Vec::with_capacity(levels.len() * levels.len());
    for &u in &levels {
        for &v in &levels {
            rows.push(vec![u, v]);
        }
    }
    let rich = BoundedFunctionClass::dictionary(support, rows, (0.0, 1.2))?;
    let q = Sample::new(vec![vec![0.0], vec![0.0], vec![0.0], vec![1.0]]).expect("nonempty");
    let p = Sample::new(vec![vec![0.0], vec![1.0]]).expect("nonempty");
    let variational = estimate_divergence_exact(&kl, &rich, &q, &p)?;
    let discrete = f_divergence_discrete(&kl, &[0.75, 0.25], &[0.5, 0.5])?;
    let err = (variational - 0.130812)
        .abs()
        .max((discrete - 0.130812).abs());
    Ok(check(
        "two-atom-kl-reference",
        1e-3 - err,
        format!(
            "variational {variational:.6}, discrete formula {discrete:.6}, \
             reference 0.130812 (tol 1e-3)"
        ),
    ))
}

fn identical_samples_zero(_budget: Budget, seed: u64) -> Result<Check, VerifyError> {
    // D_f^Γ(μ, μ) = 0 exactly — dictionary route (constant member present)
    // and parameterized-ascent route (constant anchor restart).
    let gens = builtin_generators();
    let zero_cases = 10usize;
    let mut worst_abs = 0.0f64;
    for i in 0..zero_cases {
        let mut rng = task_rng(seed, stream::VERIFY, ctr::ZERO | i as u64);
        let gen = &gens[rng.random_range(0..gens.len())];
        let hi = width_cap(gen).min(1.0) * 0.9;
        let s = rng.random_range(2..=5);
        let members = rng.random_range(2..=6);
        let dict = random_dictionary(&mut rng, s, members, 0.0, hi, true)?;
        let n = rng.random_range(3..=30);
        let (_, mu) = draw_atoms(&mut rng, s, n);
        worst_abs = worst_abs.max(estimate_divergence_exact(gen, &dict, &mu, &mu)?.abs());
    }
    let mut rng = task_rng(seed, stream::VERIFY, ctr::ZERO | 0x1000);
    let kl = DivergenceGenerator::kl();
    let mlp = BoundedFunctionClass::mlp(&[1, 4, 1], 1.0, (0.0, 1.0))?;
    let mu = Sample::new((0..12).map(|_| vec![rng.random_range(-1.0..1.0)]).collect())
        .expect("nonempty");
    let ascent = estimate_divergence(&kl, &mlp, &mu, &mu, &AscentConfig::default())?;
    worst_abs = worst_abs.max(ascent.value.abs());
    Ok(check(
        "identical-samples-zero",
        -worst_abs,
        format!(
            "worst |D(μ,μ)| = {worst_abs:.3e} over {zero_cases} dictionary cases \
             and one mlp ascent case (must be exactly 0)"
        ),
    ))
}

fn gradient_architecture_matrix(_budget: Budget, seed: u64) -> Result<Check, VerifyError> {
    // Reverse-mode gradients against central differences: discriminator
    // θ-gradients, discriminator input gradients, generator-map θ-gradients,
    // and the envelope gradient of the full variational objective.
    let mut worst = 0.0f64;
    let mut counter = 0u64;
    let next_rng = |c: &mut u64| {
        *c += 1;
        task_rng(seed, stream::VERIFY, ctr::GRAD | *c)
    };

    let archs: Vec<(BoundedFunctionClass, &str)> = vec![
        (BoundedFunctionClass::mlp(&[1, 4, 1], 1.5, (0.0, 1.0))?, "mlp-1-4-1"),
        (BoundedFunctionClass::mlp(&[1, 6, 3, 1], 2.0, (-0.5, 0.5))?, "mlp-1-6-3-1"),
        (BoundedFunctionClass::mlp(&[2, 5, 1], 1.0, (0.0, 1.0))?, "mlp-2-5-1"),
        (
            BoundedFunctionClass::linear_features(2, FeatureKind::Identity, 1.0, (0.0, 1.0))?,
            "linear-identity",
        ),
        (
            BoundedFunctionClass::linear_features(1, FeatureKind::Affine, 2.0, (-1.0, 1.0))?,
            "linear-affine",
        ),
    ];
    for (class, _label) in &archs {
        let mut rng = next_rng(&mut counter);
        let dim = class.param_dim();
        let mut theta: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.4..0.4)).collect();
        project_to_ball(&mut theta, 0.7 * class.param_ball_radius());
        let pts: Vec<Vec<f64>> = (0..9)
            .map(|_| (0..class.input_dim()).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let cot: Vec<f64> = (0..pts.len()).map(|_| rng.random_range(-1.0..1.0)).collect();

        // θ-gradient of Σ cᵢ h_θ(xᵢ).
        let grad = class.gradient(&theta, &pts, &cot)?;
        let mut fd = vec![0.0; dim];
        for k in 0..dim {
            let step = 1e-6 * (1.0 + theta[k].abs());
            let mut tp = theta.clone();
            tp[k] += step;
            let up: f64 = class
                .evaluate(&tp, &pts)?
                .iter()
                .zip(&cot)
                .map(|(h, c)| h * c)
                .sum();
            tp[k] = theta[k] - step;
            let dn: f64 = class
                .evaluate(&tp, &pts)?
                .iter()
                .zip(&cot)
                .map(|(h, c)| h * c)
                .sum();
            fd[k] = (up - dn) / (2.0 * step);
        }
        worst = worst.max(l2_diff(&grad, &fd) / l2(&fd).max(1e-9));

        // Input gradient, point by point.
        let input_grads = class.input_gradient(&theta, &pts)?;
        for (p, g) in pts.iter().zip(&input_grads) {
            let mut fd = vec![0.0; p.len()];
            for k in 0..p.len() {
                let step = 1e-6 * (1.0 + p[k].abs());
                let mut pp = p.clone();
                pp[k] += step;
                let up = class.evaluate(&theta, std::slice::from_ref(&pp))?[0];
                pp[k] = p[k] - step;
                let dn = class.evaluate(&theta, std::slice::from_ref(&pp))?[0];
                fd[k] = (up - dn) / (2.0 * step);
            }
            worst = worst.max(l2_diff(g, &fd) / l2(&fd).max(1e-9));
        }
    }

    // Generator maps: θ-gradient of Σⱼ cotⱼ·Φ_θ(zⱼ).
    for widths in [vec![2usize, 4, 1], vec![3usize, 3, 2]] {
        let gmap = GeneratorMap::mlp(&widths, 2.0)?;
        let mut rng = next_rng(&mut counter);
        let dim = gmap.param_dim();
        let mut theta: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.4..0.4)).collect();
        project_to_ball(&mut theta, 0.7 * gmap.param_ball_radius());
        let zs: Vec<Vec<f64>> = (0..7)
            .map(|_| (0..gmap.noise_dim()).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let cots: Vec<Vec<f64>> = (0..zs.len())
            .map(|_| (0..gmap.output_dim()).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let grad = gmap.grad_theta(&theta, &zs, &cots)?;
        let score = |ys: &[Vec<f64>]| -> f64 {
            ys.iter()
                .zip(&cots)
                .map(|(y, c)| y.iter().zip(c).map(|(a, b)| a * b).sum::<f64>())
                .sum()
        };
        let mut fd = vec![0.0; dim];
        for k in 0..dim {
            let step = 1e-6 * (1.0 + theta[k].abs());
            let mut tp = theta.clone();
            tp[k] += step;
            let up = score(&gmap.map(&tp, &zs)?);
            tp[k] = theta[k] - step;
            let dn = score(&gmap.map(&tp, &zs)?);
            fd[k] = (up - dn) / (2.0 * step);
        }
        worst = worst.max(l2_diff(&grad, &fd) / l2(&fd).max(1e-9));
    }

    // Envelope gradient of the full objective, with the Λ term re-minimized
    // on every finite-difference probe.
    let envelope_cases: Vec<(DivergenceGenerator, BoundedFunctionClass)> = vec![
        (
            DivergenceGenerator::kl(),
            BoundedFunctionClass::mlp(&[1, 5, 1], 1.0, (0.0, 1.0))?,
        ),
        (
            DivergenceGenerator::alpha(2.0).expect("valid order"),
            BoundedFunctionClass::linear_features(1, FeatureKind::Affine, 1.5, (0.0, 1.0))?,
        ),
    ];
    for (gen, class) in &envelope_cases {
        let mut rng = next_rng(&mut counter);
        let q = Sample::new((0..12).map(|_| vec![rng.random_range(-1.0..1.0)]).collect())
            .expect("nonempty");
        let p = Sample::new((0..15).map(|_| vec![rng.random_range(-1.0..1.0)]).collect())
            .expect("nonempty");
        let dim = class.param_dim();
        let mut theta: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.3..0.3)).collect();
        project_to_ball(&mut theta, 0.7 * class.param_ball_radius());
        let (_, grad, _) = objective_and_gradient(gen, class, &theta, &q, &p)?;
        let mut fd = vec![0.0; dim];
        for k in 0..dim {
            let step = 1e-6 * (1.0 + theta[k].abs());
            let mut tp = theta.clone();
            tp[k] += step;
            let up = divergence_objective(gen, class, &tp, &q, &p)?.0;
            tp[k] = theta[k] - step;
            let dn = divergence_objective(gen, class, &tp, &q, &p)?.0;
            fd[k] = (up - dn) / (2.0 * step);
        }
        worst = worst.max(l2_diff(&grad, &fd) / l2(&fd).max(1e-9));
    }

    Ok(check(
        "gradient-architecture-matrix",
        1e-5 - worst,
        format!(
            "worst relative error vs central differences = {worst:.3e} across \
             {} discriminator architectures, 2 generator maps, and 2 envelope \
             objectives (tol 1e-5)",
            archs.len()
        ),
    ))
}

// ---------------------------------------------------------------------------
// rademacher suite
// ---------------------------------------------------------------------------

fn interval_constant_exact(_budget: Budget, _seed: u64) -> Result<Check, VerifyError> {
    // The class of constants with values in [0, 1]: closed form and
    // σ-enumeration both give 1/2 at n = 1 and 1/4 at n = 2.
    let mut worst = 0.0f64;
    for (n, expect) in [(1usize, 0.5), (2usize, 0.25)] {
        let closed = rademacher_constant_interval(n, 0.0, 1.0)?;
        let support: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64]).collect();
        let members = vec![vec![0.0; n], vec![1.0; n]];
        let dict = BoundedFunctionClass::dictionary(support.clone(), members, (0.0, 1.0))?;
        let pts = Sample::new(support).expect("nonempty");
        let enumerated = enumerate_rademacher(&dict, &pts)?;
        worst = worst
            .max((closed - expect).abs())
            .max((enumerated - expect).abs());
    }
    Ok(check(
        "interval-constant-exact",
        1e-12 - worst,
        format!(
            "worst deviation from 1/2 (n=1) and 1/4 (n=2) across closed form \
             and σ-enumeration = {worst:.3e}"
        ),
    ))
}

fn mc_vs_enumeration(budget: Budget, seed: u64) -> Result<Check, VerifyError> {
    let draws = budget.pick(1500, 6000);
    let mut min_slack = f64::INFINITY;
    let mut details = Vec::new();
    for (i, (k, n)) in [(2usize, 4usize), (3, 6), (5, 8), (4, 5), (6, 7)]
        .into_iter()
        .enumerate()
    {
        let mut rng = task_rng(seed, stream::VERIFY, ctr::MC_ENUM | i as u64);
        let dict = random_dictionary(&mut rng, n, k, 0.0, 1.0, false)?;
        let pts = Sample::new((0..n).map(|i| vec![i as f64]).collect()).expect("nonempty");
        let exact = enumerate_rademacher(&dict, &pts)?;
        let mc = empirical_rademacher(&dict, &pts, draws, derive_seed(seed, 0x5100 + i as u64))?;
        let slack = 3.0 * mc.stderr + 1e-12 - (mc.mean - exact).abs();
        min_slack = min_slack.min(slack);
        details.push(format!(
            "(k={k},n={n}): |mc-exact|={:.2e}",
            (mc.mean - exact).abs()
        ));
    }
    Ok(check(
        "mc-vs-enumeration",
        min_slack,
        format!(
            "MC within 3·stderr of full enumeration on 5 dictionaries at {draws} draws; {}",
            details.join(", ")
        ),
    ))
}

fn dudley_quadrature_cap(_budget: Budget, _seed: u64) -> Result<Check, VerifyError> {
    // The quadrature entropy integral stays under the closed 4√k cap (both
    // routes share the 12·n^{-1/2}·el2 prefactor; diameter 2).
    let mut min_slack = f64::INFINITY;
    for k in 1..=16usize {
        let integral = dudley_integral_bound(k, 100, 1.0, 2.0)?;
        let ball = dudley_ball_bound(k, 100, 1.0)?;
        min_slack = min_slack.min(ball - integral + 1e-12);
    }
    Ok(check(
        "dudley-quadrature-cap",
        min_slack,
        format!(
            "min (4√k closed bound − quadrature integral) slack = {min_slack:.3e} for k = 1..=16"
        ),
    ))
}

fn dudley_ball_value(_budget: Budget, _seed: u64) -> Result<Check, VerifyError> {
    let ball = dudley_ball_bound(4, 100, 1.0)?;
    Ok(check(
        "dudley-ball-value",
        1e-12 - (ball - 9.6).abs(),
        format!("dudley ball bound at (k=4, n=100, el2=1) = {ball:.15} (expect 9.6)"),
    ))
}

fn mlp_under_dudley(budget: Budget, seed: u64) -> Result<Check, VerifyError> {
    // Ball-constrained mlp classes: ascent Monte Carlo never exceeds the
    // Dudley certificate.
    let mc_draws = budget.pick(12, 40);
    let cases: Vec<(Vec<usize>, f64, (f64, f64), usize)> = vec![
        (vec![1, 4, 1], 1.0, (0.0, 1.0), 30),
        (vec![1, 8, 1], 1.5, (0.0, 1.0), 50),
        (vec![2, 4, 1], 1.0, (-1.0, 1.0), 40),
        (vec![1, 6, 3, 1], 2.0, (0.0, 1.0), 30),
        (vec![2, 6, 1], 1.5, (0.0, 1.0), 60),
    ];
    let mut min_slack = f64::INFINITY;
    let mut details = Vec::new();
    for (i, (widths, rho, range, n)) in cases.iter().enumerate() {
        let class = BoundedFunctionClass::mlp(widths, *rho, *range)?;
        let mut rng = task_rng(seed, stream::VERIFY, ctr::MLP_DUDLEY | i as u64);
        let pts = Sample::new(
            (0..*n)
                .map(|_| {
                    (0..class.input_dim())
                        .map(|_| rng.random_range(-1.5..1.5))
                        .collect()
                })
                .collect(),
        )
        .expect("nonempty");
        let el2 = estimate_el2_root(&class.lipschitz_profile()?, &pts);
        let cert = dudley_ball_bound(class.param_dim(), *n, el2)?;
        let mc =
            empirical_rademacher(&class, &pts, mc_draws, derive_seed(seed, 0x5200 + i as u64))?;
        let slack = cert + 3.0 * mc.stderr - mc.mean;
        min_slack = min_slack.min(slack);
        details.push(format!("{widths:?}@n={n}: mc={:.3}, cert={:.3}", mc.mean, cert));
    }
    Ok(check(
        "mlp-under-dudley",
        min_slack,
        format!(
            "ascent MC ≤ Dudley certificate + 3·stderr on 5 architectures at \
             {mc_draws} draws; {}",
            details.join("; ")
        ),
    ))
}

fn ulln_k_bound(budget: Budget, seed: u64) -> Result<Check, VerifyError> {
    // E[sup_ψ ±(Λ^P[ψ] − Λ^{P_n}[ψ])] ≤ 2·K for an 8-member dictionary over
    // a known 4-atom uniform P, at n ∈ {10, 100}. Λ^P is exact (a 4-point
    // uniform empirical measure IS the known P); the inner sup enumerates
    // all 8 members; the Rademacher input to K uses exact σ-enumeration at
    // n = 10 and Monte Carlo at n = 100.
    let gen = DivergenceGenerator::kl();
    let reps = budget.pick(300, 2000);

    let mut rng = task_rng(seed, stream::VERIFY, ctr::ULLN_SAMPLE);
    let atoms = 4usize;
    let dict = random_dictionary(&mut rng, atoms, 8, 0.0, 1.0, true)?;
    let member_vals: Vec<Vec<f64>> = (0..8)
        .map(|j| dict.evaluate_member(j, &(0..atoms).map(|i| vec![i as f64]).collect::<Vec<_>>()))
        .collect::<Result<_, _>>()?;
    let tol = 1e-12;
    let lambda_p: Vec<f64> = member_vals
        .iter()
        .map(|v| Ok(lambda_empirical(v, &gen, tol)?.value))
        .collect::<Result<_, VerifyError>>()?;

    let mut min_slack = f64::INFINITY;
    let mut details = Vec::new();
    for (ni, &n) in [10usize, 100].iter().enumerate() {
        let mut plus = Vec::with_capacity(reps);
        let mut minus = Vec::with_capacity(reps);
        for rep in 0..reps {
            let mut rng = task_rng(
                seed,
                stream::VERIFY,
                ctr::ULLN_SAMPLE | (ni as u64) << 24 | (rep as u64 + 1),
            );
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..atoms)).collect();
            let mut sup_plus = f64::NEG_INFINITY;
            let mut sup_minus = f64::NEG_INFINITY;
            for (j, vals) in member_vals.iter().enumerate() {
                let sampled: Vec<f64> = idx.iter().map(|&i| vals[i]).collect();
                let ln = lambda_empirical(&sampled, &gen, tol)?.value;
                sup_plus = sup_plus.max(lambda_p[j] - ln);
                sup_minus = sup_minus.max(ln - lambda_p[j]);
            }
            plus.push(sup_plus);
            minus.push(sup_minus);
        }
        let mean_se = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0);
            (m, (var / v.len() as f64).sqrt())
        };
        let (mp, sp) = mean_se(&plus);
        let (mm, sm) = mean_se(&minus);

        // Rademacher complexity of the dictionary at sample size n from P.
        let r = if n <= 16 {
            let samples = budget.pick(100, 400);
            let mut acc = 0.0;
            for s in 0..samples {
                let mut rng = task_rng(seed, stream::VERIFY, ctr::ULLN_R | (s as u64 + 1));
                let pts = Sample::new(
                    (0..n).map(|_| vec![rng.random_range(0..atoms) as f64]).collect(),
                )
                .expect("nonempty");
                acc += enumerate_rademacher(&dict, &pts)?;
            }
            acc / samples as f64
        } else {
            let samples = budget.pick(20, 50);
            let draws = budget.pick(100, 400);
            let mut acc = 0.0;
            for s in 0..samples {
                let mut rng = task_rng(
                    seed,
                    stream::VERIFY,
                    ctr::ULLN_R | 0x0100_0000 | (s as u64 + 1),
                );
                let pts = Sample::new(
                    (0..n).map(|_| vec![rng.random_range(0..atoms) as f64]).collect(),
                )
                .expect("nonempty");
                acc += empirical_rademacher(&dict, &pts, draws, derive_seed(seed, 0x5300 + s as u64))?
                    .mean;
            }
            acc / samples as f64
        };
        let bound = 2.0 * k_quantity(&gen, r, n, 0.0, 1.0)?;
        min_slack = min_slack
            .min(bound - (mp + 3.0 * sp))
            .min(bound - (mm + 3.0 * sm));
        details.push(format!(
            "n={n}: E[sup+]={mp:.4}, E[sup−]={mm:.4}, 2K={bound:.4}"
        ));
    }
    Ok(check(
        "ulln-k-bound",
        min_slack,
        format!(
            "one-sided suprema + 3·stderr under 2K at {reps} replications; {}",
            details.join("; ")
        ),
    ))
}

// ---------------------------------------------------------------------------
// bounds suite
// ---------------------------------------------------------------------------

const ALL_SETTINGS: [Setting; 6] = [
    Setting::ForwardGan,
    Setting::ForwardGanZeroApprox,
    Setting::ReverseGan,
    Setting::ReverseGanZeroApprox,
    Setting::EstimationLower,
    Setting::EstimationUpper,
];

fn base_inputs(gen: &DivergenceGenerator) -> BoundInputs<'_> {
    let mut b = BoundInputs::new(gen, 50, 80, 0.0, 1.0, 0.1);
    b.eps_approx = 0.01;
    b.eps_opt = 0.02;
    b.r = 0.05;
    b.k = 0.1;
    b
}

fn epsilon_confidence_round_trip(_budget: Budget, _seed: u64) -> Result<Check, VerifyError> {
    let gen = DivergenceGenerator::kl();
    let base = base_inputs(&gen);
    let mut worst = 0.0f64;
    for setting in ALL_SETTINGS {
        for delta in [0.05, 0.3] {
            let eps = epsilon_for_confidence(setting, &base, delta)?;
            let mut inputs = base.clone();
            inputs.epsilon = eps;
            let report = bound_report(setting, &inputs)?;
            worst = worst.max((report.tail_probability - delta).abs());
        }
    }
    Ok(check(
        "epsilon-confidence-round-trip",
        1e-12 - worst,
        format!("worst |tail(ε(δ)) - δ| = {worst:.3e} over six settings × two δ (tol 1e-12)"),
    ))
}

fn threshold_tail_shapes(_budget: Budget, _seed: u64) -> Result<Check, VerifyError> {
    // Tails strictly decrease in ε and live in (0, 1]; GAN thresholds
    // dominate ε_approx + ε_opt; the estimation pair's thresholds are
    // exactly ε and ε + 2R + 2K.
    let gen = DivergenceGenerator::kl();
    let base = base_inputs(&gen);
    let mut min_slack = f64::INFINITY;
    for setting in ALL_SETTINGS {
        let mut prev: Option<f64> = None;
        for eps in [0.05, 0.1, 0.2, 0.4] {
            let mut inputs = base.clone();
            inputs.epsilon = eps;
            let report = bound_report(setting, &inputs)?;
            let tail = report.tail_probability;
            min_slack = min_slack.min(tail).min(1.0 - tail);
            if let Some(p) = prev {
                min_slack = min_slack.min(p - tail);
            }
            prev = Some(tail);
            if !matches!(setting, Setting::EstimationLower | Setting::EstimationUpper) {
                min_slack = min_slack.min(report.threshold - (inputs.eps_approx + inputs.eps_opt));
            }
        }
    }
    let (low, up) = estimation_bounds(&base)?;
    min_slack = min_slack
        .min(1e-15 - (low.threshold - base.epsilon).abs())
        .min(1e-15 - (up.threshold - (base.epsilon + 2.0 * base.r + 2.0 * base.k)).abs());
    Ok(check(
        "threshold-tail-shapes",
        min_slack,
        format!(
            "tails monotone in ε and in (0,1], GAN thresholds ≥ ε_approx + ε_opt, \
             estimation thresholds exactly (ε, ε + 2R + 2K); min slack {min_slack:.3e}"
        ),
    ))
}

fn provenance_label_rules(_budget: Budget, _seed: u64) -> Result<Check, VerifyError> {
    let gen = DivergenceGenerator::kl();
    let base = base_inputs(&gen);
    let mut ok = true;
    let mut trail = Vec::new();
    {
        let mut inputs = base.clone();
        inputs.r_provenance = Provenance::Estimated;
        inputs.k_provenance = Provenance::Certified;
        let report = bound_report(Setting::ForwardGan, &inputs)?;
        ok &= report.overall == Provenance::Estimated;
        trail.push(format!("estimated r → {:?}", report.overall));
    }
    {
        let mut inputs = base.clone();
        inputs.r_provenance = Provenance::Certified;
        inputs.k_provenance = Provenance::Certified;
        let report = bound_report(Setting::ForwardGan, &inputs)?;
        ok &= report.overall == Provenance::Certified;
        trail.push(format!("certified r,k,Δ → {:?}", report.overall));
    }
    {
        let mut inputs = base.clone();
        inputs.r_provenance = Provenance::UserSupplied;
        inputs.k_provenance = Provenance::Certified;
        let report = bound_report(Setting::ForwardGan, &inputs)?;
        ok &= report.overall == Provenance::UserSupplied;
        trail.push(format!("user-supplied r → {:?}", report.overall));
    }
    Ok(check(
        "provenance-label-rules",
        if ok { 0.0 } else { -1.0 },
        trail.join("; "),
    ))
}

fn qp_tail_validity(budget: Budget, seed: u64) -> Result<Check, VerifyError> {
    // Q = P estimation experiment: replications of the exact dictionary
    // estimator on fresh (Q_n, P_m) pairs from a known 4-atom uniform P;
    // the empirical frequencies of the lower event {D̂ − D < −ε} and the
    // upper event {D̂ − D > ε + 2R + 2K} must stay under the theorem tail
    // (plus 3 binomial standard errors) at ε ∈ {0.05, 0.1, 0.2}.
    let gen = DivergenceGenerator::kl();
    let reps = budget.pick(500, 5000);
    let (n, m) = (200usize, 200usize);
    let atoms = 4usize;

    let mut rng = task_rng(seed, stream::VERIFY, ctr::QP_REP);
    let dict = random_dictionary(&mut rng, atoms, 8, 0.0, 1.0, true)?;

    // True divergence D(P, P) = 0: the class contains a constant, so the
    // population objective is maximized at it with value exactly 0.
    let d_true = 0.0;

    // R at sample size n (Monte Carlo; enters only through the upper
    // threshold, which concentration then has to clear).
    let r_samples = budget.pick(20, 30);
    let r_draws = budget.pick(100, 200);
    let mut acc = 0.0;
    for s in 0..r_samples {
        let mut rng = task_rng(
            seed,
            stream::VERIFY,
            ctr::QP_REP | 0x0100_0000 | (s as u64 + 1),
        );
        let pts = Sample::new((0..n).map(|_| vec![rng.random_range(0..atoms) as f64]).collect())
            .expect("nonempty");
        acc += empirical_rademacher(&dict, &pts, r_draws, derive_seed(seed, 0x5400 + s as u64))?
            .mean;
    }
    let r = acc / r_samples as f64;
    let k = k_quantity(&gen, r, n, 0.0, 1.0)?;

    let mut d_hats = Vec::with_capacity(reps);
    for rep in 0..reps {
        let mut rng = task_rng(
            seed,
            stream::VERIFY,
            ctr::QP_REP | 0x0200_0000 | (rep as u64 + 1),
        );
        let (_, q) = draw_atoms(&mut rng, atoms, n);
        let (_, p) = draw_atoms(&mut rng, atoms, m);
        d_hats.push(estimate_divergence_exact(&gen, &dict, &q, &p)?);
    }

    let mut min_slack = f64::INFINITY;
    let mut details = Vec::new();
    for eps in [0.05, 0.1, 0.2] {
        let mut inputs = BoundInputs::new(&gen, n, m, 0.0, 1.0, eps);
        inputs.r = r;
        inputs.k = k;
        let (low, up) = estimation_bounds(&inputs)?;
        let tail = low.tail_probability.min(1.0);
        let freq_low = d_hats.iter().filter(|&&d| d - d_true < -eps).count() as f64 / reps as f64;
        let freq_up =
            d_hats.iter().filter(|&&d| d - d_true > up.threshold).count() as f64 / reps as f64;
        for (label, freq) in [("lower", freq_low), ("upper", freq_up)] {
            let se = (freq * (1.0 - freq) / reps as f64).sqrt();
            let slack = tail + 3.0 * se - freq;
            min_slack = min_slack.min(slack);
            details.push(format!("ε={eps} {label}: freq={freq:.4} tail={tail:.4}"));
        }
    }
    Ok(check(
        "qp-tail-validity",
        min_slack,
        format!(
            "{reps} replications at n=m={n}; every deviation frequency under the \
             theorem tail + 3·stderr; {}",
            details.join("; ")
        ),
    ))
}
