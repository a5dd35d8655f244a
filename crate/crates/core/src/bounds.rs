//! Concentration-bound assembly: every tail probability and threshold in
//! the estimation and GAN settings, packaged as auditable reports with
//! per-quantity provenance, plus the algebraic inversion (ε for a target
//! confidence) and L^q error-bound integration.
//!
//! Provenance discipline: a report is only as strong as its weakest
//! mathematical input. `overall` is certified only when R, K, and Δ are
//! all certified; any estimated input downgrades it to estimated;
//! otherwise user-supplied inputs make it user-supplied. ε, ε_approx and
//! ε_opt are modeling choices and never upgrade or downgrade a report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cgf::{self, delta_f, CgfError};
use crate::generators::{Compatibility, DivergenceGenerator, GeneratorError};

#[derive(Debug, Error)]
pub enum BoundError {
    #[error("generator incompatible with range: {0}")]
    Incompatible(String),
    #[error("epsilon must be positive in GAN settings, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("epsilon must be nonnegative, got {0}")]
    NegativeEpsilon(f64),
    #[error("confidence level must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("L^q integral does not converge: tail function has not dropped below 1e-16 by ε = {0:e}")]
    DivergentIntegral(f64),
    #[error(transparent)]
    Cgf(#[from] CgfError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
}

/// Which concentration statement a report instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Setting {
    ForwardGan,
    ForwardGanZeroApprox,
    ReverseGan,
    ReverseGanZeroApprox,
    EstimationLower,
    EstimationUpper,
}

impl Setting {
    pub fn parse(s: &str) -> Result<Self, BoundError> {
        match s {
            "forward-gan" => Ok(Setting::ForwardGan),
            "forward-gan-zero-approx" => Ok(Setting::ForwardGanZeroApprox),
            "reverse-gan" => Ok(Setting::ReverseGan),
            "reverse-gan-zero-approx" => Ok(Setting::ReverseGanZeroApprox),
            "estimation-lower" => Ok(Setting::EstimationLower),
            "estimation-upper" => Ok(Setting::EstimationUpper),
            other => Err(BoundError::InvalidInput(format!(
                "unknown setting '{other}'"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Setting::ForwardGan => "forward-gan",
            Setting::ForwardGanZeroApprox => "forward-gan-zero-approx",
            Setting::ReverseGan => "reverse-gan",
            Setting::ReverseGanZeroApprox => "reverse-gan-zero-approx",
            Setting::EstimationLower => "estimation-lower",
            Setting::EstimationUpper => "estimation-upper",
        }
    }

    fn is_gan(&self) -> bool {
        !matches!(self, Setting::EstimationLower | Setting::EstimationUpper)
    }

    fn is_reverse(&self) -> bool {
        matches!(self, Setting::ReverseGan | Setting::ReverseGanZeroApprox)
    }
}

impl std::fmt::Display for Setting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How a quantity entering a bound was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Computed by a route that is itself an upper bound (Dudley bounds,
    /// the Δ sandwich) — safe to cite as part of a guarantee.
    Certified,
    /// Monte Carlo or ascent-based — a consistent estimate, possibly a
    /// lower bound where an upper bound is needed; never a certificate.
    Estimated,
    /// Asserted by the caller.
    UserSupplied,
}

/// Inputs shared by every setting. `r` and `k` are the Rademacher-type
/// and K-type quantities on whichever side the setting places them
/// (forward: R on the data side and K on the model side; reverse:
/// swapped). `delta_f` overrides the internally computed Δ when given.
#[derive(Debug, Clone)]
pub struct BoundInputs<'a> {
    pub gen: &'a DivergenceGenerator,
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub eps_approx: f64,
    pub eps_opt: f64,
    pub r: f64,
    pub k: f64,
    pub delta_f: Option<f64>,
    pub r_provenance: Provenance,
    pub k_provenance: Provenance,
    /// Provenance of a supplied `delta_f`; an internally computed Δ is
    /// always certified.
    pub delta_provenance: Option<Provenance>,
}

impl<'a> BoundInputs<'a> {
    /// All optional quantities zeroed and marked user-supplied.
    pub fn new(
        gen: &'a DivergenceGenerator,
        n: usize,
        m: usize,
        alpha: f64,
        beta: f64,
        epsilon: f64,
    ) -> Self {
        BoundInputs {
            gen,
            n,
            m,
            alpha,
            beta,
            epsilon,
            eps_approx: 0.0,
            eps_opt: 0.0,
            r: 0.0,
            k: 0.0,
            delta_f: None,
            r_provenance: Provenance::UserSupplied,
            k_provenance: Provenance::UserSupplied,
            delta_provenance: None,
        }
    }
}

/// Owned echo of the numbers a report was computed from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportInputs {
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub beta: f64,
    pub generator: String,
    pub epsilon: f64,
    pub eps_approx: f64,
    pub eps_opt: f64,
    pub r: f64,
    pub k: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_f_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_f_m: Option<f64>,
}

/// One concentration statement, fully instantiated: with probability at
/// least 1 − `tail_probability`, the setting's deviation stays below
/// `threshold`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub setting: Setting,
    pub inputs: ReportInputs,
    pub threshold: f64,
    pub tail_probability: f64,
    pub provenance: BTreeMap<String, Provenance>,
    pub overall: Provenance,
}

fn validate(inputs: &BoundInputs, setting: Setting) -> Result<(), BoundError> {
    let BoundInputs {
        gen,
        n,
        m,
        alpha,
        beta,
        epsilon,
        eps_approx,
        eps_opt,
        r,
        k,
        delta_f,
        ..
    } = inputs;
    if *n == 0 || *m == 0 {
        return Err(BoundError::InvalidInput("n and m must be ≥ 1".into()));
    }
    for (name, v) in [
        ("alpha", *alpha),
        ("beta", *beta),
        ("epsilon", *epsilon),
        ("eps_approx", *eps_approx),
        ("eps_opt", *eps_opt),
        ("r", *r),
        ("k", *k),
    ] {
        if !v.is_finite() {
            return Err(BoundError::InvalidInput(format!("{name} must be finite")));
        }
    }
    for (name, v) in [
        ("eps_approx", *eps_approx),
        ("eps_opt", *eps_opt),
        ("r", *r),
        ("k", *k),
    ] {
        if v < 0.0 {
            return Err(BoundError::InvalidInput(format!("{name} must be ≥ 0")));
        }
    }
    if let Some(d) = delta_f {
        if !(*d >= 0.0) || !d.is_finite() {
            return Err(BoundError::InvalidInput("delta_f must be ≥ 0".into()));
        }
    }
    if let Compatibility::Incompatible(why) = gen.check_compatibility(*alpha, *beta) {
        return Err(BoundError::Incompatible(why));
    }
    if setting.is_gan() {
        if !(*epsilon > 0.0) {
            return Err(BoundError::NonPositiveEpsilon(*epsilon));
        }
    } else if *epsilon < 0.0 {
        return Err(BoundError::NegativeEpsilon(*epsilon));
    }
    Ok(())
}

/// Resolves Δ on the side the setting needs it (reverse: the data side
/// with n points; otherwise the model side with m points), honoring a
/// user override.
fn resolve_delta(inputs: &BoundInputs, setting: Setting) -> Result<(f64, Provenance), BoundError> {
    match inputs.delta_f {
        Some(d) => Ok((
            d,
            inputs.delta_provenance.unwrap_or(Provenance::UserSupplied),
        )),
        None => {
            let count = if setting.is_reverse() {
                inputs.n
            } else {
                inputs.m
            };
            let tol = cgf::default_tol(inputs.alpha, inputs.beta);
                let d = delta_f(inputs.gen, count, inputs.alpha, inputs.beta, tol)?;
            Ok((d, Provenance::Certified))
        }
    }
}

/// The denominator inside exp(−ε²/·) (GAN settings) or exp(−2ε²/·)
/// (estimation settings).
fn tail_denominator(setting: Setting, n: usize, m: usize, width: f64, delta: f64) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    let w2 = width * width;
    let d2 = delta * delta;
    match setting {
        Setting::ForwardGan => 2.0 / nf * w2 + 2.0 / mf * d2,
        Setting::ForwardGanZeroApprox => w2 / (2.0 * nf) + 2.0 / mf * d2,
        Setting::ReverseGan => 2.0 / mf * w2 + 2.0 / nf * d2,
        Setting::ReverseGanZeroApprox => 2.0 / mf * w2 + d2 / (2.0 * nf),
        Setting::EstimationLower | Setting::EstimationUpper => w2 / nf + d2 / mf,
    }
}

fn tail_probability(setting: Setting, epsilon: f64, denominator: f64) -> f64 {
    let scale = if setting.is_gan() { 1.0 } else { 2.0 };
    if denominator == 0.0 {
        // Degenerate zero-width, zero-Δ case: the deviation is 0 almost
        // surely, so any ε > 0 has tail 0 and ε = 0 has the trivial tail.
        return if epsilon > 0.0 { 0.0 } else { 1.0 };
    }
    (-scale * epsilon * epsilon / denominator).exp()
}

fn threshold(setting: Setting, inputs: &BoundInputs) -> f64 {
    let BoundInputs {
        epsilon,
        eps_approx,
        eps_opt,
        r,
        k,
        ..
    } = inputs;
    match setting {
        Setting::ForwardGan | Setting::ReverseGan => {
            epsilon + eps_approx + eps_opt + 4.0 * r + 4.0 * k
        }
        Setting::ForwardGanZeroApprox => epsilon + eps_approx + eps_opt + 2.0 * r + 4.0 * k,
        Setting::ReverseGanZeroApprox => epsilon + eps_approx + eps_opt + 4.0 * r + 2.0 * k,
        Setting::EstimationLower => *epsilon,
        Setting::EstimationUpper => epsilon + 2.0 * r + 2.0 * k,
    }
}

fn overall_label(provenance: &BTreeMap<String, Provenance>) -> Provenance {
    let quantities = ["r", "k", "delta_f"];
    let tags: Vec<Provenance> = quantities
        .iter()
        .filter_map(|q| provenance.get(*q).copied())
        .collect();
    if tags.iter().any(|t| *t == Provenance::Estimated) {
        Provenance::Estimated
    } else if tags.iter().any(|t| *t == Provenance::UserSupplied) {
        Provenance::UserSupplied
    } else {
        Provenance::Certified
    }
}

/// Assembles the report for any setting. The setting-specific entry
/// points below are thin wrappers.
pub fn bound_report(setting: Setting, inputs: &BoundInputs) -> Result<BoundReport, BoundError> {
    validate(inputs, setting)?;
    let (delta, delta_prov) = resolve_delta(inputs, setting)?;
    let width = inputs.beta - inputs.alpha;
    let denominator = tail_denominator(setting, inputs.n, inputs.m, width, delta);
    let tail = tail_probability(setting, inputs.epsilon, denominator);
    let thr = threshold(setting, inputs);

    let mut provenance = BTreeMap::new();
    provenance.insert("delta_f".to_string(), delta_prov);
    provenance.insert("epsilon".to_string(), Provenance::UserSupplied);
    if setting != Setting::EstimationLower {
        provenance.insert("r".to_string(), inputs.r_provenance);
        provenance.insert("k".to_string(), inputs.k_provenance);
    }
    if setting.is_gan() {
        provenance.insert("eps_approx".to_string(), Provenance::UserSupplied);
        provenance.insert("eps_opt".to_string(), Provenance::UserSupplied);
    }
    let overall = overall_label(&provenance);

    let (delta_f_n, delta_f_m) = if setting.is_reverse() {
        (Some(delta), None)
    } else {
        (None, Some(delta))
    };
    Ok(BoundReport {
        setting,
        inputs: ReportInputs {
            n: inputs.n,
            m: inputs.m,
            alpha: inputs.alpha,
            beta: inputs.beta,
            generator: inputs.gen.name().to_string(),
            epsilon: inputs.epsilon,
            eps_approx: inputs.eps_approx,
            eps_opt: inputs.eps_opt,
            r: inputs.r,
            k: inputs.k,
            delta_f_n,
            delta_f_m,
        },
        threshold: thr,
        tail_probability: tail,
        provenance,
        overall,
    })
}

/// Forward GAN concentration: threshold ε + ε_approx + ε_opt + 4R + 4K,
/// tail exp(−ε² / ((2/n)(β−α)² + (2/m)Δ_{f,m}²)).
pub fn gan_bound(inputs: &BoundInputs) -> Result<BoundReport, BoundError> {
    bound_report(Setting::ForwardGan, inputs)
}

/// Forward GAN under the zero-generator-approximation assertion:
/// threshold with 2R instead of 4R, denominator (1/2n)(β−α)² + (2/m)Δ².
pub fn gan_bound_zero_approx(inputs: &BoundInputs) -> Result<BoundReport, BoundError> {
    bound_report(Setting::ForwardGanZeroApprox, inputs)
}

/// Reverse GAN concentration (roles of the data and noise sides swapped:
/// Δ_{f,n} on the data side, (β−α)² on the noise side).
pub fn reverse_gan_bound(inputs: &BoundInputs) -> Result<BoundReport, BoundError> {
    bound_report(Setting::ReverseGan, inputs)
}

/// Reverse GAN under zero generator approximation: 2K instead of 4K,
/// denominator (2/m)(β−α)² + (1/2n)Δ².
pub fn reverse_gan_bound_zero_approx(inputs: &BoundInputs) -> Result<BoundReport, BoundError> {
    bound_report(Setting::ReverseGanZeroApprox, inputs)
}

/// Estimation-error pair: (lower-deviation report with threshold ε alone,
/// upper-deviation report with threshold ε + 2R + 2K); both tails are
/// exp(−2ε² / ((1/n)(β−α)² + (1/m)Δ_{f,m}²)).
pub fn estimation_bounds(inputs: &BoundInputs) -> Result<(BoundReport, BoundReport), BoundError> {
    Ok((
        bound_report(Setting::EstimationLower, inputs)?,
        bound_report(Setting::EstimationUpper, inputs)?,
    ))
}

/// The ε making the setting's tail equal `delta`; the corresponding
/// bound report at that ε reproduces `delta` within 1e-12.
pub fn epsilon_for_confidence(
    setting: Setting,
    inputs: &BoundInputs,
    delta: f64,
) -> Result<f64, BoundError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(BoundError::InvalidDelta(delta));
    }
    // Validate with a strictly positive stand-in ε: the produced ε is
    // positive, so the ε carried in `inputs` is irrelevant here.
    let mut probe = inputs.clone();
    probe.epsilon = 1.0;
    validate(&probe, setting)?;
    let (d, _) = resolve_delta(inputs, setting)?;
    let width = inputs.beta - inputs.alpha;
    let denominator = tail_denominator(setting, inputs.n, inputs.m, width, d);
    let scale = if setting.is_gan() { 1.0 } else { 2.0 };
    Ok((denominator * (1.0 / delta).ln() / scale).sqrt())
}

/// L^q error bound from a deviation tail: a^q + q·∫₀^∞ (a+ε)^{q−1} K(ε) dε,
/// with the integral truncated once K(ε) < 1e-16. The tail function must
/// be non-increasing; if it has not decayed below the cutoff by ε = 2^40
/// the integral is reported divergent.
pub fn lq_bound(
    q: f64,
    a: f64,
    tail_fn: impl Fn(f64) -> f64,
) -> Result<f64, BoundError> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(BoundError::InvalidInput("q must be positive".into()));
    }
    if !(a >= 0.0) || !a.is_finite() {
        return Err(BoundError::InvalidInput("a must be ≥ 0".into()));
    }
    const CUTOFF: f64 = 1e-16;
    const MAX_T: f64 = 1.099511627776e12; // 2^40
    let mut t = 1.0;
    while tail_fn(t) >= CUTOFF {
        t *= 2.0;
        if t > MAX_T {
            return Err(BoundError::DivergentIntegral(t));
        }
    }
    let integrand = |eps: f64| q * (a + eps).powf(q - 1.0) * tail_fn(eps);
    // (a+ε)^{q−1} is singular at 0 when a = 0 and q < 1; cover the head
    // with the analytic envelope K(0)·δ^q (K is non-increasing), which
    // keeps the result an upper bound.
    let (lo, head) = if a == 0.0 && q < 1.0 {
        let delta = 1e-12 * t.min(1.0);
        (delta, tail_fn(0.0).min(1.0) * delta.powf(q))
    } else {
        (0.0, 0.0)
    };
    let integral = adaptive_simpson(&integrand, lo, t, 1e-13 * t.max(1.0));
    Ok(a.powf(q) + head + integral)
}

/// Adaptive Simpson quadrature (interval halving to tolerance).
fn adaptive_simpson(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    if hi <= lo {
        return 0.0;
    }
    let m = 0.5 * (lo + hi);
    let (fa, fm, fb) = (f(lo), f(m), f(hi));
    let whole = simpson(lo, hi, fa, fm, fb);
    recurse(f, lo, hi, fa, fm, fb, whole, tol, 52)
}
