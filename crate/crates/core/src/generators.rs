//! Convex generator functions f, their Legendre conjugates f*, and the
//! domain data every downstream bound depends on.
//!
//! A generator is a convex f: ℝ → (−∞, +∞] with f(1) = 0, finite on an
//! interval (a, b) ∋ 1 with a ≥ 0. Its conjugate f*(z) = sup_t {zt − f(t)}
//! then satisfies a small set of identities that the estimation and
//! concentration machinery silently relies on:
//!
//! ```text
//!   f*(z) ≥ z                    (from f(1) = 0)
//!   f*  and (f*)'₊ non-decreasing (from a ≥ 0)
//!   f*(z0) = z0,  (f*)'₊(z0) = 1  where z0 = f'₊(1)
//! ```
//!
//! Built-in families:
//!
//! | name      | f(t)                          | f*(z)                         | z0      |
//! |-----------|-------------------------------|-------------------------------|---------|
//! | kl        | t·log t                       | e^{z−1}                       | 1       |
//! | js        | t·log t − (1+t)·log((1+t)/2)  | −log(2−e^z) for z < log 2     | 0       |
//! | alpha(α)  | (t^α − 1)/(α(α−1)), α > 1     | see [`DivergenceGenerator::f_star`] | 1/(α−1) |
//!
//! Infinity is a value here, not an error: the js conjugate is legitimately
//! +∞ on [log 2, ∞) and the 1-D solvers are written to see that.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Probe-grid sizes and tolerances for validating user-supplied generators.
const PROBE_Z_POINTS: usize = 49_152;
const PROBE_Z_HALF_WIDTH: f64 = 30.0;
const PROBE_T_POINTS: usize = 64;
const TOL_F_ONE: f64 = 1e-12;
const TOL_FIXPOINT: f64 = 1e-9;
const TOL_DUALITY: f64 = 1e-6;

/// Grid resolution for the certified fallback Lipschitz bound and the factor
/// by which that bound is inflated to stay on the safe side.
const LIPSCHITZ_GRID_POINTS: usize = 10_000;
const LIPSCHITZ_GRID_INFLATION: f64 = 1.05;

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("unknown generator identifier {0:?} (expected \"kl\", \"js\", or \"alpha:<a>\")")]
    UnknownIdentifier(String),
    #[error("alpha family requires α > 1, got {0}")]
    InvalidAlpha(f64),
    #[error("z = {z} is outside the open finiteness domain of f* (sup = {sup})")]
    OutsideConjugateDomain { z: f64, sup: f64 },
    #[error("interval [{lo}, {hi}] escapes the open finiteness domain of f* (sup = {sup})")]
    IntervalEscapesDomain { lo: f64, hi: f64, sup: f64 },
    #[error("range bounds must satisfy alpha <= beta and be finite (got [{lo}, {hi}])")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("custom generator failed validation: {0}")]
    CustomValidation(String),
}

/// Outcome of [`DivergenceGenerator::check_compatibility`]. A violation is a
/// description, not an error: callers decide whether to stop.
#[derive(Debug, Clone, PartialEq)]
pub enum Compatibility {
    Compatible,
    Incompatible(String),
}

impl Compatibility {
    pub fn is_ok(&self) -> bool {
        matches!(self, Compatibility::Compatible)
    }

    /// Converts a violation into a [`GeneratorError`]-compatible message.
    pub fn into_result(self) -> Result<(), String> {
        match self {
            Compatibility::Compatible => Ok(()),
            Compatibility::Incompatible(why) => Err(why),
        }
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Family {
    Kl,
    Js,
    Alpha(f64),
    Custom {
        f: ScalarFn,
        f_star: ScalarFn,
        f_star_rprime: ScalarFn,
    },
}

impl fmt::Debug for Family {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Kl => write!(out, "Kl"),
            Family::Js => write!(out, "Js"),
            Family::Alpha(a) => write!(out, "Alpha({a})"),
            Family::Custom { .. } => write!(out, "Custom"),
        }
    }
}

/// A convex generator f with its conjugate pair and domain data.
/// Immutable after construction; cheap to clone and safe to share.
#[derive(Debug, Clone)]
pub struct DivergenceGenerator {
    name: String,
    family: Family,
    domain_lo: f64,
    domain_hi: f64,
    z0: f64,
    fstar_finite_sup: f64,
    alpha_param: Option<f64>,
    strictly_convex_near_one: bool,
}

/// Everything a caller must supply for a custom generator. The constructor
/// does not trust these: it probes the conjugate identities on a grid and
/// rejects the spec if any fails.
pub struct CustomSpec {
    pub name: String,
    pub f: ScalarFn,
    pub f_star: ScalarFn,
    pub f_star_rprime: ScalarFn,
    pub z0: f64,
    pub fstar_finite_sup: f64,
    /// Interval (a, b) on which f is finite; a ≥ 0 required.
    pub domain: (f64, f64),
}

/// One validation probe outcome. `margin` is the worst observed slack
/// (positive = satisfied with room).
#[derive(Debug, Clone)]
pub struct ValidationCheck {
    pub name: String,
    pub passed: bool,
    pub margin: f64,
}

/// Report produced when constructing a custom generator.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Parses a CLI/config generator string: `"kl"`, `"js"`, or `"alpha:2.0"`.
pub fn make_generator(spec: &str) -> Result<DivergenceGenerator, GeneratorError> {
    let s = spec.trim();
    match s {
        "kl" => Ok(DivergenceGenerator::kl()),
        "js" => Ok(DivergenceGenerator::js()),
        _ => {
            if let Some(rest) = s.strip_prefix("alpha:") {
                let a: f64 = rest
                    .trim()
                    .parse()
                    .map_err(|_| GeneratorError::UnknownIdentifier(s.to_string()))?;
                DivergenceGenerator::alpha(a)
            } else {
                Err(GeneratorError::UnknownIdentifier(s.to_string()))
            }
        }
    }
}

impl DivergenceGenerator {
    /// Kullback–Leibler: f(t) = t·log t, f*(z) = e^{z−1}.
    pub fn kl() -> Self {
        DivergenceGenerator {
            name: "kl".into(),
            family: Family::Kl,
            domain_lo: 0.0,
            domain_hi: f64::INFINITY,
            z0: 1.0,
            fstar_finite_sup: f64::INFINITY,
            alpha_param: None,
            strictly_convex_near_one: true,
        }
    }

    /// Jensen–Shannon: f(t) = t·log t − (1+t)·log((1+t)/2),
    /// f*(z) = −log(2 − e^z) finite exactly on z < log 2.
    pub fn js() -> Self {
        DivergenceGenerator {
            name: "js".into(),
            family: Family::Js,
            domain_lo: 0.0,
            domain_hi: f64::INFINITY,
            z0: 0.0,
            fstar_finite_sup: (2.0f64).ln(),
            alpha_param: None,
            strictly_convex_near_one: true,
        }
    }

    /// α-divergence family, α > 1: f(t) = (t^α − 1)/(α(α−1)).
    pub fn alpha(a: f64) -> Result<Self, GeneratorError> {
        if !(a > 1.0) || !a.is_finite() {
            return Err(GeneratorError::InvalidAlpha(a));
        }
        Ok(DivergenceGenerator {
            name: format!("alpha:{a}"),
            family: Family::Alpha(a),
            domain_lo: 0.0,
            domain_hi: f64::INFINITY,
            z0: 1.0 / (a - 1.0),
            fstar_finite_sup: f64::INFINITY,
            alpha_param: Some(a),
        strictly_convex_near_one: true,
        })
    }

    /// Builds a generator from caller-supplied closures, validating the
    /// conjugate identities on a probe grid first. Strict convexity is only
    /// probed on [0.9, 1.1] — see the returned report's notes.
    pub fn custom(spec: CustomSpec) -> Result<(Self, ValidationReport), GeneratorError> {
        let gen = DivergenceGenerator {
            name: spec.name,
            family: Family::Custom {
                f: spec.f,
                f_star: spec.f_star,
                f_star_rprime: spec.f_star_rprime,
            },
            domain_lo: spec.domain.0,
            domain_hi: spec.domain.1,
            z0: spec.z0,
            fstar_finite_sup: spec.fstar_finite_sup,
            alpha_param: None,
            strictly_convex_near_one: false,
        };
        if !(spec.domain.0 >= 0.0 && spec.domain.0 < 1.0 && spec.domain.1 > 1.0) {
            return Err(GeneratorError::CustomValidation(format!(
                "domain ({}, {}) must contain 1 and have a ≥ 0",
                spec.domain.0, spec.domain.1
            )));
        }
        let report = validate_generator(&gen);
        if !report.all_passed() {
            let failed: Vec<&str> = report
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| c.name.as_str())
                .collect();
            return Err(GeneratorError::CustomValidation(failed.join(", ")));
        }
        let mut gen = gen;
        gen.strictly_convex_near_one = report
            .checks
            .iter()
            .any(|c| c.name == "strict-convexity-near-1" && c.passed);
        Ok((gen, report))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    /// Supremum of the finiteness domain {f* < ∞}; +∞ for kl and alpha.
    pub fn fstar_finite_sup(&self) -> f64 {
        self.fstar_finite_sup
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.domain_lo, self.domain_hi)
    }

    pub fn alpha_param(&self) -> Option<f64> {
        self.alpha_param
    }

    /// f(t), with +∞ outside the finiteness interval. f(0) is always the
    /// limit value from the right (finite for all built-in families).
    pub fn f(&self, t: f64) -> f64 {
        if t < self.domain_lo || t.is_nan() {
            return f64::INFINITY;
        }
        match &self.family {
            Family::Kl => {
                if t == 0.0 {
                    0.0
                } else {
                    t * t.ln()
                }
            }
            Family::Js => {
                if t == 0.0 {
                    (2.0f64).ln()
                } else {
                    t * t.ln() - (1.0 + t) * ((1.0 + t) / 2.0).ln()
                }
            }
            Family::Alpha(a) => (t.powf(*a) - 1.0) / (a * (a - 1.0)),
            Family::Custom { f, .. } => f(t),
        }
    }

    /// The Legendre conjugate f*(z). Returns +∞ (a value, not an error)
    /// exactly when z ≥ the finiteness supremum.
    pub fn f_star(&self, z: f64) -> f64 {
        if z >= self.fstar_finite_sup {
            return f64::INFINITY;
        }
        match &self.family {
            Family::Kl => (z - 1.0).exp(),
            Family::Js => {
                // Guard the rounding case where e^z ≥ 2 despite z < log 2.
                let rest = 2.0 - z.exp();
                if rest <= 0.0 {
                    f64::INFINITY
                } else {
                    -rest.ln()
                }
            }
            Family::Alpha(a) => {
                let zp = z.max(0.0);
                let q = a / (a - 1.0);
                (a - 1.0).powf(q) * zp.powf(q) / a + 1.0 / (a * (a - 1.0))
            }
            Family::Custom { f_star, .. } => f_star(z),
        }
    }

    /// Right derivative (f*)'₊(z). Errors when z is outside the open
    /// finiteness domain (js for z ≥ log 2).
    pub fn f_star_rprime(&self, z: f64) -> Result<f64, GeneratorError> {
        if z >= self.fstar_finite_sup {
            return Err(GeneratorError::OutsideConjugateDomain {
                z,
                sup: self.fstar_finite_sup,
            });
        }
        Ok(match &self.family {
            Family::Kl => (z - 1.0).exp(),
            Family::Js => {
                let rest = 2.0 - z.exp();
                if rest <= 0.0 {
                    return Err(GeneratorError::OutsideConjugateDomain {
                        z,
                        sup: self.fstar_finite_sup,
                    });
                }
                z.exp() / rest
            }
            Family::Alpha(a) => {
                let p = 1.0 / (a - 1.0);
                (a - 1.0).powf(p) * z.max(0.0).powf(p)
            }
            Family::Custom { f_star_rprime, .. } => f_star_rprime(z),
        })
    }

    /// Smallest verified Lipschitz constant of (f*)'₊ on the interval
    /// [z0 − (β−α), z0 + (β−α)], or `None` when no finite constant exists
    /// there (the alpha family with α > 2 when the interval reaches 0).
    ///
    /// Closed forms are used for the built-in families; custom generators get
    /// a certified grid bound: the max symmetric difference quotient over
    /// 10⁴ points, inflated by 5% so downstream bounds stay valid.
    pub fn rprime_lipschitz(&self, alpha: f64, beta: f64) -> Result<Option<f64>, GeneratorError> {
        if !(alpha <= beta) || !alpha.is_finite() || !beta.is_finite() {
            return Err(GeneratorError::InvalidRange { lo: alpha, hi: beta });
        }
        let w = beta - alpha;
        let (lo, hi) = (self.z0 - w, self.z0 + w);
        if hi >= self.fstar_finite_sup {
            return Err(GeneratorError::IntervalEscapesDomain {
                lo,
                hi,
                sup: self.fstar_finite_sup,
            });
        }
        if w == 0.0 {
            return Ok(Some(0.0));
        }
        Ok(match &self.family {
            // (f*)'' = e^{z−1}, maximal at the right endpoint.
            Family::Kl => Some((hi - 1.0).exp()),
            // (f*)'' = 2e^z/(2−e^z)², increasing on (−∞, log 2).
            Family::Js => {
                let e = hi.exp();
                Some(2.0 * e / ((2.0 - e) * (2.0 - e)))
            }
            Family::Alpha(a) => {
                let p = 1.0 / (a - 1.0);
                let c = (a - 1.0).powf(p) * p;
                if (a - 2.0).abs() < 1e-12 {
                    // (f*)'₊(z) = max(z, 0): globally 1-Lipschitz.
                    Some(1.0)
                } else if *a < 2.0 {
                    // Slope c·z^{p−1} with p > 1 increases; right endpoint.
                    Some(c * hi.powf(p - 1.0))
                } else if lo > 0.0 {
                    // p < 1: slope decreases on z > 0; left endpoint.
                    Some(c * lo.powf(p - 1.0))
                } else {
                    // The slope z^{p−1} blows up at 0⁺: not Lipschitz.
                    None
                }
            }
            Family::Custom { .. } => Some(self.grid_lipschitz_bound(lo, hi)?),
        })
    }

    fn grid_lipschitz_bound(&self, lo: f64, hi: f64) -> Result<f64, GeneratorError> {
        let n = LIPSCHITZ_GRID_POINTS;
        let step = (hi - lo) / (n - 1) as f64;
        let mut worst: f64 = 0.0;
        let mut prev2 = self.f_star_rprime(lo)?;
        let mut prev1 = self.f_star_rprime(lo + step)?;
        for i in 2..n {
            let z = lo + step * i as f64;
            let cur = self.f_star_rprime(z)?;
            let quot = (cur - prev2) / (2.0 * step);
            worst = worst.max(quot.abs());
            prev2 = prev1;
            prev1 = cur;
        }
        Ok(worst * LIPSCHITZ_GRID_INFLATION)
    }

    /// A range [alpha, beta] is compatible when z0 + β − α lies strictly
    /// inside {f* < ∞} and f is strictly convex near 1. Violations are
    /// returned as descriptions, never raised.
    pub fn check_compatibility(&self, alpha: f64, beta: f64) -> Compatibility {
        if !alpha.is_finite() || !beta.is_finite() || beta < alpha {
            return Compatibility::Incompatible(format!(
                "range [{alpha}, {beta}] must be a finite interval with alpha <= beta"
            ));
        }
        let reach = self.z0 + (beta - alpha);
        if reach >= self.fstar_finite_sup {
            return Compatibility::Incompatible(format!(
                "z0 + beta - alpha = {reach} must lie strictly below the conjugate \
                 finiteness supremum {} for generator {}",
                self.fstar_finite_sup, self.name
            ));
        }
        if !self.strictly_convex_near_one {
            return Compatibility::Incompatible(format!(
                "generator {} is not verified strictly convex near 1",
                self.name
            ));
        }
        Compatibility::Compatible
    }
}

/// Probes the conjugate identities on a grid. Used at custom-generator
/// construction and re-exposed for the verification suites.
pub fn validate_generator(gen: &DivergenceGenerator) -> ValidationReport {
    let mut report = ValidationReport::default();
    let z0 = gen.z0();
    let z_hi = (z0 + PROBE_Z_HALF_WIDTH).min(gen.fstar_finite_sup() - 1e-9);
    let z_lo = z0 - PROBE_Z_HALF_WIDTH;

    // f(1) = 0.
    let f1 = gen.f(1.0);
    report.checks.push(ValidationCheck {
        name: "f(1)=0".into(),
        passed: f1.abs() <= TOL_F_ONE,
        margin: TOL_F_ONE - f1.abs(),
    });

    // Fixed point of the conjugate at z0.
    let fixpoint = (gen.f_star(z0) - z0).abs();
    let unit_slope = gen
        .f_star_rprime(z0)
        .map(|r| (r - 1.0).abs())
        .unwrap_or(f64::INFINITY);
    report.checks.push(ValidationCheck {
        name: "f*(z0)=z0".into(),
        passed: fixpoint <= TOL_FIXPOINT,
        margin: TOL_FIXPOINT - fixpoint,
    });
    report.checks.push(ValidationCheck {
        name: "(f*)'(z0)=1".into(),
        passed: unit_slope <= TOL_FIXPOINT,
        margin: TOL_FIXPOINT - unit_slope,
    });

    // f*(z) ≥ z, f* and (f*)'₊ non-decreasing, on an even probe grid.
    let mut min_gap = f64::INFINITY;
    let mut monotone_fstar = true;
    let mut monotone_rprime = true;
    let mut prev_fstar = f64::NEG_INFINITY;
    let mut prev_rprime = f64::NEG_INFINITY;
    let n = 2048;
    for i in 0..n {
        let z = z_lo + (z_hi - z_lo) * i as f64 / (n - 1) as f64;
        let fs = gen.f_star(z);
        min_gap = min_gap.min(fs - z);
        if fs < prev_fstar - 1e-12 {
            monotone_fstar = false;
        }
        prev_fstar = fs;
        if let Ok(r) = gen.f_star_rprime(z) {
            if r < prev_rprime - 1e-12 {
                monotone_rprime = false;
            }
            prev_rprime = r;
        }
    }
    report.checks.push(ValidationCheck {
        name: "f*(z)>=z".into(),
        passed: min_gap >= -TOL_FIXPOINT,
        margin: min_gap + TOL_FIXPOINT,
    });
    report.checks.push(ValidationCheck {
        name: "f*-nondecreasing".into(),
        passed: monotone_fstar,
        margin: if monotone_fstar { 0.0 } else { -1.0 },
    });
    report.checks.push(ValidationCheck {
        name: "rprime-nondecreasing".into(),
        passed: monotone_rprime,
        margin: if monotone_rprime { 0.0 } else { -1.0 },
    });

    // Legendre duality: sup_z {z·t − f*(z)} reproduces f(t) on interior t.
    let mut worst_dual = 0.0f64;
    for j in 0..PROBE_T_POINTS {
        let t = 0.1 + (3.0 - 0.1) * j as f64 / (PROBE_T_POINTS - 1) as f64;
        let sup = legendre_sup(gen, t, z_lo, z_hi);
        worst_dual = worst_dual.max((sup - gen.f(t)).abs());
    }
    report.checks.push(ValidationCheck {
        name: "legendre-duality".into(),
        passed: worst_dual <= TOL_DUALITY,
        margin: TOL_DUALITY - worst_dual,
    });

    // Strict convexity, probed on [0.9, 1.1] only.
    let mut strictly_convex = true;
    let m = 33;
    for i in 1..m - 1 {
        let t = 0.9 + 0.2 * i as f64 / (m - 1) as f64;
        let h = 0.2 / (m - 1) as f64;
        let second = gen.f(t - h) - 2.0 * gen.f(t) + gen.f(t + h);
        if second <= 0.0 {
            strictly_convex = false;
        }
    }
    report.checks.push(ValidationCheck {
        name: "strict-convexity-near-1".into(),
        passed: strictly_convex,
        margin: if strictly_convex { 0.0 } else { -1.0 },
    });
    report
        .notes
        .push("strict convexity probed on [0.9, 1.1] only; not certified globally".into());
    report
}

/// Grid sup of z·t − f*(z), refined by golden-section on the bracketing
/// triple — an oracle-style direct evaluation of the dual, independent of
/// any solver elsewhere. Golden-section (rather than a parabola fit) is
/// required because f* may have a kink, e.g. the alpha family at z = 0.
fn legendre_sup(gen: &DivergenceGenerator, t: f64, z_lo: f64, z_hi: f64) -> f64 {
    let n = PROBE_Z_POINTS;
    let step = (z_hi - z_lo) / (n - 1) as f64;
    let eval = |z: f64| z * t - gen.f_star(z);
    let mut best = f64::NEG_INFINITY;
    let mut best_i = 0;
    for i in 0..n {
        let v = eval(z_lo + step * i as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    if best_i == 0 || best_i == n - 1 {
        return best;
    }
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let z1 = z_lo + step * best_i as f64;
    let (mut lo, mut hi) = (z1 - step, z1 + step);
    for _ in 0..90 {
        let x1 = hi - INVPHI * (hi - lo);
        let x2 = lo + INVPHI * (hi - lo);
        let (f1, f2) = (eval(x1), eval(x2));
        best = best.max(f1.max(f2));
        if f1 > f2 {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{task_rng, stream};
    use rand::Rng;

    const E: f64 = std::f64::consts::E;
    const LN_2: f64 = std::f64::consts::LN_2;

    fn builtins() -> Vec<DivergenceGenerator> {
        vec![
            DivergenceGenerator::kl(),
            DivergenceGenerator::js(),
            DivergenceGenerator::alpha(1.5).unwrap(),
            DivergenceGenerator::alpha(2.0).unwrap(),
            DivergenceGenerator::alpha(3.0).unwrap(),
            DivergenceGenerator::alpha(5.0).unwrap(),
        ]
    }

    #[test]
    fn make_generator_parses_cli_strings() {
        assert_eq!(make_generator("kl").unwrap().name(), "kl");
        assert_eq!(make_generator("js").unwrap().name(), "js");
        let g = make_generator("alpha:2.0").unwrap();
        assert_eq!(g.alpha_param(), Some(2.0));
        assert!(make_generator("hellinger").is_err());
        assert!(make_generator("alpha:1.0").is_err());
        assert!(make_generator("alpha:0.5").is_err());
        assert!(make_generator("alpha:x").is_err());
    }

    #[test]
    fn table_values_kl() {
        let g = DivergenceGenerator::kl();
        assert_eq!(g.z0(), 1.0);
        assert!((g.f_star(1.0) - 1.0).abs() < 1e-15);
        assert!((g.f_star(2.0) - E).abs() < 1e-15);
        assert!((g.f_star_rprime(2.0).unwrap() - E).abs() < 1e-15);
        assert!((g.f_star_rprime(1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn table_values_js() {
        let g = DivergenceGenerator::js();
        assert_eq!(g.z0(), 0.0);
        assert_eq!(g.f_star(LN_2), f64::INFINITY);
        assert_eq!(g.f_star(5.0), f64::INFINITY);
        assert!((g.f_star(0.0)).abs() < 1e-15);
        assert!((g.f_star_rprime(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(g.f_star_rprime(LN_2).is_err());
        // f* grows without bound as z approaches log 2 from below.
        assert!(g.f_star(LN_2 - 1e-9) > 19.0);
    }

    #[test]
    fn table_values_alpha2() {
        let g = DivergenceGenerator::alpha(2.0).unwrap();
        assert_eq!(g.z0(), 1.0);
        assert!((g.f_star(-3.0) - 0.5).abs() < 1e-15);
        assert!((g.f_star(3.0) - (4.5 + 0.5)).abs() < 1e-12);
        assert!((g.f_star_rprime(3.0).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(g.f_star_rprime(-1.0).unwrap(), 0.0);
    }

    #[test]
    fn conjugate_identities_on_random_probes() {
        let mut rng = task_rng(11, stream::VERIFY, 0);
        for gen in builtins() {
            let hi = (gen.z0() + 20.0).min(gen.fstar_finite_sup() - 1e-6);
            let lo = gen.z0() - 20.0;
            let mut prev_z = f64::NEG_INFINITY;
            let mut prev_fs = f64::NEG_INFINITY;
            let mut prev_rp = f64::NEG_INFINITY;
            let mut zs: Vec<f64> = (0..10_000).map(|_| rng.random_range(lo..hi)).collect();
            zs.sort_by(f64::total_cmp);
            for z in zs {
                let fs = gen.f_star(z);
                let rp = gen.f_star_rprime(z).unwrap();
                assert!(fs >= z - 1e-9, "{}: f*({z}) = {fs} < z", gen.name());
                if prev_z > f64::NEG_INFINITY {
                    assert!(fs >= prev_fs - 1e-12, "{}: f* decreasing at {z}", gen.name());
                    assert!(rp >= prev_rp - 1e-12, "{}: rprime decreasing at {z}", gen.name());
                }
                prev_z = z;
                prev_fs = fs;
                prev_rp = rp;
            }
            assert!((gen.f(1.0)).abs() <= 1e-12, "{}: f(1) != 0", gen.name());
            assert!(
                (gen.f_star(gen.z0()) - gen.z0()).abs() <= 1e-9,
                "{}: f*(z0) != z0",
                gen.name()
            );
            assert!(
                (gen.f_star_rprime(gen.z0()).unwrap() - 1.0).abs() <= 1e-9,
                "{}: rprime(z0) != 1",
                gen.name()
            );
        }
    }

    #[test]
    fn legendre_round_trip_all_families() {
        for gen in builtins() {
            let z_hi = (gen.z0() + 30.0).min(gen.fstar_finite_sup() - 1e-9);
            let z_lo = gen.z0() - 30.0;
            for j in 0..100 {
                let t = 0.1 + (3.0 - 0.1) * j as f64 / 99.0;
                let sup = legendre_sup(&gen, t, z_lo, z_hi);
                assert!(
                    (sup - gen.f(t)).abs() <= 1e-6,
                    "{}: duality gap {} at t={t}",
                    gen.name(),
                    (sup - gen.f(t)).abs()
                );
            }
        }
    }

    #[test]
    fn rprime_lipschitz_closed_forms() {
        let kl = DivergenceGenerator::kl();
        assert!((kl.rprime_lipschitz(0.0, 1.0).unwrap().unwrap() - E).abs() < 1e-12);
        assert_eq!(kl.rprime_lipschitz(0.0, 0.0).unwrap(), Some(0.0));

        let a2 = DivergenceGenerator::alpha(2.0).unwrap();
        assert_eq!(a2.rprime_lipschitz(0.0, 1.0).unwrap(), Some(1.0));

        // js on a compatible width: (f*)'' evaluated at z0 + w.
        let js = DivergenceGenerator::js();
        let w: f64 = 0.5;
        let expect = 2.0 * w.exp() / ((2.0 - w.exp()) * (2.0 - w.exp()));
        assert!((js.rprime_lipschitz(0.0, w).unwrap().unwrap() - expect).abs() < 1e-12);
        assert!(js.rprime_lipschitz(0.0, 1.0).is_err()); // escapes log 2

        // alpha > 2: Lipschitz only while the interval stays right of 0.
        let a3 = DivergenceGenerator::alpha(3.0).unwrap();
        assert_eq!(a3.rprime_lipschitz(0.0, 1.0).unwrap(), None);
        let small = a3.rprime_lipschitz(0.0, 0.1).unwrap().unwrap();
        let expect = 0.5 * (2.0f64).sqrt() * (0.4f64).powf(-0.5);
        assert!((small - expect).abs() < 1e-12);
    }

    #[test]
    fn grid_lipschitz_bound_covers_closed_form() {
        // A custom clone of kl must produce a grid bound that dominates the
        // true constant e^w and stays within the 5% inflation of it.
        let (gen, report) = DivergenceGenerator::custom(CustomSpec {
            name: "kl-clone".into(),
            f: Arc::new(|t: f64| if t == 0.0 { 0.0 } else { t * t.ln() }),
            f_star: Arc::new(|z: f64| (z - 1.0).exp()),
            f_star_rprime: Arc::new(|z: f64| (z - 1.0).exp()),
            z0: 1.0,
            fstar_finite_sup: f64::INFINITY,
            domain: (0.0, f64::INFINITY),
        })
        .unwrap();
        assert!(report.all_passed());
        let bound = gen.rprime_lipschitz(0.0, 1.0).unwrap().unwrap();
        assert!(bound >= E);
        assert!(bound <= E * 1.06);
    }

    #[test]
    fn custom_validation_rejects_wrong_z0() {
        let err = DivergenceGenerator::custom(CustomSpec {
            name: "broken".into(),
            f: Arc::new(|t: f64| if t == 0.0 { 0.0 } else { t * t.ln() }),
            f_star: Arc::new(|z: f64| (z - 1.0).exp()),
            f_star_rprime: Arc::new(|z: f64| (z - 1.0).exp()),
            z0: 0.5, // wrong: the fixed point of e^{z−1} is 1
            fstar_finite_sup: f64::INFINITY,
            domain: (0.0, f64::INFINITY),
        });
        assert!(matches!(err, Err(GeneratorError::CustomValidation(_))));
    }

    #[test]
    fn compatibility_checks() {
        let js = DivergenceGenerator::js();
        assert!(!js.check_compatibility(0.0, 1.0).is_ok()); // 1 ≥ log 2
        assert!(js.check_compatibility(0.0, 0.5).is_ok());
        let kl = DivergenceGenerator::kl();
        assert!(kl.check_compatibility(-10.0, 10.0).is_ok());
        assert!(!kl.check_compatibility(1.0, 0.0).is_ok());
        assert!(!kl.check_compatibility(0.0, f64::INFINITY).is_ok());
    }
}
