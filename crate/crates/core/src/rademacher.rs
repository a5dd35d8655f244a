//! Empirical Rademacher complexity — Monte Carlo estimation with exact
//! small-n enumeration, the constant-interval closed form, Dudley
//! entropy-integral bounds for parameter balls, and the K quantity that
//! enters the concentration thresholds.
//!
//! Convention: WITHOUT absolute value, R = E_σ[sup_ψ (1/n)·σ·ψ(y)]. A
//! singleton class therefore has complexity exactly 0, not E|Σσ|/n.

use thiserror::Error;

use crate::discriminators::{BoundedFunctionClass, DiscError, LipschitzProfile};
use crate::divergence::{initial_theta, irprop_ascend, DivergenceError, Sample};
use crate::generators::{Compatibility, DivergenceGenerator, GeneratorError};
use crate::par;
use crate::rng::{stream, task_rng};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Restarts per σ-draw for the ascent-based inner supremum.
const ASCENT_RESTARTS: usize = 3;
const ASCENT_MAX_ITERS: usize = 150;
/// Sample-size ceiling for full σ-enumeration (2^n patterns).
pub const ENUMERATION_LIMIT: usize = 20;
/// n ceiling for the exact binomial constant-interval formula.
pub const BINOMIAL_LIMIT: usize = 30;

#[derive(Debug, Error)]
pub enum RademacherError {
    #[error("draws must be at least 1")]
    ZeroDraws,
    #[error("sample dimension {got} does not match class input dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("full σ-enumeration supports n ≤ {limit}, got {n}")]
    TooManyPoints { n: usize, limit: usize },
    #[error("exact binomial mode supports n ≤ {limit}, got {n}")]
    TooLargeN { n: usize, limit: usize },
    #[error("interval is reversed: [{0}, {1}]")]
    ReversedInterval(f64, f64),
    #[error("full enumeration requires a finite-dictionary class")]
    NotADictionary,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("generator incompatible with range: {0}")]
    Incompatible(String),
    #[error(transparent)]
    Disc(#[from] DiscError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Divergence(#[from] DivergenceError),
}

/// How the inner supremum over the class was solved for each σ-draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerSolver {
    /// Dictionary classes: the sup is an exact max over members.
    ExactEnumeration,
    /// Parameterized classes: multi-restart gradient ascent; each draw's
    /// sup is a lower bound, so the estimate is a lower bound too.
    Ascent,
}

/// Monte Carlo estimate of the empirical Rademacher complexity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RademacherEstimate {
    pub mean: f64,
    /// Sample standard deviation across draws divided by √draws
    /// (0 when draws = 1).
    pub stderr: f64,
    pub draws: usize,
    pub inner_solver: InnerSolver,
}

/// sup over the class of (1/n)·Σᵢ σᵢ h(yᵢ) for one sign vector.
fn sup_for_sigma(
    class: &BoundedFunctionClass,
    member_values: Option<&[Vec<f64>]>,
    points: &Sample,
    sigma: &[f64],
    ascent_seed: u64,
) -> Result<f64, RademacherError> {
    let n = sigma.len() as f64;
    if let Some(values) = member_values {
        let mut best = f64::NEG_INFINITY;
        for row in values {
            let dot: f64 = row.iter().zip(sigma).map(|(h, s)| h * s).sum();
            best = best.max(dot / n);
        }
        return Ok(best);
    }
    let rho = class.param_ball_radius();
    let dim = class.param_dim();
    let cot: Vec<f64> = sigma.iter().map(|s| s / n).collect();
    let eval = |theta: &[f64]| -> Result<(f64, Vec<f64>), DivergenceError> {
        let h = class.evaluate(theta, points.points())?;
        let j: f64 = h.iter().zip(sigma).map(|(v, s)| v * s).sum::<f64>() / n;
        let g = class.gradient(theta, points.points(), &cot)?;
        Ok((j, g))
    };
    let mut best = f64::NEG_INFINITY;
    for r in 0..ASCENT_RESTARTS {
        let init = if r == 0 {
            vec![0.0; dim]
        } else {
            let mut rng = task_rng(ascent_seed, stream::ASCENT_RESTART, r as u64);
            initial_theta(&mut rng, dim, rho, 0.1)
        };
        let outcome = irprop_ascend(init, rho, ASCENT_MAX_ITERS, eval)?;
        best = best.max(outcome.best);
    }
    Ok(best)
}

/// Pre-tabulates dictionary member values on the sample (members × points)
/// so each σ-draw is a max of dot products.
fn tabulate_members(
    class: &BoundedFunctionClass,
    points: &Sample,
) -> Result<Option<Vec<Vec<f64>>>, RademacherError> {
    match class.n_members() {
        None => Ok(None),
        Some(k) => {
            let mut rows = Vec::with_capacity(k);
            for j in 0..k {
                rows.push(class.evaluate_member(j, points.points())?);
            }
            Ok(Some(rows))
        }
    }
}

/// Monte Carlo estimate of E_σ[sup_ψ (1/n)σ·ψ(y)] over `draws`
/// independent sign vectors. σ-draws use counter-based seeds and the
/// mean/stderr reduction runs in a fixed order, so results are
/// independent of thread count.
pub fn empirical_rademacher(
    class: &BoundedFunctionClass,
    points: &Sample,
    draws: usize,
    seed: u64,
) -> Result<RademacherEstimate, RademacherError> {
    if draws == 0 {
        return Err(RademacherError::ZeroDraws);
    }
    if points.dim() != class.input_dim() {
        return Err(RademacherError::DimensionMismatch {
            expected: class.input_dim(),
            got: points.dim(),
        });
    }
    let member_values = tabulate_members(class, points)?;
    let n = points.len();
    let sups: Vec<Result<f64, RademacherError>> = par::map_indexed(draws, |d| {
        let mut rng = task_rng(seed, stream::RADEMACHER_SIGMA, d as u64);
        let sigma: Vec<f64> = (0..n)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        sup_for_sigma(class, member_values.as_deref(), points, &sigma, {
            // Distinct ascent seed per draw, disjoint from the σ stream.
            seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(d as u64 + 1))
        })
    });
    let mut values = Vec::with_capacity(draws);
    for s in sups {
        values.push(s?);
    }
    let mean: f64 = values.iter().sum::<f64>() / draws as f64;
    let stderr = if draws > 1 {
        let var: f64 =
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (draws as f64 - 1.0);
        (var / draws as f64).sqrt()
    } else {
        0.0
    };
    let inner_solver = if member_values.is_some() {
        InnerSolver::ExactEnumeration
    } else {
        InnerSolver::Ascent
    };
    Ok(RademacherEstimate {
        mean,
        stderr,
        draws,
        inner_solver,
    })
}

/// Exact value of E_σ[sup_ψ (1/n)σ·ψ(y)] by enumerating all 2ⁿ sign
/// patterns. Dictionary classes only (the inner sup must itself be exact
/// for the enumeration to be exact); n ≤ 20.
pub fn enumerate_rademacher(
    class: &BoundedFunctionClass,
    points: &Sample,
) -> Result<f64, RademacherError> {
    if points.dim() != class.input_dim() {
        return Err(RademacherError::DimensionMismatch {
            expected: class.input_dim(),
            got: points.dim(),
        });
    }
    let n = points.len();
    if n > ENUMERATION_LIMIT {
        return Err(RademacherError::TooManyPoints {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let member_values = tabulate_members(class, points)?.ok_or(RademacherError::NotADictionary)?;
    let patterns = 1usize << n;
    let sup = |sigma: &[f64]| -> f64 {
        let mut best = f64::NEG_INFINITY;
        for row in &member_values {
            let dot: f64 = row.iter().zip(sigma).map(|(h, s)| h * s).sum();
            best = best.max(dot / n as f64);
        }
        best
    };
    // Pair each σ with −σ so antisymmetric contributions cancel exactly
    // (a singleton class enumerates to 0.0, not to rounding dust).
    let mut total = 0.0;
    let mut sigma = vec![0.0f64; n];
    let mut neg = vec![0.0f64; n];
    for mask in 0..patterns / 2 {
        for (i, (s, t)) in sigma.iter_mut().zip(neg.iter_mut()).enumerate() {
            *s = if mask & (1 << i) != 0 { 1.0 } else { -1.0 };
            *t = -*s;
        }
        total += sup(&sigma) + sup(&neg);
    }
    Ok(total / patterns as f64)
}

/// Exact Rademacher complexity of the class of constant functions with
/// values in [α, β]: ((β−α)/(2n))·E|Σσ|, with E|Σσ| by binomial sums.
pub fn rademacher_constant_interval(
    n: usize,
    alpha: f64,
    beta: f64,
) -> Result<f64, RademacherError> {
    if n == 0 {
        return Err(RademacherError::InvalidArgument("n must be ≥ 1".into()));
    }
    if n > BINOMIAL_LIMIT {
        return Err(RademacherError::TooLargeN {
            n,
            limit: BINOMIAL_LIMIT,
        });
    }
    if !(alpha.is_finite() && beta.is_finite()) || beta < alpha {
        return Err(RademacherError::ReversedInterval(alpha, beta));
    }
    // E|Σσ| = 2^{-n} Σ_j C(n,j)·|2j − n|.
    let mut expect_abs = 0.0f64;
    let mut binom = 1.0f64; // C(n, 0)
    for j in 0..=n {
        expect_abs += binom * (2.0 * j as f64 - n as f64).abs();
        binom = binom * (n - j) as f64 / (j + 1) as f64;
    }
    expect_abs /= (1u64 << n) as f64;
    Ok((beta - alpha) / (2.0 * n as f64) * expect_abs)
}

/// Analytic Dudley bound for a k-dimensional parameter ball:
/// 48·√(k/n)·E_P[L²]^{1/2}.
pub fn dudley_ball_bound(k: usize, n: usize, el2_root: f64) -> Result<f64, RademacherError> {
    if k == 0 || n == 0 {
        return Err(RademacherError::InvalidArgument(
            "k and n must be ≥ 1".into(),
        ));
    }
    if !(el2_root >= 0.0) {
        return Err(RademacherError::InvalidArgument(
            "el2_root must be ≥ 0".into(),
        ));
    }
    Ok(48.0 * (k as f64 / n as f64).sqrt() * el2_root)
}

/// Adaptive Simpson quadrature with interval-halving to tolerance.
fn adaptive_simpson(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
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
    recurse(f, lo, hi, fa, fm, fb, whole, tol, 48)
}

/// Dudley entropy-integral bound for a k-dimensional unit-ball class:
/// 12·n^{-1/2}·el2_root·∫₀^D √(k·log(1+2/ε)) dε. The singular head
/// [0, δ], δ = 1e-6·D, is covered by the analytic envelope
/// √(k·log(1+2/ε)) ≤ √(2k/ε), whose integral is 2√(2k·δ) — keeping the
/// result a valid upper bound. For D ≤ 2 the whole integral is at most
/// 4√k (the same envelope over [0, D]).
pub fn dudley_integral_bound(
    k: usize,
    n: usize,
    el2_root: f64,
    diameter: f64,
) -> Result<f64, RademacherError> {
    if k == 0 || n == 0 {
        return Err(RademacherError::InvalidArgument(
            "k and n must be ≥ 1".into(),
        ));
    }
    if !(el2_root >= 0.0) || !(diameter >= 0.0) {
        return Err(RademacherError::InvalidArgument(
            "el2_root and diameter must be ≥ 0".into(),
        ));
    }
    if diameter == 0.0 || el2_root == 0.0 {
        return Ok(0.0);
    }
    let kf = k as f64;
    let delta = 1e-6 * diameter;
    let head = 2.0 * (2.0 * kf * delta).sqrt();
    let integrand = |eps: f64| (kf * (1.0 + 2.0 / eps).ln()).sqrt();
    let body = adaptive_simpson(&integrand, delta, diameter, 1e-12 * diameter.max(1.0));
    Ok(12.0 / (n as f64).sqrt() * el2_root * (head + body))
}

/// √(mean over the sample of L(yᵢ)²) for a Lipschitz profile L(y)=a+b‖y‖.
pub fn estimate_el2_root(profile: &LipschitzProfile, sample: &Sample) -> f64 {
    let total: f64 = sample
        .points()
        .iter()
        .map(|y| {
            let l = profile.at(y);
            l * l
        })
        .sum();
    (total / sample.len() as f64).sqrt()
}

/// The K quantity entering concentration thresholds: with w = β−α and
/// L = rprime_lipschitz(α, β) when it exists,
///   min{ (1+2wL)·r + w²L/(2√n),  (f*)'₊(w+z0)·(r + w/(2√n)) },
/// otherwise the second branch alone.
pub fn k_quantity(
    gen: &DivergenceGenerator,
    r: f64,
    n: usize,
    alpha: f64,
    beta: f64,
) -> Result<f64, RademacherError> {
    if let Compatibility::Incompatible(why) = gen.check_compatibility(alpha, beta) {
        return Err(RademacherError::Incompatible(why));
    }
    if !(r >= 0.0) {
        return Err(RademacherError::InvalidArgument("r must be ≥ 0".into()));
    }
    if n == 0 {
        return Err(RademacherError::InvalidArgument("n must be ≥ 1".into()));
    }
    let w = beta - alpha;
    let half_sqrt_n = 2.0 * (n as f64).sqrt();
    let slope = gen.f_star_rprime(gen.z0() + w)?;
    let branch2 = slope * (r + w / half_sqrt_n);
    match gen.rprime_lipschitz(alpha, beta)? {
        Some(l) => {
            let branch1 = (1.0 + 2.0 * w * l) * r + w * w * l / half_sqrt_n;
            Ok(branch1.min(branch2))
        }
        None => Ok(branch2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, task_rng};
    use rand::Rng;

    const E: f64 = std::f64::consts::E;

    fn grid_points(n: usize) -> Sample {
        Sample::new((0..n).map(|i| vec![i as f64]).collect()).unwrap()
    }

    /// Dictionary of constants over [lo, hi] on `support_size` atoms.
    fn constant_dictionary(support_size: usize, levels: usize, lo: f64, hi: f64) -> BoundedFunctionClass {
        let support: Vec<Vec<f64>> = (0..support_size).map(|i| vec![i as f64]).collect();
        let members: Vec<Vec<f64>> = (0..levels)
            .map(|j| {
                let c = lo + (hi - lo) * j as f64 / (levels - 1) as f64;
                vec![c; support_size]
            })
            .collect();
        BoundedFunctionClass::dictionary(support, members, (lo, hi)).unwrap()
    }

    #[test]
    fn singleton_enumeration_is_exactly_zero() {
        let support = vec![vec![0.0], vec![1.0], vec![2.0]];
        let dict = BoundedFunctionClass::dictionary(
            support,
            vec![vec![0.3, 0.8, 0.1]],
            (0.0, 1.0),
        )
        .unwrap();
        let pts = grid_points(3);
        assert_eq!(enumerate_rademacher(&dict, &pts).unwrap(), 0.0);
        let est = empirical_rademacher(&dict, &pts, 500, 7).unwrap();
        assert_eq!(est.inner_solver, InnerSolver::ExactEnumeration);
        assert!(est.mean.abs() <= 3.0 * est.stderr + 1e-12);
    }

    #[test]
    fn interval_constants_match_closed_form() {
        // n = 1 → 1/2, n = 2 → 1/4, both by closed form and enumeration.
        assert!((rademacher_constant_interval(1, 0.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((rademacher_constant_interval(2, 0.0, 1.0).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(rademacher_constant_interval(5, 0.7, 0.7).unwrap(), 0.0);

        for n in [1usize, 2] {
            let dict = constant_dictionary(n, 101, 0.0, 1.0);
            let enumerated = enumerate_rademacher(&dict, &grid_points(n)).unwrap();
            let closed = rademacher_constant_interval(n, 0.0, 1.0).unwrap();
            assert!(
                (enumerated - closed).abs() < 1e-15,
                "n={n}: {enumerated} vs {closed}"
            );
        }
        // Larger n: enumeration still matches the binomial formula.
        for n in [3usize, 5, 8] {
            let dict = constant_dictionary(n, 41, -0.5, 1.5);
            let enumerated = enumerate_rademacher(&dict, &grid_points(n)).unwrap();
            let closed = rademacher_constant_interval(n, -0.5, 1.5).unwrap();
            assert!(
                (enumerated - closed).abs() < 1e-12,
                "n={n}: {enumerated} vs {closed}"
            );
        }
    }

    #[test]
    fn mc_estimate_matches_enumeration_within_3_stderr() {
        let mut rng = task_rng(41, stream::VERIFY, 0);
        for n in [2usize, 4, 8] {
            let support: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64]).collect();
            let members: Vec<Vec<f64>> = (0..12)
                .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let dict =
                BoundedFunctionClass::dictionary(support, members, (-1.0, 1.0)).unwrap();
            let pts = grid_points(n);
            let exact = enumerate_rademacher(&dict, &pts).unwrap();
            let est = empirical_rademacher(&dict, &pts, 4000, 11).unwrap();
            assert!(
                (est.mean - exact).abs() <= 3.0 * est.stderr,
                "n={n}: mc {} vs exact {exact} (stderr {})",
                est.mean,
                est.stderr
            );
        }
    }

    #[test]
    fn mc_is_deterministic_in_seed() {
        let mut rng = task_rng(43, stream::VERIFY, 0);
        let support: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let members: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..8).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let dict = BoundedFunctionClass::dictionary(support, members, (-1.0, 1.0)).unwrap();
        let pts = grid_points(8);
        let a = empirical_rademacher(&dict, &pts, 200, 5).unwrap();
        let b = empirical_rademacher(&dict, &pts, 200, 5).unwrap();
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.stderr, b.stderr);
        let c = empirical_rademacher(&dict, &pts, 200, 6).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn ascent_estimate_stays_below_dudley_ball() {
        // Theorem check: MC estimate for a parameterized class never
        // exceeds the certified Dudley ball bound + 3·stderr.
        let mut rng = task_rng(42, stream::VERIFY, 0);
        let class = BoundedFunctionClass::mlp(&[1, 4, 1], 1.0, (0.0, 1.0)).unwrap();
        let pts =
            Sample::new((0..20).map(|_| vec![rng.random_range(-1.0..1.0)]).collect()).unwrap();
        let est = empirical_rademacher(&class, &pts, 60, 9).unwrap();
        assert_eq!(est.inner_solver, InnerSolver::Ascent);
        let profile = class.lipschitz_profile().unwrap();
        let el2 = estimate_el2_root(&profile, &pts);
        let ball = dudley_ball_bound(class.param_dim(), pts.len(), el2).unwrap();
        assert!(
            est.mean <= ball + 3.0 * est.stderr,
            "mc {} vs dudley {ball}",
            est.mean
        );
    }

    #[test]
    fn dudley_ball_values() {
        assert!((dudley_ball_bound(4, 100, 1.0).unwrap() - 9.6).abs() < 1e-12);
        assert_eq!(dudley_ball_bound(3, 10, 0.0).unwrap(), 0.0);
        assert!((dudley_ball_bound(1, 1, 1.0).unwrap() - 48.0).abs() < 1e-12);
        assert!(dudley_ball_bound(0, 10, 1.0).is_err());
    }

    #[test]
    fn dudley_integral_values_and_cap() {
        assert_eq!(dudley_integral_bound(3, 10, 1.0, 0.0).unwrap(), 0.0);
        // k = 1, n = 100, el2 = 1, D = 2: below the analytic cap 4.8 and
        // above a crude lower Riemann sum.
        let v = dudley_integral_bound(1, 100, 1.0, 2.0).unwrap();
        assert!(v <= 4.8 + 1e-9, "{v}");
        assert!(v > 2.0, "{v}"); // integrand ≥ √log(2) ≈ 0.83 on [0,2]
        // Monotone in k; k = 4 still below its cap and above the k = 1 value.
        let v4 = dudley_integral_bound(4, 100, 1.0, 2.0).unwrap();
        assert!(v4 <= 9.6 + 1e-9, "{v4}");
        assert!(v4 >= v);
        for k in 1..=16usize {
            let val = dudley_integral_bound(k, 50, 0.7, 2.0).unwrap();
            let cap = 12.0 / 50f64.sqrt() * 0.7 * 4.0 * (k as f64).sqrt();
            assert!(val <= cap + 1e-9, "k={k}: {val} > {cap}");
        }
        // Quadrature sanity: doubling el2 doubles the bound.
        let a = dudley_integral_bound(2, 10, 1.0, 1.0).unwrap();
        let b = dudley_integral_bound(2, 10, 2.0, 1.0).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-9);
    }

    #[test]
    fn el2_root_values() {
        let zero = LipschitzProfile { a: 0.0, b: 0.0 };
        let pts = Sample::new(vec![vec![3.0, 4.0]]).unwrap();
        assert_eq!(estimate_el2_root(&zero, &pts), 0.0);
        let norm = LipschitzProfile { a: 0.0, b: 1.0 };
        assert!((estimate_el2_root(&norm, &pts) - 5.0).abs() < 1e-12);
        let one = LipschitzProfile { a: 1.0, b: 0.0 };
        let many = Sample::new(vec![vec![1.0], vec![-2.0], vec![7.0]]).unwrap();
        assert!((estimate_el2_root(&one, &many) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn k_quantity_values() {
        // Frozen: kl, r = 0.1, n = 100, [0, 1]. L_{0,1} = e, slope at
        // w + z0 = 2 is e, so min{(1+2e)/10 + e/20, e·0.15} = 0.15e.
        let kl = DivergenceGenerator::kl();
        let got = k_quantity(&kl, 0.1, 100, 0.0, 1.0).unwrap();
        let branch1 = (1.0 + 2.0 * E) * 0.1 + E / 20.0;
        let branch2 = E * 0.15;
        assert!((got - branch1.min(branch2)).abs() < 1e-12);
        assert!((got - 0.15 * E).abs() < 1e-12);

        // Zero-width interval: L = 0 and the first branch is r itself.
        let a2 = DivergenceGenerator::alpha(2.0).unwrap();
        let got = k_quantity(&a2, 0.3, 50, 0.5, 0.5).unwrap();
        assert!((got - 0.3f64.min(1.0 * 0.3)).abs() < 1e-12);
        assert_eq!(got, 0.3);

        // r = 0, n large → both branches vanish.
        let got = k_quantity(&kl, 0.0, 1_000_000, 0.0, 1.0).unwrap();
        assert!(got < 0.01);

        // JS has no finite L on wide intervals near the domain edge but
        // branch 2 still applies when compatible.
        let js = DivergenceGenerator::js();
        let got = k_quantity(&js, 0.1, 100, 0.0, 0.5).unwrap();
        assert!(got.is_finite() && got > 0.0);
        assert!(k_quantity(&js, 0.1, 100, 0.0, 1.0).is_err());
        assert!(k_quantity(&kl, -0.1, 100, 0.0, 1.0).is_err());
    }

    #[test]
    fn k_quantity_monotone_in_r_and_width() {
        let kl = DivergenceGenerator::kl();
        let mut prev = 0.0;
        for i in 0..=10 {
            let r = i as f64 * 0.05;
            let k = k_quantity(&kl, r, 64, 0.0, 1.0).unwrap();
            assert!(k >= prev - 1e-12, "not monotone in r at {r}");
            prev = k;
        }
        prev = 0.0;
        for i in 0..=10 {
            let beta = i as f64 * 0.2;
            let k = k_quantity(&kl, 0.1, 64, 0.0, beta).unwrap();
            assert!(k >= prev - 1e-12, "not monotone in width at {beta}");
            prev = k;
        }
    }

    #[test]
    fn error_paths() {
        let dict = constant_dictionary(2, 3, 0.0, 1.0);
        let pts = grid_points(2);
        assert!(matches!(
            empirical_rademacher(&dict, &pts, 0, 1),
            Err(RademacherError::ZeroDraws)
        ));
        assert!(matches!(
            rademacher_constant_interval(31, 0.0, 1.0),
            Err(RademacherError::TooLargeN { .. })
        ));
        assert!(matches!(
            rademacher_constant_interval(2, 1.0, 0.0),
            Err(RademacherError::ReversedInterval(_, _))
        ));
        let big = grid_points(21);
        let dict21 = constant_dictionary(21, 3, 0.0, 1.0);
        assert!(matches!(
            enumerate_rademacher(&dict21, &big),
            Err(RademacherError::TooManyPoints { .. })
        ));
        let mlp = BoundedFunctionClass::mlp(&[1, 3, 1], 1.0, (0.0, 1.0)).unwrap();
        assert!(matches!(
            enumerate_rademacher(&mlp, &pts),
            Err(RademacherError::NotADictionary)
        ));
        let wrong_dim = Sample::new(vec![vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            empirical_rademacher(&dict, &wrong_dim, 10, 0),
            Err(RademacherError::DimensionMismatch { .. })
        ));
    }
}
