//! The generalized cumulant generating function Λ_f on empirical vectors,
//! the per-coordinate perturbation constant Δ_{f,n}, and the Lipschitz
//! constants governing both.
//!
//! For a vector x ∈ [α, β]ⁿ (the empirical values of a bounded function),
//!
//! ```text
//!   Λ_f(x) = inf_ν { ν + (1/n) Σᵢ f*(xᵢ − ν) }
//! ```
//!
//! and the infimum may be restricted to the compact bracket
//! ν ∈ [min(x) − z0, max(x) − z0] without changing the value. On that
//! bracket the objective is convex in ν, so a golden-section search with a
//! slope-aware termination width resolves it to the requested tolerance.
//!
//! ```text
//!   Δ_{f,n} = inf_{z ∈ [z0−(β−α), z0]} { −nz + (n−1)·f*(z) + f*(β−α+z) }
//! ```
//!
//! is the tight constant such that changing one coordinate of x moves
//! Λ_f(x) by at most Δ_{f,n}/n; it feeds every McDiarmid denominator in
//! the concentration bounds.

use thiserror::Error;

use crate::generators::{Compatibility, DivergenceGenerator, GeneratorError};

#[derive(Debug, Error)]
pub enum CgfError {
    #[error("empty input vector")]
    EmptyInput,
    #[error("input vector contains a non-finite value")]
    NonFiniteValues,
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("generator incompatible with value range: {0}")]
    Incompatible(String),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
}

/// Result of the 1-D minimization behind Λ_f.
#[derive(Debug, Clone)]
pub struct LambdaResult {
    /// Λ_f(x); always inside [min(x), max(x)].
    pub value: f64,
    /// The minimizing shift ν*; inside [min(x)−z0, max(x)−z0].
    pub nu_star: f64,
    /// Golden-section iterations used.
    pub iterations: usize,
    /// The bracket actually searched.
    pub bracket: (f64, f64),
}

/// Result of the Δ_{f,n} minimization with clamping diagnostics.
#[derive(Debug, Clone)]
pub struct DeltaResult {
    /// Δ_{f,n}, clamped into the proven sandwich
    /// [β−α, f*(β−α+z0) − z0].
    pub value: f64,
    /// Raw solver output before clamping.
    pub raw: f64,
    /// Minimizing z.
    pub z_star: f64,
    /// Whether clamping changed the value (should only absorb
    /// tolerance-level rounding).
    pub clamped: bool,
}

/// Default minimization tolerance for a range of width β−α.
pub fn default_tol(alpha: f64, beta: f64) -> f64 {
    1e-10 * (beta - alpha).max(1.0)
}

/// Mean computed as min + mean(x − min): exact on constant vectors and
/// shift-stable. Every mean that gets compared against Λ values (here and
/// in the divergence objective) uses this one formula, so the provable
/// inequality mean(x) ≤ Λ_f(x) survives floating point.
pub fn mean_anchored(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::INFINITY, f64::min);
    m + values.iter().map(|v| v - m).sum::<f64>() / values.len() as f64
}

/// Golden-section minimization of a convex objective on [lo, hi].
/// Returns the best evaluated point (endpoints included), its value, and
/// the iteration count. Non-finite objective values are treated as +∞:
/// since the finite region of a convex function is an interval and the
/// callers guarantee the right end of the bracket is finite, an infinite
/// left probe discards the left segment.
fn golden_min(
    mut lo: f64,
    mut hi: f64,
    width_tol: f64,
    objective: &dyn Fn(f64) -> f64,
) -> (f64, f64, usize) {
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let mut best_x = lo;
    let mut best_f = objective(lo);
    let f_hi = objective(hi);
    if f_hi < best_f {
        best_x = hi;
        best_f = f_hi;
    }
    let floor = 4.0 * f64::EPSILON * (lo.abs() + hi.abs() + 1.0);
    let width_tol = width_tol.max(floor);
    let mut iterations = 0usize;
    while hi - lo > width_tol && iterations < 200 {
        iterations += 1;
        let x1 = hi - INVPHI * (hi - lo);
        let x2 = lo + INVPHI * (hi - lo);
        let f1 = objective(x1);
        let f2 = objective(x2);
        if f1.is_finite() && f1 < best_f {
            best_x = x1;
            best_f = f1;
        }
        if f2.is_finite() && f2 < best_f {
            best_x = x2;
            best_f = f2;
        }
        if !f1.is_finite() {
            lo = x1;
        } else if !f2.is_finite() {
            hi = x2;
        } else if f1 < f2 {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let mid = 0.5 * (lo + hi);
    let f_mid = objective(mid);
    if f_mid.is_finite() && f_mid < best_f {
        best_x = mid;
        best_f = f_mid;
    }
    (best_x, best_f, iterations)
}

fn require_compatible(
    gen: &DivergenceGenerator,
    lo: f64,
    hi: f64,
) -> Result<(), CgfError> {
    match gen.check_compatibility(lo, hi) {
        Compatibility::Compatible => Ok(()),
        Compatibility::Incompatible(why) => Err(CgfError::Incompatible(why)),
    }
}

/// Λ_f of an empirical vector, minimized over the compact bracket
/// ν ∈ [min(x) − z0, max(x) − z0]. The returned value is clamped into
/// [min(x), max(x)], which the exact infimum provably inhabits.
pub fn lambda_empirical(
    values: &[f64],
    gen: &DivergenceGenerator,
    tol: f64,
) -> Result<LambdaResult, CgfError> {
    if values.is_empty() {
        return Err(CgfError::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CgfError::NonFiniteValues);
    }
    if !(tol > 0.0) {
        return Err(CgfError::InvalidTolerance(tol));
    }
    let xmin = values.iter().copied().fold(f64::INFINITY, f64::min);
    let xmax = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    require_compatible(gen, xmin, xmax)?;
    let z0 = gen.z0();
    if xmin == xmax {
        return Ok(LambdaResult {
            value: xmin,
            nu_star: xmin - z0,
            iterations: 0,
            bracket: (xmin - z0, xmin - z0),
        });
    }
    let n = values.len() as f64;
    let objective = |nu: f64| -> f64 {
        let mut acc = 0.0;
        for &x in values {
            acc += gen.f_star(x - nu);
        }
        nu + acc / n
    };
    let mut lo = xmin - z0;
    let hi = xmax - z0;
    // The right end is always finite (arguments ≤ z0 there); nudge the left
    // end inward if boundary rounding ever produces an infinite value.
    for _ in 0..64 {
        if objective(lo).is_finite() {
            break;
        }
        lo += (hi - lo) * 1e-3;
    }
    // |d/dν| ≤ 1 + (f*)'₊(z0 + width): divide the width tolerance by it so
    // the value honors `tol`.
    let slope_cap = 1.0 + gen.f_star_rprime(z0 + (xmax - xmin))?;
    let (nu_star, value, iterations) = golden_min(lo, hi, tol / slope_cap, &objective);
    // Provable bracket: mean(x) ≤ Λ ≤ max(x) (from f*(z) ≥ z and Lemma
    // item 1). Clamping to the mean keeps objectives of the form
    // mean − Λ exactly ≤ 0 when both sides see the same value vector.
    let lower = mean_anchored(values).min(xmax);
    Ok(LambdaResult {
        value: value.clamp(lower, xmax),
        nu_star: nu_star.clamp(lo, hi),
        iterations,
        bracket: (lo, hi),
    })
}

/// The Lipschitz constant of Λ_f with respect to the scaled ℓ¹ metric
/// (1/n)Σ|x̃ᵢ − xᵢ| on [α, β]ⁿ: (f*)'₊(z0 + β − α).
pub fn lambda_lipschitz_const(
    gen: &DivergenceGenerator,
    alpha: f64,
    beta: f64,
) -> Result<f64, CgfError> {
    require_compatible(gen, alpha, beta)?;
    Ok(gen.f_star_rprime(gen.z0() + (beta - alpha))?)
}

/// Δ_{f,n} with solver diagnostics; see [`delta_f`].
pub fn delta_f_detailed(
    gen: &DivergenceGenerator,
    n: usize,
    alpha: f64,
    beta: f64,
    tol: f64,
) -> Result<DeltaResult, CgfError> {
    if n == 0 {
        return Err(CgfError::EmptyInput);
    }
    if !(tol > 0.0) {
        return Err(CgfError::InvalidTolerance(tol));
    }
    require_compatible(gen, alpha, beta)?;
    let z0 = gen.z0();
    let w = beta - alpha;
    if w == 0.0 {
        return Ok(DeltaResult {
            value: 0.0,
            raw: 0.0,
            z_star: z0,
            clamped: false,
        });
    }
    let nf = n as f64;
    let objective = |z: f64| -> f64 {
        -nf * z + (nf - 1.0) * gen.f_star(z) + gen.f_star(w + z)
    };
    // |g'(z)| ≤ n(1 + (f*)'₊(z0 + w)) on the bracket.
    let slope_cap = nf * (1.0 + gen.f_star_rprime(z0 + w)?);
    let (z_star, raw, _iters) = golden_min(z0 - w, z0, tol / slope_cap, &objective);
    let lower = w;
    let upper = (gen.f_star(w + z0) - z0).max(lower);
    let value = raw.clamp(lower, upper);
    Ok(DeltaResult {
        value,
        raw,
        z_star,
        clamped: (value - raw).abs() > 0.0,
    })
}

/// The tight constant Δ_{f,n} bounding n·|Λ_f(x̃) − Λ_f(x)| over
/// single-coordinate changes of x ∈ [α, β]ⁿ. Clamped into the proven
/// sandwich [β−α, f*(β−α+z0) − z0].
pub fn delta_f(
    gen: &DivergenceGenerator,
    n: usize,
    alpha: f64,
    beta: f64,
    tol: f64,
) -> Result<f64, CgfError> {
    Ok(delta_f_detailed(gen, n, alpha, beta, tol)?.value)
}

/// Λ_f(x̃) − Λ_f(x) for the extremal pair x = (α,…,α) and x̃ equal to x
/// with one coordinate raised to β. The perturbation bound holds with
/// equality here, so this returns Δ_{f,n}/n up to solver tolerance.
pub fn perturbation_extremal_gap(
    gen: &DivergenceGenerator,
    n: usize,
    alpha: f64,
    beta: f64,
) -> Result<f64, CgfError> {
    if n == 0 {
        return Err(CgfError::EmptyInput);
    }
    require_compatible(gen, alpha, beta)?;
    if alpha == beta {
        return Ok(0.0);
    }
    let tol = default_tol(alpha, beta);
    let mut x = vec![alpha; n];
    let base = lambda_empirical(&x, gen, tol)?.value;
    x[n - 1] = beta;
    let bumped = lambda_empirical(&x, gen, tol)?.value;
    Ok(bumped - base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::DivergenceGenerator;
    use crate::rng::{stream, task_rng};
    use proptest::prelude::*;
    use rand::Rng;

    const E: f64 = std::f64::consts::E;

    /// Independent oracle: KL reduces Λ to log-mean-exp.
    fn kl_log_mean_exp(values: &[f64]) -> f64 {
        let n = values.len() as f64;
        let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        m + (values.iter().map(|v| (v - m).exp()).sum::<f64>() / n).ln()
    }

    /// Independent oracle: dense grid over a widened bracket.
    fn wide_grid_lambda(values: &[f64], gen: &DivergenceGenerator, points: usize) -> f64 {
        let xmin = values.iter().copied().fold(f64::INFINITY, f64::min);
        let xmax = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = xmin - gen.z0() - 10.0;
        let hi = xmax - gen.z0() + 10.0;
        let n = values.len() as f64;
        let mut best = f64::INFINITY;
        for i in 0..points {
            let nu = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            let obj = nu + values.iter().map(|&x| gen.f_star(x - nu)).sum::<f64>() / n;
            if obj < best {
                best = obj;
            }
        }
        best
    }

    #[test]
    fn kl_matches_log_mean_exp() {
        let gen = DivergenceGenerator::kl();
        let mut rng = task_rng(2, stream::VERIFY, 0);
        for _ in 0..200 {
            let n = rng.random_range(1..=64);
            let values: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
            let got = lambda_empirical(&values, &gen, 1e-12).unwrap();
            let want = kl_log_mean_exp(&values);
            assert!(
                (got.value - want).abs() <= 1e-9,
                "gap {} on n={n}",
                (got.value - want).abs()
            );
        }
    }

    #[test]
    fn frozen_examples() {
        let kl = DivergenceGenerator::kl();
        let got = lambda_empirical(&[0.0, (3.0f64).ln()], &kl, 1e-12).unwrap();
        assert!((got.value - (2.0f64).ln()).abs() <= 1e-9);

        let a2 = DivergenceGenerator::alpha(2.0).unwrap();
        let got = lambda_empirical(&[0.0, 2.0], &a2, 1e-12).unwrap();
        assert!((got.value - 1.5).abs() <= 1e-9);
        assert!(got.nu_star.abs() <= 1e-5, "nu_star = {}", got.nu_star);

        // All-equal vectors are a fixed point for any generator and tol.
        for c in [-3.0, 0.0, 7.25] {
            let got = lambda_empirical(&[c; 5], &kl, 1e-3).unwrap();
            assert_eq!(got.value, c);
            assert_eq!(got.nu_star, c - kl.z0());
        }
    }

    #[test]
    fn lambda_result_invariants() {
        let mut rng = task_rng(3, stream::VERIFY, 0);
        let gens = [
            DivergenceGenerator::kl(),
            DivergenceGenerator::js(),
            DivergenceGenerator::alpha(2.0).unwrap(),
        ];
        for gen in &gens {
            // js needs width < log 2: use [0, 0.5].
            for _ in 0..100 {
                let n = rng.random_range(1..=32);
                let values: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.5)).collect();
                let r = lambda_empirical(&values, gen, 1e-10).unwrap();
                let xmin = values.iter().copied().fold(f64::INFINITY, f64::min);
                let xmax = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                assert!(r.value >= xmin && r.value <= xmax);
                assert!(r.value >= mean_anchored(&values).min(xmax));
                assert!(r.nu_star >= xmin - gen.z0() - 1e-12);
                assert!(r.nu_star <= xmax - gen.z0() + 1e-12);
            }
        }
    }

    #[test]
    fn compact_bracket_matches_wide_grid() {
        let mut rng = task_rng(4, stream::VERIFY, 0);
        let gens = [
            DivergenceGenerator::kl(),
            DivergenceGenerator::js(),
            DivergenceGenerator::alpha(2.0).unwrap(),
            DivergenceGenerator::alpha(3.0).unwrap(),
        ];
        for gen in &gens {
            for _ in 0..10 {
                let n = rng.random_range(2..=16);
                let values: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.5)).collect();
                let fast = lambda_empirical(&values, gen, 1e-10).unwrap().value;
                let slow = wide_grid_lambda(&values, gen, 100_000);
                assert!(
                    (fast - slow).abs() <= 1e-6,
                    "{}: bracket vs grid gap {}",
                    gen.name(),
                    (fast - slow).abs()
                );
            }
        }
    }

    #[test]
    fn lipschitz_const_values() {
        let kl = DivergenceGenerator::kl();
        assert!((lambda_lipschitz_const(&kl, 0.0, 1.0).unwrap() - E).abs() < 1e-12);
        assert!((lambda_lipschitz_const(&kl, 0.0, 0.0).unwrap() - 1.0).abs() < 1e-12);
        let a2 = DivergenceGenerator::alpha(2.0).unwrap();
        assert!((lambda_lipschitz_const(&a2, 0.0, 1.0).unwrap() - 2.0).abs() < 1e-12);
        let js = DivergenceGenerator::js();
        assert!(lambda_lipschitz_const(&js, 0.0, 1.0).is_err());
    }

    #[test]
    fn delta_frozen_examples() {
        let kl = DivergenceGenerator::kl();
        let d1 = delta_f(&kl, 1, 0.0, 1.0, 1e-12).unwrap();
        assert!((d1 - 1.0).abs() <= 1e-9, "delta_f(kl,1,0,1) = {d1}");

        for gen in [DivergenceGenerator::kl(), DivergenceGenerator::js()] {
            assert_eq!(delta_f(&gen, 7, 0.3, 0.3, 1e-10).unwrap(), 0.0);
        }

        // n = 10: solver must match a dense grid oracle and sit inside
        // the open part of the sandwich.
        let d10 = delta_f(&kl, 10, 0.0, 1.0, 1e-10).unwrap();
        assert!(d10 >= 1.0 && d10 <= E - 1.0);
        let mut grid_best = f64::INFINITY;
        for i in 0..100_000 {
            let z = 0.0 + 1.0 * i as f64 / 99_999.0;
            let g = -10.0 * z + 9.0 * (z - 1.0).exp() + z.exp();
            grid_best = grid_best.min(g);
        }
        assert!((d10 - grid_best).abs() <= 1e-6, "gap {}", (d10 - grid_best).abs());
    }

    #[test]
    fn delta_sandwich_holds_unclamped() {
        let gens = [
            (DivergenceGenerator::kl(), 1.0),
            (DivergenceGenerator::js(), 0.5),
            (DivergenceGenerator::alpha(2.0).unwrap(), 1.0),
            (DivergenceGenerator::alpha(3.0).unwrap(), 1.0),
        ];
        for (gen, beta) in &gens {
            let w = *beta;
            let upper = gen.f_star(w + gen.z0()) - gen.z0();
            let slope_bound = gen.f_star_rprime(w + gen.z0()).unwrap() * w;
            assert!(upper <= slope_bound + 1e-12);
            for n in 1..=100 {
                let d = delta_f_detailed(gen, n, 0.0, *beta, 1e-10).unwrap();
                assert!(
                    d.raw >= w - 1e-8 && d.raw <= upper + 1e-8,
                    "{} n={n}: raw {} outside [{w}, {upper}]",
                    gen.name(),
                    d.raw
                );
                assert!(d.value >= w && d.value <= upper.max(w));
            }
        }
    }

    #[test]
    fn delta_monotone_in_n_and_limit() {
        // Δ_{f,n} is non-decreasing in n and approaches f*(w+z0) − z0.
        let gen = DivergenceGenerator::kl();
        let upper = gen.f_star(1.0 + gen.z0()) - gen.z0();
        let mut prev = 0.0;
        for n in [1usize, 2, 4, 10, 100, 1000, 100_000] {
            let d = delta_f(&gen, n, 0.0, 1.0, 1e-10).unwrap();
            assert!(d >= prev - 1e-9, "delta not monotone at n={n}");
            prev = d;
        }
        assert!((prev - upper).abs() < 1e-3, "n→∞ limit gap {}", (prev - upper).abs());
    }

    #[test]
    fn perturbation_extremal_equality() {
        let kl = DivergenceGenerator::kl();
        let g1 = perturbation_extremal_gap(&kl, 1, 0.0, 1.0).unwrap();
        assert!((g1 - 1.0).abs() <= 1e-6);
        assert_eq!(perturbation_extremal_gap(&kl, 9, 0.4, 0.4).unwrap(), 0.0);

        let a2 = DivergenceGenerator::alpha(2.0).unwrap();
        for n in [1usize, 2, 4, 10, 100] {
            let gap = perturbation_extremal_gap(&a2, n, 0.0, 1.0).unwrap();
            let dn = delta_f(&a2, n, 0.0, 1.0, 1e-10).unwrap() / n as f64;
            assert!(
                (gap - dn).abs() <= 1e-6,
                "n={n}: extremal gap {gap} vs delta/n {dn}"
            );
        }
    }

    #[test]
    fn random_perturbations_respect_delta() {
        let mut rng = task_rng(5, stream::VERIFY, 0);
        let gens = [
            DivergenceGenerator::kl(),
            DivergenceGenerator::alpha(2.0).unwrap(),
        ];
        for gen in &gens {
            let delta = delta_f(gen, 16, 0.0, 1.0, 1e-10).unwrap();
            for _ in 0..200 {
                let mut x: Vec<f64> = (0..16).map(|_| rng.random_range(0.0..1.0)).collect();
                let before = lambda_empirical(&x, gen, 1e-11).unwrap().value;
                let coord = rng.random_range(0..16);
                x[coord] = rng.random_range(0.0..1.0);
                let after = lambda_empirical(&x, gen, 1e-11).unwrap().value;
                assert!(
                    (after - before).abs() <= delta / 16.0 + 1e-9,
                    "{}: perturbation {} exceeds {}",
                    gen.name(),
                    (after - before).abs(),
                    delta / 16.0
                );
            }
        }
    }

    #[test]
    fn error_paths() {
        let kl = DivergenceGenerator::kl();
        assert!(matches!(
            lambda_empirical(&[], &kl, 1e-9),
            Err(CgfError::EmptyInput)
        ));
        assert!(matches!(
            lambda_empirical(&[f64::NAN], &kl, 1e-9),
            Err(CgfError::NonFiniteValues)
        ));
        assert!(matches!(
            lambda_empirical(&[0.0, 1.0], &kl, 0.0),
            Err(CgfError::InvalidTolerance(_))
        ));
        let js = DivergenceGenerator::js();
        assert!(matches!(
            lambda_empirical(&[0.0, 1.0], &js, 1e-9),
            Err(CgfError::Incompatible(_))
        ));
        assert!(delta_f(&js, 5, 0.0, 1.0, 1e-9).is_err());
        assert!(matches!(delta_f(&kl, 0, 0.0, 1.0, 1e-9), Err(CgfError::EmptyInput)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn shift_equivariance(
            values in proptest::collection::vec(0.0f64..0.5, 1..24),
            c in -2.0f64..2.0,
            which in 0usize..3,
        ) {
            let gen = match which {
                0 => DivergenceGenerator::kl(),
                1 => DivergenceGenerator::js(),
                _ => DivergenceGenerator::alpha(2.0).unwrap(),
            };
            let base = lambda_empirical(&values, &gen, 1e-11).unwrap().value;
            let shifted: Vec<f64> = values.iter().map(|v| v + c).collect();
            let moved = lambda_empirical(&shifted, &gen, 1e-11).unwrap().value;
            prop_assert!((moved - (base + c)).abs() <= 1e-9,
                "shift gap {}", (moved - (base + c)).abs());
        }

        #[test]
        fn monotone_in_inputs(
            values in proptest::collection::vec(0.0f64..0.4, 1..24),
            bumps in proptest::collection::vec(0.0f64..0.1, 24),
        ) {
            let gen = DivergenceGenerator::js();
            let lower = lambda_empirical(&values, &gen, 1e-11).unwrap().value;
            let raised: Vec<f64> = values
                .iter()
                .zip(bumps.iter())
                .map(|(v, b)| v + b)
                .collect();
            let upper = lambda_empirical(&raised, &gen, 1e-11).unwrap().value;
            prop_assert!(upper >= lower - 1e-9);
        }

        #[test]
        fn lambda_lipschitz_property(
            pair in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..24),
        ) {
            let gen = DivergenceGenerator::kl();
            let lip = lambda_lipschitz_const(&gen, 0.0, 1.0).unwrap();
            let xs: Vec<f64> = pair.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = pair.iter().map(|p| p.1).collect();
            let lx = lambda_empirical(&xs, &gen, 1e-11).unwrap().value;
            let ly = lambda_empirical(&ys, &gen, 1e-11).unwrap().value;
            let l1 = xs.iter().zip(&ys).map(|(a, b)| (a - b).abs()).sum::<f64>()
                / xs.len() as f64;
            prop_assert!((lx - ly).abs() <= lip * l1 + 1e-9,
                "gap {} vs lip*l1 {}", (lx - ly).abs(), lip * l1);
        }
    }
}
