//! Parameterized bounded function classes (discriminators), generator maps,
//! and the certified Lipschitz data the complexity bounds consume.
//!
//! Three class kinds:
//!
//! * **finite-dictionary** — functions tabulated on explicit support points;
//!   exists to enable exact brute-force oracles. Evaluation off-support is
//!   an error by design.
//! * **linear-features** — h_θ(x) = squash(θ·φ(x)) with φ the identity or
//!   the affine embedding (x, 1).
//! * **mlp** — fully-connected tanh network with a final affine layer fed
//!   through the same squashing map.
//!
//! The squash s ↦ α + (β−α)(tanh(s)+1)/2 certifies the output range
//! [α, β] by construction (no clipping, so gradients never die), and its
//! slope is at most (β−α)/2 — the factor that appears throughout the
//! Lipschitz profiles.
//!
//! Parameters always live in the Euclidean ball of radius ρ. Since every
//! per-layer Frobenius norm is at most the full parameter norm, each layer's
//! operator norm is at most ρ, which gives the layerwise profile bounds
//! `L(y) = a + b‖y‖` their product form.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiscError {
    #[error("parameter vector has norm {norm} exceeding the ball radius {rho}")]
    ParamOutsideBall { norm: f64, rho: f64 },
    #[error("expected parameter dimension {expected}, got {got}")]
    ParamDimension { expected: usize, got: usize },
    #[error("expected input dimension {expected}, got {got}")]
    InputDimension { expected: usize, got: usize },
    #[error("point {0:?} is not a tabulated support point of the dictionary")]
    OffSupport(Vec<f64>),
    #[error("finite-dictionary classes are enumerated, not differentiated")]
    NotDifferentiable,
    #[error("finite-dictionary classes carry no parameter metric")]
    NoParameterMetric,
    #[error("operation requires a finite-dictionary class")]
    NotADictionary,
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),
}

/// Output squashing map onto [lo, hi]: smooth, with slope ≤ (hi−lo)/2,
/// and squash(0) = midpoint.
pub fn squash(s: f64, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * (s.tanh() + 1.0) / 2.0
}

/// Derivative of [`squash`] with respect to s.
fn squash_slope(s: f64, lo: f64, hi: f64) -> f64 {
    let t = s.tanh();
    (hi - lo) / 2.0 * (1.0 - t * t)
}

/// Rescales `theta` onto the sphere of radius `rho` when it escapes the
/// ball; identity otherwise.
pub fn project_to_ball(theta: &mut [f64], rho: f64) {
    let norm = l2_norm(theta);
    if norm > rho {
        let scale = if norm > 0.0 { rho / norm } else { 0.0 };
        for t in theta.iter_mut() {
            *t *= scale;
        }
    }
}

fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Affine parameter-Lipschitz bound L(y) = a + b‖y‖: for all θ, θ' in the
/// ball, |h_θ(y) − h_θ'(y)| ≤ L(y)·‖θ − θ'‖. Certified conservative by
/// layerwise operator-norm products.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzProfile {
    pub a: f64,
    pub b: f64,
}

impl LipschitzProfile {
    pub fn at(&self, y: &[f64]) -> f64 {
        self.a + self.b * l2_norm(y)
    }
}

/// Structured architecture description used in JSON configs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum ArchitectureSpec {
    #[serde(rename = "mlp")]
    Mlp {
        widths: Vec<usize>,
        rho: f64,
        range: [f64; 2],
    },
    #[serde(rename = "linear-features")]
    LinearFeatures {
        feature: FeatureKind,
        input_dim: usize,
        rho: f64,
        range: [f64; 2],
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    /// φ(x) = x.
    Identity,
    /// φ(x) = (x, 1).
    Affine,
}

/// Fully-connected tanh core shared by discriminators and generator maps.
/// `widths[0]` is the input dimension; the final layer is affine (callers
/// add squashing where a bounded range is required).
#[derive(Debug, Clone, PartialEq)]
struct MlpCore {
    widths: Vec<usize>,
}

/// Forward-pass record: pre-activations and activations per layer.
struct MlpTape {
    /// a[0] = input, a[l] = activation output of layer l (post-tanh for
    /// hidden layers, raw affine for the last).
    activations: Vec<Vec<f64>>,
    /// s[l-1] = pre-activation of layer l.
    pre: Vec<Vec<f64>>,
}

impl MlpCore {
    fn new(widths: &[usize]) -> Result<Self, DiscError> {
        if widths.len() < 2 || widths.iter().any(|&w| w == 0) {
            return Err(DiscError::InvalidArchitecture(format!(
                "mlp widths must list input, hidden…, output with no zeros; got {widths:?}"
            )));
        }
        Ok(MlpCore {
            widths: widths.to_vec(),
        })
    }

    fn layers(&self) -> usize {
        self.widths.len() - 1
    }

    fn param_dim(&self) -> usize {
        (1..self.widths.len())
            .map(|l| (self.widths[l - 1] + 1) * self.widths[l])
            .sum()
    }

    /// Offset of layer l's weight block in the flat parameter vector.
    fn layer_offset(&self, l: usize) -> usize {
        (1..l)
            .map(|j| (self.widths[j - 1] + 1) * self.widths[j])
            .sum()
    }

    fn forward(&self, theta: &[f64], x: &[f64]) -> MlpTape {
        let mut activations = Vec::with_capacity(self.layers() + 1);
        let mut pre = Vec::with_capacity(self.layers());
        activations.push(x.to_vec());
        for l in 1..=self.layers() {
            let (w_in, w_out) = (self.widths[l - 1], self.widths[l]);
            let off = self.layer_offset(l);
            let input = &activations[l - 1];
            let mut s = vec![0.0; w_out];
            for (o, s_o) in s.iter_mut().enumerate() {
                let row = &theta[off + o * w_in..off + (o + 1) * w_in];
                let mut acc = theta[off + w_out * w_in + o]; // bias
                for (w, a) in row.iter().zip(input.iter()) {
                    acc += w * a;
                }
                *s_o = acc;
            }
            let a = if l < self.layers() {
                s.iter().map(|v| v.tanh()).collect()
            } else {
                s.clone()
            };
            pre.push(s);
            activations.push(a);
        }
        MlpTape { activations, pre }
    }

    /// Reverse pass: given the cotangent on the (affine) output, accumulate
    /// the parameter gradient into `dtheta` and return the input gradient.
    fn backward(&self, theta: &[f64], tape: &MlpTape, out_cot: &[f64], dtheta: &mut [f64]) -> Vec<f64> {
        let mut delta = out_cot.to_vec();
        for l in (1..=self.layers()).rev() {
            let (w_in, w_out) = (self.widths[l - 1], self.widths[l]);
            let off = self.layer_offset(l);
            let input = &tape.activations[l - 1];
            // Parameter gradients of this layer.
            for (o, d) in delta.iter().enumerate() {
                let row = &mut dtheta[off + o * w_in..off + (o + 1) * w_in];
                for (g, a) in row.iter_mut().zip(input.iter()) {
                    *g += d * a;
                }
            }
            for (o, d) in delta.iter().enumerate() {
                dtheta[off + w_out * w_in + o] += d;
            }
            // Propagate to the previous activation.
            let mut prev = vec![0.0; w_in];
            for (o, d) in delta.iter().enumerate() {
                let row = &theta[off + o * w_in..off + (o + 1) * w_in];
                for (p, w) in prev.iter_mut().zip(row.iter()) {
                    *p += d * w;
                }
            }
            if l > 1 {
                // Through the tanh of layer l−1.
                for (p, s) in prev.iter_mut().zip(tape.pre[l - 2].iter()) {
                    let t = s.tanh();
                    *p *= 1.0 - t * t;
                }
            }
            delta = prev;
        }
        delta
    }
}

#[derive(Debug, Clone, PartialEq)]
enum ClassKind {
    FiniteDictionary {
        /// Tabulated support points.
        support: Vec<Vec<f64>>,
        /// members[j][i] = h_j(support[i]).
        members: Vec<Vec<f64>>,
    },
    LinearFeatures {
        feature: FeatureKind,
    },
    Mlp(MlpCore),
}

/// A class of functions with certified output range [α, β] and parameters
/// confined to the Euclidean ball of radius ρ. Immutable descriptor; all
/// evaluation is pure.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedFunctionClass {
    kind: ClassKind,
    range_lo: f64,
    range_hi: f64,
    input_dim: usize,
    rho: f64,
    param_dim: usize,
}

impl BoundedFunctionClass {
    /// Tabulated dictionary: `members[j][i]` is member j's value at
    /// `support[i]`. All tabulated values must lie in [α, β] — that is the
    /// range certification for dictionaries.
    pub fn dictionary(
        support: Vec<Vec<f64>>,
        members: Vec<Vec<f64>>,
        range: (f64, f64),
    ) -> Result<Self, DiscError> {
        let (lo, hi) = range;
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(DiscError::InvalidArchitecture(format!(
                "range [{lo}, {hi}] must be a finite interval"
            )));
        }
        if support.is_empty() || members.is_empty() {
            return Err(DiscError::InvalidArchitecture(
                "dictionary needs at least one support point and one member".into(),
            ));
        }
        let dim = support[0].len();
        if dim == 0 || support.iter().any(|p| p.len() != dim) {
            return Err(DiscError::InvalidArchitecture(
                "support points must share a positive dimension".into(),
            ));
        }
        for (j, m) in members.iter().enumerate() {
            if m.len() != support.len() {
                return Err(DiscError::InvalidArchitecture(format!(
                    "member {j} tabulates {} values for {} support points",
                    m.len(),
                    support.len()
                )));
            }
            if m.iter().any(|v| !v.is_finite() || *v < lo || *v > hi) {
                return Err(DiscError::InvalidArchitecture(format!(
                    "member {j} has values outside [{lo}, {hi}]"
                )));
            }
        }
        Ok(BoundedFunctionClass {
            kind: ClassKind::FiniteDictionary { support, members },
            range_lo: lo,
            range_hi: hi,
            input_dim: dim,
            rho: 0.0,
            param_dim: 0,
        })
    }

    pub fn linear_features(
        input_dim: usize,
        feature: FeatureKind,
        rho: f64,
        range: (f64, f64),
    ) -> Result<Self, DiscError> {
        check_range_rho(range, rho)?;
        if input_dim == 0 {
            return Err(DiscError::InvalidArchitecture(
                "input dimension must be positive".into(),
            ));
        }
        let param_dim = match feature {
            FeatureKind::Identity => input_dim,
            FeatureKind::Affine => input_dim + 1,
        };
        Ok(BoundedFunctionClass {
            kind: ClassKind::LinearFeatures { feature },
            range_lo: range.0,
            range_hi: range.1,
            input_dim,
            rho,
            param_dim,
        })
    }

    /// Tanh mlp ending in a squashed scalar; `widths` = [input, hidden…, 1].
    pub fn mlp(widths: &[usize], rho: f64, range: (f64, f64)) -> Result<Self, DiscError> {
        check_range_rho(range, rho)?;
        let core = MlpCore::new(widths)?;
        if *widths.last().unwrap() != 1 {
            return Err(DiscError::InvalidArchitecture(format!(
                "discriminator mlp must end in width 1, got {widths:?}"
            )));
        }
        let param_dim = core.param_dim();
        Ok(BoundedFunctionClass {
            kind: ClassKind::Mlp(core),
            range_lo: range.0,
            range_hi: range.1,
            input_dim: widths[0],
            rho,
            param_dim,
        })
    }

    /// The serializable architecture of a parameterized class; `None` for
    /// dictionaries (their identity is the tabulation, not a spec).
    pub fn arch_spec(&self) -> Option<ArchitectureSpec> {
        let range = [self.range_lo, self.range_hi];
        match &self.kind {
            ClassKind::FiniteDictionary { .. } => None,
            ClassKind::LinearFeatures { feature } => Some(ArchitectureSpec::LinearFeatures {
                feature: *feature,
                input_dim: self.input_dim,
                rho: self.rho,
                range,
            }),
            ClassKind::Mlp(core) => Some(ArchitectureSpec::Mlp {
                widths: core.widths.clone(),
                rho: self.rho,
                range,
            }),
        }
    }

    pub fn from_spec(spec: &ArchitectureSpec) -> Result<Self, DiscError> {
        match spec {
            ArchitectureSpec::Mlp { widths, rho, range } => {
                Self::mlp(widths, *rho, (range[0], range[1]))
            }
            ArchitectureSpec::LinearFeatures {
                feature,
                input_dim,
                rho,
                range,
            } => Self::linear_features(*input_dim, *feature, *rho, (range[0], range[1])),
        }
    }

    pub fn range(&self) -> (f64, f64) {
        (self.range_lo, self.range_hi)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn param_dim(&self) -> usize {
        self.param_dim
    }

    pub fn param_ball_radius(&self) -> f64 {
        self.rho
    }

    pub fn is_dictionary(&self) -> bool {
        matches!(self.kind, ClassKind::FiniteDictionary { .. })
    }

    pub fn n_members(&self) -> Option<usize> {
        match &self.kind {
            ClassKind::FiniteDictionary { members, .. } => Some(members.len()),
            _ => None,
        }
    }

    pub fn support(&self) -> Option<&[Vec<f64>]> {
        match &self.kind {
            ClassKind::FiniteDictionary { support, .. } => Some(support),
            _ => None,
        }
    }

    /// Whether the class provably contains a constant function: squashed
    /// parameterized classes always do (θ = 0 gives the range midpoint);
    /// dictionaries do iff some member tabulates a single value.
    pub fn contains_constant(&self) -> bool {
        match &self.kind {
            ClassKind::FiniteDictionary { members, .. } => members
                .iter()
                .any(|m| m.iter().all(|v| *v == m[0])),
            ClassKind::LinearFeatures { .. } | ClassKind::Mlp(_) => true,
        }
    }

    fn check_theta(&self, theta: &[f64]) -> Result<(), DiscError> {
        if theta.len() != self.param_dim {
            return Err(DiscError::ParamDimension {
                expected: self.param_dim,
                got: theta.len(),
            });
        }
        let norm = l2_norm(theta);
        if norm > self.rho * (1.0 + 1e-9) + 1e-12 {
            return Err(DiscError::ParamOutsideBall { norm, rho: self.rho });
        }
        Ok(())
    }

    fn check_points(&self, points: &[Vec<f64>]) -> Result<(), DiscError> {
        for p in points {
            if p.len() != self.input_dim {
                return Err(DiscError::InputDimension {
                    expected: self.input_dim,
                    got: p.len(),
                });
            }
        }
        Ok(())
    }

    fn feature_of(&self, feature: FeatureKind, x: &[f64]) -> Vec<f64> {
        match feature {
            FeatureKind::Identity => x.to_vec(),
            FeatureKind::Affine => {
                let mut v = x.to_vec();
                v.push(1.0);
                v
            }
        }
    }

    /// Exact tabulated values of dictionary member `j` at `points`, which
    /// must all be support points.
    pub fn evaluate_member(&self, j: usize, points: &[Vec<f64>]) -> Result<Vec<f64>, DiscError> {
        let ClassKind::FiniteDictionary { support, members } = &self.kind else {
            return Err(DiscError::NotADictionary);
        };
        self.check_points(points)?;
        let member = members
            .get(j)
            .ok_or_else(|| DiscError::InvalidArchitecture(format!("no member {j}")))?;
        points
            .iter()
            .map(|p| {
                support
                    .iter()
                    .position(|s| s == p)
                    .map(|i| member[i])
                    .ok_or_else(|| DiscError::OffSupport(p.clone()))
            })
            .collect()
    }

    /// h_θ at each point. Outputs are in [α, β] exactly (certified by the
    /// squash for parameterized classes, by construction for dictionaries).
    /// For dictionaries θ is a single member index, rounded and clamped.
    pub fn evaluate(&self, theta: &[f64], points: &[Vec<f64>]) -> Result<Vec<f64>, DiscError> {
        self.check_points(points)?;
        match &self.kind {
            ClassKind::FiniteDictionary { members, .. } => {
                if theta.len() != 1 {
                    return Err(DiscError::ParamDimension {
                        expected: 1,
                        got: theta.len(),
                    });
                }
                let j = (theta[0].round().max(0.0) as usize).min(members.len() - 1);
                self.evaluate_member(j, points)
            }
            ClassKind::LinearFeatures { feature } => {
                self.check_theta(theta)?;
                Ok(points
                    .iter()
                    .map(|p| {
                        let phi = self.feature_of(*feature, p);
                        let s: f64 = phi.iter().zip(theta.iter()).map(|(a, b)| a * b).sum();
                        squash(s, self.range_lo, self.range_hi)
                    })
                    .collect())
            }
            ClassKind::Mlp(core) => {
                self.check_theta(theta)?;
                Ok(points
                    .iter()
                    .map(|p| {
                        let tape = core.forward(theta, p);
                        squash(
                            tape.activations.last().unwrap()[0],
                            self.range_lo,
                            self.range_hi,
                        )
                    })
                    .collect())
            }
        }
    }

    /// Σᵢ cotangentᵢ · ∂h_θ(xᵢ)/∂θ by reverse-mode accumulation.
    pub fn gradient(
        &self,
        theta: &[f64],
        points: &[Vec<f64>],
        cotangent: &[f64],
    ) -> Result<Vec<f64>, DiscError> {
        self.check_points(points)?;
        if cotangent.len() != points.len() {
            return Err(DiscError::InputDimension {
                expected: points.len(),
                got: cotangent.len(),
            });
        }
        match &self.kind {
            ClassKind::FiniteDictionary { .. } => Err(DiscError::NotDifferentiable),
            ClassKind::LinearFeatures { feature } => {
                self.check_theta(theta)?;
                let mut grad = vec![0.0; self.param_dim];
                for (p, c) in points.iter().zip(cotangent.iter()) {
                    let phi = self.feature_of(*feature, p);
                    let s: f64 = phi.iter().zip(theta.iter()).map(|(a, b)| a * b).sum();
                    let slope = c * squash_slope(s, self.range_lo, self.range_hi);
                    for (g, f) in grad.iter_mut().zip(phi.iter()) {
                        *g += slope * f;
                    }
                }
                Ok(grad)
            }
            ClassKind::Mlp(core) => {
                self.check_theta(theta)?;
                let mut grad = vec![0.0; self.param_dim];
                for (p, c) in points.iter().zip(cotangent.iter()) {
                    let tape = core.forward(theta, p);
                    let s = tape.activations.last().unwrap()[0];
                    let cot = c * squash_slope(s, self.range_lo, self.range_hi);
                    core.backward(theta, &tape, &[cot], &mut grad);
                }
                Ok(grad)
            }
        }
    }

    /// ∇ₓ h_θ(xᵢ) for each point — the generator's chain-rule input.
    pub fn input_gradient(
        &self,
        theta: &[f64],
        points: &[Vec<f64>],
    ) -> Result<Vec<Vec<f64>>, DiscError> {
        self.check_points(points)?;
        match &self.kind {
            ClassKind::FiniteDictionary { .. } => Err(DiscError::NotDifferentiable),
            ClassKind::LinearFeatures { feature } => {
                self.check_theta(theta)?;
                Ok(points
                    .iter()
                    .map(|p| {
                        let phi = self.feature_of(*feature, p);
                        let s: f64 = phi.iter().zip(theta.iter()).map(|(a, b)| a * b).sum();
                        let slope = squash_slope(s, self.range_lo, self.range_hi);
                        (0..self.input_dim).map(|i| slope * theta[i]).collect()
                    })
                    .collect())
            }
            ClassKind::Mlp(core) => {
                self.check_theta(theta)?;
                let mut scratch = vec![0.0; self.param_dim];
                Ok(points
                    .iter()
                    .map(|p| {
                        let tape = core.forward(theta, p);
                        let s = tape.activations.last().unwrap()[0];
                        let cot = squash_slope(s, self.range_lo, self.range_hi);
                        scratch.iter_mut().for_each(|g| *g = 0.0);
                        core.backward(theta, &tape, &[cot], &mut scratch)
                    })
                    .collect())
            }
        }
    }

    /// Certified affine bound on the parameter-Lipschitz constant at input
    /// y, from layerwise operator-norm products over the ball. ρ = 0 yields
    /// L ≡ 0 (single-point parameter space).
    pub fn lipschitz_profile(&self) -> Result<LipschitzProfile, DiscError> {
        let half_width = (self.range_hi - self.range_lo) / 2.0;
        match &self.kind {
            ClassKind::FiniteDictionary { .. } => Err(DiscError::NoParameterMetric),
            _ if self.rho == 0.0 => Ok(LipschitzProfile { a: 0.0, b: 0.0 }),
            ClassKind::LinearFeatures { feature } => {
                // |∂h/∂θ| ≤ squash-slope · ‖φ(y)‖ ≤ (β−α)/2 · ‖φ(y)‖.
                Ok(match feature {
                    FeatureKind::Identity => LipschitzProfile {
                        a: 0.0,
                        b: half_width,
                    },
                    // ‖(y, 1)‖ ≤ 1 + ‖y‖.
                    FeatureKind::Affine => LipschitzProfile {
                        a: half_width,
                        b: half_width,
                    },
                })
            }
            ClassKind::Mlp(core) => {
                let (a, b) = mlp_profile_parts(core, self.rho, half_width);
                Ok(LipschitzProfile { a, b })
            }
        }
    }

    /// Uniform bound on the input-Lipschitz constant sup_θ Lip_x(h_θ):
    /// squash slope times the product of per-layer operator norms.
    pub fn input_lipschitz_bound(&self) -> Result<f64, DiscError> {
        let half_width = (self.range_hi - self.range_lo) / 2.0;
        match &self.kind {
            ClassKind::FiniteDictionary { .. } => Err(DiscError::NoParameterMetric),
            ClassKind::LinearFeatures { .. } => Ok(half_width * self.rho),
            ClassKind::Mlp(core) => Ok(half_width * self.rho.powi(core.layers() as i32)),
        }
    }
}

fn check_range_rho(range: (f64, f64), rho: f64) -> Result<(), DiscError> {
    let (lo, hi) = range;
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(DiscError::InvalidArchitecture(format!(
            "range [{lo}, {hi}] must be a finite interval"
        )));
    }
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(DiscError::InvalidArchitecture(format!(
            "ball radius must be finite and nonnegative, got {rho}"
        )));
    }
    Ok(())
}

/// Layerwise profile for a squashed-output mlp: sensitivity of layer l's
/// parameters is (final slope)·ρ^{layers−l}, the layer input norm is ‖y‖
/// for l = 1 and √(width) for tanh outputs, and the bias adds 1 in
/// quadrature (so √(‖input‖² + 1) ≤ input bound + 1).
fn mlp_profile_parts(core: &MlpCore, rho: f64, final_slope: f64) -> (f64, f64) {
    let layers = core.layers();
    let mut a = 0.0;
    let mut b = 0.0;
    for l in 1..=layers {
        let downstream = final_slope * rho.powi((layers - l) as i32);
        if l == 1 {
            // √(‖y‖² + 1) ≤ 1 + ‖y‖.
            a += downstream;
            b += downstream;
        } else {
            let w_in = core.widths[l - 1] as f64;
            a += downstream * (w_in + 1.0).sqrt();
        }
    }
    (a, b)
}

/// Smooth parameterized map Φ_θ from noise space to sample space: the same
/// mlp machinery with an affine (unsquashed) output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMap {
    core: MlpCore,
    rho: f64,
}

impl GeneratorMap {
    /// `widths` = [noise_dim, hidden…, output_dim].
    pub fn mlp(widths: &[usize], rho: f64) -> Result<Self, DiscError> {
        check_range_rho((0.0, 0.0), rho)?;
        Ok(GeneratorMap {
            core: MlpCore::new(widths)?,
            rho,
        })
    }

    pub fn noise_dim(&self) -> usize {
        self.core.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.core.widths.last().unwrap()
    }

    pub fn param_dim(&self) -> usize {
        self.core.param_dim()
    }

    pub fn param_ball_radius(&self) -> f64 {
        self.rho
    }

    fn check_theta(&self, theta: &[f64]) -> Result<(), DiscError> {
        if theta.len() != self.param_dim() {
            return Err(DiscError::ParamDimension {
                expected: self.param_dim(),
                got: theta.len(),
            });
        }
        let norm = l2_norm(theta);
        if norm > self.rho * (1.0 + 1e-9) + 1e-12 {
            return Err(DiscError::ParamOutsideBall { norm, rho: self.rho });
        }
        Ok(())
    }

    pub fn map(&self, theta: &[f64], zs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, DiscError> {
        self.check_theta(theta)?;
        for z in zs {
            if z.len() != self.noise_dim() {
                return Err(DiscError::InputDimension {
                    expected: self.noise_dim(),
                    got: z.len(),
                });
            }
        }
        Ok(zs
            .iter()
            .map(|z| self.core.forward(theta, z).activations.last().unwrap().clone())
            .collect())
    }

    /// Σᵢ (∂Φ_θ(zᵢ)/∂θ)ᵀ · cotangentᵢ.
    pub fn grad_theta(
        &self,
        theta: &[f64],
        zs: &[Vec<f64>],
        cotangents: &[Vec<f64>],
    ) -> Result<Vec<f64>, DiscError> {
        self.check_theta(theta)?;
        if cotangents.len() != zs.len() {
            return Err(DiscError::InputDimension {
                expected: zs.len(),
                got: cotangents.len(),
            });
        }
        let mut grad = vec![0.0; self.param_dim()];
        for (z, cot) in zs.iter().zip(cotangents.iter()) {
            if z.len() != self.noise_dim() || cot.len() != self.output_dim() {
                return Err(DiscError::InputDimension {
                    expected: self.noise_dim(),
                    got: z.len(),
                });
            }
            let tape = self.core.forward(theta, z);
            self.core.backward(theta, &tape, cot, &mut grad);
        }
        Ok(grad)
    }

    /// Parameter-Lipschitz profile of θ ↦ Φ_θ(z) in the output Euclidean
    /// norm (final slope 1 — no squash).
    pub fn lipschitz_profile(&self) -> LipschitzProfile {
        if self.rho == 0.0 {
            return LipschitzProfile { a: 0.0, b: 0.0 };
        }
        let (a, b) = mlp_profile_parts(&self.core, self.rho, 1.0);
        LipschitzProfile { a, b }
    }

    /// Affine bound on ‖Φ_θ(z)‖ over the ball: with a hidden tanh layer the
    /// final layer sees an activation of norm ≤ √width, so the bound is a
    /// constant; a purely affine map keeps the ‖z‖ term.
    pub fn output_norm_bound(&self) -> LipschitzProfile {
        let layers = self.core.layers();
        if layers >= 2 {
            let w_last_hidden = self.core.widths[layers - 1] as f64;
            LipschitzProfile {
                a: self.rho * (w_last_hidden + 1.0).sqrt(),
                b: 0.0,
            }
        } else {
            // ‖Wz + b‖ ≤ ‖(W,b)‖_F·√(‖z‖²+1) ≤ ρ(1 + ‖z‖).
            LipschitzProfile {
                a: self.rho,
                b: self.rho,
            }
        }
    }

    /// Uniform input-Lipschitz bound sup_θ Lip_z(Φ_θ).
    pub fn input_lipschitz_bound(&self) -> f64 {
        self.rho.powi(self.core.layers() as i32)
    }
}

/// Parameter-Lipschitz profile (in the joint parameter (θ_h, θ_g)) of the
/// composed class {z ↦ h_{θ_h}(Φ_{θ_g}(z))}: the discriminator part is its
/// own profile evaluated at the generator's output-norm bound, and the
/// generator part is its profile scaled by the discriminator's uniform
/// input-Lipschitz constant.
pub fn composite_profile(
    disc: &BoundedFunctionClass,
    gmap: &GeneratorMap,
) -> Result<LipschitzProfile, DiscError> {
    if disc.input_dim() != gmap.output_dim() {
        return Err(DiscError::InputDimension {
            expected: disc.input_dim(),
            got: gmap.output_dim(),
        });
    }
    let ld = disc.lipschitz_profile()?;
    let lg = gmap.lipschitz_profile();
    let out = gmap.output_norm_bound();
    let lipx = disc.input_lipschitz_bound()?;
    Ok(LipschitzProfile {
        a: ld.a + ld.b * out.a + lipx * lg.a,
        b: ld.b * out.b + lipx * lg.b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, task_rng};
    use rand::Rng;

    fn random_theta(rng: &mut impl Rng, dim: usize, rho: f64, scale: f64) -> Vec<f64> {
        let mut theta: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = l2_norm(&theta);
        if norm > 0.0 {
            let target = rho * scale;
            for t in theta.iter_mut() {
                *t *= target / norm;
            }
        }
        theta
    }

    fn random_points(rng: &mut impl Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect()
    }

    fn disc_matrix() -> Vec<BoundedFunctionClass> {
        vec![
            BoundedFunctionClass::mlp(&[1, 8, 1], 1.0, (0.0, 1.0)).unwrap(),
            BoundedFunctionClass::mlp(&[2, 8, 8, 1], 1.5, (-0.5, 0.5)).unwrap(),
            BoundedFunctionClass::linear_features(3, FeatureKind::Identity, 1.0, (0.0, 1.0))
                .unwrap(),
            BoundedFunctionClass::linear_features(2, FeatureKind::Affine, 2.0, (0.0, 0.6))
                .unwrap(),
        ]
    }

    #[test]
    fn zero_theta_mlp_hits_midpoint() {
        let class = BoundedFunctionClass::mlp(&[2, 4, 1], 1.0, (0.2, 0.8)).unwrap();
        let theta = vec![0.0; class.param_dim()];
        let out = class
            .evaluate(&theta, &[vec![0.3, -1.2], vec![5.0, 5.0]])
            .unwrap();
        for v in out {
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_identity_at_origin_hits_midpoint() {
        let class =
            BoundedFunctionClass::linear_features(1, FeatureKind::Identity, 1.0, (0.0, 1.0))
                .unwrap();
        let out = class.evaluate(&[1.0], &[vec![0.0]]).unwrap();
        assert!((out[0] - squash(0.0, 0.0, 1.0)).abs() < 1e-15);
        assert!((out[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dictionary_basics() {
        let support = vec![vec![0.0], vec![1.0]];
        let members = vec![vec![0.3, 0.3], vec![0.1, 0.9]];
        let class = BoundedFunctionClass::dictionary(support, members, (0.0, 1.0)).unwrap();
        assert!(class.contains_constant());
        assert_eq!(class.n_members(), Some(2));
        // Constant member via index θ.
        let out = class.evaluate(&[0.0], &[vec![1.0], vec![0.0]]).unwrap();
        assert_eq!(out, vec![0.3, 0.3]);
        // Exact member evaluation and off-support error.
        assert_eq!(
            class.evaluate_member(1, &[vec![1.0]]).unwrap(),
            vec![0.9]
        );
        assert!(matches!(
            class.evaluate_member(1, &[vec![0.5]]),
            Err(DiscError::OffSupport(_))
        ));
        // Gradient is refused.
        assert!(matches!(
            class.gradient(&[0.0], &[vec![0.0]], &[1.0]),
            Err(DiscError::NotDifferentiable)
        ));
        // Out-of-range tabulation rejected.
        assert!(BoundedFunctionClass::dictionary(
            vec![vec![0.0]],
            vec![vec![1.5]],
            (0.0, 1.0)
        )
        .is_err());
        // Non-constant dictionary.
        let nc = BoundedFunctionClass::dictionary(
            vec![vec![0.0], vec![1.0]],
            vec![vec![0.1, 0.9]],
            (0.0, 1.0),
        )
        .unwrap();
        assert!(!nc.contains_constant());
    }

    #[test]
    fn range_certification_probes() {
        let mut rng = task_rng(21, stream::VERIFY, 0);
        let classes = disc_matrix();
        for class in &classes {
            let (lo, hi) = class.range();
            for _ in 0..25_000 {
                let scale = rng.random_range(0.0..1.0);
                let theta =
                    random_theta(&mut rng, class.param_dim(), class.param_ball_radius(), scale);
                let pts = random_points(&mut rng, 1, class.input_dim());
                let out = class.evaluate(&theta, &pts).unwrap();
                assert!(out[0] >= lo && out[0] <= hi);
            }
        }
    }

    /// Central-difference oracle for ∂J/∂θ with J = Σ cotᵢ h_θ(xᵢ).
    fn fd_gradient(
        class: &BoundedFunctionClass,
        theta: &[f64],
        points: &[Vec<f64>],
        cot: &[f64],
    ) -> Vec<f64> {
        let mut grad = vec![0.0; theta.len()];
        for i in 0..theta.len() {
            let step = 1e-6 * (1.0 + theta[i].abs());
            let mut tp = theta.to_vec();
            tp[i] += step;
            let up: f64 = class
                .evaluate(&tp, points)
                .unwrap()
                .iter()
                .zip(cot)
                .map(|(h, c)| h * c)
                .sum();
            tp[i] = theta[i] - step;
            let dn: f64 = class
                .evaluate(&tp, points)
                .unwrap()
                .iter()
                .zip(cot)
                .map(|(h, c)| h * c)
                .sum();
            grad[i] = (up - dn) / (2.0 * step);
        }
        grad
    }

    #[test]
    fn gradients_match_central_differences() {
        let mut rng = task_rng(22, stream::VERIFY, 0);
        for class in &disc_matrix() {
            for _ in 0..5 {
                let theta = random_theta(&mut rng, class.param_dim(), class.param_ball_radius(), 0.8);
                let points = random_points(&mut rng, 8, class.input_dim());
                let cot: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
                let got = class.gradient(&theta, &points, &cot).unwrap();
                let want = fd_gradient(class, &theta, &points, &cot);
                let diff = got
                    .iter()
                    .zip(&want)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                let scale = l2_norm(&want).max(1e-9);
                assert!(
                    diff / scale <= 1e-5,
                    "relative gradient error {} on {:?}",
                    diff / scale,
                    class.range()
                );
            }
        }
    }

    #[test]
    fn zero_cotangent_gives_zero_gradient() {
        let class = BoundedFunctionClass::mlp(&[2, 4, 1], 1.0, (0.0, 1.0)).unwrap();
        let mut rng = task_rng(23, stream::VERIFY, 0);
        let theta = random_theta(&mut rng, class.param_dim(), 1.0, 0.5);
        let pts = random_points(&mut rng, 4, 2);
        let grad = class.gradient(&theta, &pts, &[0.0; 4]).unwrap();
        assert!(grad.iter().all(|g| *g == 0.0));
    }

    #[test]
    fn input_gradients_match_central_differences() {
        let mut rng = task_rng(24, stream::VERIFY, 0);
        let class = BoundedFunctionClass::mlp(&[2, 6, 1], 1.2, (0.0, 1.0)).unwrap();
        let theta = random_theta(&mut rng, class.param_dim(), 1.2, 0.7);
        let points = random_points(&mut rng, 6, 2);
        let got = class.input_gradient(&theta, &points).unwrap();
        for (p, g) in points.iter().zip(&got) {
            for d in 0..2 {
                let step = 1e-6 * (1.0 + p[d].abs());
                let mut pp = p.clone();
                pp[d] += step;
                let up = class.evaluate(&theta, &[pp.clone()]).unwrap()[0];
                pp[d] = p[d] - step;
                let dn = class.evaluate(&theta, &[pp]).unwrap()[0];
                let fd = (up - dn) / (2.0 * step);
                assert!(
                    (g[d] - fd).abs() <= 1e-5 * (1.0 + fd.abs()),
                    "input grad mismatch {} vs {}",
                    g[d],
                    fd
                );
            }
        }
    }

    #[test]
    fn generator_map_gradients_match_fd() {
        let mut rng = task_rng(25, stream::VERIFY, 0);
        for widths in [vec![2usize, 8, 2], vec![1, 4, 4, 1]] {
            let gmap = GeneratorMap::mlp(&widths, 1.0).unwrap();
            let theta = random_theta(&mut rng, gmap.param_dim(), 1.0, 0.8);
            let zs = random_points(&mut rng, 5, gmap.noise_dim());
            let cots: Vec<Vec<f64>> = (0..5)
                .map(|_| (0..gmap.output_dim()).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let got = gmap.grad_theta(&theta, &zs, &cots).unwrap();
            let mut want = vec![0.0; theta.len()];
            for i in 0..theta.len() {
                let step = 1e-6 * (1.0 + theta[i].abs());
                let eval = |t: &[f64]| -> f64 {
                    gmap.map(t, &zs)
                        .unwrap()
                        .iter()
                        .zip(&cots)
                        .map(|(y, c)| y.iter().zip(c).map(|(a, b)| a * b).sum::<f64>())
                        .sum()
                };
                let mut tp = theta.clone();
                tp[i] += step;
                let up = eval(&tp);
                tp[i] = theta[i] - step;
                let dn = eval(&tp);
                want[i] = (up - dn) / (2.0 * step);
            }
            let diff = got
                .iter()
                .zip(&want)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!(diff / l2_norm(&want).max(1e-9) <= 1e-5);
        }
    }

    #[test]
    fn lipschitz_profiles_dominate_probes() {
        let mut rng = task_rng(26, stream::VERIFY, 0);
        let cases: Vec<BoundedFunctionClass> = vec![
            BoundedFunctionClass::mlp(&[1, 8, 1], 1.0, (0.0, 1.0)).unwrap(),
            BoundedFunctionClass::mlp(&[2, 6, 6, 1], 0.8, (0.0, 1.0)).unwrap(),
            BoundedFunctionClass::linear_features(2, FeatureKind::Affine, 1.5, (0.0, 1.0))
                .unwrap(),
        ];
        for class in &cases {
            let profile = class.lipschitz_profile().unwrap();
            for _ in 0..20 {
                let y = random_points(&mut rng, 1, class.input_dim()).pop().unwrap();
                let cap = profile.at(&y);
                for _ in 0..50 {
                    let s1 = rng.random_range(0.0..1.0);
                    let s2 = rng.random_range(0.0..1.0);
                    let t1 =
                        random_theta(&mut rng, class.param_dim(), class.param_ball_radius(), s1);
                    let t2 =
                        random_theta(&mut rng, class.param_dim(), class.param_ball_radius(), s2);
                    let d: f64 = t1
                        .iter()
                        .zip(&t2)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    if d < 1e-12 {
                        continue;
                    }
                    let h1 = class.evaluate(&t1, &[y.clone()]).unwrap()[0];
                    let h2 = class.evaluate(&t2, &[y.clone()]).unwrap()[0];
                    assert!(
                        (h1 - h2).abs() / d <= cap + 1e-9,
                        "observed slope {} exceeds profile {}",
                        (h1 - h2).abs() / d,
                        cap
                    );
                }
            }
        }
    }

    #[test]
    fn zero_radius_profile_is_zero() {
        let class = BoundedFunctionClass::mlp(&[1, 16, 16, 1], 0.0, (0.0, 1.0)).unwrap();
        let p = class.lipschitz_profile().unwrap();
        assert_eq!((p.a, p.b), (0.0, 0.0));
        let g = GeneratorMap::mlp(&[2, 8, 1], 0.0).unwrap();
        let p = g.lipschitz_profile();
        assert_eq!((p.a, p.b), (0.0, 0.0));
    }

    #[test]
    fn generator_output_norm_bound_holds() {
        let mut rng = task_rng(27, stream::VERIFY, 0);
        let gmap = GeneratorMap::mlp(&[2, 8, 2], 1.5).unwrap();
        let bound = gmap.output_norm_bound();
        for _ in 0..2000 {
            let scale = rng.random_range(0.0..1.0);
            let theta = random_theta(&mut rng, gmap.param_dim(), 1.5, scale);
            let z = random_points(&mut rng, 1, 2);
            let y = gmap.map(&theta, &z).unwrap();
            assert!(l2_norm(&y[0]) <= bound.at(&z[0]) + 1e-9);
        }
    }

    #[test]
    fn composite_profile_dominates_joint_probes() {
        let mut rng = task_rng(28, stream::VERIFY, 0);
        let disc = BoundedFunctionClass::mlp(&[2, 6, 1], 1.0, (0.0, 1.0)).unwrap();
        let gmap = GeneratorMap::mlp(&[1, 6, 2], 1.0).unwrap();
        let profile = composite_profile(&disc, &gmap).unwrap();
        let (kd, kg) = (disc.param_dim(), gmap.param_dim());
        for _ in 0..300 {
            let z = random_points(&mut rng, 1, 1);
            let cap = profile.at(&z[0]);
            let s1 = rng.random_range(0.0..1.0);
            let s2 = rng.random_range(0.0..1.0);
            let j1: Vec<f64> = random_theta(&mut rng, kd + kg, 1.0, s1);
            let j2: Vec<f64> = random_theta(&mut rng, kd + kg, 1.0, s2);
            // Joint ball radius 1 implies each block is inside its own ball.
            let eval = |j: &[f64]| -> f64 {
                let y = gmap.map(&j[kd..], &z).unwrap();
                disc.evaluate(&j[..kd], &y).unwrap()[0]
            };
            let d: f64 = j1
                .iter()
                .zip(&j2)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if d < 1e-12 {
                continue;
            }
            let slope = (eval(&j1) - eval(&j2)).abs() / d;
            assert!(slope <= cap + 1e-9, "slope {slope} exceeds {cap}");
        }
    }

    #[test]
    fn architecture_spec_json() {
        let text = r#"{"kind":"mlp","widths":[1,16,16,1],"rho":1.0,"range":[0.0,1.0]}"#;
        let spec: ArchitectureSpec = serde_json::from_str(text).unwrap();
        let class = BoundedFunctionClass::from_spec(&spec).unwrap();
        assert_eq!(class.param_dim(), 16 + 16 + 16 * 16 + 16 + 16 + 1);
        assert_eq!(class.range(), (0.0, 1.0));
        let round: ArchitectureSpec =
            serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(round, spec);

        let lin = r#"{"kind":"linear-features","feature":"affine","input_dim":2,"rho":0.5,"range":[0.0,1.0]}"#;
        let spec: ArchitectureSpec = serde_json::from_str(lin).unwrap();
        assert!(BoundedFunctionClass::from_spec(&spec).is_ok());

        let bad = r#"{"kind":"mlp","widths":[1,1],"rho":1.0,"range":[0.0,1.0],"extra":3}"#;
        assert!(serde_json::from_str::<ArchitectureSpec>(bad).is_err());
    }

    #[test]
    fn error_paths() {
        let class = BoundedFunctionClass::mlp(&[2, 4, 1], 1.0, (0.0, 1.0)).unwrap();
        let too_big = vec![1.0; class.param_dim()];
        assert!(matches!(
            class.evaluate(&too_big, &[vec![0.0, 0.0]]),
            Err(DiscError::ParamOutsideBall { .. })
        ));
        assert!(matches!(
            class.evaluate(&[0.0], &[vec![0.0, 0.0]]),
            Err(DiscError::ParamDimension { .. })
        ));
        let theta = vec![0.0; class.param_dim()];
        assert!(matches!(
            class.evaluate(&theta, &[vec![0.0]]),
            Err(DiscError::InputDimension { .. })
        ));
        assert!(BoundedFunctionClass::mlp(&[2, 4, 2], 1.0, (0.0, 1.0)).is_err());
        assert!(BoundedFunctionClass::mlp(&[2], 1.0, (0.0, 1.0)).is_err());
        assert!(BoundedFunctionClass::mlp(&[2, 4, 1], -1.0, (0.0, 1.0)).is_err());
        assert!(BoundedFunctionClass::mlp(&[2, 4, 1], 1.0, (1.0, 0.0)).is_err());
    }

    #[test]
    fn projection_behaviour() {
        let mut v = vec![3.0, 4.0];
        project_to_ball(&mut v, 1.0);
        assert!((l2_norm(&v) - 1.0).abs() < 1e-12);
        assert!((v[0] - 0.6).abs() < 1e-12);
        let mut w = vec![0.1, 0.1];
        project_to_ball(&mut w, 1.0);
        assert_eq!(w, vec![0.1, 0.1]);
    }
}
