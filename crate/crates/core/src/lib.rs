//! Variational estimation of (f,Γ)-divergences with finite-sample
//! concentration certificates.
//!
//! The central object is the divergence
//!
//! ```text
//!     D_f^Γ(Q‖P) = sup_{h ∈ Γ} { E_Q[h] − Λ_f^P[h] },
//! ```
//!
//! where Γ is a class of functions bounded in [α, β] and Λ_f^P is the
//! shift-parameterized generalized cumulant generating function
//!
//! ```text
//!     Λ_f^P[h] = inf_{ν ∈ ℝ} { ν + E_P[f*(h − ν)] }.
//! ```
//!
//! Choosing f recovers classical f-divergences (KL, Jensen–Shannon, the
//! α-family); dropping the conjugate recovers integral probability metrics.
//! Everything here operates on empirical samples, so `Λ_f^P` is a convex
//! 1-D minimization over a provably compact shift bracket.
//!
//! Module map:
//!
//! | module           | contents                                                       |
//! |------------------|----------------------------------------------------------------|
//! | [`generators`]   | convex generators f, conjugates f*, derivatives, domain checks |
//! | [`cgf`]          | Λ_f on empirical vectors, perturbation constant Δ_{f,n}        |
//! | [`discriminators`]| bounded function classes, MLP autodiff, Lipschitz profiles    |
//! | [`divergence`]   | D_f^Γ estimation, exact dictionary oracles, discrete references|
//! | [`rademacher`]   | Rademacher complexity, Dudley entropy bounds, the K quantity   |
//! | [`bounds`]       | concentration-inequality assembly and inversion                |
//! | [`ganlab`]       | synthetic targets and desk-scale (f,Γ)-GAN training            |
//! | [`verify`]       | brute-force invariant suites behind the CLI `verify` command   |

pub mod bounds;
pub mod cgf;
pub mod discriminators;
pub mod divergence;
pub mod ganlab;
pub mod generators;
pub mod par;
pub mod rademacher;
pub mod rng;
pub mod verify;


pub use bounds::{BoundInputs, BoundReport, Provenance, ReportInputs, Setting};
pub use cgf::{DeltaResult, LambdaResult};
pub use discriminators::{
    ArchitectureSpec, BoundedFunctionClass, FeatureKind, GeneratorMap, LipschitzProfile,
};
pub use divergence::{AscentConfig, EstimateResult, Sample};
pub use ganlab::{ConsistencyRow, Ordering, SyntheticTarget, TargetKind, TrainConfig, TrainTrace};
pub use generators::{Compatibility, DivergenceGenerator};
pub use rademacher::{InnerSolver, RademacherEstimate};
pub use verify::{Budget, Check, SuiteReport};

