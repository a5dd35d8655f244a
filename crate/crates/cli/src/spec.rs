//! Config-file schemas and the inline-flag mirror of the class spec.
//!
//! Every JSON config is validated on load with unknown fields rejected, so
//! a typo'd key is a loud exit-1 instead of a silently ignored setting.

use std::path::Path;

use clap::Args;
use serde::{Deserialize, Serialize};

use fgamma_core::discriminators::{BoundedFunctionClass, FeatureKind, GeneratorMap};
use fgamma_core::ganlab::{Ordering, SyntheticTarget, TrainConfig};
use fgamma_core::generators::make_generator;

use crate::CliError;

/// Reads and deserializes a JSON config file.
pub fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::User(format!("read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::User(format!("config {}: {e}", path.display())))
}

/// Function-class description as it appears in JSON configs. The `mlp` and
/// `linear-features` kinds match the library's architecture spec; the
/// `dictionary` kind adds tabulated finite classes, which only make sense
/// at the CLI boundary (exact enumeration instead of ascent).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields, rename_all = "kebab-case")]
pub enum ClassSpec {
    Mlp {
        widths: Vec<usize>,
        rho: f64,
        range: [f64; 2],
    },
    LinearFeatures {
        feature: FeatureKind,
        input_dim: usize,
        rho: f64,
        range: [f64; 2],
    },
    Dictionary {
        support: Vec<Vec<f64>>,
        members: Vec<Vec<f64>>,
        range: [f64; 2],
    },
}

impl ClassSpec {
    pub fn build(&self) -> Result<BoundedFunctionClass, CliError> {
        let class = match self {
            ClassSpec::Mlp { widths, rho, range } => {
                BoundedFunctionClass::mlp(widths, *rho, (range[0], range[1]))?
            }
            ClassSpec::LinearFeatures {
                feature,
                input_dim,
                rho,
                range,
            } => BoundedFunctionClass::linear_features(
                *input_dim,
                *feature,
                *rho,
                (range[0], range[1]),
            )?,
            ClassSpec::Dictionary {
                support,
                members,
                range,
            } => BoundedFunctionClass::dictionary(
                support.clone(),
                members.clone(),
                (range[0], range[1]),
            )?,
        };
        Ok(class)
    }

    pub fn kind_str(&self) -> &'static str {
        match self {
            ClassSpec::Mlp { .. } => "mlp",
            ClassSpec::LinearFeatures { .. } => "linear-features",
            ClassSpec::Dictionary { .. } => "dictionary",
        }
    }
}

/// Inline-flag mirror of [`ClassSpec`] for the parameterized kinds
/// (dictionaries are config-file only: tabulated values don't fit flags).
#[derive(Args, Debug)]
pub struct ClassFlags {
    /// Architecture kind: mlp or linear-features
    #[arg(long)]
    pub arch: Option<String>,
    /// mlp layer widths, comma-separated (first = input dim, last must be 1)
    #[arg(long, value_delimiter = ',')]
    pub widths: Option<Vec<usize>>,
    /// linear-features feature map: identity or affine
    #[arg(long)]
    pub feature: Option<String>,
    /// linear-features input dimension
    #[arg(long)]
    pub input_dim: Option<usize>,
    /// Parameter-ball radius ρ
    #[arg(long)]
    pub rho: Option<f64>,
    /// Lower end α of the class range
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Upper end β of the class range
    #[arg(long)]
    pub beta: Option<f64>,
}

impl ClassFlags {
    pub fn to_spec(&self) -> Result<ClassSpec, CliError> {
        let need = |name: &str| CliError::User(format!("missing --{name} for the inline class"));
        let arch = self.arch.as_deref().ok_or_else(|| need("arch"))?;
        let rho = self.rho.ok_or_else(|| need("rho"))?;
        let alpha = self.alpha.ok_or_else(|| need("alpha"))?;
        let beta = self.beta.ok_or_else(|| need("beta"))?;
        let range = [alpha, beta];
        match arch {
            "mlp" => Ok(ClassSpec::Mlp {
                widths: self.widths.clone().ok_or_else(|| need("widths"))?,
                rho,
                range,
            }),
            "linear-features" => {
                let feature = match self.feature.as_deref().ok_or_else(|| need("feature"))? {
                    "identity" => FeatureKind::Identity,
                    "affine" => FeatureKind::Affine,
                    other => {
                        return Err(CliError::User(format!(
                            "unknown --feature '{other}' (expected identity or affine)"
                        )))
                    }
                };
                Ok(ClassSpec::LinearFeatures {
                    feature,
                    input_dim: self.input_dim.ok_or_else(|| need("input-dim"))?,
                    rho,
                    range,
                })
            }
            other => Err(CliError::User(format!(
                "unknown --arch '{other}' (expected mlp or linear-features)"
            ))),
        }
    }
}

/// Generator-map description: a fully-connected net from noise to samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GmapSpec {
    pub widths: Vec<usize>,
    pub rho: f64,
}

impl GmapSpec {
    pub fn build(&self) -> Result<GeneratorMap, CliError> {
        Ok(GeneratorMap::mlp(&self.widths, self.rho)?)
    }
}

fn default_inner_steps() -> usize {
    20
}
fn default_outer_steps() -> usize {
    1
}
fn default_rounds() -> usize {
    200
}
fn default_ordering() -> Ordering {
    Ordering::Forward
}
fn default_restarts() -> usize {
    1
}
fn default_heldout_restarts() -> usize {
    2
}
fn default_heldout_iters() -> usize {
    250
}

/// `fgamma gan --config` file schema.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GanFileConfig {
    /// Generator spec string: "kl", "js", or "alpha:<a>".
    pub gen: String,
    /// Discriminator class (must be parameterized, not a dictionary).
    pub disc: ClassSpec,
    /// Generator map from noise to the sample space.
    pub gmap: GmapSpec,
    /// Synthetic target to fit.
    pub target: SyntheticTarget,
    /// Data-sample size.
    pub n: usize,
    /// Generator-sample (noise) size.
    pub m: usize,
    #[serde(default = "default_inner_steps")]
    pub inner_steps: usize,
    #[serde(default = "default_outer_steps")]
    pub outer_steps: usize,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default = "default_ordering")]
    pub ordering: Ordering,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_heldout_restarts")]
    pub heldout_restarts: usize,
    #[serde(default = "default_heldout_iters")]
    pub heldout_iters: usize,
}

impl GanFileConfig {
    pub fn into_train_config(self) -> Result<(TrainConfig, SyntheticTarget), CliError> {
        let cfg = TrainConfig {
            gen: make_generator(&self.gen)?,
            disc: self.disc.build()?,
            gmap: self.gmap.build()?,
            n: self.n,
            m: self.m,
            inner_steps: self.inner_steps,
            outer_steps: self.outer_steps,
            rounds: self.rounds,
            seed: self.seed,
            ordering: self.ordering,
            restarts: self.restarts,
            heldout_restarts: self.heldout_restarts,
            heldout_iters: self.heldout_iters,
        };
        Ok((cfg, self.target))
    }
}

/// `fgamma gan sweep --config` file schema.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFileConfig {
    /// Training template; its `n`, `m`, and `seed` are overridden per
    /// replication.
    pub template: GanFileConfig,
    /// Data-sample sizes to sweep (m = 10n per row).
    pub ns: Vec<usize>,
    /// Independent trainings per sample size (≥ 3).
    pub reps: usize,
    /// Sweep-level seed all replication seeds derive from.
    #[serde(default)]
    pub seed: u64,
}

fn default_est_restarts() -> usize {
    5
}
fn default_est_iters() -> usize {
    400
}
fn default_est_init_scale() -> f64 {
    0.1
}

/// `fgamma estimate --config` file schema.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateFileConfig {
    /// Generator spec string: "kl", "js", or "alpha:<a>".
    pub gen: String,
    /// Discriminator class.
    pub class: ClassSpec,
    #[serde(default = "default_est_restarts")]
    pub restarts: usize,
    #[serde(default = "default_est_iters")]
    pub iters: usize,
    #[serde(default = "default_est_init_scale")]
    pub init_scale: f64,
    #[serde(default)]
    pub seed: u64,
}
