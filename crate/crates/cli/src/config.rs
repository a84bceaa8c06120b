//! JSON configuration files. Every document carries `"schema": 1`, and
//! unknown fields are rejected.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vortexlab_core::collapse_lab::ScanConfig;
use vortexlab_core::dynamics::{IntegratorConfig, VortexSystem};
use vortexlab_core::geometry::Vec2;
use vortexlab_core::kernels::KernelSpec;

pub const SCHEMA_VERSION: u32 = 1;

/// A parsed configuration with the hash of its raw bytes.
pub struct Loaded<T> {
    pub config: T,
    pub sha256: String,
}

pub fn load<T: DeserializeOwned + Validate>(path: &Path) -> Result<Loaded<T>> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let text = std::str::from_utf8(&bytes).with_context(|| format!("{} is not UTF-8", path.display()))?;
    let versioned: Versioned<T> =
        serde_json::from_str(text).with_context(|| format!("invalid config {}", path.display()))?;
    if versioned.schema != SCHEMA_VERSION {
        bail!(
            "invalid config {}: field `schema`: unsupported version {}, expected {SCHEMA_VERSION}",
            path.display(),
            versioned.schema
        );
    }
    versioned
        .body
        .validate()
        .with_context(|| format!("invalid config {}", path.display()))?;
    Ok(Loaded {
        config: versioned.body,
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

/// Post-parse checks that serde cannot express.
pub trait Validate {
    fn validate(&self) -> Result<()>;
}

#[derive(Serialize, Deserialize)]
struct Versioned<T> {
    schema: u32,
    #[serde(flatten)]
    body: T,
}

// `deny_unknown_fields` does not combine with `flatten`, so the bodies below
// collect leftovers in `extra` and reject them during validation.
type Extra = serde_json::Map<String, serde_json::Value>;

fn reject_extra(extra: &Extra) -> Result<()> {
    if let Some(key) = extra.keys().next() {
        bail!("unknown field `{key}`");
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub intensities: Vec<f64>,
    pub positions: Vec<Vec2>,
    pub kernel: KernelSpec,
    pub final_time: f64,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    /// Integrate the relative system anchored at this 0-based index.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<usize>,
    #[serde(flatten, skip_serializing)]
    pub extra: Extra,
}

impl SimulateConfig {
    pub fn system(&self) -> Result<VortexSystem> {
        Ok(VortexSystem::new(self.intensities.clone(), self.positions.clone())?)
    }
}

impl Validate for SimulateConfig {
    fn validate(&self) -> Result<()> {
        reject_extra(&self.extra)?;
        let system = self.system()?;
        let kernel = self.kernel.build().context("field `kernel`")?;
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            bail!("field `final_time`: must be positive and finite, got {}", self.final_time);
        }
        self.integrator.validate().context("field `integrator`")?;
        if let Some(anchor) = self.anchor {
            system.relative(anchor).context("field `anchor`")?;
        }
        if vortexlab_core::kernels::RadialKernel::singular_at_zero(&kernel) {
            system.check_separated().context("field `positions`")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InvariantsConfig {
    pub intensities: Vec<f64>,
    pub positions: Vec<Vec2>,
    pub kernel: KernelSpec,
    #[serde(flatten, skip_serializing)]
    pub extra: Extra,
}

impl InvariantsConfig {
    pub fn system(&self) -> Result<VortexSystem> {
        Ok(VortexSystem::new(self.intensities.clone(), self.positions.clone())?)
    }
}

impl Validate for InvariantsConfig {
    fn validate(&self) -> Result<()> {
        reject_extra(&self.extra)?;
        let system = self.system()?;
        let kernel = self.kernel.build().context("field `kernel`")?;
        if vortexlab_core::kernels::RadialKernel::singular_at_zero(&kernel) {
            system.check_separated().context("field `positions`")?;
        }
        Ok(())
    }
}

/// Mirrors [`ScanConfig`] field for field.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanFile {
    pub s: f64,
    pub anchor: usize,
    pub intensities: Vec<f64>,
    pub rho: f64,
    pub horizon: f64,
    pub epsilons: Vec<f64>,
    pub samples_per_epsilon: usize,
    pub rng_seed: u64,
    pub integrator: IntegratorConfig,
    #[serde(flatten, skip_serializing)]
    pub extra: Extra,
}

impl ScanFile {
    pub fn scan_config(&self) -> ScanConfig {
        ScanConfig {
            s: self.s,
            anchor: self.anchor,
            intensities: self.intensities.clone(),
            rho: self.rho,
            horizon: self.horizon,
            epsilons: self.epsilons.clone(),
            samples_per_epsilon: self.samples_per_epsilon,
            rng_seed: self.rng_seed,
            integrator: self.integrator,
        }
    }
}

impl Validate for ScanFile {
    fn validate(&self) -> Result<()> {
        reject_extra(&self.extra)?;
        Ok(self.scan_config().validate()?)
    }
}

fn default_grid_points() -> usize {
    2000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelCheckConfig {
    /// Kernels without `epsilon`; each is regularized at every cutoff.
    pub kernels: Vec<KernelSpec>,
    pub epsilons: Vec<f64>,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(flatten, skip_serializing)]
    pub extra: Extra,
}

impl Validate for KernelCheckConfig {
    fn validate(&self) -> Result<()> {
        reject_extra(&self.extra)?;
        if self.kernels.is_empty() || self.epsilons.is_empty() {
            bail!("fields `kernels` and `epsilons` must be nonempty");
        }
        if self.grid_points < 2 {
            bail!("field `grid_points`: need at least 2, got {}", self.grid_points);
        }
        for (k, spec) in self.kernels.iter().enumerate() {
            if spec.epsilon.is_some() {
                bail!("field `kernels[{k}]`: cutoffs belong in `epsilons`");
            }
            for &eps in &self.epsilons {
                spec.with_epsilon(eps)
                    .build()
                    .with_context(|| format!("field `kernels[{k}]` with epsilon {eps}"))?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CollapseDemoConfig {
    pub intensities: Vec<f64>,
    pub rng_seed: u64,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(flatten, skip_serializing)]
    pub extra: Extra,
}

impl Validate for CollapseDemoConfig {
    fn validate(&self) -> Result<()> {
        reject_extra(&self.extra)?;
        if self.intensities.len() != 3 {
            bail!("field `intensities`: need exactly 3, got {}", self.intensities.len());
        }
        VortexSystem::new(self.intensities.clone(), vec![Vec2::ZERO; 3]).context("field `intensities`")?;
        self.integrator.validate().context("field `integrator`")?;
        Ok(())
    }
}

/// Writes `body` as a versioned config document.
pub fn to_document<T: Serialize>(body: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(&Versioned {
        schema: SCHEMA_VERSION,
        body,
    })?)
}
