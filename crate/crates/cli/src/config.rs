//! Run configuration: a sectioned key-value TOML file with full defaults.
//!
//! Every command resolves its parameters from this structure; outputs embed
//! the resolved configuration and its hash so results are reproducible from
//! the artifacts alone.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use scalemix::process::RestartPolicy;
use scalemix::VolatilityMixture;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub schema_version: u32,
    pub mixture: MixtureSpec,
    pub process: ProcessSection,
    pub simulate: SimulateSection,
    pub analyze: AnalyzeSection,
    pub conditional: ConditionalSection,
    pub calibrate: CalibrateSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            mixture: MixtureSpec::default(),
            process: ProcessSection::default(),
            simulate: SimulateSection::default(),
            analyze: AnalyzeSection::default(),
            conditional: ConditionalSection::default(),
            calibrate: CalibrateSection::default(),
        }
    }
}

/// Mixture description: a fat-tailed preset or explicit components.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MixtureSpec {
    /// "student-t" or "explicit".
    pub preset: String,
    pub nu: f64,
    pub scale: f64,
    pub components: usize,
    /// Used when `preset = "explicit"`: `[[weight, sigma], ...]`.
    pub explicit: Vec<[f64; 2]>,
}

impl Default for MixtureSpec {
    fn default() -> Self {
        Self {
            preset: "student-t".into(),
            nu: 4.0,
            scale: 0.0077,
            components: 16,
            explicit: Vec::new(),
        }
    }
}

impl MixtureSpec {
    pub fn build(&self) -> Result<VolatilityMixture> {
        match self.preset.as_str() {
            "student-t" => VolatilityMixture::student_t(self.nu, self.scale, self.components)
                .context("invalid field [mixture] (student-t preset)"),
            "explicit" => {
                if self.explicit.is_empty() {
                    bail!("invalid field [mixture].explicit: no components given");
                }
                VolatilityMixture::new(self.explicit.iter().map(|c| (c[0], c[1])).collect())
                    .context("invalid field [mixture].explicit")
            }
            other => bail!("invalid field [mixture].preset: unknown preset {other:?}"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProcessSection {
    pub d_e: f64,
    pub window: usize,
    pub restart_mean: u64,
    pub policy: RestartPolicy,
}

impl Default for ProcessSection {
    fn default() -> Self {
        Self {
            d_e: 0.24,
            window: 100,
            restart_mean: 500,
            policy: RestartPolicy::FromBeginning,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub length: usize,
    pub seed: u64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            length: 26_000,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyzeSection {
    pub lags: Vec<usize>,
    pub bins: usize,
    pub span_sigmas: f64,
    pub tau_max: usize,
    pub beta_fit: [usize; 2],
    pub orders: Vec<f64>,
    /// Epoch ages for the effective-dimension table.
    pub deff_ages: Vec<f64>,
    pub deff_duration_range: [usize; 2],
}

impl Default for AnalyzeSection {
    fn default() -> Self {
        Self {
            lags: vec![1, 2, 4, 8, 16, 32],
            bins: 61,
            span_sigmas: 6.0,
            tau_max: 100,
            beta_fit: [2, 100],
            orders: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            deff_ages: vec![0.0, 1.0, 3.0, 10.0, 30.0, 100.0, 1000.0, 10_000.0],
            deff_duration_range: [1, 40],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConditionalSection {
    pub durations: Vec<f64>,
    pub r1_abs: f64,
    /// Table covers `[-r2_span, r2_span]`.
    pub r2_span: f64,
    pub points: usize,
}

impl Default for ConditionalSection {
    fn default() -> Self {
        Self {
            durations: vec![1.0, 2.0, 5.0],
            r1_abs: 0.02,
            r2_span: 0.1,
            points: 201,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrateSection {
    pub components: usize,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_step: f64,
    pub seeds_per_point: usize,
    pub seed: u64,
}

impl Default for CalibrateSection {
    fn default() -> Self {
        Self {
            components: 8,
            grid_min: 0.10,
            grid_max: 0.50,
            grid_step: 0.02,
            seeds_per_point: 4,
            seed: 1,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&std::path::Path>) -> Result<Self> {
        let cfg = match path {
            None => Self::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                let cfg: Self = toml::from_str(&text)
                    .with_context(|| format!("parsing config {}", p.display()))?;
                if cfg.schema_version != SCHEMA_VERSION {
                    bail!(
                        "invalid field schema_version: {} (this build writes {})",
                        cfg.schema_version,
                        SCHEMA_VERSION
                    );
                }
                cfg
            }
        };
        Ok(cfg)
    }

    /// Canonical serialized form of the resolved configuration.
    pub fn canonical_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Hash of the canonical form, embedded in every output.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical_toml().as_bytes());
        hex::encode(&hasher.finalize()[..16])
    }

    pub fn exponent_grid(&self) -> Vec<f64> {
        let c = &self.calibrate;
        let mut grid = Vec::new();
        let mut d = c.grid_min;
        while d <= c.grid_max + 1e-12 {
            grid.push((d * 1e9).round() / 1e9);
            d += c.grid_step;
        }
        grid
    }
}
