//! Run configuration: the TOML surface of the harness.
//!
//! Key names mirror the run-configuration fields one-to-one; unknown
//! keys are rejected so a typo fails fast instead of silently running
//! with defaults.

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use std::path::Path;

use qmetro_core::metrology::{experiment_strata, gaussian_strata, StrataSet};
use qmetro_core::nmopt::OptimizerConfig;
use qmetro_core::spinsys::SpinSystemSpec;
use qmetro_core::swapsim::NoiseModel;

/// How candidate fitness is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitnessMode {
    /// Direct purity computation on the simulated states.
    Exact,
    /// Finite-shot SWAP-test emulation with the configured noise.
    Sampled,
}

/// Spin-system block, mirroring the simulator's system description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub n_qubits: usize,
    #[serde(rename = "coupling_J", default)]
    pub coupling_j: f64,
    #[serde(rename = "segments_M")]
    pub segments_m: usize,
    pub has_drift: bool,
    pub amplitude_bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_bounds: Option<(f64, f64)>,
    /// Fixed segment duration for drift-free systems.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment_time: Option<f64>,
    /// Rotation angle per amplitude unit per time unit (drift-free).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit_scale: Option<f64>,
}

impl SystemConfig {
    pub fn to_spec(&self) -> SpinSystemSpec {
        let defaults = SpinSystemSpec::single_qubit(self.segments_m);
        SpinSystemSpec {
            n_qubits: self.n_qubits,
            coupling_j: self.coupling_j,
            segments_m: self.segments_m,
            has_drift: self.has_drift,
            amplitude_bound: self.amplitude_bound,
            dt_bounds: self.dt_bounds,
            segment_time: self.segment_time.unwrap_or(defaults.segment_time),
            unit_scale: self.unit_scale.unwrap_or(defaults.unit_scale),
        }
    }

    pub fn from_spec(spec: &SpinSystemSpec) -> Self {
        Self {
            n_qubits: spec.n_qubits,
            coupling_j: spec.coupling_j,
            segments_m: spec.segments_m,
            has_drift: spec.has_drift,
            amplitude_bound: spec.amplitude_bound,
            dt_bounds: spec.dt_bounds,
            segment_time: (!spec.has_drift).then_some(spec.segment_time),
            unit_scale: (!spec.has_drift).then_some(spec.unit_scale),
        }
    }
}

/// Fluctuation-ensemble block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StrataConfig {
    /// The published nine-point set with variance 1.0721.
    Experiment,
    /// `k` equal-probability Gaussian strata rescaled to variance `dx2`.
    Gaussian { k: usize, dx2: f64 },
}

impl StrataConfig {
    pub fn build(&self) -> anyhow::Result<StrataSet> {
        match self {
            StrataConfig::Experiment => Ok(experiment_strata()),
            StrataConfig::Gaussian { k, dx2 } => {
                gaussian_strata(*k, *dx2).context("building Gaussian strata")
            }
        }
    }
}

/// Readout-noise block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub p: f64,
    pub applications: u32,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { p: 0.0, applications: 2 }
    }
}

impl NoiseConfig {
    pub fn to_model(self) -> anyhow::Result<NoiseModel> {
        NoiseModel::new(self.p, self.applications).context("noise model")
    }
}

/// Optimizer block, mirroring the search hyper-parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSettings {
    pub alpha: f64,
    pub gamma_exp: f64,
    pub beta: f64,
    pub delta_shrink: f64,
    pub max_iterations: usize,
    pub init_range: (f64, f64),
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stall_tolerance: Option<f64>,
    #[serde(default = "default_stall_window")]
    pub stall_window: usize,
}

fn default_stall_window() -> usize {
    10
}

impl OptimizerSettings {
    /// Optimizer configuration for one restart; restart r shifts the
    /// base seed by r so restarts explore independently but repeatably.
    pub fn to_config(&self, restart: usize) -> OptimizerConfig {
        OptimizerConfig {
            alpha: self.alpha,
            gamma_exp: self.gamma_exp,
            beta: self.beta,
            delta_shrink: self.delta_shrink,
            max_iterations: self.max_iterations,
            init_range: self.init_range,
            seed: self.seed + restart as u64,
            stall_tolerance: self.stall_tolerance,
            stall_window: self.stall_window,
        }
    }
}

/// A complete experiment description: system, fitness path, ensemble,
/// optimizer, and output destination.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub fitness_mode: FitnessMode,
    pub strata: StrataConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default = "default_shots")]
    pub shots_per_term: u64,
    pub optimizer: OptimizerSettings,
    pub restarts: usize,
    pub output_path: String,
    #[serde(default)]
    pub record_true_qfi: bool,
    #[serde(default)]
    pub record_noon_fidelity: bool,
}

fn default_shots() -> u64 {
    1
}

impl RunConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        self.system.to_spec().validate().context("system block")?;
        if self.restarts == 0 {
            bail!("restarts must be >= 1");
        }
        if self.fitness_mode == FitnessMode::Sampled {
            if self.shots_per_term == 0 {
                bail!("sampled fitness needs shots_per_term >= 1");
            }
            // the SWAP register holds an ancilla plus two probe copies
            if 2 * (1usize << self.system.n_qubits).pow(2) > qmetro_core::qcore::MAX_DIM {
                bail!(
                    "sampled fitness for {} qubits exceeds the dense register budget",
                    self.system.n_qubits
                );
            }
        }
        self.strata.build()?;
        self.noise.to_model()?;
        self.optimizer.to_config(0).validate().context("optimizer block")?;
        Ok(())
    }

    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let config: RunConfig = toml::from_str(text).context("parsing run config")?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn toml_round_trip_preserves_config() {
        let config = presets::fig3_config(7, 5, None, "runs/fig3");
        let text = config.to_toml();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let config = presets::fig3_config(7, 5, None, "runs/fig3");
        let mut text = config.to_toml();
        text.push_str("\nmystery_key = 3\n");
        let err = RunConfig::from_toml(&text).unwrap_err();
        assert!(format!("{err:#}").contains("mystery_key"), "{err:#}");
    }

    #[test]
    fn unknown_nested_keys_are_rejected() {
        let config = presets::fig3_config(7, 5, None, "runs/fig3");
        let text = config.to_toml().replace("[optimizer]", "[optimizer]\nwarp = 9");
        assert!(RunConfig::from_toml(&text).is_err());
    }

    #[test]
    fn sampled_mode_requires_shots() {
        let mut config = presets::fig3_config(7, 5, None, "runs/fig3");
        config.fitness_mode = FitnessMode::Sampled;
        config.shots_per_term = 0;
        assert!(config.validate().is_err());
        config.shots_per_term = 100;
        assert!(config.validate().is_ok());
    }

    #[test]
    fn zero_restarts_rejected() {
        let mut config = presets::fig2_config(2, 1, 5, "runs/fig2");
        config.restarts = 0;
        assert!(config.validate().is_err());
    }
}
