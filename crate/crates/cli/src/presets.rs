//! Built-in run configurations.

use crate::config::{
    FitnessMode, NoiseConfig, OptimizerSettings, RunConfig, StrataConfig, SystemConfig,
};
use qmetro_core::spinsys::SpinSystemSpec;

/// Single-qubit learning run mirroring the tabletop experiment: three
/// drift-free pulse segments (six parameters, seven simplex vertices),
/// the published nine-point fluctuation set, and a 25-iteration cap.
///
/// `sampled` switches the fitness to the SWAP-test emulation with
/// `(shots_per_term, dephasing_p)`.
pub fn fig3_config(
    seed: u64,
    restarts: usize,
    sampled: Option<(u64, f64)>,
    output_path: &str,
) -> RunConfig {
    let spec = SpinSystemSpec::single_qubit(3);
    RunConfig {
        system: SystemConfig::from_spec(&spec),
        fitness_mode: if sampled.is_some() { FitnessMode::Sampled } else { FitnessMode::Exact },
        strata: StrataConfig::Experiment,
        noise: NoiseConfig { p: sampled.map_or(0.0, |(_, p)| p), applications: 2 },
        shots_per_term: sampled.map_or(1, |(shots, _)| shots),
        optimizer: OptimizerSettings {
            alpha: 1.0,
            gamma_exp: 2.0,
            beta: 0.5,
            delta_shrink: 0.5,
            max_iterations: 25,
            init_range: (-spec.amplitude_bound, spec.amplitude_bound),
            seed,
            stall_tolerance: None,
            stall_window: 10,
        },
        restarts,
        output_path: output_path.to_string(),
        record_true_qfi: true,
        record_noon_fidelity: true,
    }
}

/// Iteration budget for a spin-chain run of search dimension `d`:
/// generous enough for the simplex to settle, capped so the largest
/// chains stay desk-scale.
fn chain_iteration_budget(d: usize) -> usize {
    (300 * d).min(28_000)
}

/// Spin-chain learning run: Ising drift, M = 2N segments, exact fitness
/// over a fine Gaussian ensemble with variance 0.001.
pub fn fig2_config(n_qubits: usize, seed: u64, restarts: usize, output_path: &str) -> RunConfig {
    let spec = SpinSystemSpec::ising_chain(n_qubits);
    let d = spec.param_count();
    RunConfig {
        system: SystemConfig::from_spec(&spec),
        fitness_mode: FitnessMode::Exact,
        strata: StrataConfig::Gaussian { k: 1001, dx2: 0.001 },
        noise: NoiseConfig::default(),
        shots_per_term: 1,
        optimizer: OptimizerSettings {
            alpha: 1.0,
            gamma_exp: 2.0,
            beta: 0.5,
            delta_shrink: 0.5,
            max_iterations: chain_iteration_budget(d),
            init_range: (-1.0, 1.0),
            seed,
            stall_tolerance: Some(1e-13),
            stall_window: 300,
        },
        restarts,
        output_path: output_path.to_string(),
        record_true_qfi: true,
        record_noon_fidelity: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig3_preset_validates_with_seven_vertices() {
        let config = fig3_config(7, 5, None, "runs/fig3");
        config.validate().unwrap();
        // six parameters means a seven-vertex simplex
        assert_eq!(config.system.to_spec().param_count(), 6);
        assert_eq!(config.optimizer.max_iterations, 25);
        assert_eq!(config.optimizer.init_range, (-1000.0, 1000.0));
    }

    #[test]
    fn fig3_sampled_variant_validates() {
        let config = fig3_config(7, 5, Some((94, 0.025)), "runs/fig3");
        config.validate().unwrap();
        assert_eq!(config.fitness_mode, FitnessMode::Sampled);
        assert_eq!(config.shots_per_term, 94);
        assert_eq!(config.noise.p, 0.025);
    }

    #[test]
    fn fig2_presets_validate_across_chain_sizes() {
        for n in 1..=5 {
            let config = fig2_config(n, 1, 5, "runs/fig2");
            config.validate().unwrap();
            assert_eq!(config.system.to_spec().param_count(), 2 * n * (2 * n + 1));
        }
    }
}
