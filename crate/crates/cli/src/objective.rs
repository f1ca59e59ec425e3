//! Builds the optimizer's objective from a run configuration.
//!
//! The optimizer searches a uniform box (its initialization range); the
//! objective clamps each proposal into that box, maps it affinely onto
//! the per-coordinate physical bounds of the control sequence, prepares
//! the probe, and returns `1 - delta_gamma` so that minimizing the
//! objective maximizes purity loss.

use anyhow::Context;

use qmetro_core::metrology::{fitness, FitnessReport, PhaseEncoding, StrataSet};
use qmetro_core::qcore::QuantumState;
use qmetro_core::spinsys::{prepare_probe, ControlSequence, SpinSystemSpec};
use qmetro_core::swapsim::{derive_seed, sampled_fitness, NoiseModel};

use crate::config::{FitnessMode, RunConfig};

/// Fitness path of an objective.
#[derive(Clone, Copy, Debug)]
enum Mode {
    Exact,
    Sampled { noise: NoiseModel, shots: u64, base_seed: u64 },
}

/// The parameter-vector-to-fitness map used by every restart.
pub struct ProbeObjective {
    spec: SpinSystemSpec,
    enc: PhaseEncoding,
    strata: StrataSet,
    mode: Mode,
    search_box: (f64, f64),
    physical_bounds: Vec<(f64, f64)>,
    initial: QuantumState,
}

impl ProbeObjective {
    /// Assembles the objective for one restart. In sampled mode the
    /// restart seed salts the per-evaluation shot-noise streams.
    pub fn from_config(config: &RunConfig, restart_seed: u64) -> anyhow::Result<Self> {
        let spec = config.system.to_spec();
        spec.validate().context("system spec")?;
        let strata = config.strata.build()?;
        let mode = match config.fitness_mode {
            FitnessMode::Exact => Mode::Exact,
            FitnessMode::Sampled => Mode::Sampled {
                noise: config.noise.to_model()?,
                shots: config.shots_per_term,
                base_seed: restart_seed,
            },
        };
        let enc = PhaseEncoding::new(spec.n_qubits, 0.0);
        let physical_bounds = spec.param_bounds();
        let initial = QuantumState::zero_state(spec.n_qubits);
        Ok(Self {
            spec,
            enc,
            strata,
            mode,
            search_box: config.optimizer.init_range,
            physical_bounds,
            initial,
        })
    }

    /// Search-space dimension (one coordinate per physical parameter).
    pub fn dimension(&self) -> usize {
        self.physical_bounds.len()
    }

    pub fn strata(&self) -> &StrataSet {
        &self.strata
    }

    pub fn encoding(&self) -> &PhaseEncoding {
        &self.enc
    }

    pub fn spec(&self) -> &SpinSystemSpec {
        &self.spec
    }

    /// Clamps a search point into the box and maps it onto the physical
    /// parameter ranges, coordinate by coordinate.
    pub fn physical_params(&self, search_point: &[f64]) -> Vec<f64> {
        let (a, b) = self.search_box;
        search_point
            .iter()
            .zip(&self.physical_bounds)
            .map(|(&u, &(lo, hi))| {
                let t = (u.clamp(a, b) - a) / (b - a);
                lo + t * (hi - lo)
            })
            .collect()
    }

    /// The probe a search point prepares.
    pub fn probe_for(&self, search_point: &[f64]) -> anyhow::Result<QuantumState> {
        let params = self.physical_params(search_point);
        let sequence = ControlSequence::from_flat(&self.spec, &params)
            .context("mapping search point to control sequence")?;
        prepare_probe(&self.spec, &sequence, &self.initial).context("preparing probe")
    }

    /// Full fitness report for a search point, through the configured
    /// fitness path.
    pub fn report_for(&self, search_point: &[f64]) -> anyhow::Result<FitnessReport> {
        let probe = self.probe_for(search_point)?;
        match self.mode {
            Mode::Exact => {
                fitness(&probe, &self.enc, &self.strata).context("exact fitness")
            }
            Mode::Sampled { noise, shots, base_seed } => {
                let seed = evaluation_seed(base_seed, search_point);
                sampled_fitness(&probe, &self.enc, &self.strata, &noise, shots, seed)
                    .context("sampled fitness")
            }
        }
    }

    /// Exact-path report for a search point regardless of the configured
    /// mode; used when logging the true state of a sampled run.
    pub fn exact_report_for(&self, search_point: &[f64]) -> anyhow::Result<FitnessReport> {
        let probe = self.probe_for(search_point)?;
        fitness(&probe, &self.enc, &self.strata).context("exact fitness")
    }

    /// Objective value `1 - delta_gamma`; evaluation problems surface as
    /// NaN, which the optimizer treats as +inf.
    pub fn value(&self, search_point: &[f64]) -> f64 {
        match self.report_for(search_point) {
            Ok(report) => 1.0 - report.delta_gamma,
            Err(err) => {
                log::warn!("objective evaluation failed: {err:#}");
                f64::NAN
            }
        }
    }

    /// A plain closure view for the optimizer.
    pub fn as_fn(&self) -> impl Fn(&[f64]) -> f64 + Sync + '_ {
        move |x: &[f64]| self.value(x)
    }
}

/// Shot-noise seed for one evaluation, derived from the restart seed and
/// the bits of the search point. Independent of evaluation order, so
/// concurrent simplex seeding cannot perturb trajectories, and re-logging
/// a point reproduces its noise exactly.
fn evaluation_seed(base_seed: u64, search_point: &[f64]) -> u64 {
    let mut acc = derive_seed(base_seed, 0x5EED);
    for &x in search_point {
        acc = derive_seed(acc, x.to_bits());
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_controls_score_one() {
        let config = presets::fig3_config(1, 1, None, "unused");
        let objective = ProbeObjective::from_config(&config, 1).unwrap();
        let v = objective.value(&[0.0; 6]);
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn quarter_rotation_matches_fine_strata_fitness() {
        // a pi/2 x-rotation probe under dx2 = 0.001 Gaussian jitter loses
        // about (1 - e^{-0.001})/2 of purity
        let mut config = presets::fig3_config(1, 1, None, "unused");
        config.strata = crate::config::StrataConfig::Gaussian { k: 1001, dx2: 0.001 };
        let objective = ProbeObjective::from_config(&config, 1).unwrap();
        // raw amplitude 500 in segment 0 = pi/2 about x; other segments idle
        let v = objective.value(&[500.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_abs_diff_eq!(v, 1.0 - 4.9975e-4, epsilon = 2e-6);
    }

    #[test]
    fn search_points_map_affinely_into_physical_box() {
        let config = presets::fig2_config(2, 3, 1, "unused");
        let objective = ProbeObjective::from_config(&config, 3).unwrap();
        let dim = objective.dimension();
        assert_eq!(dim, 4 * 5);
        // the box edges map onto the physical edges, the center onto the middle
        let lo = objective.physical_params(&vec![-1.0; dim]);
        let hi = objective.physical_params(&vec![1.0; dim]);
        let mid = objective.physical_params(&vec![0.0; dim]);
        let bounds = objective.spec().param_bounds();
        for i in 0..dim {
            assert_abs_diff_eq!(lo[i], bounds[i].0, epsilon = 1e-12);
            assert_abs_diff_eq!(hi[i], bounds[i].1, epsilon = 1e-12);
            assert_abs_diff_eq!(mid[i], (bounds[i].0 + bounds[i].1) / 2.0, epsilon = 1e-12);
        }
        // out-of-box proposals clamp to the nearest edge
        let clamped = objective.physical_params(&vec![7.0; dim]);
        assert_eq!(clamped, hi);
    }

    #[test]
    fn wrong_dimension_fails_cleanly() {
        let config = presets::fig3_config(1, 1, None, "unused");
        let objective = ProbeObjective::from_config(&config, 1).unwrap();
        assert!(objective.probe_for(&[0.0; 4]).is_err());
        assert!(objective.value(&[0.0; 4]).is_nan());
    }

    #[test]
    fn evaluation_seed_depends_on_point_not_order() {
        let a = evaluation_seed(5, &[1.0, 2.0]);
        let b = evaluation_seed(5, &[1.0, 2.0]);
        let c = evaluation_seed(5, &[2.0, 1.0]);
        let d = evaluation_seed(6, &[1.0, 2.0]);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }
}
