//! Fast self-check suite behind `qmetro validate`: randomized spot
//! checks of the simulator's structural invariants, each reduced to one
//! pass/fail line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::atomic::{AtomicUsize, Ordering};

use qmetro_core::metrology::{
    averaged_state, experiment_strata, fitness, gaussian_strata, noon_state, qfi_pure,
    PhaseEncoding,
};
use qmetro_core::nmopt::{self, OptimizerConfig};
use qmetro_core::qcore::QuantumState;
use qmetro_core::spinsys::{sequence_propagator, ControlSequence, SpinSystemSpec};
use qmetro_core::swapsim::{swap_test_exact, NoiseModel};

/// Outcome of one named check.
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        Self { name, pass, detail }
    }
}

fn check_propagator_unitarity() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let spec = SpinSystemSpec::ising_chain(2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let params: Vec<f64> =
            spec.param_bounds().iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect();
        let c = ControlSequence::from_flat(&spec, &params).unwrap();
        worst = worst.max(sequence_propagator(&spec, &c).unwrap().unitarity_defect());
    }
    CheckResult::new(
        "propagator_unitarity",
        worst < 1e-8,
        format!("worst defect {worst:.2e} over 100 draws (limit 1e-8)"),
    )
}

fn check_strata_provenance() -> CheckResult {
    let e = experiment_strata();
    let g = gaussian_strata(9, 1.0721).unwrap();
    let var_err = (e.dx2() - 1.0721).abs();
    let point_err = g
        .points()
        .iter()
        .zip(e.points())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    CheckResult::new(
        "strata_provenance",
        var_err < 1e-4 && point_err < 5e-4,
        format!("variance error {var_err:.2e}, max point error {point_err:.2e}"),
    )
}

fn check_purity_loss_bound() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let fine = gaussian_strata(1001, 1e-4).unwrap();
    let coarse = gaussian_strata(1001, 1e-2).unwrap();
    let mut violations = 0;
    let mut ceiling_breaks = 0;
    let mut gaps_fine = Vec::new();
    let mut gaps_coarse = Vec::new();
    for n in 1..=3 {
        let enc = PhaseEncoding::new(n, 0.0);
        for _ in 0..70 {
            let probe = QuantumState::random_pure(n, &mut rng);
            let fq = qfi_pure(&probe, &enc).unwrap();
            let r_fine = fitness(&probe, &enc, &fine).unwrap();
            let r_coarse = fitness(&probe, &enc, &coarse).unwrap();
            if fq < r_fine.fql - 1e-3 {
                violations += 1;
            }
            if r_fine.fql > (n * n) as f64 + 1e-6 {
                ceiling_breaks += 1;
            }
            gaps_fine.push(fq - r_fine.fql);
            gaps_coarse.push(fq - r_coarse.fql);
        }
    }
    let median = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let m_fine = median(&mut gaps_fine);
    let m_coarse = median(&mut gaps_coarse);
    CheckResult::new(
        "purity_loss_bound",
        violations == 0 && ceiling_breaks == 0 && m_fine < m_coarse,
        format!(
            "{violations} bound violations, {ceiling_breaks} ceiling breaks, \
             median gap {m_fine:.2e} (dx2=1e-4) vs {m_coarse:.2e} (dx2=1e-2)"
        ),
    )
}

fn check_averaging_contracts_purity() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let strata = experiment_strata();
    let mut worst = f64::NEG_INFINITY;
    for n in 1..=3 {
        let enc = PhaseEncoding::new(n, 0.2);
        for _ in 0..40 {
            let probe = QuantumState::random_density(n, &mut rng);
            let avg = averaged_state(&probe, &enc, &strata).unwrap();
            worst = worst.max(avg.purity() - probe.purity());
        }
    }
    CheckResult::new(
        "averaging_contracts_purity",
        worst <= 1e-12,
        format!("max purity gain {worst:.2e} (limit 1e-12)"),
    )
}

fn check_swap_circuit_identity() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let clean = NoiseModel::noiseless();
    let mut worst = 0.0f64;
    for n in 1..=2 {
        for _ in 0..25 {
            let a = QuantumState::random_density(n, &mut rng);
            let b = QuantumState::random_density(n, &mut rng);
            let circuit = swap_test_exact(&a, &b, &clean).unwrap();
            let direct =
                a.density_matrix().matmul(&b.density_matrix()).unwrap().trace().re / 2.0;
            worst = worst.max((circuit - direct).abs());
        }
    }
    CheckResult::new(
        "swap_circuit_identity",
        worst < 1e-10,
        format!("worst |circuit - trace/2| = {worst:.2e} (limit 1e-10)"),
    )
}

fn check_swap_attenuation_constancy() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let noise = NoiseModel::new(0.08, 2).unwrap();
    let expect = noise.attenuation();
    let mut worst = 0.0f64;
    for _ in 0..30 {
        let a = QuantumState::random_density(1, &mut rng);
        let b = QuantumState::random_density(1, &mut rng);
        let clean = swap_test_exact(&a, &b, &NoiseModel::noiseless()).unwrap();
        if clean.abs() > 1e-9 {
            let noisy = swap_test_exact(&a, &b, &noise).unwrap();
            worst = worst.max((noisy / clean - expect).abs());
        }
    }
    CheckResult::new(
        "swap_attenuation_constancy",
        worst < 1e-9,
        format!("max deviation from ({expect:.4}) = {worst:.2e}"),
    )
}

fn check_optimizer_accounting() -> CheckResult {
    let counter = AtomicUsize::new(0);
    let objective = |x: &[f64]| {
        counter.fetch_add(1, Ordering::Relaxed);
        x.iter().map(|v| v * v).sum::<f64>()
    };
    let config = OptimizerConfig {
        max_iterations: 200,
        init_range: (-5.0, 5.0),
        seed: 21,
        ..OptimizerConfig::default()
    };
    let result = nmopt::run(6, &config, &objective).unwrap();
    let counted = counter.load(Ordering::Relaxed);
    let mut monotone = true;
    let mut prev = result.initial_best_value;
    let mut per_step_ok = true;
    for event in &result.events {
        monotone &= event.best_value <= prev + 1e-15;
        per_step_ok &= (1..=8).contains(&event.evaluations_used);
        prev = event.best_value;
    }
    CheckResult::new(
        "optimizer_accounting",
        counted == result.total_evaluations && monotone && per_step_ok && result.best_value < 1e-4,
        format!(
            "evaluations {counted} == logged {}, monotone {monotone}, final {:.2e}",
            result.total_evaluations, result.best_value
        ),
    )
}

fn check_flatten_round_trip() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut pass = true;
    for spec in [SpinSystemSpec::single_qubit(3), SpinSystemSpec::ising_chain(3)] {
        for _ in 0..20 {
            let params: Vec<f64> =
                spec.param_bounds().iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect();
            let c = ControlSequence::from_flat(&spec, &params).unwrap();
            pass &= c.to_flat() == params;
        }
    }
    CheckResult::new("flatten_round_trip", pass, "40 random sequences".into())
}

fn check_reference_state_sensitivity() -> CheckResult {
    let mut pass = true;
    let mut detail = String::new();
    for n in 1..=5 {
        let enc = PhaseEncoding::new(n, 0.0);
        let fq = qfi_pure(&noon_state(n, 0.7), &enc).unwrap();
        pass &= (fq - (n * n) as f64).abs() < 1e-9;
        detail.push_str(&format!("N={n}:{fq:.3} "));
    }
    CheckResult::new("reference_state_sensitivity", pass, detail)
}

/// The `invariants` suite.
pub fn run_invariant_suite() -> Vec<CheckResult> {
    vec![
        check_propagator_unitarity(),
        check_strata_provenance(),
        check_purity_loss_bound(),
        check_averaging_contracts_purity(),
        check_swap_circuit_identity(),
        check_swap_attenuation_constancy(),
        check_optimizer_accounting(),
        check_flatten_round_trip(),
        check_reference_state_sensitivity(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariant_suite_passes() {
        for check in run_invariant_suite() {
            assert!(check.pass, "{} failed: {}", check.name, check.detail);
        }
    }
}
