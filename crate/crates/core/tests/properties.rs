//! Cross-module property tests: randomized invariants that tie the
//! physics modules together.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qmetro_core::metrology::{
    averaged_state, encode, fitness, gaussian_strata, qfi_pure, PhaseEncoding,
};
use qmetro_core::qcore::{fidelity_pure, kron, QuantumState};
use qmetro_core::spinsys::{
    prepare_probe, sequence_propagator, ControlSequence, SpinSystemSpec,
};
use qmetro_core::swapsim::{swap_test_exact, NoiseModel};

/// Draws a flat parameter vector inside the spec's physical box.
fn params_in_box(spec: &SpinSystemSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    use rand::Rng;
    spec.param_bounds().iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect()
}

#[test]
fn propagator_is_unitary_for_random_parameters() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let spec = SpinSystemSpec::ising_chain(2);
    for _ in 0..100 {
        let params = params_in_box(&spec, &mut rng);
        let c = ControlSequence::from_flat(&spec, &params).unwrap();
        let u = sequence_propagator(&spec, &c).unwrap();
        assert!(u.unitarity_defect() < 1e-8);
    }
}

#[test]
fn uncoupled_chain_factorizes_into_single_qubit_evolutions() {
    // with J = 0 the N-qubit propagator is the tensor product of the
    // per-qubit propagators
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut spec = SpinSystemSpec::ising_chain(3);
    spec.coupling_j = 0.0;
    for _ in 0..5 {
        let params = params_in_box(&spec, &mut rng);
        let c = ControlSequence::from_flat(&spec, &params).unwrap();
        let probe = prepare_probe(&spec, &c, &QuantumState::zero_state(3)).unwrap();

        // rebuild each qubit's evolution from the same fields
        let mut single_us = Vec::new();
        for qubit in 0..3 {
            let mut solo = SpinSystemSpec::ising_chain(1);
            solo.coupling_j = 0.0;
            solo.segments_m = spec.segments_m;
            let mut solo_params = Vec::new();
            for m in 0..spec.segments_m {
                solo_params.push(c.bx(m)[qubit]);
                solo_params.push(c.by(m)[qubit]);
                solo_params.push(c.duration(m));
            }
            let solo_c = ControlSequence::from_flat(&solo, &solo_params).unwrap();
            single_us.push(sequence_propagator(&solo, &solo_c).unwrap());
        }
        let mut product = single_us[0].clone();
        for u in &single_us[1..] {
            product = kron(&product, u).unwrap();
        }
        let factorized =
            QuantumState::zero_state(3).apply_unitary(&product).unwrap();
        let f = fidelity_pure(&probe, &factorized).unwrap();
        assert!((f - 1.0).abs() < 1e-9, "fidelity {f}");
    }
}

#[test]
fn segment_propagator_is_continuous_in_fields() {
    use qmetro_core::spinsys::segment_propagator;
    let spec = SpinSystemSpec::ising_chain(2);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let base = params_in_box(&spec, &mut rng);
    let c0 = ControlSequence::from_flat(&spec, &base).unwrap();
    let u0 = segment_propagator(&spec, &c0, 0).unwrap();
    let eps = 1e-6;
    let mut bumped = base.clone();
    bumped[0] += eps;
    let c1 = ControlSequence::from_flat(&spec, &bumped).unwrap();
    let u1 = segment_propagator(&spec, &c1, 0).unwrap();
    let delta = u0.distance(&u1).unwrap();
    // a field bump of eps changes the generator norm by about
    // 2*pi*eps*||I_x||, so the unitary moves by O(eps * duration)
    let generator_scale = std::f64::consts::TAU * (1.0 + 4.0 * 2.0);
    assert!(delta < 10.0 * generator_scale * 0.5 * eps, "distance {delta}");
    assert!(delta > 0.0);
}

#[test]
fn purity_loss_bound_respects_fisher_information() {
    // qfi >= fql - 1e-3 for random probes at small ensemble variance,
    // and the gap tightens as the variance shrinks
    let mut rng = ChaCha8Rng::seed_from_u64(555);
    for n in 1..=3 {
        let enc = PhaseEncoding::new(n, 0.0);
        let fine = gaussian_strata(1001, 1e-4).unwrap();
        let mid = gaussian_strata(1001, 1e-3).unwrap();
        let coarse = gaussian_strata(1001, 1e-2).unwrap();
        for _ in 0..60 {
            let probe = QuantumState::random_pure(n, &mut rng);
            let fq = qfi_pure(&probe, &enc).unwrap();
            let gap = |strata| {
                let r = fitness(&probe, &enc, strata).unwrap();
                fq - r.fql
            };
            let (g_fine, g_mid, g_coarse) = (gap(&fine), gap(&mid), gap(&coarse));
            assert!(g_fine > -1e-3, "bound violated: gap {g_fine}");
            assert!(
                g_fine <= g_mid + 1e-12 && g_mid <= g_coarse + 1e-12,
                "gap not monotone: {g_fine} {g_mid} {g_coarse}"
            );
            // Heisenberg ceiling at the bound level
            let r = fitness(&probe, &enc, &fine).unwrap();
            assert!(r.fql <= (n * n) as f64 + 1e-6);
        }
    }
}

#[test]
fn averaging_never_increases_purity() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let strata = qmetro_core::metrology::experiment_strata();
    for n in 1..=3 {
        let enc = PhaseEncoding::new(n, 0.4);
        for _ in 0..40 {
            let probe = if rng.random_range(0..2) == 0 {
                QuantumState::random_pure(n, &mut rng)
            } else {
                QuantumState::random_density(n, &mut rng)
            };
            let avg = averaged_state(&probe, &enc, &strata).unwrap();
            assert!(avg.purity() <= probe.purity() + 1e-12);
        }
    }
}

#[test]
fn qfi_mixed_matches_qfi_pure_on_pure_densities() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    for _ in 0..200 {
        let n = rng.random_range(1..=2);
        let enc = PhaseEncoding::new(n, 0.0);
        let probe = QuantumState::random_pure(n, &mut rng);
        let dense = QuantumState::from_density(n, probe.density_matrix()).unwrap();
        let a = qfi_pure(&probe, &enc).unwrap();
        let b = qmetro_core::metrology::qfi_mixed(&dense, &enc).unwrap();
        assert!((a - b).abs() < 1e-8, "pure {a} vs mixed {b}");
    }
}

#[test]
fn encoded_purity_is_conserved() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let enc = PhaseEncoding::new(2, 0.0);
    for _ in 0..20 {
        let probe = QuantumState::random_density(2, &mut rng);
        let out = encode(&probe, &enc, 0.37).unwrap();
        assert!((out.purity() - probe.purity()).abs() < 1e-12);
    }
}

#[test]
fn noisy_swap_ranking_matches_noiseless_ranking() {
    // multiplicative attenuation cannot reorder candidates
    let mut rng = ChaCha8Rng::seed_from_u64(131);
    let noise = NoiseModel::new(0.2, 2).unwrap();
    for _ in 0..30 {
        let a = QuantumState::random_density(1, &mut rng);
        let b = QuantumState::random_density(1, &mut rng);
        let c = QuantumState::random_density(1, &mut rng);
        let clean_ab = swap_test_exact(&a, &b, &NoiseModel::noiseless()).unwrap();
        let clean_ac = swap_test_exact(&a, &c, &NoiseModel::noiseless()).unwrap();
        let noisy_ab = swap_test_exact(&a, &b, &noise).unwrap();
        let noisy_ac = swap_test_exact(&a, &c, &noise).unwrap();
        if (clean_ab - clean_ac).abs() > 1e-9 {
            assert_eq!(clean_ab > clean_ac, noisy_ab > noisy_ac);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn control_sequence_flat_round_trip(seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = SpinSystemSpec::ising_chain(2);
        let params = params_in_box(&spec, &mut rng);
        let c = ControlSequence::from_flat(&spec, &params).unwrap();
        prop_assert_eq!(c.to_flat(), params);
    }

    #[test]
    fn driftless_flat_round_trip(seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = SpinSystemSpec::single_qubit(3);
        let params = params_in_box(&spec, &mut rng);
        let c = ControlSequence::from_flat(&spec, &params).unwrap();
        prop_assert_eq!(c.to_flat(), params);
    }

    #[test]
    fn fidelity_is_bounded_and_symmetric(seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = QuantumState::random_pure(2, &mut rng);
        let b = QuantumState::random_pure(2, &mut rng);
        let f_ab = fidelity_pure(&a, &b).unwrap();
        let f_ba = fidelity_pure(&b, &a).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f_ab));
        prop_assert!((f_ab - f_ba).abs() < 1e-12);
    }
}
