//! Quantum states on n qubits, either as pure amplitude vectors or as
//! density matrices.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{CoreError, Result};
use crate::qcore::matrix::{hermitian_eig, ComplexMatrix};

const NORM_TOL: f64 = 1e-10;

/// Internal representation of a state.
#[derive(Clone, Debug, PartialEq)]
pub enum StateRepr {
    /// 2^n complex amplitudes with unit norm.
    Pure(Vec<Complex64>),
    /// 2^n x 2^n Hermitian, unit-trace, positive-semidefinite matrix.
    Density(ComplexMatrix),
}

/// A state of `n_qubits` spins, the central simulation object.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    n_qubits: usize,
    repr: StateRepr,
}

impl QuantumState {
    /// Pure state from explicit amplitudes; the squared-amplitude sum
    /// must already be 1 within 1e-10.
    pub fn pure(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1 << n_qubits {
            return Err(CoreError::DimensionMismatch(format!(
                "{} qubits need {} amplitudes, got {}",
                n_qubits,
                1usize << n_qubits,
                amplitudes.len()
            )));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(CoreError::InvalidState(format!(
                "squared-amplitude sum {norm_sq} is not 1"
            )));
        }
        Ok(Self { n_qubits, repr: StateRepr::Pure(amplitudes) })
    }

    /// Computational basis state `|index>`.
    pub fn basis_state(n_qubits: usize, index: usize) -> Self {
        let dim = 1usize << n_qubits;
        assert!(index < dim, "basis index {index} out of range for {n_qubits} qubits");
        let mut amps = vec![Complex64::ZERO; dim];
        amps[index] = Complex64::ONE;
        Self { n_qubits, repr: StateRepr::Pure(amps) }
    }

    /// The default initial probe `|0...0>`.
    pub fn zero_state(n_qubits: usize) -> Self {
        Self::basis_state(n_qubits, 0)
    }

    /// Density-matrix state; validates hermiticity, trace and positivity.
    pub fn from_density(n_qubits: usize, rho: ComplexMatrix) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if rho.rows() != dim || rho.cols() != dim {
            return Err(CoreError::DimensionMismatch(format!(
                "density matrix for {n_qubits} qubits must be {dim}x{dim}, got {}x{}",
                rho.rows(),
                rho.cols()
            )));
        }
        let dev = rho.hermiticity_deviation();
        if dev > NORM_TOL {
            return Err(CoreError::InvalidState(format!(
                "density matrix hermiticity deviation {dev:.3e}"
            )));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(CoreError::InvalidState(format!("density matrix trace {tr} is not 1")));
        }
        let eig = hermitian_eig(&rho)?;
        if let Some(&lambda) = eig.eigenvalues.first() {
            if lambda < -NORM_TOL {
                return Err(CoreError::InvalidState(format!(
                    "density matrix has negative eigenvalue {lambda:.3e}"
                )));
            }
        }
        Ok(Self { n_qubits, repr: StateRepr::Density(rho) })
    }

    /// Density-matrix state for callers that guarantee validity by
    /// construction (convex mixtures of valid states, coherence damping).
    /// Skips the eigenvalue check, which would dominate hot loops.
    pub(crate) fn from_density_unchecked(n_qubits: usize, rho: ComplexMatrix) -> Self {
        debug_assert_eq!(rho.rows(), 1 << n_qubits);
        debug_assert!(rho.hermiticity_deviation() <= 1e-8);
        Self { n_qubits, repr: StateRepr::Density(rho) }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Hilbert-space dimension 2^n.
    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.repr, StateRepr::Pure(_))
    }

    pub fn repr(&self) -> &StateRepr {
        &self.repr
    }

    /// Amplitudes when stored as a pure vector.
    pub fn amplitudes(&self) -> Option<&[Complex64]> {
        match &self.repr {
            StateRepr::Pure(a) => Some(a),
            StateRepr::Density(_) => None,
        }
    }

    /// The density matrix of the state (built as `|psi><psi|` for pure
    /// vectors).
    pub fn density_matrix(&self) -> ComplexMatrix {
        match &self.repr {
            StateRepr::Pure(a) => {
                ComplexMatrix::from_fn(a.len(), a.len(), |i, j| a[i] * a[j].conj())
            }
            StateRepr::Density(rho) => rho.clone(),
        }
    }

    /// Applies a unitary: `|psi> -> U|psi>` or `rho -> U rho U^dagger`.
    pub fn apply_unitary(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.rows() != self.dim() || u.cols() != self.dim() {
            return Err(CoreError::DimensionMismatch(format!(
                "unitary is {}x{}, state dimension is {}",
                u.rows(),
                u.cols(),
                self.dim()
            )));
        }
        let repr = match &self.repr {
            StateRepr::Pure(a) => StateRepr::Pure(u.apply(a)?),
            StateRepr::Density(rho) => {
                StateRepr::Density(u.matmul(rho)?.matmul(&u.adjoint())?)
            }
        };
        Ok(Self { n_qubits: self.n_qubits, repr })
    }

    /// Purity `Tr(rho^2)`; exactly 1 for pure vectors.
    pub fn purity(&self) -> f64 {
        match &self.repr {
            StateRepr::Pure(_) => 1.0,
            // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
            StateRepr::Density(rho) => rho.entries().iter().map(|z| z.norm_sqr()).sum(),
        }
    }

    /// Haar-random pure state (normalized complex Gaussian amplitudes).
    pub fn random_pure<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Self {
        let dim = 1usize << n_qubits;
        let mut amps: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        Self { n_qubits, repr: StateRepr::Pure(amps) }
    }

    /// Random full-rank density matrix (a mixture of random pure states).
    pub fn random_density<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Self {
        let dim = 1usize << n_qubits;
        let mut weights: Vec<f64> = (0..dim).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let mut rho = ComplexMatrix::zeros(dim, dim);
        for &w in &weights {
            rho.accumulate(&Self::random_pure(n_qubits, rng).density_matrix(), w);
        }
        Self { n_qubits, repr: StateRepr::Density(rho) }
    }
}

/// Overlap modulus `|<a|b>|` between two pure states.
///
/// Global-phase invariant by construction; both arguments must be pure
/// and of equal dimension.
pub fn fidelity_pure(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    if a.n_qubits() != b.n_qubits() {
        return Err(CoreError::DimensionMismatch(format!(
            "fidelity between {} and {} qubit states",
            a.n_qubits(),
            b.n_qubits()
        )));
    }
    let (va, vb) = match (a.amplitudes(), b.amplitudes()) {
        (Some(va), Some(vb)) => (va, vb),
        _ => return Err(CoreError::InvalidState("fidelity_pure needs pure states".into())),
    };
    let inner: Complex64 = va.iter().zip(vb).map(|(x, y)| x.conj() * y).sum();
    Ok(inner.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plus_state() -> QuantumState {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        QuantumState::pure(1, vec![c(a, 0.0), c(a, 0.0)]).unwrap()
    }

    #[test]
    fn pure_state_purity_is_exactly_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=3 {
            assert_eq!(QuantumState::random_pure(n, &mut rng).purity(), 1.0);
        }
    }

    #[test]
    fn maximally_mixed_single_qubit_purity() {
        let rho = ComplexMatrix::diagonal(&[0.5, 0.5]);
        let s = QuantumState::from_density(1, rho).unwrap();
        assert_abs_diff_eq!(s.purity(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn diagonal_density_purity() {
        let rho = ComplexMatrix::diagonal(&[0.75, 0.25]);
        let s = QuantumState::from_density(1, rho).unwrap();
        assert_abs_diff_eq!(s.purity(), 0.625, epsilon = 1e-12);
    }

    #[test]
    fn pure_rejects_unnormalized() {
        assert!(QuantumState::pure(1, vec![c(1.0, 0.0), c(0.5, 0.0)]).is_err());
    }

    #[test]
    fn density_rejects_negative_eigenvalue() {
        let rho = ComplexMatrix::diagonal(&[1.5, -0.5]);
        assert!(QuantumState::from_density(1, rho).is_err());
    }

    #[test]
    fn density_rejects_wrong_trace() {
        let rho = ComplexMatrix::diagonal(&[0.7, 0.7]);
        assert!(QuantumState::from_density(1, rho).is_err());
    }

    #[test]
    fn fidelity_self_and_orthogonal() {
        let zero = QuantumState::basis_state(1, 0);
        let one = QuantumState::basis_state(1, 1);
        assert_abs_diff_eq!(fidelity_pure(&zero, &zero).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity_pure(&zero, &one).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_zero_with_plus() {
        let f = fidelity_pure(&QuantumState::basis_state(1, 0), &plus_state()).unwrap();
        assert_abs_diff_eq!(f, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-10);
    }

    #[test]
    fn fidelity_rejects_dimension_mismatch() {
        let a = QuantumState::basis_state(1, 0);
        let b = QuantumState::basis_state(2, 0);
        assert!(fidelity_pure(&a, &b).is_err());
    }

    #[test]
    fn fidelity_phase_invariant_and_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = QuantumState::random_pure(2, &mut rng);
        let b = QuantumState::random_pure(2, &mut rng);
        let phase = Complex64::from_polar(1.0, 1.234);
        let a_rot = QuantumState::pure(
            2,
            a.amplitudes().unwrap().iter().map(|z| z * phase).collect(),
        )
        .unwrap();
        let f_ab = fidelity_pure(&a, &b).unwrap();
        assert_abs_diff_eq!(f_ab, fidelity_pure(&b, &a).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(f_ab, fidelity_pure(&a_rot, &b).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn density_eigenvalues_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let s = QuantumState::random_density(2, &mut rng);
            let eig = hermitian_eig(&s.density_matrix()).unwrap();
            let total: f64 = eig.eigenvalues.iter().sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn purity_bounds_for_random_densities() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 1..=3 {
            for _ in 0..20 {
                let s = QuantumState::random_density(n, &mut rng);
                let p = s.purity();
                assert!(p >= 1.0 / (1 << n) as f64 - 1e-10, "purity {p} below floor");
                assert!(p <= 1.0 + 1e-10, "purity {p} above 1");
            }
        }
    }

    #[test]
    fn purity_is_convex_under_mixing() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..20 {
            let r1 = QuantumState::random_density(2, &mut rng);
            let r2 = QuantumState::random_density(2, &mut rng);
            let lambda = rng.random_range(0.0..1.0);
            let mut mix = r1.density_matrix().scaled(c(lambda, 0.0));
            mix.accumulate(&r2.density_matrix(), 1.0 - lambda);
            let mixed = QuantumState::from_density(2, mix).unwrap();
            let bound = lambda * r1.purity() + (1.0 - lambda) * r2.purity();
            assert!(mixed.purity() <= bound + 1e-10);
        }
    }

    #[test]
    fn apply_unitary_preserves_norm() {
        use crate::qcore::matrix::expm_hermitian_generator;
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let raw = ComplexMatrix::from_fn(4, 4, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let h = raw.add(&raw.adjoint()).unwrap().scaled(c(0.5, 0.0));
        let u = expm_hermitian_generator(&h, 1.3).unwrap();
        let s = QuantumState::random_pure(2, &mut rng).apply_unitary(&u).unwrap();
        let norm_sq: f64 = s.amplitudes().unwrap().iter().map(|a| a.norm_sqr()).sum();
        assert_abs_diff_eq!(norm_sq, 1.0, epsilon = 1e-12);
    }
}
