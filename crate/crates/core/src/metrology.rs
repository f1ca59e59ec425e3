//! Phase encoding, purity-loss fitness, quantum Fisher information, and
//! NOON-state references.
//!
//! The phase is imprinted by `U = exp(-i (phi + x) H)` with the
//! collective generator `H = sum_i I_z^i`. Averaging the encoded state
//! over a zero-mean fluctuation ensemble degrades its purity; the size
//! of that purity loss, divided by the ensemble variance, lower-bounds
//! the quantum Fisher information of the probe and is the quantity the
//! learning loop maximizes.

use num_complex::Complex64;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{CoreError, Result};
use crate::qcore::matrix::{hermitian_eig, ComplexMatrix};
use crate::qcore::state::{QuantumState, StateRepr};

/// Reports with ensemble variance above this are flagged as outside the
/// small-fluctuation regime in which the purity-loss bound is guaranteed.
pub const PROXY_REGIME_DX2: f64 = 0.1;

/// Eigenvalue-sum cutoff in the mixed-state Fisher information formula.
const QFI_EIGENVALUE_EPS: f64 = 1e-12;

/// Collective phase encoding `exp(-i phi sum_i I_z^i)` on `n_qubits`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseEncoding {
    pub n_qubits: usize,
    /// Nominal phase in radians.
    pub phi: f64,
}

impl PhaseEncoding {
    pub fn new(n_qubits: usize, phi: f64) -> Self {
        Self { n_qubits, phi }
    }

    /// Eigenvalue of `H = sum_i I_z^i` on computational basis state `d`:
    /// +1/2 per 0-bit, -1/2 per 1-bit.
    pub fn generator_eigenvalue(&self, d: usize) -> f64 {
        let ones = (d as u64).count_ones() as f64;
        (self.n_qubits as f64 - 2.0 * ones) / 2.0
    }

    /// Dense matrix of the generator, diagonal in the computational basis.
    pub fn generator_matrix(&self) -> ComplexMatrix {
        let dim = 1 << self.n_qubits;
        let diag: Vec<f64> = (0..dim).map(|d| self.generator_eigenvalue(d)).collect();
        ComplexMatrix::diagonal(&diag)
    }
}

/// A symmetric set of fluctuation offsets with uniform weights 1/K,
/// standing in for a zero-mean Gaussian phase jitter.
#[derive(Clone, Debug, PartialEq)]
pub struct StrataSet {
    points: Vec<f64>,
    dx2: f64,
}

impl StrataSet {
    /// Unchecked constructor for in-crate tests that need degenerate sets.
    #[cfg(test)]
    pub(crate) fn raw(points: Vec<f64>, dx2: f64) -> Self {
        Self { points, dx2 }
    }

    /// Builds a set from explicit points; the variance is derived with
    /// the Bessel correction, `sum x_k^2 / (K - 1)`.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(CoreError::InvalidArgument("a strata set needs at least 2 points".into()));
        }
        let dx2 =
            points.iter().map(|x| x * x).sum::<f64>() / (points.len() as f64 - 1.0);
        Ok(Self { points, dx2 })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Bessel-corrected variance of the points.
    pub fn dx2(&self) -> f64 {
        self.dx2
    }

    /// Coherence damping factor picked up by a density-matrix element
    /// whose generator eigenvalues differ by `delta` when the encoded
    /// state is averaged over this set:
    /// `(1/K) sum_k exp(-i x_k delta)`.
    pub fn damping_factor(&self, delta: f64) -> Complex64 {
        let k = self.points.len() as f64;
        self.points
            .iter()
            .map(|&x| Complex64::from_polar(1.0, -x * delta))
            .sum::<Complex64>()
            / k
    }
}

/// The nine-point fluctuation set used in the NMR runs, with derived
/// Bessel variance 1.0721.
pub fn experiment_strata() -> StrataSet {
    StrataSet::from_points(vec![
        -1.7046, -0.9757, -0.5922, -0.2832, 0.0, 0.2832, 0.5922, 0.9757, 1.7046,
    ])
    .expect("literal points")
}

/// Discretizes a zero-mean Gaussian into `k` equal-probability strata
/// and returns their conditional means, rescaled so the Bessel-corrected
/// variance equals `dx2` exactly.
///
/// `k` must be odd (so the set is symmetric around an exact 0) and at
/// least 3.
pub fn gaussian_strata(k: usize, dx2: f64) -> Result<StrataSet> {
    if k < 3 || k.is_multiple_of(2) {
        return Err(CoreError::InvalidArgument(format!("strata count {k} must be odd and >= 3")));
    }
    if dx2.is_nan() || dx2 <= 0.0 {
        return Err(CoreError::InvalidArgument(format!("variance {dx2} must be > 0")));
    }
    let normal = Normal::standard();
    let pdf = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let kf = k as f64;
    // Conditional mean of stratum j in (z_{j-1}, z_j):
    // K * (pdf(z_{j-1}) - pdf(z_j)) with z_j = Phi^{-1}(j/K).
    // Only the upper half is computed; the lower half mirrors it so the
    // set is symmetric to the last bit.
    let half = k / 2;
    let mut upper = Vec::with_capacity(half);
    for j in 0..half {
        // upper strata are numbers half+2 ..= k (1-based); stratum s sits in
        // (Phi^{-1}((s-1)/K), Phi^{-1}(s/K))
        let s = half + 2 + j;
        let z_lo = normal.inverse_cdf((s as f64 - 1.0) / kf);
        let p_hi = if s == k { 0.0 } else { pdf(normal.inverse_cdf(s as f64 / kf)) };
        upper.push(kf * (pdf(z_lo) - p_hi));
    }
    let sum_sq: f64 = 2.0 * upper.iter().map(|m| m * m).sum::<f64>();
    let scale = (dx2 * (kf - 1.0) / sum_sq).sqrt();
    let mut points = Vec::with_capacity(k);
    for m in upper.iter().rev() {
        points.push(-scale * m);
    }
    points.push(0.0);
    for m in &upper {
        points.push(scale * m);
    }
    let set = StrataSet { points, dx2 };
    debug_assert!((set.points.iter().map(|x| x * x).sum::<f64>() / (kf - 1.0) - dx2).abs() < 1e-12 * dx2.max(1.0));
    Ok(set)
}

/// Purity-loss fitness of one probe against one fluctuation ensemble.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitnessReport {
    /// `Tr(rho_C^2)` of the bare probe.
    pub purity_probe: f64,
    /// `Tr(rho_avg^2)` of the fluctuation-averaged probe.
    pub purity_avg: f64,
    /// Purity loss `purity_probe - purity_avg`.
    pub delta_gamma: f64,
    /// Fisher-information lower bound `2 delta_gamma / dx2`.
    pub fql: f64,
    /// Ensemble variance used for the bound.
    pub dx2: f64,
    /// True when `dx2 > 0.1`: the bound is only a heuristic proxy there.
    pub proxy_regime: bool,
}

/// Applies the phase encoding with offset `x`: the unitary
/// `exp(-i (phi + x) H)`, diagonal in the computational basis.
pub fn encode(state: &QuantumState, enc: &PhaseEncoding, x: f64) -> Result<QuantumState> {
    if state.n_qubits() != enc.n_qubits {
        return Err(CoreError::DimensionMismatch(format!(
            "state has {} qubits, encoding expects {}",
            state.n_qubits(),
            enc.n_qubits
        )));
    }
    let theta = enc.phi + x;
    match state.repr() {
        StateRepr::Pure(amps) => {
            let rotated: Vec<Complex64> = amps
                .iter()
                .enumerate()
                .map(|(d, a)| a * Complex64::from_polar(1.0, -theta * enc.generator_eigenvalue(d)))
                .collect();
            QuantumState::pure(enc.n_qubits, rotated)
        }
        StateRepr::Density(rho) => {
            let dim = rho.rows();
            let out = ComplexMatrix::from_fn(dim, dim, |d, e| {
                let delta = enc.generator_eigenvalue(d) - enc.generator_eigenvalue(e);
                rho[(d, e)] * Complex64::from_polar(1.0, -theta * delta)
            });
            Ok(QuantumState::from_density_unchecked(enc.n_qubits, out))
        }
    }
}

/// The ensemble average `(1/K) sum_k rho_{phi + x_k}` as a density matrix.
///
/// Because the encoding is diagonal, the average multiplies each
/// density-matrix element by the set's damping factor at the matching
/// eigenvalue gap; this equals the K-term sum exactly.
pub fn averaged_state(
    probe: &QuantumState,
    enc: &PhaseEncoding,
    strata: &StrataSet,
) -> Result<QuantumState> {
    if probe.n_qubits() != enc.n_qubits {
        return Err(CoreError::DimensionMismatch(format!(
            "probe has {} qubits, encoding expects {}",
            probe.n_qubits(),
            enc.n_qubits
        )));
    }
    let rho = probe.density_matrix();
    let dim = rho.rows();
    let n = enc.n_qubits;
    // gaps are integers in [-n, n]; precompute the damping per gap
    let kappa: Vec<Complex64> = (-(n as i64)..=n as i64)
        .map(|gap| {
            strata.damping_factor(gap as f64)
                * Complex64::from_polar(1.0, -enc.phi * gap as f64)
        })
        .collect();
    let weight = |d: usize| (d as u64).count_ones() as i64;
    let out = ComplexMatrix::from_fn(dim, dim, |d, e| {
        let gap = weight(e) - weight(d); // h_d - h_e = (ones_e - ones_d)
        rho[(d, e)] * kappa[(gap + n as i64) as usize]
    });
    Ok(QuantumState::from_density_unchecked(n, out))
}

/// Exact purity-loss fitness: `delta_gamma = Tr(rho_C^2) - Tr(rho_avg^2)`
/// and the bound `2 delta_gamma / dx2`.
pub fn fitness(
    probe: &QuantumState,
    enc: &PhaseEncoding,
    strata: &StrataSet,
) -> Result<FitnessReport> {
    if strata.dx2() <= 0.0 {
        return Err(CoreError::InvalidArgument("ensemble variance must be positive".into()));
    }
    let avg = averaged_state(probe, enc, strata)?;
    Ok(report_from_purities(probe.purity(), avg.purity(), strata.dx2()))
}

/// Assembles a [`FitnessReport`] from already-measured purities.
pub fn report_from_purities(purity_probe: f64, purity_avg: f64, dx2: f64) -> FitnessReport {
    let delta_gamma = purity_probe - purity_avg;
    FitnessReport {
        purity_probe,
        purity_avg,
        delta_gamma,
        fql: 2.0 * delta_gamma / dx2,
        dx2,
        proxy_regime: dx2 > PROXY_REGIME_DX2,
    }
}

/// Quantum Fisher information of a pure probe for the collective
/// encoding: `4 (<H^2> - <H>^2)`.
pub fn qfi_pure(probe: &QuantumState, enc: &PhaseEncoding) -> Result<f64> {
    if probe.n_qubits() != enc.n_qubits {
        return Err(CoreError::DimensionMismatch(format!(
            "probe has {} qubits, encoding expects {}",
            probe.n_qubits(),
            enc.n_qubits
        )));
    }
    let amps = probe
        .amplitudes()
        .ok_or_else(|| CoreError::InvalidState("qfi_pure needs a pure state; use qfi_mixed".into()))?;
    let mut mean = 0.0;
    let mut second = 0.0;
    for (d, a) in amps.iter().enumerate() {
        let p = a.norm_sqr();
        let h = enc.generator_eigenvalue(d);
        mean += p * h;
        second += p * h * h;
    }
    Ok(4.0 * (second - mean * mean))
}

/// Quantum Fisher information of a general state from the spectral
/// formula `2 sum_{ij} (l_i - l_j)^2 / (l_i + l_j) |<i|H|j>|^2`, with
/// pairs whose eigenvalue sum is below a small cutoff dropped.
///
/// Reduces to [`qfi_pure`] on pure states.
pub fn qfi_mixed(probe: &QuantumState, enc: &PhaseEncoding) -> Result<f64> {
    if probe.n_qubits() != enc.n_qubits {
        return Err(CoreError::DimensionMismatch(format!(
            "probe has {} qubits, encoding expects {}",
            probe.n_qubits(),
            enc.n_qubits
        )));
    }
    let rho = probe.density_matrix();
    let eig = hermitian_eig(&rho)?;
    let dim = rho.rows();
    let v = &eig.eigenvectors;
    // H in the eigenbasis: H_ij = sum_d conj(V_di) h_d V_dj
    let h_diag: Vec<f64> = (0..dim).map(|d| enc.generator_eigenvalue(d)).collect();
    let mut total = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let li = eig.eigenvalues[i].max(0.0);
            let lj = eig.eigenvalues[j].max(0.0);
            if li + lj <= QFI_EIGENVALUE_EPS {
                continue;
            }
            let mut hij = Complex64::ZERO;
            for d in 0..dim {
                hij += v[(d, i)].conj() * h_diag[d] * v[(d, j)];
            }
            total += 2.0 * (li - lj).powi(2) / (li + lj) * hij.norm_sqr();
        }
    }
    Ok(total)
}

/// The maximally phase-sensitive reference state
/// `(|0...0> + e^{i theta} |1...1>) / sqrt(2)`.
pub fn noon_state(n_qubits: usize, theta: f64) -> QuantumState {
    let dim = 1usize << n_qubits;
    let mut amps = vec![Complex64::ZERO; dim];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    amps[0] = Complex64::new(s, 0.0);
    amps[dim - 1] = Complex64::from_polar(s, theta);
    QuantumState::pure(n_qubits, amps).expect("normalized by construction")
}

/// Best overlap with the NOON family: maximizes `|<NOON(theta)|probe>|`
/// over theta.
///
/// Only the probe's amplitudes on `|0...0>` and `|1...1>` matter, which
/// gives the closed form `fidelity = (|a_0| + |a_last|) / sqrt(2)` at
/// `theta = arg(a_last) - arg(a_0)`. Returns `(best_theta, fidelity)`.
pub fn noon_fidelity(probe: &QuantumState) -> Result<(f64, f64)> {
    let amps = probe
        .amplitudes()
        .ok_or_else(|| CoreError::InvalidState("noon_fidelity needs a pure state".into()))?;
    let a0 = amps[0];
    let a1 = amps[amps.len() - 1];
    let fidelity = (a0.norm() + a1.norm()) * std::f64::consts::FRAC_1_SQRT_2;
    let best_theta = if a1.norm() < 1e-15 || a0.norm() < 1e-15 {
        0.0
    } else {
        a1.arg() - a0.arg()
    };
    Ok((best_theta, fidelity))
}
