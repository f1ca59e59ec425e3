//! Emulation of the hardware purity readout: an ancilla-controlled SWAP
//! circuit with finite shots and ancilla dephasing.
//!
//! The circuit is simulated literally on the tripartite register
//! (ancilla, copy A, copy B): prepare the ancilla in `|+>`, dephase it,
//! apply the controlled SWAP, dephase again, rotate with a Hadamard and
//! read out `<I_z>`. Noiseless, that expectation equals
//! `Tr(rho_A rho_B) / 2`; dephasing rescales it by a state-independent
//! attenuation factor, so rankings between candidates survive the noise.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{CoreError, Result};
use crate::exec;
use crate::metrology::{encode, report_from_purities, FitnessReport, PhaseEncoding, StrataSet};
use crate::qcore::matrix::ComplexMatrix;
use crate::qcore::state::QuantumState;

/// Ancilla dephasing applied during the purity readout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    /// Dephasing strength p in [0, 1).
    pub p: f64,
    /// How many times the channel acts on the ancilla per circuit; the
    /// default 2 places one application before the controlled SWAP and
    /// one before the measurement.
    pub applications: u32,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self { p: 0.0, applications: 2 }
    }

    pub fn new(p: f64, applications: u32) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(CoreError::InvalidArgument(format!(
                "dephasing strength {p} must be in [0, 1)"
            )));
        }
        Ok(Self { p, applications })
    }

    /// Factor by which the readout signal shrinks: each application of
    /// the channel `rho -> (1-p) rho + 4p I_z rho I_z` multiplies the
    /// ancilla coherence by `1 - 2p`.
    pub fn attenuation(&self) -> f64 {
        (1.0 - 2.0 * self.p).powi(self.applications as i32)
    }
}

/// Outcome statistics of a finite-shot SWAP test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwapTestResult {
    /// Sample mean of the +-1/2 ancilla outcomes.
    pub mean_iz: f64,
    pub shots: u64,
    /// Attenuation-corrected overlap estimate `2 mean_iz / attenuation`.
    pub est_overlap: f64,
    /// Sample standard deviation of the outcomes divided by sqrt(shots).
    pub std_err: f64,
}

/// Applies the dephasing channel
/// `rho -> (1-p) rho + 4p I_z^q rho I_z^q` to one qubit.
///
/// Matrix elements between computational states that differ on `qubit`
/// shrink by `1 - 2p`; all others are untouched, so diagonal states are
/// fixed points and the trace is preserved.
pub fn dephase(state: &QuantumState, p: f64, qubit: usize) -> Result<QuantumState> {
    if !(0.0..1.0).contains(&p) {
        return Err(CoreError::InvalidArgument(format!(
            "dephasing strength {p} must be in [0, 1)"
        )));
    }
    let n = state.n_qubits();
    if qubit >= n {
        return Err(CoreError::InvalidArgument(format!(
            "qubit index {qubit} out of range for {n} qubits"
        )));
    }
    let rho = state.density_matrix();
    let dim = rho.rows();
    let mask = 1usize << (n - 1 - qubit);
    let damp = 1.0 - 2.0 * p;
    let out = ComplexMatrix::from_fn(dim, dim, |d, e| {
        if (d & mask) == (e & mask) {
            rho[(d, e)]
        } else {
            rho[(d, e)] * damp
        }
    });
    Ok(QuantumState::from_density_unchecked(n, out))
}

/// Dephases the first tensor factor (the ancilla) of a composite
/// density matrix laid out as ancilla (x) rest.
fn dephase_ancilla_blocks(rho: &mut ComplexMatrix, p: f64) {
    let half = rho.rows() / 2;
    let damp = 1.0 - 2.0 * p;
    for i in 0..rho.rows() {
        for j in 0..rho.cols() {
            if (i >= half) != (j >= half) {
                rho[(i, j)] *= Complex64::new(damp, 0.0);
            }
        }
    }
}

/// Permutation index of the controlled SWAP on (ancilla, A, B): basis
/// `|c>|i>|j>` maps to itself for c = 0 and to `|1>|j>|i>` for c = 1.
fn cswap_perm(d: usize, half: usize, sub: usize) -> usize {
    if d < half {
        d
    } else {
        let rest = d - half;
        let (i, j) = (rest / sub, rest % sub);
        half + j * sub + i
    }
}

/// Exact ancilla `<I_z>` of the full SWAP-test circuit.
///
/// Builds the tripartite state `|+><+| (x) rho_a (x) rho_b`, applies
/// the noise model and the controlled SWAP, rotates the ancilla with a
/// Hadamard, and evaluates the expectation directly. Noiseless this
/// equals `Tr(rho_a rho_b) / 2`.
pub fn swap_test_exact(a: &QuantumState, b: &QuantumState, noise: &NoiseModel) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(CoreError::DimensionMismatch(format!(
            "swap test between dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    NoiseModel::new(noise.p, noise.applications)?;
    let sub = a.dim();
    let half = sub * sub;
    let dim = 2 * half;

    // |+><+| (x) rho_a (x) rho_b, with the ancilla as a 2x2 block grid
    let ra = a.density_matrix();
    let rb = b.density_matrix();
    let mut rho = ComplexMatrix::zeros(dim, dim);
    for ia in 0..sub {
        for ja in 0..sub {
            let va = ra[(ia, ja)];
            if va == Complex64::ZERO {
                continue;
            }
            for ib in 0..sub {
                for jb in 0..sub {
                    let v = va * rb[(ib, jb)] * 0.5;
                    let r = ia * sub + ib;
                    let c = ja * sub + jb;
                    rho[(r, c)] = v;
                    rho[(r, c + half)] = v;
                    rho[(r + half, c)] = v;
                    rho[(r + half, c + half)] = v;
                }
            }
        }
    }

    // channel applications: one before the controlled SWAP, the rest
    // before measurement (they commute with the controlled SWAP, so the
    // split is cosmetic)
    let before = noise.applications.min(1);
    for _ in 0..before {
        dephase_ancilla_blocks(&mut rho, noise.p);
    }

    // controlled SWAP as an index permutation: rho' = P rho P^dagger
    let permuted = ComplexMatrix::from_fn(dim, dim, |i, j| {
        rho[(cswap_perm(i, half, sub), cswap_perm(j, half, sub))]
    });
    let mut rho = permuted;

    for _ in before..noise.applications {
        dephase_ancilla_blocks(&mut rho, noise.p);
    }

    // Hadamard on the ancilla: blocks [[A,B],[C,D]] -> halved sums
    let h = ComplexMatrix::from_fn(dim, dim, |i, j| {
        let sign = if i >= half && j >= half { -1.0 } else { 1.0 };
        if i % half == j % half {
            Complex64::new(sign * std::f64::consts::FRAC_1_SQRT_2, 0.0)
        } else {
            Complex64::ZERO
        }
    });
    let rotated = h.matmul(&rho)?.matmul(&h)?;

    // <I_z> on the ancilla: +1/2 on the top block, -1/2 on the bottom
    let mut expectation = 0.0;
    for d in 0..dim {
        let z = if d < half { 0.5 } else { -0.5 };
        expectation += z * rotated[(d, d)].re;
    }
    Ok(expectation)
}

/// Finite-shot SWAP test: draws `shots` ancilla readouts of +-1/2 with
/// `P(+1/2) = 1/2 + <I_z>` and reports the attenuation-corrected
/// overlap estimate. Deterministic for a fixed seed.
///
/// Shots are drawn through a binomial counting model, which is
/// distribution-identical to simulating the shots one at a time.
pub fn swap_test_sampled(
    a: &QuantumState,
    b: &QuantumState,
    noise: &NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<SwapTestResult> {
    if shots == 0 {
        return Err(CoreError::InvalidArgument("shots must be >= 1".into()));
    }
    let iz = swap_test_exact(a, b, noise)?;
    let p_plus = (0.5 + iz).clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plus_count = Binomial::new(shots, p_plus)
        .map_err(|e| CoreError::InvalidArgument(format!("binomial sampling: {e}")))?
        .sample(&mut rng);
    Ok(result_from_counts(plus_count, shots, noise))
}

fn result_from_counts(plus_count: u64, shots: u64, noise: &NoiseModel) -> SwapTestResult {
    let p_hat = plus_count as f64 / shots as f64;
    let mean_iz = p_hat - 0.5;
    // outcomes are +-1/2, so the sample variance is p(1-p) with the
    // Bessel factor n/(n-1)
    let std_err = if shots > 1 {
        (p_hat * (1.0 - p_hat) * shots as f64 / (shots as f64 - 1.0)).sqrt()
            / (shots as f64).sqrt()
    } else {
        0.0
    };
    SwapTestResult {
        mean_iz,
        shots,
        est_overlap: 2.0 * mean_iz / noise.attenuation(),
        std_err,
    }
}

/// Purity-loss fitness estimated entirely from sampled SWAP tests.
///
/// One test estimates `Tr(rho_C^2)`; the average-state purity expands
/// into `K` diagonal and `K(K-1)/2` cross terms,
/// `(1/K^2) sum_j Tr(rho_j^2) + (2/K^2) sum_{j<k} Tr(rho_j rho_k)`,
/// each estimated by its own test with `shots_per_term` shots. Every
/// term derives its own seed from `seed` and its index, so results do
/// not depend on evaluation order and terms can run in parallel.
pub fn sampled_fitness(
    probe: &QuantumState,
    enc: &PhaseEncoding,
    strata: &StrataSet,
    noise: &NoiseModel,
    shots_per_term: u64,
    seed: u64,
) -> Result<FitnessReport> {
    if shots_per_term == 0 {
        return Err(CoreError::InvalidArgument("shots_per_term must be >= 1".into()));
    }
    let k = strata.len();
    let encoded: Vec<QuantumState> = strata
        .points()
        .iter()
        .map(|&x| encode(probe, enc, x))
        .collect::<Result<Vec<_>>>()?;

    // term 0 is the probe purity; terms 1.. are the (j, k) pairs j <= k
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(k * (k + 1) / 2);
    for j in 0..k {
        for l in j..k {
            pairs.push((j, l));
        }
    }

    let probe_est = swap_test_sampled(probe, probe, noise, shots_per_term, derive_seed(seed, 0))?;
    let pair_ests = exec::map_collect(&pairs, |&(j, l)| {
        let term_seed = derive_seed(seed, 1 + pair_index(j, l, k) as u64);
        swap_test_sampled(&encoded[j], &encoded[l], noise, shots_per_term, term_seed)
    });

    let kf = k as f64;
    let mut purity_avg = 0.0;
    for (&(j, l), est) in pairs.iter().zip(pair_ests) {
        let est = est?;
        let weight = if j == l { 1.0 / (kf * kf) } else { 2.0 / (kf * kf) };
        purity_avg += weight * est.est_overlap;
    }
    Ok(report_from_purities(probe_est.est_overlap, purity_avg, strata.dx2()))
}

/// Flat index of the pair (j, l) with j <= l < k.
fn pair_index(j: usize, l: usize, k: usize) -> usize {
    j * k - j * (j + 1) / 2 + l
}

/// Order-independent per-term seed stream (SplitMix64 over the base
/// seed and term index).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Number of measurement repetitions needed to resolve purity-loss gaps
/// of size `delta` under dephasing strength `p`:
/// `ceil(4 / (delta (1-p)^2))`.
pub fn repetition_budget(delta: f64, p: f64) -> Result<u64> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(CoreError::InvalidArgument(format!("gap {delta} must be > 0")));
    }
    if !(0.0..1.0).contains(&p) {
        return Err(CoreError::InvalidArgument(format!(
            "dephasing strength {p} must be in [0, 1)"
        )));
    }
    Ok((4.0 / (delta * (1.0 - p).powi(2))).ceil() as u64)
}
