//! Spin-chain physics: qubit-local operators, the Ising drift, and the
//! piecewise-constant control propagator.
//!
//! Two system flavors are supported. Chains with an always-on
//! nearest-neighbor Ising coupling evolve under
//! `G_m = 2pi { J sum I_z I_z + sum_i (bx_i I_x^i + by_i I_y^i) }` for a
//! per-segment duration `dt[m]`, which gives `M (2N + 1)` free
//! parameters. The driftless single-qubit flavor drops the coupling and
//! the variable durations: each of the `M` segments applies
//! `exp(-i (bx I_x + by I_y) * tau)` for a fixed segment time, leaving
//! `2M` parameters.
//!
//! Qubit indices are 0-based with qubit 0 the leftmost Kronecker factor.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::error::{CoreError, Result};
use crate::qcore::matrix::{evolve_vector, hermitian_eig, kron, unitary_from_eig, ComplexMatrix};
use crate::qcore::state::QuantumState;

/// Spin axis of a local angular-momentum operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    /// The single-qubit operator `sigma_axis / 2`.
    pub fn half_pauli(self) -> ComplexMatrix {
        let z = Complex64::ZERO;
        let rows = match self {
            Axis::X => vec![
                vec![z, Complex64::new(0.5, 0.0)],
                vec![Complex64::new(0.5, 0.0), z],
            ],
            Axis::Y => vec![
                vec![z, Complex64::new(0.0, -0.5)],
                vec![Complex64::new(0.0, 0.5), z],
            ],
            Axis::Z => vec![
                vec![Complex64::new(0.5, 0.0), z],
                vec![z, Complex64::new(-0.5, 0.0)],
            ],
        };
        ComplexMatrix::from_rows(rows).expect("2x2 literal")
    }
}

/// Angular-momentum operator of one spin embedded in an n-qubit register:
/// `I (x) ... (x) sigma_axis/2 (x) ... (x) I` with the half-Pauli at
/// `qubit`.
pub fn local_operator(n_qubits: usize, qubit: usize, axis: Axis) -> Result<ComplexMatrix> {
    if qubit >= n_qubits {
        return Err(CoreError::InvalidArgument(format!(
            "qubit index {qubit} out of range for {n_qubits} qubits"
        )));
    }
    let mut op = if qubit == 0 { axis.half_pauli() } else { ComplexMatrix::identity(2) };
    for slot in 1..n_qubits {
        let factor =
            if slot == qubit { axis.half_pauli() } else { ComplexMatrix::identity(2) };
        op = kron(&op, &factor)?;
    }
    Ok(op)
}

/// Defaults for the driftless single-qubit flavor: raw amplitudes in
/// [-1000, 1000], three 10-unit segments, and a unit scale that maps the
/// full raw range onto rotation angles of [-pi, pi] per segment.
pub const SINGLE_QUBIT_AMPLITUDE_BOUND: f64 = 1000.0;
pub const SINGLE_QUBIT_SEGMENT_TIME: f64 = 10.0;
pub const SINGLE_QUBIT_UNIT_SCALE: f64 = PI * 1e-4;

/// Static description of the controllable spin system.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinSystemSpec {
    /// Number of spins N >= 1.
    pub n_qubits: usize,
    /// Ising coupling strength J (cycles per unit time); ignored without drift.
    pub coupling_j: f64,
    /// Number of piecewise-constant control segments M >= 1.
    pub segments_m: usize,
    /// Whether the always-on Ising drift and variable durations are present.
    pub has_drift: bool,
    /// Symmetric bound on every field amplitude.
    pub amplitude_bound: f64,
    /// (min, max) segment duration; required exactly when `has_drift`.
    pub dt_bounds: Option<(f64, f64)>,
    /// Fixed segment duration tau for the driftless flavor.
    pub segment_time: f64,
    /// Rotation angle per unit amplitude per unit time in the driftless
    /// flavor (raw amplitudes are dimensionless knob values).
    pub unit_scale: f64,
}

impl SpinSystemSpec {
    /// Driftless single-qubit system with `segments` pulse segments.
    pub fn single_qubit(segments: usize) -> Self {
        Self {
            n_qubits: 1,
            coupling_j: 0.0,
            segments_m: segments,
            has_drift: false,
            amplitude_bound: SINGLE_QUBIT_AMPLITUDE_BOUND,
            dt_bounds: None,
            segment_time: SINGLE_QUBIT_SEGMENT_TIME,
            unit_scale: SINGLE_QUBIT_UNIT_SCALE,
        }
    }

    /// Ising chain of `n_qubits` spins with the default control budget:
    /// J = 1 (time in 1/J), M = 2N segments, durations in [0.01, 0.5]/J,
    /// field amplitudes bounded by 4J.
    pub fn ising_chain(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            coupling_j: 1.0,
            segments_m: 2 * n_qubits,
            has_drift: true,
            amplitude_bound: 4.0,
            dt_bounds: Some((0.01, 0.5)),
            segment_time: 0.0,
            unit_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(CoreError::InvalidArgument("n_qubits must be >= 1".into()));
        }
        if self.segments_m == 0 {
            return Err(CoreError::InvalidArgument("segments_m must be >= 1".into()));
        }
        if self.amplitude_bound.is_nan() || self.amplitude_bound <= 0.0 {
            return Err(CoreError::InvalidArgument("amplitude_bound must be > 0".into()));
        }
        if self.has_drift {
            match self.dt_bounds {
                Some((lo, hi)) if lo > 0.0 && hi >= lo => {}
                _ => {
                    return Err(CoreError::InvalidArgument(
                        "drift systems need dt_bounds with 0 < min <= max".into(),
                    ))
                }
            }
        } else {
            if self.n_qubits != 1 {
                return Err(CoreError::InvalidArgument(
                    "the driftless flavor is single-qubit".into(),
                ));
            }
            if self.segment_time.is_nan()
                || self.segment_time <= 0.0
                || self.unit_scale.is_nan()
                || self.unit_scale <= 0.0
            {
                return Err(CoreError::InvalidArgument(
                    "driftless systems need positive segment_time and unit_scale".into(),
                ));
            }
        }
        Ok(())
    }

    /// Hilbert-space dimension 2^N.
    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Number of flat parameters: `M (2N + 1)` with drift, `2M` without.
    pub fn param_count(&self) -> usize {
        if self.has_drift {
            self.segments_m * (2 * self.n_qubits + 1)
        } else {
            2 * self.segments_m
        }
    }

    /// Per-coordinate physical box in flat-parameter order.
    pub fn param_bounds(&self) -> Vec<(f64, f64)> {
        let b = self.amplitude_bound;
        let mut out = Vec::with_capacity(self.param_count());
        for _ in 0..self.segments_m {
            for _ in 0..2 * self.n_qubits {
                out.push((-b, b));
            }
            if self.has_drift {
                out.push(self.dt_bounds.expect("validated"));
            }
        }
        out
    }
}

/// One candidate control sequence: per-segment x/y field amplitudes for
/// every qubit, plus per-segment durations when the drift is present.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSequence {
    spec: SpinSystemSpec,
    /// bx[m][i]: x-field on qubit i during segment m.
    bx: Vec<Vec<f64>>,
    /// by[m][i]: y-field on qubit i during segment m.
    by: Vec<Vec<f64>>,
    /// dt[m]: segment durations; empty without drift.
    dt: Vec<f64>,
}

impl ControlSequence {
    /// Rebuilds a sequence from its flat parameter vector.
    ///
    /// Flat order is segment-major: `bx[m][0..N], by[m][0..N], dt[m]`
    /// for m = 0..M (the duration slot only with drift). Values must lie
    /// inside the spec's bounds.
    pub fn from_flat(spec: &SpinSystemSpec, params: &[f64]) -> Result<Self> {
        spec.validate()?;
        if params.len() != spec.param_count() {
            return Err(CoreError::DimensionMismatch(format!(
                "expected {} parameters, got {}",
                spec.param_count(),
                params.len()
            )));
        }
        let n = spec.n_qubits;
        let tol = 1e-9;
        let mut bx = Vec::with_capacity(spec.segments_m);
        let mut by = Vec::with_capacity(spec.segments_m);
        let mut dt = Vec::new();
        let mut it = params.iter().copied();
        for _ in 0..spec.segments_m {
            let seg_bx: Vec<f64> = (&mut it).take(n).collect();
            let seg_by: Vec<f64> = (&mut it).take(n).collect();
            for &a in seg_bx.iter().chain(&seg_by) {
                if a.abs() > spec.amplitude_bound + tol {
                    return Err(CoreError::InvalidArgument(format!(
                        "field amplitude {a} outside bound {}",
                        spec.amplitude_bound
                    )));
                }
            }
            bx.push(seg_bx);
            by.push(seg_by);
            if spec.has_drift {
                let d = it.next().expect("length checked");
                let (lo, hi) = spec.dt_bounds.expect("validated");
                if d < lo - tol || d > hi + tol {
                    return Err(CoreError::InvalidArgument(format!(
                        "segment duration {d} outside [{lo}, {hi}]"
                    )));
                }
                dt.push(d);
            }
        }
        Ok(Self { spec: spec.clone(), bx, by, dt })
    }

    /// Flattens back to the parameter vector; exact inverse of
    /// [`ControlSequence::from_flat`].
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.spec.param_count());
        for m in 0..self.spec.segments_m {
            out.extend_from_slice(&self.bx[m]);
            out.extend_from_slice(&self.by[m]);
            if self.spec.has_drift {
                out.push(self.dt[m]);
            }
        }
        out
    }

    pub fn spec(&self) -> &SpinSystemSpec {
        &self.spec
    }

    pub fn bx(&self, segment: usize) -> &[f64] {
        &self.bx[segment]
    }

    pub fn by(&self, segment: usize) -> &[f64] {
        &self.by[segment]
    }

    /// Duration of a segment: the stored dt with drift, the fixed
    /// segment time without.
    pub fn duration(&self, segment: usize) -> f64 {
        if self.spec.has_drift {
            self.dt[segment]
        } else {
            self.spec.segment_time
        }
    }
}

/// The always-on chain Hamiltonian `2pi J sum_{i} I_z^i I_z^{i+1}`
/// (nearest neighbors); the zero matrix for a single spin.
///
/// Diagonal in the computational basis, so it is assembled directly
/// from the +-1/2 eigenvalue pattern of each spin.
pub fn ising_drift(spec: &SpinSystemSpec) -> ComplexMatrix {
    let n = spec.n_qubits;
    let dim = 1 << n;
    let mut diag = vec![0.0; dim];
    if n >= 2 {
        for (d, entry) in diag.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..n - 1 {
                let z_a = if (d >> (n - 1 - i)) & 1 == 0 { 0.5 } else { -0.5 };
                let z_b = if (d >> (n - 2 - i)) & 1 == 0 { 0.5 } else { -0.5 };
                acc += z_a * z_b;
            }
            *entry = TAU * spec.coupling_j * acc;
        }
    }
    ComplexMatrix::diagonal(&diag)
}

/// Cached per-spec operators so a propagator build does not re-derive
/// Kronecker products for every segment.
struct ControlOperators {
    ix: Vec<ComplexMatrix>,
    iy: Vec<ComplexMatrix>,
    drift: ComplexMatrix,
}

impl ControlOperators {
    fn build(spec: &SpinSystemSpec) -> Result<Self> {
        let n = spec.n_qubits;
        let ix = (0..n).map(|i| local_operator(n, i, Axis::X)).collect::<Result<Vec<_>>>()?;
        let iy = (0..n).map(|i| local_operator(n, i, Axis::Y)).collect::<Result<Vec<_>>>()?;
        let drift = if spec.has_drift {
            ising_drift(spec)
        } else {
            ComplexMatrix::zeros(spec.dim(), spec.dim())
        };
        Ok(Self { ix, iy, drift })
    }

    /// Hermitian generator of segment `m`.
    fn generator(&self, spec: &SpinSystemSpec, c: &ControlSequence, m: usize) -> ComplexMatrix {
        let field_scale = if spec.has_drift { TAU } else { spec.unit_scale };
        let mut g = self.drift.clone();
        for i in 0..spec.n_qubits {
            g.accumulate(&self.ix[i], field_scale * c.bx(m)[i]);
            g.accumulate(&self.iy[i], field_scale * c.by(m)[i]);
        }
        g
    }
}

/// Unitary of one control segment, `exp(-i duration * G_m)`.
pub fn segment_propagator(
    spec: &SpinSystemSpec,
    c: &ControlSequence,
    m: usize,
) -> Result<ComplexMatrix> {
    if m >= spec.segments_m {
        return Err(CoreError::InvalidArgument(format!(
            "segment index {m} out of range for {} segments",
            spec.segments_m
        )));
    }
    let ops = ControlOperators::build(spec)?;
    let g = ops.generator(spec, c, m);
    let eig = hermitian_eig(&g)?;
    Ok(unitary_from_eig(&eig, c.duration(m)))
}

/// Full control propagator `U_C = U_M ... U_2 U_1` (segment 0 acts first).
pub fn sequence_propagator(spec: &SpinSystemSpec, c: &ControlSequence) -> Result<ComplexMatrix> {
    let ops = ControlOperators::build(spec)?;
    let mut u = ComplexMatrix::identity(spec.dim());
    for m in 0..spec.segments_m {
        let g = ops.generator(spec, c, m);
        let eig = hermitian_eig(&g)?;
        u = unitary_from_eig(&eig, c.duration(m)).matmul(&u)?;
    }
    Ok(u)
}

/// Evolves a pure initial state through the control sequence:
/// `|psi_f> = U_C |psi_i>`.
///
/// Applies the segments to the state vector directly, which is the hot
/// path of every fitness evaluation.
pub fn prepare_probe(
    spec: &SpinSystemSpec,
    c: &ControlSequence,
    initial: &QuantumState,
) -> Result<QuantumState> {
    if !initial.is_pure() {
        return Err(CoreError::InvalidState("probe preparation starts from a pure state".into()));
    }
    if initial.dim() != spec.dim() {
        return Err(CoreError::DimensionMismatch(format!(
            "initial state has dimension {}, system has {}",
            initial.dim(),
            spec.dim()
        )));
    }
    let ops = ControlOperators::build(spec)?;
    let mut amps = initial.amplitudes().expect("pure checked").to_vec();
    for m in 0..spec.segments_m {
        let g = ops.generator(spec, c, m);
        let eig = hermitian_eig(&g)?;
        amps = evolve_vector(&eig, c.duration(m), &amps);
    }
    QuantumState::pure(spec.n_qubits, amps)
}
