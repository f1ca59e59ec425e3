//! Closed-loop engineering of quantum probe states for phase estimation.
//!
//! A derivative-free search loop discovers piecewise-constant control
//! sequences that steer an N-qubit spin chain toward states of maximal
//! phase sensitivity. The measurable fitness is the purity loss the
//! candidate probe suffers when the encoded phase fluctuates, which
//! lower-bounds the quantum Fisher information; an ancilla-based SWAP
//! test with finite shots and dephasing noise emulates how that fitness
//! is read out on hardware.
//!
//! Module map:
//! - [`qcore`]: dense complex matrices and quantum states.
//! - [`spinsys`]: Ising-chain drift, local controls, and propagators.
//! - [`metrology`]: phase encoding, purity-loss fitness, quantum Fisher
//!   information, and NOON references.
//! - [`swapsim`]: controlled-SWAP purity readout with shot noise and
//!   ancilla dephasing.
//! - [`nmopt`]: the Nelder-Mead simplex optimizer.

pub mod error;
pub mod exec;
pub mod metrology;
pub mod nmopt;
pub mod qcore;
pub mod spinsys;
pub mod swapsim;

pub use error::{CoreError, Result};
