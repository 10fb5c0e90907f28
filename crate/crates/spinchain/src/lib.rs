//! Numerical simulator of a four-spin nuclear-spin-chain quantum computer
//! with first- and second-neighbor Ising couplings.
//!
//! The chain sits in a strong longitudinal field (one Larmor frequency per
//! spin) and is driven by resonant circularly polarized RF pulses. The crate
//! integrates the interaction-picture amplitude equations across a pulse
//! sequence and ships the twelve-pulse protocol that factors N = 4 on the
//! 16-level register, together with the analysis tooling around it:
//!
//! - [`chain`] — static structure: parameters, basis indexing, the diagonal
//!   spectrum and the RF coupling matrix element;
//! - [`dynamics`] — fixed-step RK4 propagation of the amplitude ODEs, picture
//!   transforms and a lab-frame cross-check integrator;
//! - [`twolevel`] — closed-form detuned Rabi evolution and the 2πk-method
//!   frequency selection;
//! - [`shor`] — the pulse protocol, period extraction and the classical
//!   pre/post-processing;
//! - [`analysis`] — fidelity, spin expectations and the parameter sweeps.
//!
//! All frequencies are handled internally as angular rates in rad/µs and time
//! in µs; configuration values quoted in units of 2π×MHz convert via
//! [`angular_from_mhz`].

pub mod analysis;
pub mod chain;
pub mod dynamics;
pub mod shor;
pub mod twolevel;

pub use analysis::{fidelity, FidelityReport, SweepResult, SweepSpec, SweepVariable};
pub use chain::{BasisState, ChainParameters, Pulse};
pub use dynamics::{IntegratorConfig, Picture, StateVector, Trajectory};
pub use shor::{ProtocolStage, ShorOutcome, ShorProblem, StageName};
pub use twolevel::TwoLevelSystem;

use std::f64::consts::TAU;

/// Number of spins in the chain.
pub const NUM_QUBITS: usize = 4;
/// Dimension of the register Hilbert space.
pub const DIM: usize = 1 << NUM_QUBITS;

/// Convert a frequency quoted in units of 2π×MHz to an angular rate in rad/µs.
pub fn angular_from_mhz(f: f64) -> f64 {
    TAU * f
}

/// Convert an angular rate in rad/µs back to units of 2π×MHz.
pub fn mhz_from_angular(w: f64) -> f64 {
    w / TAU
}

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid chain parameters: {0}")]
    InvalidParameters(String),
    #[error("invalid pulse: {0}")]
    InvalidPulse(String),
    #[error("basis state index {0} out of range 0..=15")]
    InvalidBasisIndex(usize),
    #[error("states {m} and {k} differ in {distance} bits; a single-spin transition flips exactly one")]
    NotSingleFlip { m: usize, k: usize, distance: u32 },
    #[error("invalid integrator config: {0}")]
    InvalidIntegratorConfig(String),
    #[error("step override {step} µs advances the fastest phase by {phase:.3} rad per step (> π)")]
    StepTooCoarse { step: f64, phase: f64 },
    #[error("state norm deviates from 1 by {deviation:.3e}")]
    NormViolation { deviation: f64 },
    #[error("expected a state in the {expected:?} picture, got {actual:?}")]
    WrongPicture {
        expected: dynamics::Picture,
        actual: dynamics::Picture,
    },
    #[error("protocol drives at {a:.6} and {b:.6} 2π×MHz are closer than the {resolution:.6} 2π×MHz resolution")]
    Addressability { a: f64, b: f64, resolution: f64 },
    #[error("modulus {0} must be at least 2")]
    BadModulus(u64),
    #[error("{q} and {n} are not coprime")]
    NotCoprime { q: u64, n: u64 },
    #[error("period {0} is odd; retry with a different coprime base")]
    OddPeriod(u64),
    #[error("protocol failed: {reason}; x-register marginal {marginal:?}")]
    ProtocolFailed { reason: String, marginal: [f64; 4] },
    #[error("2πk selection requires k in 1..={max} (got {k})", max = twolevel::MAX_TWO_PI_K)]
    InvalidK { k: u32 },
    #[error("2πk selection requires a nonzero detuning")]
    ZeroDetuning,
    #[error("sweep grid must be nonempty and strictly increasing")]
    InvalidGrid,
}
