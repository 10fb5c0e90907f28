//! Static structure of the four-spin chain: parameters, computational basis
//! indexing, the diagonal Zeeman/Ising spectrum and the RF coupling element.

use num_complex::Complex64;
use std::fmt;

use crate::{angular_from_mhz, Error, Result, DIM, NUM_QUBITS};

/// Chain parameters in angular units (rad/µs).
///
/// `larmor[k]` is the Larmor frequency of spin k, `j1` the first-neighbor and
/// `j2` the second-neighbor Ising coupling. Construct from paper-style
/// 2π×MHz values with [`ChainParameters::from_mhz`].
#[derive(Clone, Debug, PartialEq)]
pub struct ChainParameters {
    larmor: [f64; NUM_QUBITS],
    j1: f64,
    j2: f64,
}

impl ChainParameters {
    /// Build from frequencies quoted in units of 2π×MHz.
    pub fn from_mhz(larmor: [f64; NUM_QUBITS], j1: f64, j2: f64) -> Result<Self> {
        Self::from_angular(larmor.map(angular_from_mhz), angular_from_mhz(j1), angular_from_mhz(j2))
    }

    /// Build from angular rates in rad/µs.
    pub fn from_angular(larmor: [f64; NUM_QUBITS], j1: f64, j2: f64) -> Result<Self> {
        if !(larmor.iter().all(|w| w.is_finite()) && j1.is_finite() && j2.is_finite()) {
            return Err(Error::InvalidParameters("all frequencies must be finite".into()));
        }
        for a in 0..NUM_QUBITS {
            for b in a + 1..NUM_QUBITS {
                if larmor[a] == larmor[b] {
                    return Err(Error::InvalidParameters(format!(
                        "Larmor frequencies of spins {a} and {b} coincide; spins would not be addressable"
                    )));
                }
            }
        }
        Ok(Self { larmor, j1, j2 })
    }

    /// Larmor frequency of spin `k` (rad/µs).
    pub fn larmor(&self, k: usize) -> f64 {
        self.larmor[k]
    }

    /// First-neighbor coupling (rad/µs).
    pub fn j1(&self) -> f64 {
        self.j1
    }

    /// Second-neighbor coupling (rad/µs).
    pub fn j2(&self) -> f64 {
        self.j2
    }

    /// Same chain with the second-neighbor coupling replaced (rad/µs).
    pub fn with_j2(&self, j2: f64) -> Result<Self> {
        Self::from_angular(self.larmor, self.j1, j2)
    }
}

impl Default for ChainParameters {
    /// The reference parameter set: ω = (100, 200, 400, 800), J = 10,
    /// J' = 0.4, all in 2π×MHz.
    fn default() -> Self {
        Self::from_mhz([100.0, 200.0, 400.0, 800.0], 10.0, 0.4).unwrap()
    }
}

/// One of the 16 computational basis states |i₃i₂i₁i₀⟩, decimal-indexed as
/// index = 8·i₃ + 4·i₂ + 2·i₁ + i₀. Bit value 0 is the ground orientation
/// (spin along the static field), 1 the excited one. The x-register holds
/// (i₃, i₂) and the y-register (i₁, i₀).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState(u8);

impl BasisState {
    pub fn new(index: usize) -> Result<Self> {
        if index < DIM {
            Ok(Self(index as u8))
        } else {
            Err(Error::InvalidBasisIndex(index))
        }
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }

    /// Spin state i_j of qubit `j`.
    pub fn bit(self, j: usize) -> u8 {
        assert!(j < NUM_QUBITS, "qubit index {j} out of range");
        (self.0 >> j) & 1
    }

    /// The state with qubit `j` flipped.
    pub fn flipped(self, j: usize) -> Self {
        assert!(j < NUM_QUBITS, "qubit index {j} out of range");
        Self(self.0 ^ (1 << j))
    }

    pub fn hamming_distance(self, other: Self) -> u32 {
        (self.0 ^ other.0).count_ones()
    }

    /// Input register value x = 2·i₃ + i₂.
    pub fn x_register(self) -> u8 {
        self.0 >> 2
    }

    /// Valuation register value y = 2·i₁ + i₀.
    pub fn y_register(self) -> u8 {
        self.0 & 0b11
    }

    pub fn all() -> impl Iterator<Item = Self> {
        (0..DIM as u8).map(Self)
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "|{}{}{}{}⟩",
            self.bit(3),
            self.bit(2),
            self.bit(1),
            self.bit(0)
        )
    }
}

/// One rectangular RF pulse: drive frequency and phase, Rabi frequency and
/// rotation angle. The duration is derived, τ = angle / rabi.
///
/// All frequencies are angular (rad/µs), angles in radians.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Pulse {
    pub drive: f64,
    pub phase: f64,
    pub rabi: f64,
    pub angle: f64,
}

impl Pulse {
    pub fn new(drive: f64, phase: f64, rabi: f64, angle: f64) -> Result<Self> {
        if !(drive.is_finite() && drive > 0.0) {
            return Err(Error::InvalidPulse(format!("drive frequency must be positive (got {drive})")));
        }
        if !(rabi.is_finite() && rabi > 0.0) {
            return Err(Error::InvalidPulse(format!("Rabi frequency must be positive (got {rabi})")));
        }
        if !(angle.is_finite() && angle >= 0.0) {
            return Err(Error::InvalidPulse(format!("rotation angle must be nonnegative (got {angle})")));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidPulse("phase must be finite".into()));
        }
        Ok(Self { drive, phase, rabi, angle })
    }

    /// π-pulse with zero phase.
    pub fn pi(drive: f64, rabi: f64) -> Result<Self> {
        Self::new(drive, 0.0, rabi, std::f64::consts::PI)
    }

    /// π/2-pulse with zero phase.
    pub fn pi_over_two(drive: f64, rabi: f64) -> Result<Self> {
        Self::new(drive, 0.0, rabi, std::f64::consts::FRAC_PI_2)
    }

    /// Pulse duration τ = angle / rabi, in µs.
    pub fn duration(&self) -> f64 {
        self.angle / self.rabi
    }
}

/// Diagonal eigenvalue E/ħ of basis state `m` (rad/µs):
///
/// E/ħ = −½ [ Σ_k (−1)^{i_k} ω_k + J Σ_{k=0}^{2} (−1)^{i_k+i_{k+1}}
///            + J' Σ_{k=0}^{1} (−1)^{i_k+i_{k+2}} ]
pub fn energy(state: BasisState, params: &ChainParameters) -> f64 {
    let sign = |b: u8| if b == 0 { 1.0 } else { -1.0 };
    let mut zeeman = 0.0;
    for k in 0..NUM_QUBITS {
        zeeman += sign(state.bit(k)) * params.larmor(k);
    }
    let mut first = 0.0;
    for k in 0..NUM_QUBITS - 1 {
        first += sign(state.bit(k) ^ state.bit(k + 1));
    }
    let mut second = 0.0;
    for k in 0..NUM_QUBITS - 2 {
        second += sign(state.bit(k) ^ state.bit(k + 2));
    }
    -0.5 * (zeeman + params.j1() * first + params.j2() * second)
}

/// Signed transition frequency ω_mk = (E_m − E_k)/ħ (rad/µs).
pub fn transition_frequency(m: BasisState, k: BasisState, params: &ChainParameters) -> f64 {
    energy(m, params) - energy(k, params)
}

/// Drive frequency resonant with the single-spin transition between `m` and
/// `k`, i.e. |ω_mk|. Rejects pairs that are not a single bit flip.
pub fn resonant_drive_frequency(
    m: BasisState,
    k: BasisState,
    params: &ChainParameters,
) -> Result<f64> {
    let distance = m.hamming_distance(k);
    if distance != 1 {
        return Err(Error::NotSingleFlip { m: m.index(), k: k.index(), distance });
    }
    Ok(transition_frequency(m, k, params).abs())
}

/// RF coupling matrix element W_mk/ħ at global time `t` (rad/µs).
///
/// Zero unless `m` and `k` differ in exactly one bit. The raising operator
/// connects bit 1 in `k` to bit 0 in `m` and carries e^{+i(ωt+φ)}; the
/// opposite flip carries the conjugate phase. Hermitian by construction.
pub fn coupling_element(m: BasisState, k: BasisState, pulse: &Pulse, t: f64) -> Complex64 {
    if m.hamming_distance(k) != 1 {
        return Complex64::new(0.0, 0.0);
    }
    let phase = pulse.drive * t + pulse.phase;
    // Which direction did the differing bit go? m < k exactly when the bit is
    // 0 in m and 1 in k, i.e. the raising (deexciting) direction.
    let arg = if m.index() < k.index() { phase } else { -phase };
    -0.5 * pulse.rabi * Complex64::new(0.0, arg).exp()
}
