//! Time evolution of the 16 register amplitudes.
//!
//! The working representation is the interaction picture: amplitudes D_m with
//! the diagonal phase evolution removed, obeying
//!
//!   i Ḋ_m = Σ_k (W_mk/ħ) D_k e^{i ω_mk t},
//!
//! where W couples only single-bit-flip pairs. A pulse is integrated with
//! classical fixed-step fourth-order Runge–Kutta; the step resolves the
//! fastest phase rate appearing in the equations. A direct lab-frame
//! integrator of the untransformed equations is provided as an independent
//! cross-check.

use num_complex::Complex64;
use std::io::{self, Write};

use crate::chain::{energy, BasisState, ChainParameters, Pulse};
use crate::{Error, Result, DIM, NUM_QUBITS};

type Amps = [Complex64; DIM];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Which picture a [`StateVector`]'s amplitudes live in.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Picture {
    /// Interaction-picture amplitudes D_m (diagonal phases removed).
    Interaction,
    /// Schrödinger-picture amplitudes C_m = D_m e^{−iE_m t/ħ}.
    Schrodinger,
}

/// 16 complex amplitudes tagged with their picture and the global time.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Amps,
    picture: Picture,
    time: f64,
}

/// Tolerance on Σ|amplitude|² for a state to count as normalized.
pub const NORM_TOLERANCE: f64 = 1e-9;

impl StateVector {
    /// The ground state |0000⟩ at t = 0 (identical in both pictures).
    pub fn ground() -> Self {
        let mut amps = [ZERO; DIM];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { amps, picture: Picture::Interaction, time: 0.0 }
    }

    /// Build from explicit amplitudes; rejects unnormalized input.
    pub fn from_amplitudes(amps: Amps, picture: Picture, time: f64) -> Result<Self> {
        let deviation = (amps.iter().map(|a| a.norm_sqr()).sum::<f64>() - 1.0).abs();
        if deviation > NORM_TOLERANCE {
            return Err(Error::NormViolation { deviation });
        }
        Ok(Self { amps, picture, time })
    }

    #[cfg(test)]
    pub(crate) fn from_amplitudes_unchecked(amps: Amps, picture: Picture, time: f64) -> Self {
        Self { amps, picture, time }
    }

    pub fn amplitudes(&self) -> &Amps {
        &self.amps
    }

    pub fn amplitude(&self, m: BasisState) -> Complex64 {
        self.amps[m.index()]
    }

    pub fn probabilities(&self) -> [f64; DIM] {
        self.amps.map(|a| a.norm_sqr())
    }

    pub fn probability(&self, m: BasisState) -> f64 {
        self.amps[m.index()].norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }

    /// Global elapsed time in µs.
    pub fn time(&self) -> f64 {
        self.time
    }

    fn require(&self, expected: Picture) -> Result<()> {
        if self.picture == expected {
            Ok(())
        } else {
            Err(Error::WrongPicture { expected, actual: self.picture })
        }
    }
}

/// Integration policy for [`apply_pulse`] and friends.
///
/// The step is chosen as `max_phase_step / R` where R is the fastest phase
/// rate in the amplitude equations for the pulse at hand, unless an explicit
/// `fixed_step_override` is given.
#[derive(Clone, Debug)]
pub struct IntegratorConfig {
    /// Per-step bound on the fastest phase advance, in radians.
    pub max_phase_step: f64,
    /// Explicit step in µs, bypassing the phase criterion.
    pub fixed_step_override: Option<f64>,
    /// Record every Nth step into the trajectory.
    pub record_stride: usize,
    /// Also keep complex amplitudes in the trajectory, not just probabilities.
    pub record_amplitudes: bool,
}

impl Default for IntegratorConfig {
    /// The phase step is tight enough that a resonant π-pulse on an isolated
    /// pair reproduces the closed-form amplitudes to better than 1e−8.
    fn default() -> Self {
        Self {
            max_phase_step: std::f64::consts::TAU / 128.0,
            fixed_step_override: None,
            record_stride: 1000,
            record_amplitudes: false,
        }
    }
}

impl IntegratorConfig {
    pub fn with_max_phase_step(mut self, step: f64) -> Self {
        self.max_phase_step = step;
        self
    }

    pub fn with_step_override(mut self, step: f64) -> Self {
        self.fixed_step_override = Some(step);
        self
    }

    pub fn with_record_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn with_amplitudes(mut self) -> Self {
        self.record_amplitudes = true;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.max_phase_step > 0.0 && self.max_phase_step < std::f64::consts::PI) {
            return Err(Error::InvalidIntegratorConfig(format!(
                "max_phase_step must lie in (0, π), got {}",
                self.max_phase_step
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidIntegratorConfig("record_stride must be ≥ 1".into()));
        }
        if let Some(h) = self.fixed_step_override {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidIntegratorConfig(format!(
                    "fixed_step_override must be positive, got {h}"
                )));
            }
        }
        Ok(())
    }
}

/// Recorded samples of one evolution: times, probabilities and (optionally)
/// the interaction-picture amplitudes.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    times: Vec<f64>,
    probabilities: Vec<[f64; DIM]>,
    amplitudes: Option<Vec<Amps>>,
}

impl Trajectory {
    fn new(record_amplitudes: bool) -> Self {
        Self {
            times: Vec::new(),
            probabilities: Vec::new(),
            amplitudes: record_amplitudes.then(Vec::new),
        }
    }

    fn push(&mut self, t: f64, amps: &Amps) {
        debug_assert!(self.times.last().is_none_or(|last| t > *last));
        self.times.push(t);
        self.probabilities.push(amps.map(|a| a.norm_sqr()));
        if let Some(stored) = self.amplitudes.as_mut() {
            stored.push(*amps);
        }
    }

    /// Append a later segment; a leading sample duplicating the current end
    /// time is dropped so that times stay strictly increasing.
    pub fn extend_from(&mut self, segment: Trajectory) {
        let skip = match (self.times.last(), segment.times.first()) {
            (Some(&a), Some(&b)) => usize::from(b <= a),
            _ => 0,
        };
        self.times.extend_from_slice(&segment.times[skip..]);
        self.probabilities.extend_from_slice(&segment.probabilities[skip..]);
        if let (Some(ours), Some(theirs)) = (self.amplitudes.as_mut(), segment.amplitudes) {
            ours.extend_from_slice(&theirs[skip..]);
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn probabilities(&self) -> &[[f64; DIM]] {
        &self.probabilities
    }

    pub fn amplitudes(&self) -> Option<&[Amps]> {
        self.amplitudes.as_deref()
    }

    /// Write as CSV with header `t,p0,...,p15`, every value printed with 12
    /// significant digits so reruns are byte-identical.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "t")?;
        for m in 0..DIM {
            write!(out, ",p{m}")?;
        }
        writeln!(out)?;
        for (t, row) in self.times.iter().zip(&self.probabilities) {
            write!(out, "{}", sig12(*t))?;
            for p in row {
                write!(out, ",{}", sig12(*p))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Format with 12 significant digits (deterministic across runs).
pub(crate) fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

struct PairTerm {
    lo: usize,
    hi: usize,
    /// Phase rate of e^{i((ω_lo,hi + ω_drive)t + φ)} for this pair.
    rate: f64,
}

/// Precomputed sparse coupling table for one pulse.
///
/// Holds one term per single-bit-flip pair (lo, hi); the interaction-picture
/// derivative is
///
///   Ḋ_lo += (iΩ/2) P(t) D_hi,   Ḋ_hi += (iΩ/2) P*(t) D_lo,
///
/// with P(t) = e^{i((ω_lo,hi + ω)t + φ)}. The phasors advance by a constant
/// rotation per half step, so no trigonometric calls happen in the loop.
pub struct PulsePropagator {
    pulse: Pulse,
    pairs: Vec<PairTerm>,
}

impl PulsePropagator {
    /// Full coupling table: all 32 single-bit-flip pairs.
    pub fn new(params: &ChainParameters, pulse: Pulse) -> Self {
        let mut pairs = Vec::with_capacity(DIM / 2 * NUM_QUBITS);
        for j in 0..NUM_QUBITS {
            for lo in BasisState::all().filter(|s| s.bit(j) == 0) {
                let hi = lo.flipped(j);
                pairs.push(PairTerm {
                    lo: lo.index(),
                    hi: hi.index(),
                    rate: crate::chain::transition_frequency(lo, hi, params) + pulse.drive,
                });
            }
        }
        Self { pulse, pairs }
    }

    /// Coupling restricted to the single pair (m, k), every other element
    /// zeroed. This is the hook for checking the integrator against the
    /// closed-form two-level solution.
    pub fn for_pair(
        params: &ChainParameters,
        pulse: Pulse,
        m: BasisState,
        k: BasisState,
    ) -> Result<Self> {
        let distance = m.hamming_distance(k);
        if distance != 1 {
            return Err(Error::NotSingleFlip { m: m.index(), k: k.index(), distance });
        }
        let (lo, hi) = if m.index() < k.index() { (m, k) } else { (k, m) };
        let pairs = vec![PairTerm {
            lo: lo.index(),
            hi: hi.index(),
            rate: crate::chain::transition_frequency(lo, hi, params) + pulse.drive,
        }];
        Ok(Self { pulse, pairs })
    }

    /// Fastest phase rate in the equations, |ω_mk ± ω| + Ω, used for the
    /// step criterion.
    pub fn fastest_rate(&self) -> f64 {
        let fastest = self.pairs.iter().map(|p| p.rate.abs()).fold(0.0, f64::max);
        fastest + self.pulse.rabi
    }

    fn derivative_into(&self, phasors: &[Complex64], y: &Amps, out: &mut Amps) {
        let coef = Complex64::new(0.0, 0.5 * self.pulse.rabi);
        out.fill(ZERO);
        for (term, p) in self.pairs.iter().zip(phasors) {
            let cp = coef * p;
            // coef is purely imaginary, so coef·conj(p) = −conj(coef·p).
            let cq = -cp.conj();
            out[term.lo] += cp * y[term.hi];
            out[term.hi] += cq * y[term.lo];
        }
    }

    /// Interaction-picture derivative at global time `t`.
    pub fn derivative(&self, amps: &Amps, t: f64) -> Amps {
        let phasors: Vec<Complex64> = self
            .pairs
            .iter()
            .map(|p| Complex64::new(0.0, p.rate * t + self.pulse.phase).exp())
            .collect();
        let mut out = [ZERO; DIM];
        self.derivative_into(&phasors, amps, &mut out);
        out
    }

    /// Integrate the pulse from `state.time` over its full duration.
    pub fn propagate(&self, state: &StateVector, cfg: &IntegratorConfig) -> Result<(StateVector, Trajectory)> {
        state.require(Picture::Interaction)?;
        cfg.validate()?;

        let t0 = state.time;
        let tau = self.pulse.duration();
        let mut trajectory = Trajectory::new(cfg.record_amplitudes);
        if tau == 0.0 {
            trajectory.push(t0, &state.amps);
            return Ok((state.clone(), trajectory));
        }

        let rate = self.fastest_rate();
        let h_target = match cfg.fixed_step_override {
            Some(h) => {
                let phase = rate * h;
                if phase > std::f64::consts::PI {
                    return Err(Error::StepTooCoarse { step: h, phase });
                }
                h
            }
            // A quiescent drive still needs a finite step.
            None => cfg.max_phase_step / rate.max(1e-12),
        };
        let steps = (tau / h_target).ceil().max(1.0) as usize;
        let h = tau / steps as f64;

        let mut phasors: Vec<Complex64> = self
            .pairs
            .iter()
            .map(|p| Complex64::new(0.0, p.rate * t0 + self.pulse.phase).exp())
            .collect();
        let rot_half: Vec<Complex64> = self
            .pairs
            .iter()
            .map(|p| Complex64::new(0.0, p.rate * h * 0.5).exp())
            .collect();

        let mut y = state.amps;
        let mut k1 = [ZERO; DIM];
        let mut k2 = [ZERO; DIM];
        let mut k3 = [ZERO; DIM];
        let mut k4 = [ZERO; DIM];
        let mut scratch = [ZERO; DIM];

        trajectory.push(t0, &y);
        for step in 0..steps {
            self.derivative_into(&phasors, &y, &mut k1);
            advance(&mut phasors, &rot_half);
            for m in 0..DIM {
                scratch[m] = y[m] + 0.5 * h * k1[m];
            }
            self.derivative_into(&phasors, &scratch, &mut k2);
            for m in 0..DIM {
                scratch[m] = y[m] + 0.5 * h * k2[m];
            }
            self.derivative_into(&phasors, &scratch, &mut k3);
            advance(&mut phasors, &rot_half);
            for m in 0..DIM {
                scratch[m] = y[m] + h * k3[m];
            }
            self.derivative_into(&phasors, &scratch, &mut k4);
            let w = h / 6.0;
            for m in 0..DIM {
                y[m] += w * (k1[m] + 2.0 * (k2[m] + k3[m]) + k4[m]);
            }
            let done = step + 1;
            if done == steps {
                trajectory.push(t0 + tau, &y);
            } else if done % cfg.record_stride == 0 {
                trajectory.push(t0 + done as f64 * h, &y);
            }
        }

        let final_state = StateVector { amps: y, picture: Picture::Interaction, time: t0 + tau };
        Ok((final_state, trajectory))
    }
}

fn advance(phasors: &mut [Complex64], rot: &[Complex64]) {
    for (p, r) in phasors.iter_mut().zip(rot) {
        *p *= r;
    }
}

/// Interaction-picture derivative Ḋ_m at global time `t` for an explicit
/// pulse, −i Σ_k (W_mk/ħ) D_k e^{iω_mk t}.
pub fn derivative(
    state: &StateVector,
    pulse: &Pulse,
    params: &ChainParameters,
    t: f64,
) -> Result<Amps> {
    state.require(Picture::Interaction)?;
    if pulse.rabi == 0.0 {
        return Ok([ZERO; DIM]);
    }
    Ok(PulsePropagator::new(params, *pulse).derivative(&state.amps, t))
}

/// Integrate one pulse starting at `state.time`; the final time advances by
/// exactly the pulse duration.
pub fn apply_pulse(
    state: &StateVector,
    pulse: Pulse,
    params: &ChainParameters,
    cfg: &IntegratorConfig,
) -> Result<(StateVector, Trajectory)> {
    PulsePropagator::new(params, pulse).propagate(state, cfg)
}

/// Fold [`apply_pulse`] over an ordered pulse list. Global time is continuous
/// across pulses; trajectory segments are concatenated.
pub fn run_sequence(
    initial: &StateVector,
    pulses: &[Pulse],
    params: &ChainParameters,
    cfg: &IntegratorConfig,
) -> Result<(StateVector, Trajectory)> {
    let mut state = initial.clone();
    let mut trajectory = Trajectory::new(cfg.record_amplitudes);
    trajectory.push(state.time, &state.amps);
    for pulse in pulses {
        let (next, segment) = apply_pulse(&state, *pulse, params, cfg)?;
        state = next;
        trajectory.extend_from(segment);
    }
    Ok((state, trajectory))
}

/// Remove the interaction-picture transform: C_m = D_m e^{−iE_m t/ħ} at the
/// state's own time.
pub fn to_schrodinger(state: &StateVector, params: &ChainParameters) -> Result<StateVector> {
    state.require(Picture::Interaction)?;
    let t = state.time;
    let mut amps = state.amps;
    for m in BasisState::all() {
        amps[m.index()] *= Complex64::new(0.0, -energy(m, params) * t).exp();
    }
    Ok(StateVector { amps, picture: Picture::Schrodinger, time: t })
}

/// Inverse of [`to_schrodinger`].
pub fn to_interaction(state: &StateVector, params: &ChainParameters) -> Result<StateVector> {
    state.require(Picture::Schrodinger)?;
    let t = state.time;
    let mut amps = state.amps;
    for m in BasisState::all() {
        amps[m.index()] *= Complex64::new(0.0, energy(m, params) * t).exp();
    }
    Ok(StateVector { amps, picture: Picture::Interaction, time: t })
}

/// Integrate the untransformed amplitude equations
/// i Ċ_m = (E_m/ħ) C_m + Σ_k (W_mk/ħ) C_k directly, as an independent check
/// of the interaction-picture path. The diagonal term oscillates at the full
/// eigenfrequencies, so this needs a much finer step for the same accuracy;
/// it is meant for tests and the self-check command.
pub fn lab_frame_reference(
    initial: &StateVector,
    pulses: &[Pulse],
    params: &ChainParameters,
    cfg: &IntegratorConfig,
) -> Result<StateVector> {
    cfg.validate()?;
    let mut state = match initial.picture {
        Picture::Schrodinger => initial.clone(),
        Picture::Interaction => to_schrodinger(initial, params)?,
    };

    let energies: Vec<f64> = BasisState::all().map(|m| energy(m, params)).collect();
    let e_max = energies.iter().fold(0.0, |acc: f64, e| acc.max(e.abs()));

    // Reuse the pair table builder for the coupling topology; in the lab
    // frame every pair shares the single drive phasor e^{i(ωt+φ)}.
    for pulse in pulses {
        let tau = pulse.duration();
        if tau == 0.0 {
            continue;
        }
        let rate = e_max + pulse.drive + pulse.rabi;
        let h_target = match cfg.fixed_step_override {
            Some(h) => {
                let phase = rate * h;
                if phase > std::f64::consts::PI {
                    return Err(Error::StepTooCoarse { step: h, phase });
                }
                h
            }
            None => cfg.max_phase_step / rate,
        };
        let steps = (tau / h_target).ceil().max(1.0) as usize;
        let h = tau / steps as f64;
        let t0 = state.time;

        let pairs: Vec<(usize, usize)> = (0..NUM_QUBITS)
            .flat_map(|j| {
                BasisState::all()
                    .filter(move |s| s.bit(j) == 0)
                    .map(move |lo| (lo.index(), lo.flipped(j).index()))
            })
            .collect();
        let coef = Complex64::new(0.0, 0.5 * pulse.rabi);
        let mut drive_phasor = Complex64::new(0.0, pulse.drive * t0 + pulse.phase).exp();
        let rot_half = Complex64::new(0.0, pulse.drive * h * 0.5).exp();

        let deriv = |q: Complex64, y: &Amps, out: &mut Amps| {
            for (m, (slot, e)) in out.iter_mut().zip(&energies).enumerate() {
                *slot = Complex64::new(0.0, -e) * y[m];
            }
            let cp = coef * q;
            let cq = -cp.conj();
            for &(lo, hi) in &pairs {
                out[lo] += cp * y[hi];
                out[hi] += cq * y[lo];
            }
        };

        let mut y = state.amps;
        let mut k1 = [ZERO; DIM];
        let mut k2 = [ZERO; DIM];
        let mut k3 = [ZERO; DIM];
        let mut k4 = [ZERO; DIM];
        let mut scratch = [ZERO; DIM];
        for _ in 0..steps {
            deriv(drive_phasor, &y, &mut k1);
            drive_phasor *= rot_half;
            for m in 0..DIM {
                scratch[m] = y[m] + 0.5 * h * k1[m];
            }
            deriv(drive_phasor, &scratch, &mut k2);
            for m in 0..DIM {
                scratch[m] = y[m] + 0.5 * h * k2[m];
            }
            deriv(drive_phasor, &scratch, &mut k3);
            drive_phasor *= rot_half;
            for m in 0..DIM {
                scratch[m] = y[m] + h * k3[m];
            }
            deriv(drive_phasor, &scratch, &mut k4);
            let w = h / 6.0;
            for m in 0..DIM {
                y[m] += w * (k1[m] + 2.0 * (k2[m] + k3[m]) + k4[m]);
            }
        }
        state = StateVector { amps: y, picture: Picture::Schrodinger, time: t0 + tau };
    }
    Ok(state)
}
