//! The twelve-pulse factorization protocol for N = 4 and its classical
//! pre/post-processing.
//!
//! The register splits as |x; y⟩ with x = (i₃, i₂) the input register and
//! y = (i₁, i₀) the valuation register. Starting from the ground state, three
//! π/2-pulses build the uniform superposition over x, four π-pulses write
//! y(x) = 3^x (mod 4), and five π-pulses apply the Fourier stage; measuring x
//! then reveals the period through the peak spacing Δx = 2^L / T.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chain::{resonant_drive_frequency, BasisState, ChainParameters, Pulse};
use crate::dynamics::{run_sequence, IntegratorConfig, Picture, StateVector, Trajectory};
use crate::{mhz_from_angular, Error, Result, DIM};

/// Problem instance; this simulator drives the N = 4 case with the only
/// coprime base q = 3 and two-qubit registers on each side.
#[derive(Copy, Clone, Debug, Serialize)]
pub struct ShorProblem {
    pub n: u64,
    pub q: u64,
    pub x_width: u32,
    pub y_width: u32,
}

impl ShorProblem {
    pub fn n4() -> Self {
        Self { n: 4, q: 3, x_width: 2, y_width: 2 }
    }
}

impl Default for ShorProblem {
    fn default() -> Self {
        Self::n4()
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// q^x mod n by square-and-multiply.
pub fn mod_exp(q: u64, x: u64, n: u64) -> Result<u64> {
    if n < 2 {
        return Err(Error::BadModulus(n));
    }
    let mut base = q % n;
    let mut exp = x;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % n;
        }
        base = base * base % n;
        exp >>= 1;
    }
    Ok(acc)
}

/// Least T ≥ 1 with q^T ≡ 1 (mod n), found by brute-force repeated
/// multiplication. Serves as the classical oracle for period finding.
pub fn classical_period(q: u64, n: u64) -> Result<u64> {
    if n < 2 {
        return Err(Error::BadModulus(n));
    }
    if gcd(q, n) != 1 {
        return Err(Error::NotCoprime { q, n });
    }
    let mut y = q % n;
    let mut period = 1;
    while y != 1 {
        y = y * (q % n) % n;
        period += 1;
    }
    Ok(period)
}

/// Factor candidates (gcd(q^{T/2} − 1, n), gcd(q^{T/2} + 1, n)) for an even
/// period T.
pub fn factors_from_period(q: u64, period: u64, n: u64) -> Result<(u64, u64)> {
    if n < 2 {
        return Err(Error::BadModulus(n));
    }
    if period % 2 != 0 {
        return Err(Error::OddPeriod(period));
    }
    let half = mod_exp(q, period / 2, n)?;
    Ok((gcd(half + n - 1, n), gcd(half + 1, n)))
}

/// Protocol stage labels.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum StageName {
    Superposition,
    Oracle,
    Fourier,
}

impl StageName {
    pub fn label(self) -> &'static str {
        match self {
            Self::Superposition => "superposition",
            Self::Oracle => "oracle",
            Self::Fourier => "fourier",
        }
    }
}

/// One stage of the protocol: an ordered pulse list.
#[derive(Clone, Debug)]
pub struct ProtocolStage {
    pub name: StageName,
    pub pulses: Vec<Pulse>,
}

/// Transition pairs addressed by each stage, as (m, k) basis indices. The
/// drive frequencies are recomputed from the chain parameters, so the
/// protocol re-tunes itself when J or J' change.
const SUPERPOSITION_PAIRS: [(usize, usize); 3] = [(0, 4), (0, 8), (4, 12)];
const ORACLE_PAIRS: [(usize, usize); 4] = [(0, 1), (4, 5), (5, 7), (13, 15)];
const FOURIER_PAIRS: [(usize, usize); 5] = [(6, 7), (2, 6), (2, 3), (14, 15), (11, 15)];

/// Default addressability resolution: distinct protocol lines closer than
/// 0.5 (2π×MHz) are reported as unaddressable.
pub const DEFAULT_RESOLUTION: f64 = 0.5 * std::f64::consts::TAU;

/// Relative tolerance under which two protocol lines count as one and the
/// same transition (the protocol contains exact coincidences by design, e.g.
/// the two qubit-0 lines that do not see the flipped spin 3).
const COINCIDENCE_TOLERANCE: f64 = 1e-9;

/// Build the three protocol stages (3 π/2-pulses, 4 π-pulses, 5 π-pulses,
/// all with zero phase) at the given Rabi frequency.
///
/// `resolution` (rad/µs) guards addressability: two *distinct* drive lines
/// separated by less than it are rejected; exactly coincident lines are
/// intentional degeneracies and pass. Sweeps call this with resolution 0 so
/// that deliberately degraded parameter regimes remain runnable.
pub fn build_protocol_with_resolution(
    params: &ChainParameters,
    rabi: f64,
    resolution: f64,
) -> Result<Vec<ProtocolStage>> {
    let pair = |(m, k): (usize, usize)| -> Result<f64> {
        resonant_drive_frequency(BasisState::new(m)?, BasisState::new(k)?, params)
    };
    let mut stages = Vec::with_capacity(3);
    let mut drives = Vec::with_capacity(12);
    for (name, pairs, pi_over_two) in [
        (StageName::Superposition, &SUPERPOSITION_PAIRS[..], true),
        (StageName::Oracle, &ORACLE_PAIRS[..], false),
        (StageName::Fourier, &FOURIER_PAIRS[..], false),
    ] {
        let mut pulses = Vec::with_capacity(pairs.len());
        for &p in pairs {
            let drive = pair(p)?;
            drives.push(drive);
            pulses.push(if pi_over_two {
                Pulse::pi_over_two(drive, rabi)?
            } else {
                Pulse::pi(drive, rabi)?
            });
        }
        stages.push(ProtocolStage { name, pulses });
    }

    if resolution > 0.0 {
        drives.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in drives.windows(2) {
            let gap = w[1] - w[0];
            let coincident = gap <= COINCIDENCE_TOLERANCE * w[1].abs().max(1.0);
            if !coincident && gap < resolution {
                return Err(Error::Addressability {
                    a: mhz_from_angular(w[0]),
                    b: mhz_from_angular(w[1]),
                    resolution: mhz_from_angular(resolution),
                });
            }
        }
    }
    Ok(stages)
}

/// [`build_protocol_with_resolution`] at the default resolution.
pub fn build_protocol(params: &ChainParameters, rabi: f64) -> Result<Vec<ProtocolStage>> {
    build_protocol_with_resolution(params, rabi, DEFAULT_RESOLUTION)
}

/// Fraction of the tallest marginal peak below which x-values are ignored.
pub const PEAK_THRESHOLD: f64 = 0.1;

/// Everything the protocol run reports: the final distribution, the
/// x-register marginal, the extracted peak spacing and period, and the factor
/// candidates.
#[derive(Clone, Debug, Serialize)]
pub struct ShorOutcome {
    pub problem: ShorProblem,
    pub probabilities: [f64; DIM],
    pub x_marginal: [f64; 4],
    pub delta_x: u32,
    pub period: u64,
    pub factors: (u64, u64),
}

/// Per-stage record of a detailed run.
#[derive(Clone, Debug)]
pub struct StageRecord {
    pub name: StageName,
    pub end_state: StateVector,
    pub trajectory: Trajectory,
}

/// A full protocol run with per-stage checkpoints.
#[derive(Clone, Debug)]
pub struct ShorRun {
    pub outcome: ShorOutcome,
    pub stages: Vec<StageRecord>,
    pub final_state: StateVector,
}

/// Marginal distribution over the x-register, p(x) = Σ_y |C_{4x+y}|².
pub fn x_marginal(probabilities: &[f64; DIM]) -> [f64; 4] {
    let mut marginal = [0.0; 4];
    for (m, p) in probabilities.iter().enumerate() {
        marginal[m >> 2] += p;
    }
    marginal
}

/// Above-threshold peaks of the x-marginal and their common spacing Δx.
/// The threshold is `threshold_frac` of the tallest peak; a lone peak means
/// Δx = 2^L. Non-uniform spacing is a protocol failure.
pub fn extract_peaks(marginal: &[f64; 4], threshold_frac: f64) -> Result<(Vec<usize>, u32)> {
    let max = marginal.iter().cloned().fold(f64::NAN, f64::max);
    if !(max > 0.0) {
        return Err(Error::ProtocolFailed {
            reason: "x-register marginal carries no probability".into(),
            marginal: *marginal,
        });
    }
    let threshold = threshold_frac * max;
    let peaks: Vec<usize> = (0..4).filter(|&x| marginal[x] >= threshold).collect();
    if peaks.len() == 1 {
        return Ok((peaks, 4));
    }
    let spacing = peaks[1] - peaks[0];
    if spacing == 0 || peaks.windows(2).any(|w| w[1] - w[0] != spacing) {
        return Err(Error::ProtocolFailed {
            reason: format!("marginal peaks at {peaks:?} are not uniformly spaced"),
            marginal: *marginal,
        });
    }
    Ok((peaks, spacing as u32))
}

/// Run the full protocol from the ground state and keep per-stage
/// checkpoints and trajectories.
pub fn run_shor_detailed(
    params: &ChainParameters,
    rabi: f64,
    cfg: &IntegratorConfig,
) -> Result<ShorRun> {
    let problem = ShorProblem::n4();
    let stages_spec = build_protocol(params, rabi)?;
    let mut state = StateVector::ground();
    let mut stages = Vec::with_capacity(stages_spec.len());
    for stage in &stages_spec {
        let (end, trajectory) = run_sequence(&state, &stage.pulses, params, cfg)?;
        stages.push(StageRecord { name: stage.name, end_state: end.clone(), trajectory });
        state = end;
    }

    let probabilities = state.probabilities();
    let marginal = x_marginal(&probabilities);
    let (_, delta_x) = extract_peaks(&marginal, PEAK_THRESHOLD)?;
    let period = (1u64 << problem.x_width) / delta_x as u64;
    let factors = factors_from_period(problem.q, period, problem.n)?;
    Ok(ShorRun {
        outcome: ShorOutcome {
            problem,
            probabilities,
            x_marginal: marginal,
            delta_x,
            period,
            factors,
        },
        stages,
        final_state: state,
    })
}

/// Run the protocol and report the outcome.
pub fn run_shor(params: &ChainParameters, rabi: f64, cfg: &IntegratorConfig) -> Result<ShorOutcome> {
    run_shor_detailed(params, rabi, cfg).map(|run| run.outcome)
}

/// The target wave function: amplitude 1/2 on states {1, 3, 9, 11} (the
/// period-2 Fourier output |x ∈ {0,2}⟩ over y ∈ {1,3}), zero elsewhere.
pub fn expected_wavefunction() -> StateVector {
    let mut amps = [num_complex::Complex64::new(0.0, 0.0); DIM];
    for idx in [1usize, 3, 9, 11] {
        amps[idx] = num_complex::Complex64::new(0.5, 0.0);
    }
    StateVector::from_amplitudes(amps, Picture::Interaction, 0.0).unwrap()
}

/// Draw `count` simulated x-register measurements from the marginal, with a
/// fixed seed so runs reproduce.
pub fn sample_x_register(marginal: &[f64; 4], count: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: f64 = marginal.iter().sum();
    (0..count)
        .map(|_| {
            let mut draw = rng.gen::<f64>() * total;
            for (x, p) in marginal.iter().enumerate() {
                if draw < *p {
                    return x as u8;
                }
                draw -= p;
            }
            3
        })
        .collect()
}
