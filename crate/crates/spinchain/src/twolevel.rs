//! Two-level pulse analytics: the exact detuned Rabi solution, the
//! 2πk-method frequency selection, and the catalog of detunings produced by
//! spectator spin configurations.

use num_complex::Complex64;
use std::io::{self, Write};
use std::ops::RangeInclusive;

use crate::chain::ChainParameters;
use crate::dynamics::sig12;
use crate::{mhz_from_angular, Error, Result};

/// Upper bound on k accepted by [`two_pi_k_rabi`]; larger values select
/// uselessly small Rabi frequencies.
pub const MAX_TWO_PI_K: u32 = 1_000_000;

/// An isolated pair of levels under a detuned drive.
///
/// `detuning` is Δ = (E_upper − E_lower)/ħ − ω; amplitudes are the
/// interaction-picture pair (upper, lower) at t = 0.
#[derive(Copy, Clone, Debug)]
pub struct TwoLevelSystem {
    detuning: f64,
    rabi: f64,
    initial_upper: Complex64,
    initial_lower: Complex64,
}

impl TwoLevelSystem {
    pub fn new(
        detuning: f64,
        rabi: f64,
        initial_upper: Complex64,
        initial_lower: Complex64,
    ) -> Result<Self> {
        if !(rabi.is_finite() && rabi >= 0.0 && detuning.is_finite()) {
            return Err(Error::InvalidPulse(format!(
                "two-level system needs finite Δ and Ω ≥ 0 (got Δ = {detuning}, Ω = {rabi})"
            )));
        }
        let deviation = (initial_upper.norm_sqr() + initial_lower.norm_sqr() - 1.0).abs();
        if deviation > 1e-12 {
            return Err(Error::NormViolation { deviation });
        }
        Ok(Self { detuning, rabi, initial_upper, initial_lower })
    }

    pub fn detuning(&self) -> f64 {
        self.detuning
    }

    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    /// Effective Rabi frequency Ω_e = √(Ω² + Δ²).
    pub fn effective_rabi(&self) -> f64 {
        self.rabi.hypot(self.detuning)
    }

    /// Closed-form evolution of the pair, returning (upper(t), lower(t)):
    ///
    ///   D_p(t) = { C_p(0)[cos(Ω_e t/2) − i(Δ/Ω_e) sin(Ω_e t/2)]
    ///              + i(Ω/Ω_e) C_m(0) sin(Ω_e t/2) } e^{iΔt/2}
    ///
    /// and the norm-preserving mirror with the opposite signs on the lower
    /// amplitude. Ω_e = 0 degenerates to the identity.
    pub fn analytic_evolution(&self, t: f64) -> (Complex64, Complex64) {
        let omega_e = self.effective_rabi();
        if omega_e == 0.0 {
            return (self.initial_upper, self.initial_lower);
        }
        let half = 0.5 * omega_e * t;
        let (sin, cos) = half.sin_cos();
        let dr = self.detuning / omega_e;
        let or = self.rabi / omega_e;
        let diag = Complex64::new(cos, -dr * sin);
        let cross = Complex64::new(0.0, or * sin);
        let phase = Complex64::new(0.0, 0.5 * self.detuning * t).exp();
        let upper = (self.initial_upper * diag + cross * self.initial_lower) * phase;
        let lower = (self.initial_lower * diag.conj() + cross * self.initial_upper) * phase.conj();
        (upper, lower)
    }
}

/// Rabi frequency selected by the 2πk method, Ω = |Δ|/√(4k²−1): a π-pulse at
/// this Ω makes the detuned pair complete exactly k full cycles, restoring
/// its populations.
pub fn two_pi_k_rabi(detuning: f64, k: u32) -> Result<f64> {
    if k == 0 || k > MAX_TWO_PI_K {
        return Err(Error::InvalidK { k });
    }
    if detuning == 0.0 || !detuning.is_finite() {
        return Err(Error::ZeroDetuning);
    }
    let k = k as f64;
    Ok(detuning.abs() / (4.0 * k * k - 1.0).sqrt())
}

/// Spectator-induced detuning families, by their composition in J and J'.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum DetuningKind {
    FourJPlusTwoJPrime,
    FourJ,
    TwoJPlusTwoJPrime,
    TwoJ,
    TwoJPrime,
    /// Listed as a possible frequency difference but absent from the final
    /// five-value catalog; exposed only behind the `extended` flag.
    TwoJMinusTwoJPrime,
}

impl DetuningKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::FourJPlusTwoJPrime => "4J+2J'",
            Self::FourJ => "4J",
            Self::TwoJPlusTwoJPrime => "2J+2J'",
            Self::TwoJ => "2J",
            Self::TwoJPrime => "2J'",
            Self::TwoJMinusTwoJPrime => "2J-2J'",
        }
    }

    pub fn value(self, params: &ChainParameters) -> f64 {
        let (j, jp) = (params.j1(), params.j2());
        match self {
            Self::FourJPlusTwoJPrime => 4.0 * j + 2.0 * jp,
            Self::FourJ => 4.0 * j,
            Self::TwoJPlusTwoJPrime => 2.0 * j + 2.0 * jp,
            Self::TwoJ => 2.0 * j,
            Self::TwoJPrime => 2.0 * jp,
            Self::TwoJMinusTwoJPrime => 2.0 * j - 2.0 * jp,
        }
    }
}

/// One catalog entry: a detuning family evaluated on concrete parameters.
#[derive(Copy, Clone, Debug)]
pub struct Detuning {
    pub kind: DetuningKind,
    /// Magnitude in rad/µs.
    pub value: f64,
}

const CORE_KINDS: [DetuningKind; 5] = [
    DetuningKind::FourJPlusTwoJPrime,
    DetuningKind::FourJ,
    DetuningKind::TwoJPlusTwoJPrime,
    DetuningKind::TwoJ,
    DetuningKind::TwoJPrime,
];

/// Detunings a pulse can see from spectator spin configurations:
/// {4J+2J', 4J, 2J+2J', 2J, 2J'}, plus 2J−2J' when `extended` is set.
/// Entries that vanish on the given parameters are dropped.
pub fn detuning_catalog(params: &ChainParameters, extended: bool) -> Vec<Detuning> {
    let mut kinds = CORE_KINDS.to_vec();
    if extended {
        kinds.push(DetuningKind::TwoJMinusTwoJPrime);
    }
    kinds
        .into_iter()
        .map(|kind| Detuning { kind, value: kind.value(params).abs() })
        .filter(|d| d.value > 0.0)
        .collect()
}

/// Distinct catalog values, descending, with exact duplicates merged.
pub fn detuning_values(params: &ChainParameters, extended: bool) -> Vec<f64> {
    let mut values: Vec<f64> = detuning_catalog(params, extended).iter().map(|d| d.value).collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    values.dedup();
    values
}

/// One row of the Ω_Δ^(k) table.
#[derive(Copy, Clone, Debug)]
pub struct RabiTableRow {
    pub kind: DetuningKind,
    /// Detuning magnitude in rad/µs.
    pub delta: f64,
    pub k: u32,
    /// Selected Rabi frequency in rad/µs.
    pub omega: f64,
}

/// Cross product of the detuning catalog with a k-range through the 2πk
/// selection, sorted by ascending Ω.
pub fn rabi_table(
    params: &ChainParameters,
    k_range: RangeInclusive<u32>,
    extended: bool,
) -> Result<Vec<RabiTableRow>> {
    if k_range.is_empty() {
        return Err(Error::InvalidK { k: 0 });
    }
    let mut rows = Vec::new();
    for entry in detuning_catalog(params, extended) {
        for k in k_range.clone() {
            rows.push(RabiTableRow {
                kind: entry.kind,
                delta: entry.value,
                k,
                omega: two_pi_k_rabi(entry.value, k)?,
            });
        }
    }
    rows.sort_by(|a, b| {
        a.omega
            .partial_cmp(&b.omega)
            .unwrap()
            .then_with(|| a.delta.partial_cmp(&b.delta).unwrap())
            .then_with(|| a.k.cmp(&b.k))
    });
    Ok(rows)
}

/// Write the table as CSV `delta_label,delta,k,omega` with frequencies in
/// 2π×MHz.
pub fn write_rabi_table_csv<W: Write>(rows: &[RabiTableRow], mut out: W) -> io::Result<()> {
    writeln!(out, "delta_label,delta,k,omega")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{}",
            row.kind.label(),
            sig12(mhz_from_angular(row.delta)),
            row.k,
            sig12(mhz_from_angular(row.omega)),
        )?;
    }
    Ok(())
}
