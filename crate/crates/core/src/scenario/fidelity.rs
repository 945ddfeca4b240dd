//! Strategy fidelities computed from the compiled scenario maps.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use super::averaging::{bloch_average, BlochAverager, Linearity};
use super::{CompiledCode, CompiledOutcome};
use crate::correction::{numeric_unitary_search, optimal_correction, BranchKK, EulerGrid, OutcomeClass};
use crate::qmath::{BlochPoint, ComplexMatrix};
use crate::report::{FidelityKind, FidelityReport};
use crate::{Error, Real, Result};

/// What is done with the ancilla readout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Keep every run.
    Ignore,
    /// Keep result 0 only; mean of the per-state conditional fidelity.
    QedUniform,
    /// Keep result 0 only; averages weighted by the selection probability.
    QedWeighted,
    /// Apply the best unitary for each result.
    QecOptimal,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Ignore, Mode::QedUniform, Mode::QedWeighted, Mode::QecOptimal];

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Ignore => "ignore",
            Mode::QedUniform => "qed_uniform",
            Mode::QedWeighted => "qed_weighted",
            Mode::QecOptimal => "qec_optimal",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown mode '{s}' (expected ignore, qed_uniform, qed_weighted or qec_optimal)")))
    }
}

pub(crate) fn amplitudes<T: Real>(b: &BlochPoint<T>) -> [Complex<T>; 2] {
    let s = b.to_state();
    [s.amplitudes()[0], s.amplitudes()[1]]
}

/// ⟨ψ|ρ_0|ψ⟩ / Tr ρ_0, taken as 0 where result 0 cannot occur.
pub(crate) fn conditional<T: Real>(overlap: T, weight: T) -> T {
    if weight > T::zero() {
        overlap / weight
    } else {
        T::zero()
    }
}

impl<T: Real> CompiledCode<T> {
    /// Outcome maps followed by the best correction for each result.
    ///
    /// Result 0 is left alone. Other results have the error-branch form and
    /// use the closed-form optimum; anything else falls back to a grid search.
    pub fn corrected_outcomes(&self) -> Result<Vec<CompiledOutcome<T>>> {
        self.outcomes
            .iter()
            .map(|o| {
                let u = if o.result_bits == 0 {
                    ComplexMatrix::identity(2)
                } else {
                    let op = o.op();
                    let branch = BranchKK::from_op(&op, OutcomeClass::ErrorResult)?;
                    let dev = branch
                        .to_op()
                        .images()
                        .iter()
                        .zip(op.images())
                        .map(|(a, b)| a.max_abs_diff(b))
                        .fold(T::zero(), T::max);
                    if dev <= T::strict_tol() {
                        optimal_correction(&branch).unitary()
                    } else {
                        numeric_unitary_search(&op, &EulerGrid::new(96)?).best_u
                    }
                };
                Ok(CompiledOutcome {
                    result_bits: o.result_bits,
                    kraus: o.kraus.iter().map(|(m, k)| (*m, &u * k)).collect(),
                })
            })
            .collect()
    }

    /// Average fidelity for one strategy; the second entry is the mean
    /// selection probability for the QED modes.
    pub fn average(&self, mode: Mode, averager: &BlochAverager) -> Result<(T, Option<T>)> {
        let sel = self.selected();
        match mode {
            Mode::Ignore => {
                let f = bloch_average(
                    |b| {
                        let psi = amplitudes(b);
                        self.outcomes.iter().map(|o| o.overlap_and_weight(&psi).0).sum()
                    },
                    averager,
                    Linearity::Linear,
                )?;
                Ok((f, None))
            }
            Mode::QecOptimal => {
                let corrected = self.corrected_outcomes()?;
                let f = bloch_average(
                    |b| {
                        let psi = amplitudes(b);
                        corrected.iter().map(|o| o.overlap_and_weight(&psi).0).sum()
                    },
                    averager,
                    Linearity::Linear,
                )?;
                Ok((f, None))
            }
            Mode::QedUniform | Mode::QedWeighted => {
                let den = bloch_average(|b| sel.overlap_and_weight(&amplitudes(b)).1, averager, Linearity::Linear)?;
                let f = if mode == Mode::QedWeighted {
                    let num = bloch_average(|b| sel.overlap_and_weight(&amplitudes(b)).0, averager, Linearity::Linear)?;
                    num / den
                } else {
                    bloch_average(
                        |b| {
                            let (o, w) = sel.overlap_and_weight(&amplitudes(b));
                            conditional(o, w)
                        },
                        averager,
                        Linearity::NonLinear,
                    )?
                };
                Ok((f, Some(den)))
            }
        }
    }
}

/// Scenario-engine fidelity for one strategy. Only the entry for `mode`
/// (and the selection probability for QED) is filled in.
pub fn fidelity_sweep<T: Real>(n_qubits: usize, p_list: &[T], mode: Mode, averager: &BlochAverager) -> Result<FidelityReport<T>> {
    let code = CompiledCode::new(n_qubits, p_list)?;
    let (f, p_select) = code.average(mode, averager)?;
    let mut r = FidelityReport {
        p_select,
        ..Default::default()
    };
    match mode {
        Mode::Ignore => r.f_ign = Some(f),
        Mode::QedUniform => r.f_qed = Some(f),
        Mode::QedWeighted => r.f_qed_weighted = Some(f),
        Mode::QecOptimal => r.f_qec = Some(f),
    }
    Ok(r)
}

/// Every strategy at once, in the same layout as the closed-form report.
pub fn scenario_report<T: Real>(n_qubits: usize, p_list: &[T], averager: &BlochAverager) -> Result<FidelityReport<T>> {
    let code = CompiledCode::new(n_qubits, p_list)?;
    let (f_ign, _) = code.average(Mode::Ignore, averager)?;
    let f_qed = match averager {
        BlochAverager::SixState => None,
        _ => Some(code.average(Mode::QedUniform, averager)?.0),
    };
    let (f_qed_weighted, p_select) = code.average(Mode::QedWeighted, averager)?;
    let (f_qec, _) = code.average(Mode::QecOptimal, averager)?;
    let r = FidelityReport {
        f_1q: (n_qubits == 1).then_some(f_ign),
        f_ign: Some(f_ign),
        f_qed,
        f_qed_weighted: Some(f_qed_weighted),
        f_qec: Some(f_qec),
        p_select,
        ..Default::default()
    };
    r.with_chi(FidelityKind::Ignore)
}
