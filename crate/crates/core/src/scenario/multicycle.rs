//! Several short detection cycles in a row, keeping only runs where every cycle reads 0.

use std::fmt;
use std::str::FromStr;

use super::averaging::{bloch_average, BlochAverager, Linearity};
use super::fidelity::conditional;
use super::CompiledCode;
use crate::channels::relaxation_probability;
use crate::correction::{avg_fidelity_vs_unitary, LinearQubitOp};
use crate::qmath::{pauli_x, ComplexMatrix};
use crate::{Error, Real, Result};

/// Where the logical π-pulse goes in each cycle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PiPulsePlacement {
    /// No pulses.
    Off,
    /// X on every physical qubit right after encoding, before storage.
    #[default]
    AfterEncode,
    /// X on every physical qubit after storage, before decoding.
    BeforeDecode,
}

impl fmt::Display for PiPulsePlacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PiPulsePlacement::Off => "off",
            PiPulsePlacement::AfterEncode => "after_encode",
            PiPulsePlacement::BeforeDecode => "before_decode",
        })
    }
}

impl FromStr for PiPulsePlacement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" | "none" => Ok(PiPulsePlacement::Off),
            "after_encode" => Ok(PiPulsePlacement::AfterEncode),
            "before_decode" => Ok(PiPulsePlacement::BeforeDecode),
            _ => Err(Error::InvalidParameter(format!(
                "unknown pi-pulse placement '{s}' (expected off, after_encode or before_decode)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MulticycleResult<T: Real> {
    /// Average fidelity of the selected runs, weighted by selection probability.
    pub fidelity: T,
    /// Mean over initial states of the conditional fidelity.
    pub fidelity_uniform: T,
    /// Probability that all cycles read 0, averaged over initial states.
    pub p_select: T,
    /// Main-qubit map of the history with no relaxation at all.
    pub no_relaxation: ComplexMatrix<T>,
}

/// Simulates `cycles` back-to-back detection cycles over total time `t`.
///
/// Each logical π-pulse is the bit flip X⊗…⊗X of the encoded register, which
/// acts on the main qubit as X at the chosen point of the cycle. With pulses
/// the number of cycles must be even so the flips cancel.
pub fn multicycle_simulate<T: Real>(
    n_qubits: usize,
    cycles: usize,
    t: T,
    t1: T,
    pulses: PiPulsePlacement,
) -> Result<MulticycleResult<T>> {
    if cycles == 0 {
        return Err(Error::InvalidParameter("at least one cycle is needed".into()));
    }
    if pulses != PiPulsePlacement::Off && !cycles.is_multiple_of(2) {
        return Err(Error::Incompatible(format!(
            "pi-pulses need an even number of cycles, got {cycles}"
        )));
    }
    let p = relaxation_probability(t / T::from_usize_lossy(cycles), t1)?;
    let code = CompiledCode::uniform(n_qubits, p)?;
    let x = pauli_x::<T>();
    let kraus: Vec<ComplexMatrix<T>> = code
        .selected()
        .kraus
        .iter()
        .map(|(_, k)| match pulses {
            PiPulsePlacement::Off => k.clone(),
            PiPulsePlacement::AfterEncode => k * &x,
            PiPulsePlacement::BeforeDecode => &x * k,
        })
        .collect();
    let mut no_relaxation = ComplexMatrix::identity(2);
    let mut op = LinearQubitOp::identity();
    for _ in 0..cycles {
        no_relaxation = &kraus[0] * &no_relaxation;
        let [a, b, c, d] = op.images().map(|m| {
            kraus
                .iter()
                .fold(ComplexMatrix::zeros(2, 2), |acc, k| &acc + &(&(k * m) * &k.adjoint()))
        });
        op = LinearQubitOp::from_images(a, b, c, d)?;
    }

    let p_select = op.center().trace().re;
    let fidelity = if p_select > T::zero() {
        avg_fidelity_vs_unitary(&op, &ComplexMatrix::identity(2))? / p_select
    } else {
        T::zero()
    };
    let fidelity_uniform = bloch_average(
        |b| {
            let psi = b.to_state();
            let out = op.apply(&psi.density()).expect("2x2");
            let overlap = crate::qmath::state_fidelity(&out, &psi).expect("2x2");
            conditional(overlap, out.trace().re)
        },
        &BlochAverager::default(),
        Linearity::NonLinear,
    )?;
    Ok(MulticycleResult {
        fidelity,
        fidelity_uniform,
        p_select,
        no_relaxation,
    })
}
