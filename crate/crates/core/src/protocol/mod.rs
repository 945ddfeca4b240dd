//! Two-qubit detection/correction protocols with intentional error rotations,
//! simulated on a 4×4 density matrix with relaxation and dephasing throughout.
//!
//! Times are in nanoseconds. Qubit 0 is the main qubit, qubit 1 the ancilla.

mod schedule;
mod sim;

pub use schedule::{build_schedule, GateEvent, GateKind, Timing};
pub use sim::{protocol_fidelities, simulate, simulate_all, sweep_storage, sweep_theta, ProtocolResult};

use std::fmt;
use std::str::FromStr;

use crate::channels::QubitDecoherence;
use crate::qmath::Axis;
use crate::{Error, Real, Result};

/// Circuit variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProtocolKind {
    /// Ancilla Y/2, CZ, error, CZ, ancilla −Y/2.
    Basic,
    /// Main-qubit Y/2 and −Y/2 around the error slot.
    MainRotated,
    /// Ancilla −Y/2 and Y/2 around the error slot; suits storage with relaxation.
    AncillaRotated,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 3] = [ProtocolKind::Basic, ProtocolKind::MainRotated, ProtocolKind::AncillaRotated];

    pub fn name(&self) -> &'static str {
        match self {
            ProtocolKind::Basic => "fig4",
            ProtocolKind::MainRotated => "fig7a",
            ProtocolKind::AncillaRotated => "fig7b",
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        ProtocolKind::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown protocol '{s}' (expected fig4, fig7a or fig7b)")))
    }
}

/// The intentional error applied between encoding and decoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    R1X,
    R1Y,
    R1Z,
    R2X,
    R2Y,
    R2Z,
    /// No rotation; relaxation of both qubits during storage (ancilla-rotated protocol only).
    StorageDamping,
}

impl ErrorKind {
    pub const ALL: [ErrorKind; 7] = [
        ErrorKind::R1X,
        ErrorKind::R1Y,
        ErrorKind::R1Z,
        ErrorKind::R2X,
        ErrorKind::R2Y,
        ErrorKind::R2Z,
        ErrorKind::StorageDamping,
    ];

    /// (qubit, axis) of the rotation.
    pub fn rotation(&self) -> Option<(usize, Axis)> {
        match self {
            ErrorKind::R1X => Some((0, Axis::X)),
            ErrorKind::R1Y => Some((0, Axis::Y)),
            ErrorKind::R1Z => Some((0, Axis::Z)),
            ErrorKind::R2X => Some((1, Axis::X)),
            ErrorKind::R2Y => Some((1, Axis::Y)),
            ErrorKind::R2Z => Some((1, Axis::Z)),
            ErrorKind::StorageDamping => None,
        }
    }

    /// Whether the ancilla readout flags this rotation in the given protocol.
    pub fn is_detectable(&self, protocol: ProtocolKind) -> bool {
        use ErrorKind::*;
        match protocol {
            ProtocolKind::Basic => matches!(self, R1X | R1Y | R2Y | R2Z),
            ProtocolKind::MainRotated => matches!(self, R1Y | R1Z | R2Y | R2Z),
            ProtocolKind::AncillaRotated => matches!(self, R1X | R1Y | R2X | R2Y | StorageDamping),
        }
    }

    /// Pauli gate that restores the main qubit after result 1; `None` is the identity.
    pub fn ideal_correction(&self, protocol: ProtocolKind) -> Option<Axis> {
        use ErrorKind::*;
        match (protocol, self) {
            (_, R1Y) => Some(Axis::Y),
            (_, R2Y) => Some(Axis::Z),
            (ProtocolKind::Basic | ProtocolKind::AncillaRotated, R1X) => Some(Axis::X),
            (ProtocolKind::MainRotated, R1Z) => Some(Axis::X),
            _ => None,
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rotation() {
            Some((q, axis)) => write!(f, "R{}{axis}", q + 1),
            None => f.write_str("storage"),
        }
    }
}

impl FromStr for ErrorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        ErrorKind::ALL
            .into_iter()
            .find(|e| e.to_string().eq_ignore_ascii_case(t))
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown error kind '{t}' (expected R1X, R1Y, R1Z, R2X, R2Y, R2Z or storage)"
                ))
            })
    }
}

/// How a driven slot is turned into dynamics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PulseShape {
    /// Constant drive over the whole slot.
    #[default]
    Square,
    /// Ideal gate at the middle of the slot, decoherence for the full slot.
    Instant,
}

impl FromStr for PulseShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "square" => Ok(PulseShape::Square),
            "instant" => Ok(PulseShape::Instant),
            other => Err(Error::InvalidParameter(format!("unknown pulse shape '{other}' (expected square or instant)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolConfig<T> {
    pub protocol: ProtocolKind,
    pub error: ErrorKind,
    /// Rotation angle of the error on the Bloch sphere (2θ).
    pub theta2: T,
    /// Main qubit, then ancilla.
    pub qubits: [QubitDecoherence<T>; 2],
    /// Relaxation probability of each qubit during storage.
    pub storage_p: T,
    pub dt: T,
    pub timing: Timing<T>,
    pub pulse: PulseShape,
    /// Whether decoherence acts during the error slot.
    pub decohere_error_slot: bool,
    /// Whether decoherence acts while any pulse is driven.
    pub decohere_during_gates: bool,
}

impl<T: Real> ProtocolConfig<T> {
    /// Ideal qubits, no rotation, dt = 0.5 ns.
    pub fn new(protocol: ProtocolKind, error: ErrorKind) -> Self {
        Self {
            protocol,
            error,
            theta2: T::zero(),
            qubits: [QubitDecoherence::ideal(); 2],
            storage_p: T::zero(),
            dt: T::lit(0.5),
            timing: Timing::default(),
            pulse: PulseShape::Square,
            decohere_error_slot: true,
            decohere_during_gates: true,
        }
    }

    pub fn with_theta2(mut self, theta2: T) -> Self {
        self.theta2 = theta2;
        self
    }

    /// Same T1 and T2 for both qubits.
    pub fn with_t1_t2(mut self, t1: T, t2: T) -> Result<Self> {
        self.qubits = [QubitDecoherence::from_t1_t2(t1, t2)?; 2];
        Ok(self)
    }

    pub fn with_storage_p(mut self, p: T) -> Self {
        self.storage_p = p;
        self
    }

    pub fn with_dt(mut self, dt: T) -> Self {
        self.dt = dt;
        self
    }

    pub fn validate(&self) -> Result<()> {
        crate::error::check_probability("storage_p", self.storage_p)?;
        if self.protocol != ProtocolKind::AncillaRotated {
            if self.error == ErrorKind::StorageDamping {
                return Err(Error::Incompatible(format!(
                    "storage relaxation needs the fig7b protocol, not {}",
                    self.protocol
                )));
            }
            if self.storage_p > T::zero() {
                return Err(Error::Incompatible(format!("{} has no storage segment", self.protocol)));
            }
        }
        if !self.theta2.is_finite() {
            return Err(Error::InvalidParameter(format!("rotation angle {} is not finite", self.theta2)));
        }
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("time step dt = {} must be positive", self.dt)));
        }
        self.timing.validate()
    }

    /// Whether the post-processing correction is physically meaningful.
    pub fn qec_available(&self) -> bool {
        !(self.protocol == ProtocolKind::AncillaRotated && self.storage_p > T::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in ProtocolKind::ALL {
            assert_eq!(p.name().parse::<ProtocolKind>().unwrap(), p);
        }
        for e in ErrorKind::ALL {
            assert_eq!(e.to_string().parse::<ErrorKind>().unwrap(), e);
        }
        assert_eq!("r2y".parse::<ErrorKind>().unwrap(), ErrorKind::R2Y);
        assert!("R3X".parse::<ErrorKind>().is_err());
    }

    #[test]
    fn storage_only_in_fig7b() {
        let c = ProtocolConfig::<f64>::new(ProtocolKind::Basic, ErrorKind::StorageDamping);
        assert!(matches!(c.validate(), Err(Error::Incompatible(_))));
        let c = ProtocolConfig::<f64>::new(ProtocolKind::MainRotated, ErrorKind::R1Y).with_storage_p(0.1);
        assert!(matches!(c.validate(), Err(Error::Incompatible(_))));
        let c = ProtocolConfig::<f64>::new(ProtocolKind::AncillaRotated, ErrorKind::StorageDamping).with_storage_p(0.1);
        assert!(c.validate().is_ok());
        assert!(!c.qec_available());
    }

    #[test]
    fn correction_table() {
        use ErrorKind::*;
        let b = ProtocolKind::Basic;
        assert_eq!(R1X.ideal_correction(b), Some(Axis::X));
        assert_eq!(R1Y.ideal_correction(b), Some(Axis::Y));
        assert_eq!(R2Y.ideal_correction(b), Some(Axis::Z));
        assert_eq!(R2Z.ideal_correction(b), None);
    }
}
