use crate::qmath::Axis;
use crate::{Error, Real, Result};

use super::{ErrorKind, ProtocolConfig, ProtocolKind};

/// Slot durations in nanoseconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Timing<T> {
    /// Input preparation, ±Y/2 and error rotations.
    pub single_qubit: T,
    pub cz: T,
    /// Idle gap after each pulse.
    pub spacing: T,
}

impl<T: Real> Default for Timing<T> {
    fn default() -> Self {
        Self {
            single_qubit: T::lit(10.0),
            cz: T::lit(40.0),
            spacing: T::lit(5.0),
        }
    }
}

impl<T: Real> Timing<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("single_qubit", self.single_qubit), ("cz", self.cz)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} duration {v} must be positive")));
            }
        }
        if !(self.spacing >= T::zero()) || !self.spacing.is_finite() {
            return Err(Error::InvalidParameter(format!("spacing {} must be non-negative", self.spacing)));
        }
        Ok(())
    }

    /// Active duration of the circuit, storage excluded.
    pub fn total(&self, protocol: ProtocolKind) -> T {
        let singles = match protocol {
            ProtocolKind::Basic => 3.0,
            ProtocolKind::MainRotated | ProtocolKind::AncillaRotated => 5.0,
        };
        T::lit(singles) * self.single_qubit + T::lit(2.0) * self.cz + T::lit(5.0) * self.spacing
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateKind<T> {
    /// Rotation preparing one of the six inputs; which one is chosen at simulation time.
    PrepareMain,
    /// Y rotation by `sign`·π/2.
    HalfPiY { sign: i8 },
    Cz,
    ErrorRotation { axis: Axis, angle: T },
    /// Instantaneous relaxation of every target with probability `p`.
    StorageDamping { p: T },
    Idle,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateEvent<T> {
    pub kind: GateKind<T>,
    pub start: T,
    pub duration: T,
    pub targets: Vec<usize>,
}

impl<T: Real> GateEvent<T> {
    pub fn end(&self) -> T {
        self.start + self.duration
    }
}

struct Builder<T> {
    now: T,
    events: Vec<GateEvent<T>>,
}

impl<T: Real> Builder<T> {
    fn push(&mut self, kind: GateKind<T>, duration: T, targets: &[usize]) {
        self.events.push(GateEvent {
            kind,
            start: self.now,
            duration,
            targets: targets.to_vec(),
        });
    }

    fn advance(&mut self, duration: T) {
        self.now += duration;
    }

    fn slot(&mut self, kind: GateKind<T>, duration: T, targets: &[usize]) {
        self.push(kind, duration, targets);
        self.advance(duration);
    }

    fn idle(&mut self, duration: T) {
        if duration > T::zero() {
            self.slot(GateKind::Idle, duration, &[0, 1]);
        }
    }
}

/// Lays out the gate sequence of the configured protocol.
///
/// Input preparation runs concurrently with the encoding Y/2 on the ancilla,
/// and every pulse is followed by one spacing. The rotated variants put their
/// two extra Y/2 pulses directly before and after the error slot.
pub fn build_schedule<T: Real>(config: &ProtocolConfig<T>) -> Result<Vec<GateEvent<T>>> {
    config.validate()?;
    let t = config.timing;
    let half = |sign: i8| GateKind::HalfPiY { sign };
    let mut b = Builder {
        now: T::zero(),
        events: Vec::new(),
    };

    b.push(GateKind::PrepareMain, t.single_qubit, &[0]);
    b.slot(half(1), t.single_qubit, &[1]);
    b.idle(t.spacing);
    b.slot(GateKind::Cz, t.cz, &[0, 1]);
    b.idle(t.spacing);

    let frame = match config.protocol {
        ProtocolKind::Basic => None,
        ProtocolKind::MainRotated => Some((0, 1i8)),
        ProtocolKind::AncillaRotated => Some((1, -1i8)),
    };
    if let Some((q, s)) = frame {
        b.slot(half(s), t.single_qubit, &[q]);
    }
    if config.error == ErrorKind::StorageDamping || config.storage_p > T::zero() {
        b.push(GateKind::StorageDamping { p: config.storage_p }, T::zero(), &[0, 1]);
    }
    match config.error.rotation() {
        Some((q, axis)) => b.slot(GateKind::ErrorRotation { axis, angle: config.theta2 }, t.single_qubit, &[q]),
        None => b.slot(GateKind::Idle, t.single_qubit, &[0, 1]),
    }
    if let Some((q, s)) = frame {
        b.slot(half(-s), t.single_qubit, &[q]);
    }

    b.idle(t.spacing);
    b.slot(GateKind::Cz, t.cz, &[0, 1]);
    b.idle(t.spacing);
    b.slot(half(-1), t.single_qubit, &[1]);
    b.idle(t.spacing);

    let expected = t.total(config.protocol);
    if (b.now - expected).abs() > T::input_tol() * expected {
        return Err(Error::InvariantViolation {
            time: b.now.as_f64(),
            what: format!("schedule lasts {} ns, expected {expected} ns", b.now),
        });
    }
    check_overlap(&b.events)?;
    Ok(b.events)
}

fn check_overlap<T: Real>(events: &[GateEvent<T>]) -> Result<()> {
    let tol = T::input_tol();
    for (i, a) in events.iter().enumerate() {
        for c in &events[i + 1..] {
            let shared = a.targets.iter().any(|q| c.targets.contains(q));
            let timed = a.duration > T::zero() && c.duration > T::zero();
            if shared && timed && a.start < c.end() - tol && c.start < a.end() - tol {
                return Err(Error::InvariantViolation {
                    time: c.start.as_f64(),
                    what: format!("{:?} overlaps {:?} on a shared qubit", a.kind, c.kind),
                });
            }
        }
    }
    Ok(())
}

/// Start of the error (or storage) slot.
pub(crate) fn error_slot_start<T: Real>(config: &ProtocolConfig<T>) -> T {
    let t = config.timing;
    let base = t.single_qubit + t.spacing + t.cz + t.spacing;
    match config.protocol {
        ProtocolKind::Basic => base,
        _ => base + t.single_qubit,
    }
}

/// Number of `dt` steps in `duration`, or an error if `dt` does not divide it.
pub(crate) fn steps_in<T: Real>(duration: T, dt: T) -> Result<usize> {
    let ratio = duration / dt;
    let n = ratio.round();
    if (ratio - n).abs() > T::lit(1e-6) {
        return Err(Error::InvalidParameter(format!(
            "time step dt = {dt} ns does not divide the {duration} ns segment"
        )));
    }
    Ok(n.to_usize().unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total(events: &[GateEvent<f64>]) -> f64 {
        events.iter().map(|e| e.end()).fold(0.0, f64::max)
    }

    #[test]
    fn basic_lasts_135() {
        let c = ProtocolConfig::new(ProtocolKind::Basic, ErrorKind::R1X);
        let s = build_schedule(&c).unwrap();
        assert_eq!(total(&s), 135.0);
        let err = s.iter().find(|e| matches!(e.kind, GateKind::ErrorRotation { .. })).unwrap();
        assert_eq!((err.start, err.duration), (60.0, 10.0));
        assert_eq!(s[0].start, s[1].start);
    }

    #[test]
    fn rotated_variants_last_155() {
        for p in [ProtocolKind::MainRotated, ProtocolKind::AncillaRotated] {
            let s = build_schedule(&ProtocolConfig::new(p, ErrorKind::R1Y)).unwrap();
            assert_eq!(total(&s), 155.0, "{p}");
        }
        let c = ProtocolConfig::new(ProtocolKind::AncillaRotated, ErrorKind::StorageDamping).with_storage_p(0.2);
        let s = build_schedule(&c).unwrap();
        assert_eq!(total(&s), 155.0);
        let d = s.iter().find(|e| matches!(e.kind, GateKind::StorageDamping { .. })).unwrap();
        assert_eq!((d.start, d.duration), (70.0, 0.0));
    }

    #[test]
    fn custom_timing_keeps_formula() {
        let mut c = ProtocolConfig::new(ProtocolKind::MainRotated, ErrorKind::R1Z);
        c.timing = Timing {
            single_qubit: 20.0,
            cz: 30.0,
            spacing: 0.0,
        };
        let s = build_schedule(&c).unwrap();
        assert_eq!(total(&s), 160.0);
        assert!(s.iter().all(|e| e.kind != GateKind::Idle || e.duration > 0.0 || e.targets.len() == 2));
    }

    #[test]
    fn dt_divides_segments() {
        assert_eq!(steps_in(40.0, 0.5).unwrap(), 80);
        assert_eq!(steps_in(5.0f64, 0.1).unwrap(), 50);
        assert!(steps_in(5.0, 0.3).is_err());
    }

    #[test]
    fn rejects_storage_in_basic() {
        let c = ProtocolConfig::<f64>::new(ProtocolKind::Basic, ErrorKind::StorageDamping);
        assert!(matches!(build_schedule(&c), Err(Error::Incompatible(_))));
    }
}
