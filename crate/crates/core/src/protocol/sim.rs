//! Time-stepped density-matrix evolution of a protocol schedule.

use num_complex::Complex;
use rayon::prelude::*;

use super::schedule::{build_schedule, error_slot_start, steps_in, GateEvent, GateKind};
use super::{ErrorKind, ProtocolConfig, ProtocolKind, PulseShape};
use crate::channels::{apply_damping, lindblad_propagator, QubitDecoherence};
use crate::qmath::{embed_operator, pauli, rotation_gate, Axis, ComplexMatrix, PureState};
use crate::report::{FidelityKind, FidelityReport};
use crate::{Error, Real, Result};

/// Rotation that prepares each of |0⟩, |1⟩, |+⟩, |−⟩, |+i⟩, |−i⟩ from |0⟩.
fn input_rotation<T: Real>(input: usize) -> Option<(Axis, T)> {
    let h = T::FRAC_PI_2();
    match input {
        0 => None,
        1 => Some((Axis::X, T::PI())),
        2 => Some((Axis::Y, h)),
        3 => Some((Axis::Y, -h)),
        4 => Some((Axis::X, -h)),
        _ => Some((Axis::X, h)),
    }
}

/// Drive Hamiltonian that performs `angle` about `axis` on `qubit` over `duration`.
fn drive<T: Real>(axis: Axis, angle: T, duration: T, qubit: usize) -> Result<ComplexMatrix<T>> {
    embed_operator(&pauli(axis).scale_real(angle / (duration + duration)), &[qubit], 2)
}

fn cz_phase<T: Real>(duration: T) -> ComplexMatrix<T> {
    let z = Complex::new(T::zero(), T::zero());
    ComplexMatrix::diag(&[z, z, z, Complex::new(-T::PI() / duration, T::zero())])
}

fn ideal_gate<T: Real>(axis: Axis, angle: T, qubit: usize) -> Result<ComplexMatrix<T>> {
    embed_operator(&rotation_gate(axis, angle), &[qubit], 2)
}

/// Drive of a timed event; `None` for idles and for the input preparation,
/// which is filled in per input.
fn event_drive<T: Real>(e: &GateEvent<T>) -> Result<Option<ComplexMatrix<T>>> {
    Ok(match e.kind {
        GateKind::HalfPiY { sign } => Some(drive(Axis::Y, T::FRAC_PI_2() * T::lit(sign as f64), e.duration, e.targets[0])?),
        GateKind::Cz => Some(cz_phase(e.duration)),
        GateKind::ErrorRotation { axis, angle } => Some(drive(axis, angle, e.duration, e.targets[0])?),
        _ => None,
    })
}

fn event_gate<T: Real>(e: &GateEvent<T>) -> Result<Option<ComplexMatrix<T>>> {
    Ok(match e.kind {
        GateKind::HalfPiY { sign } => Some(ideal_gate(Axis::Y, T::FRAC_PI_2() * T::lit(sign as f64), e.targets[0])?),
        GateKind::Cz => Some(crate::qmath::cz()),
        GateKind::ErrorRotation { axis, angle } => Some(ideal_gate(axis, angle, e.targets[0])?),
        _ => None,
    })
}

enum Piece<T: Real> {
    /// Continuous evolution; `prep` marks intervals where the input drive is on.
    Evolve {
        start: T,
        steps: usize,
        hamiltonian: ComplexMatrix<T>,
        prep_duration: Option<T>,
        decohere: bool,
    },
    Gate {
        time: T,
        unitary: Option<ComplexMatrix<T>>,
    },
    Damp {
        time: T,
        p: T,
    },
}

/// Compiled schedule with the input-independent propagators cached.
struct Engine<T: Real> {
    pieces: Vec<Piece<T>>,
    propagators: Vec<Option<ComplexMatrix<T>>>,
    qubits: [QubitDecoherence<T>; 2],
    dt: T,
}

fn close<T: Real>(a: T, b: T) -> bool {
    (a - b).abs() <= T::lit(1e-9) * (T::one() + a.abs())
}

impl<T: Real> Engine<T> {
    fn new(config: &ProtocolConfig<T>) -> Result<Self> {
        let events = build_schedule(config)?;
        let instant = config.pulse == PulseShape::Instant;
        let driven = |e: &GateEvent<T>| !matches!(e.kind, GateKind::Idle | GateKind::StorageDamping { .. });
        let mid = |e: &GateEvent<T>| e.start + e.duration * T::lit(0.5);

        let mut times: Vec<T> = events.iter().flat_map(|e| [e.start, e.end()]).collect();
        if instant {
            times.extend(events.iter().filter(|e| driven(e)).map(mid));
        }
        times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
        times.dedup_by(|a, b| close(*a, *b));

        let err_start = error_slot_start(config);
        let err_end = err_start + config.timing.single_qubit;
        let zero = ComplexMatrix::zeros(4, 4);
        let mut pieces = Vec::new();
        for (i, &t) in times.iter().enumerate() {
            for e in &events {
                if let GateKind::StorageDamping { p } = e.kind {
                    if close(e.start, t) {
                        pieces.push(Piece::Damp { time: t, p });
                    }
                }
            }
            if instant {
                for e in events.iter().filter(|e| driven(e) && close(mid(e), t)) {
                    let unitary = match e.kind {
                        GateKind::PrepareMain => None,
                        _ => event_gate(e)?,
                    };
                    pieces.push(Piece::Gate { time: t, unitary });
                }
            }
            let Some(&next) = times.get(i + 1) else { break };
            let covering: Vec<&GateEvent<T>> = events
                .iter()
                .filter(|e| e.duration > T::zero() && e.start <= t + T::lit(1e-9) && e.end() >= next - T::lit(1e-9))
                .collect();
            let mut hamiltonian = zero.clone();
            let mut prep_duration = None;
            if !instant {
                for e in &covering {
                    if e.kind == GateKind::PrepareMain {
                        prep_duration = Some(e.duration);
                    } else if let Some(h) = event_drive(e)? {
                        hamiltonian = &hamiltonian + &h;
                    }
                }
            }
            let in_error_slot = t >= err_start - T::lit(1e-9) && next <= err_end + T::lit(1e-9);
            pieces.push(Piece::Evolve {
                start: t,
                steps: steps_in(next - t, config.dt)?,
                hamiltonian,
                prep_duration,
                decohere: (config.decohere_error_slot || !in_error_slot)
                    && (config.decohere_during_gates || !covering.iter().any(|e| driven(e))),
            });
        }

        let mut engine = Self {
            pieces,
            propagators: Vec::new(),
            qubits: config.qubits,
            dt: config.dt,
        };
        engine.propagators = engine
            .pieces
            .iter()
            .map(|p| match p {
                Piece::Evolve {
                    hamiltonian,
                    prep_duration: None,
                    decohere,
                    ..
                } => engine.propagator(hamiltonian, *decohere).map(Some),
                _ => Ok(None),
            })
            .collect::<Result<_>>()?;
        Ok(engine)
    }

    fn propagator(&self, hamiltonian: &ComplexMatrix<T>, decohere: bool) -> Result<ComplexMatrix<T>> {
        let ideal = [QubitDecoherence::ideal(); 2];
        let qubits = if decohere { &self.qubits } else { &ideal };
        lindblad_propagator(hamiltonian, qubits, self.dt)
    }

    fn check(rho: &ComplexMatrix<T>, time: T) -> Result<()> {
        let tol = T::input_tol();
        let tr = rho.trace().re;
        if (tr - T::one()).abs() > tol {
            return Err(Error::InvariantViolation {
                time: time.as_f64(),
                what: format!("trace {tr} differs from 1"),
            });
        }
        if !rho.is_positive_semidefinite(tol) {
            return Err(Error::InvariantViolation {
                time: time.as_f64(),
                what: "density matrix has a negative eigenvalue".into(),
            });
        }
        Ok(())
    }

    /// Final two-qubit density matrix for one input.
    fn run(&self, input: usize) -> Result<ComplexMatrix<T>> {
        let prep = input_rotation::<T>(input);
        let mut rho = ComplexMatrix::zeros(4, 4);
        rho.set(0, 0, Complex::new(T::one(), T::zero()));
        for (piece, cached) in self.pieces.iter().zip(&self.propagators) {
            match piece {
                Piece::Evolve {
                    start,
                    steps,
                    hamiltonian,
                    prep_duration,
                    decohere,
                } => {
                    let owned;
                    let prop = match (cached, prep_duration) {
                        (Some(p), _) => p,
                        (None, Some(d)) => {
                            let h = match prep {
                                Some((axis, angle)) => hamiltonian + &drive(axis, angle, *d, 0)?,
                                None => hamiltonian.clone(),
                            };
                            owned = self.propagator(&h, *decohere)?;
                            &owned
                        }
                        (None, None) => unreachable!("uncached piece without input drive"),
                    };
                    let mut v = rho.into_vec();
                    for k in 0..*steps {
                        v = prop.apply(&v)?;
                        let m = ComplexMatrix::from_vec(4, 4, v)?;
                        Self::check(&m, *start + self.dt * T::from_usize_lossy(k + 1))?;
                        v = m.into_vec();
                    }
                    rho = ComplexMatrix::from_vec(4, 4, v)?;
                }
                Piece::Gate { time, unitary } => {
                    let u = match unitary {
                        Some(u) => Some(u.clone()),
                        None => prep.map(|(axis, angle)| ideal_gate(axis, angle, 0)).transpose()?,
                    };
                    if let Some(u) = u {
                        rho = &(&u * &rho) * &u.adjoint();
                        Self::check(&rho, *time)?;
                    }
                }
                Piece::Damp { time, p } => {
                    for q in 0..2 {
                        rho = apply_damping(&rho, *p, q)?;
                    }
                    Self::check(&rho, *time)?;
                }
            }
        }
        Ok(rho)
    }
}

/// Unnormalized main-qubit states for ancilla results 0 and 1.
fn split_by_ancilla<T: Real>(rho: &ComplexMatrix<T>) -> (ComplexMatrix<T>, ComplexMatrix<T>) {
    let mut r0 = ComplexMatrix::zeros(2, 2);
    let mut r1 = ComplexMatrix::zeros(2, 2);
    for a in 0..2 {
        for b in 0..2 {
            r0.set(a, b, rho.get(2 * a, 2 * b));
            r1.set(a, b, rho.get(2 * a + 1, 2 * b + 1));
        }
    }
    (r0, r1)
}

/// Branch states for input `input` (0..6 in the order |0⟩, |1⟩, |+⟩, |−⟩, |+i⟩, |−i⟩).
pub fn simulate<T: Real>(config: &ProtocolConfig<T>, input: usize) -> Result<(ComplexMatrix<T>, ComplexMatrix<T>)> {
    if input >= 6 {
        return Err(Error::InvalidParameter(format!("input index {input} is not in 0..6")));
    }
    Ok(split_by_ancilla(&Engine::new(config)?.run(input)?))
}

/// Branch states for all six inputs and the fidelities derived from them.
#[derive(Clone, Debug)]
pub struct ProtocolResult<T: Real> {
    pub config: ProtocolConfig<T>,
    pub rho0: Vec<ComplexMatrix<T>>,
    pub rho1: Vec<ComplexMatrix<T>>,
    pub p0: Vec<T>,
    pub p1: Vec<T>,
    pub report: FidelityReport<T>,
}

fn expectation<T: Real>(rho: &ComplexMatrix<T>, psi: &PureState<T>) -> T {
    let a = psi.amplitudes();
    let mut s = Complex::new(T::zero(), T::zero());
    for i in 0..2 {
        for j in 0..2 {
            s += a[i].conj() * rho.get(i, j) * a[j];
        }
    }
    s.re
}

impl<T: Real> ProtocolResult<T> {
    fn from_branches(config: ProtocolConfig<T>, branches: Vec<(ComplexMatrix<T>, ComplexMatrix<T>)>) -> Result<Self> {
        let (rho0, rho1): (Vec<_>, Vec<_>) = branches.into_iter().unzip();
        let p0: Vec<T> = rho0.iter().map(|r| r.trace().re).collect();
        let p1: Vec<T> = rho1.iter().map(|r| r.trace().re).collect();
        for (j, (a, b)) in p0.iter().zip(&p1).enumerate() {
            if (*a + *b - T::one()).abs() > T::input_tol() {
                return Err(Error::InvariantViolation {
                    time: config.timing.total(config.protocol).as_f64(),
                    what: format!("branch probabilities for input {j} sum to {}", *a + *b),
                });
            }
        }
        let mut out = Self {
            config,
            rho0,
            rho1,
            p0,
            p1,
            report: FidelityReport::default(),
        };
        let six = T::lit(6.0);
        let f_ign = out.overlaps(|j| &out.rho0[j] + &out.rho1[j]) / six;
        let sel: T = out.p0.iter().copied().sum();
        let report = FidelityReport {
            f_ign: Some(f_ign),
            // Below this the ratio is dominated by round-off in a branch that never occurs.
            f_qed_weighted: (sel > six * T::strict_tol()).then(|| out.overlaps(|j| out.rho0[j].clone()) / sel),
            f_qec: out.f_qec().ok(),
            p_select: Some(sel / six),
            ..Default::default()
        };
        out.report = report.with_chi(FidelityKind::Ignore)?;
        Ok(out)
    }

    fn overlaps(&self, f: impl Fn(usize) -> ComplexMatrix<T>) -> T {
        PureState::<T>::six_probes().iter().enumerate().map(|(j, psi)| expectation(&f(j), psi)).sum()
    }

    /// Average fidelity after the ideal Pauli correction of result-1 runs.
    pub fn f_qec(&self) -> Result<T> {
        if !self.config.qec_available() {
            return Err(Error::QecUnavailable(
                "both qubits relaxed during storage, so result 1 cannot be corrected".into(),
            ));
        }
        let c = match self.config.error.ideal_correction(self.config.protocol) {
            Some(axis) => pauli(axis),
            None => ComplexMatrix::identity(2),
        };
        let cd = c.adjoint();
        Ok(self.overlaps(|j| &self.rho0[j] + &(&(&c * &self.rho1[j]) * &cd)) / T::lit(6.0))
    }
}

/// Runs all six inputs of one configuration.
pub fn simulate_all<T: Real>(config: &ProtocolConfig<T>) -> Result<ProtocolResult<T>> {
    let engine = Engine::new(config)?;
    let branches = (0..6).map(|j| engine.run(j).map(|r| split_by_ancilla(&r))).collect::<Result<Vec<_>>>()?;
    ProtocolResult::from_branches(config.clone(), branches)
}

pub fn protocol_fidelities<T: Real>(config: &ProtocolConfig<T>) -> Result<FidelityReport<T>> {
    Ok(simulate_all(config)?.report)
}

/// One report per rotation angle 2θ, in grid order.
pub fn sweep_theta<T: Real>(config: &ProtocolConfig<T>, theta2_grid: &[T]) -> Result<Vec<FidelityReport<T>>> {
    theta2_grid
        .par_iter()
        .map(|&th| protocol_fidelities(&config.clone().with_theta2(th)))
        .collect()
}

/// One report per storage relaxation probability, in grid order.
pub fn sweep_storage<T: Real>(config: &ProtocolConfig<T>, p_grid: &[T]) -> Result<Vec<FidelityReport<T>>> {
    if config.protocol != ProtocolKind::AncillaRotated || config.error != ErrorKind::StorageDamping {
        return Err(Error::Incompatible("storage sweeps need fig7b with the storage error".into()));
    }
    p_grid
        .par_iter()
        .map(|&p| protocol_fidelities(&config.clone().with_storage_p(p)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use std::f64::consts::PI;

    fn cfg(p: ProtocolKind, e: ErrorKind, th: f64) -> ProtocolConfig<f64> {
        ProtocolConfig::new(p, e).with_theta2(th)
    }

    #[test]
    fn ideal_bit_flip_branches() {
        let th = 0.8;
        let c = cfg(ProtocolKind::Basic, ErrorKind::R1X, th);
        let r = simulate_all(&c).unwrap();
        for j in 0..6 {
            assert!((r.p0[j] - (th / 2.0).cos().powi(2)).abs() < 1e-12);
            assert!((r.p1[j] - (th / 2.0).sin().powi(2)).abs() < 1e-12);
        }
        let want = (th / 2.0).cos().powi(2) + (th / 2.0).sin().powi(2) / 3.0;
        assert!((r.report.f_ign.unwrap() - want).abs() < 1e-12);
        assert!((r.report.f_qed_weighted.unwrap() - 1.0).abs() < 1e-12);
        assert!((r.report.f_qec.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ideal_detectable_errors_fully_corrected() {
        for p in ProtocolKind::ALL {
            for e in ErrorKind::ALL.into_iter().filter(|e| e.rotation().is_some()) {
                let r = simulate_all(&cfg(p, e, 1.3)).unwrap();
                let rep = &r.report;
                if e.is_detectable(p) {
                    assert!((rep.f_qec.unwrap() - 1.0).abs() < 1e-10, "{p} {e}: {:?}", rep);
                    assert!((rep.f_qed_weighted.unwrap() - 1.0).abs() < 1e-10, "{p} {e}");
                } else {
                    assert!(r.p1.iter().all(|&x| x.abs() < 1e-12), "{p} {e}: {:?}", r.p1);
                }
            }
        }
    }

    #[test]
    fn no_selected_runs_gives_no_conditional_fidelity() {
        let r = protocol_fidelities(&cfg(ProtocolKind::Basic, ErrorKind::R1X, PI)).unwrap();
        assert_eq!(r.f_qed_weighted, None);
        assert!((r.f_ign.unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(r.p_select.unwrap() < 1e-12);
    }

    #[test]
    fn ancilla_phase_error_leaves_main_qubit() {
        let r = simulate_all(&cfg(ProtocolKind::Basic, ErrorKind::R2Z, 2.0)).unwrap();
        assert!((r.report.f_ign.unwrap() - 1.0).abs() < 1e-12);
        assert!((r.p1[0] - 1.0f64.sin().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn ideal_storage_matches_closed_form() {
        let base = ProtocolConfig::new(ProtocolKind::AncillaRotated, ErrorKind::StorageDamping);
        let grid = [0.0f64, 0.1, 0.3, 0.5, 0.8];
        let reps = sweep_storage(&base, &grid).unwrap();
        for (p, r) in grid.iter().zip(&reps) {
            let want = analytic::f_qed_2q_weighted(*p, *p).unwrap();
            assert!((r.f_qed_weighted.unwrap() - want).abs() < 1e-10, "p={p}");
            assert_eq!(r.f_qec.is_some(), *p == 0.0);
        }
        let res = simulate_all(&base.with_storage_p(0.2)).unwrap();
        assert!(matches!(res.f_qec(), Err(Error::QecUnavailable(_))));
    }

    #[test]
    fn finite_lifetime_reference_values() {
        let c = cfg(ProtocolKind::Basic, ErrorKind::R1X, 0.0).with_t1_t2(500.0, 500.0).unwrap();
        let r = protocol_fidelities(&c).unwrap();
        assert!((r.f_ign.unwrap() - 0.85886).abs() < 5e-5, "{r:?}");
        assert!((r.f_qed_weighted.unwrap() - 0.89644).abs() < 5e-5);
        assert!((r.f_qec.unwrap() - 0.83337).abs() < 5e-5);
    }

    #[test]
    fn halving_dt_is_converged() {
        let c = cfg(ProtocolKind::MainRotated, ErrorKind::R1Y, 1.1).with_t1_t2(300.0, 300.0).unwrap();
        let a = protocol_fidelities(&c).unwrap();
        let b = protocol_fidelities(&c.clone().with_dt(0.25)).unwrap();
        for k in [FidelityKind::Ignore, FidelityKind::QedWeighted, FidelityKind::Qec] {
            assert!((a.get(k).unwrap() - b.get(k).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn longer_lifetimes_help() {
        let mut prev: Option<FidelityReport<f64>> = None;
        for t1 in [300.0, 500.0, 700.0] {
            let r = protocol_fidelities(&cfg(ProtocolKind::Basic, ErrorKind::R1Y, PI / 3.0).with_t1_t2(t1, t1).unwrap()).unwrap();
            if let Some(p) = prev {
                for k in [FidelityKind::Ignore, FidelityKind::QedWeighted, FidelityKind::Qec] {
                    assert!(r.get(k).unwrap() >= p.get(k).unwrap());
                }
            }
            prev = Some(r);
        }
    }

    #[test]
    fn instant_pulses_agree_when_ideal() {
        let mut c = cfg(ProtocolKind::Basic, ErrorKind::R1X, 0.9);
        let a = protocol_fidelities(&c).unwrap();
        c.pulse = PulseShape::Instant;
        let b = protocol_fidelities(&c).unwrap();
        assert!((a.f_ign.unwrap() - b.f_ign.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn decoherence_knobs_only_remove_errors() {
        let c = cfg(ProtocolKind::Basic, ErrorKind::R1X, 0.0).with_t1_t2(500.0, 500.0).unwrap();
        let full = protocol_fidelities(&c).unwrap().f_ign.unwrap();
        let mut quiet_slot = c.clone();
        quiet_slot.decohere_error_slot = false;
        let slot = protocol_fidelities(&quiet_slot).unwrap().f_ign.unwrap();
        let mut quiet_gates = c.clone();
        quiet_gates.decohere_during_gates = false;
        let gates = protocol_fidelities(&quiet_gates).unwrap().f_ign.unwrap();
        assert!(full < slot && slot < gates, "{full} {slot} {gates}");
    }

    #[test]
    fn rejects_bad_input_and_dt() {
        let c = cfg(ProtocolKind::Basic, ErrorKind::R1X, 0.0);
        assert!(simulate(&c, 6).is_err());
        assert!(simulate(&c.clone().with_dt(0.3), 0).is_err());
        assert!(simulate(&c, 5).is_ok());
    }
}
