//! Zero-temperature energy relaxation and pure dephasing as Kraus maps.

use num_complex::Complex;

use crate::error::check_probability;
use crate::qmath::{apply_kraus, embed_operator, ComplexMatrix};
use crate::{Error, Real, Result};

/// p = 1 − e^{−t/T1}. `t1 = ∞` gives 0.
pub fn relaxation_probability<T: Real>(t: T, t1: T) -> Result<T> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("duration t = {t} must be finite and >= 0")));
    }
    if !(t1 > T::zero()) {
        return Err(Error::InvalidParameter(format!("T1 = {t1} must be positive")));
    }
    Ok(-(-t / t1).exp_m1())
}

/// Single-qubit energy relaxation strength.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DampingParams<T> {
    p: T,
    // 1 − p, kept separately so that e^{−t/T1} keeps full precision when p → 1
    survival: T,
}

impl<T: Real> DampingParams<T> {
    pub fn new(p: T) -> Result<Self> {
        check_probability("p", p)?;
        Ok(Self { p, survival: T::one() - p })
    }

    pub fn from_time(t: T, t1: T) -> Result<Self> {
        let p = relaxation_probability(t, t1)?;
        Ok(Self { p, survival: (-t / t1).exp() })
    }

    #[inline]
    pub fn p(&self) -> T {
        self.p
    }

    #[inline]
    pub fn survival(&self) -> T {
        self.survival
    }

    pub fn kraus(&self) -> (ComplexMatrix<T>, ComplexMatrix<T>) {
        let z = T::zero();
        let relaxed = ComplexMatrix::from_real(2, 2, &[z, self.p.sqrt(), z, z]).expect("2x2");
        let not_relaxed = ComplexMatrix::from_real(2, 2, &[T::one(), z, z, self.survival.sqrt()]).expect("2x2");
        (relaxed, not_relaxed)
    }
}

/// Single-qubit pure-dephasing strength; coherences scale by √(1−λ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DephasingParams<T> {
    lambda: T,
    keep: T,
}

impl<T: Real> DephasingParams<T> {
    pub fn new(lambda: T) -> Result<Self> {
        check_probability("lambda", lambda)?;
        Ok(Self { lambda, keep: T::one() - lambda })
    }

    /// λ with √(1−λ) = e^{−t/T_φ}, i.e. exact exponential decay of coherence.
    pub fn from_time(t: T, t_phi: T) -> Result<Self> {
        if !(t >= T::zero()) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("duration t = {t} must be finite and >= 0")));
        }
        if !(t_phi > T::zero()) {
            return Err(Error::InvalidParameter(format!("T_phi = {t_phi} must be positive")));
        }
        let rate = -(t + t) / t_phi;
        Ok(Self { lambda: -rate.exp_m1(), keep: rate.exp() })
    }

    #[inline]
    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Factor applied to the off-diagonal elements.
    pub fn coherence_factor(&self) -> T {
        self.keep.sqrt()
    }

    pub fn kraus(&self) -> (ComplexMatrix<T>, ComplexMatrix<T>) {
        let z = T::zero();
        let k0 = ComplexMatrix::from_real(2, 2, &[T::one(), z, z, self.keep.sqrt()]).expect("2x2");
        let k1 = ComplexMatrix::from_real(2, 2, &[z, z, z, self.lambda.sqrt()]).expect("2x2");
        (k0, k1)
    }
}

/// Relaxation and pure-dephasing times of one qubit; `∞` disables a process.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitDecoherence<T> {
    t1: T,
    t_phi: T,
}

impl<T: Real> QubitDecoherence<T> {
    pub fn from_t1_tphi(t1: T, t_phi: T) -> Result<Self> {
        if !(t1 > T::zero()) {
            return Err(Error::InvalidParameter(format!("T1 = {t1} must be positive")));
        }
        if !(t_phi > T::zero()) {
            return Err(Error::InvalidParameter(format!("T_phi = {t_phi} must be positive")));
        }
        Ok(Self { t1, t_phi })
    }

    /// Uses 1/T2 = 1/(2T1) + 1/T_φ; T1 = T2 gives T_φ = 2T1.
    pub fn from_t1_t2(t1: T, t2: T) -> Result<Self> {
        if !(t1 > T::zero()) || !(t2 > T::zero()) {
            return Err(Error::InvalidParameter(format!("T1 = {t1}, T2 = {t2} must be positive")));
        }
        let rate = T::one() / t2 - T::one() / (t1 + t1);
        if rate < T::zero() {
            return Err(Error::InvalidParameter(format!("T2 = {t2} exceeds 2*T1 = {}", t1 + t1)));
        }
        let t_phi = if rate == T::zero() { T::infinity() } else { T::one() / rate };
        Self::from_t1_tphi(t1, t_phi)
    }

    /// Accepts any consistent combination; T2 and T_φ together must agree to 1e-9 relative.
    pub fn from_times(t1: T, t2: Option<T>, t_phi: Option<T>) -> Result<Self> {
        match (t2, t_phi) {
            (None, None) => Self::from_t1_tphi(t1, T::infinity()),
            (None, Some(tp)) => Self::from_t1_tphi(t1, tp),
            (Some(t2), None) => Self::from_t1_t2(t1, t2),
            (Some(t2), Some(tp)) => {
                let derived = Self::from_t1_t2(t1, t2)?;
                let consistent = if derived.t_phi.is_infinite() || tp.is_infinite() {
                    derived.t_phi == tp
                } else {
                    ((derived.t_phi - tp) / tp).abs() <= T::lit(1e-9)
                };
                if !consistent {
                    return Err(Error::InvalidParameter(format!(
                        "T2 = {t2} implies T_phi = {}, but T_phi = {tp} was given",
                        derived.t_phi
                    )));
                }
                Self::from_t1_tphi(t1, tp)
            }
        }
    }

    /// No decoherence at all.
    pub fn ideal() -> Self {
        Self {
            t1: T::infinity(),
            t_phi: T::infinity(),
        }
    }

    #[inline]
    pub fn t1(&self) -> T {
        self.t1
    }

    #[inline]
    pub fn t_phi(&self) -> T {
        self.t_phi
    }

    pub fn t2(&self) -> T {
        T::one() / (T::one() / (self.t1 + self.t1) + T::one() / self.t_phi)
    }

    pub fn is_ideal(&self) -> bool {
        self.t1.is_infinite() && self.t_phi.is_infinite()
    }
}

/// (A_r, A_n): the "relaxed" and "not relaxed" Kraus factors.
pub fn damping_kraus<T: Real>(p: T) -> Result<(ComplexMatrix<T>, ComplexMatrix<T>)> {
    Ok(DampingParams::new(p)?.kraus())
}

/// Phase-damping Kraus pair diag(1, √(1−λ)), diag(0, √λ).
pub fn dephasing_kraus<T: Real>(lambda: T) -> Result<(ComplexMatrix<T>, ComplexMatrix<T>)> {
    Ok(DephasingParams::new(lambda)?.kraus())
}

/// A single-qubit channel in Kraus form.
#[derive(Clone, Debug)]
pub struct KrausChannel<T: Real> {
    ops: Vec<ComplexMatrix<T>>,
}

impl<T: Real> KrausChannel<T> {
    pub fn new(ops: Vec<ComplexMatrix<T>>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::InvalidParameter("Kraus channel needs at least one operator".into()));
        }
        let d = ops[0].rows();
        if ops.iter().any(|k| k.rows() != d || k.cols() != d) {
            return Err(Error::DimensionMismatch("Kraus operators of differing shape".into()));
        }
        Ok(Self { ops })
    }

    pub fn damping(p: T) -> Result<Self> {
        let (r, n) = damping_kraus(p)?;
        Self::new(vec![r, n])
    }

    pub fn dephasing(lambda: T) -> Result<Self> {
        let (a, b) = dephasing_kraus(lambda)?;
        Self::new(vec![a, b])
    }

    pub fn operators(&self) -> &[ComplexMatrix<T>] {
        &self.ops
    }

    /// max |Σ K†K − I|
    pub fn completeness_deviation(&self) -> T {
        let d = self.ops[0].rows();
        let mut sum = ComplexMatrix::zeros(d, d);
        for k in &self.ops {
            sum = &sum + &(&k.adjoint() * k);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(d))
    }

    pub fn apply(&self, rho: &ComplexMatrix<T>, target: usize) -> Result<ComplexMatrix<T>> {
        apply_kraus(rho, &self.ops, &[target])
    }
}

/// A_r ρ A_r† + A_n ρ A_n† on `target`.
pub fn apply_damping<T: Real>(rho: &ComplexMatrix<T>, p: T, target: usize) -> Result<ComplexMatrix<T>> {
    KrausChannel::damping(p)?.apply(rho, target)
}

pub fn apply_dephasing<T: Real>(rho: &ComplexMatrix<T>, lambda: T, target: usize) -> Result<ComplexMatrix<T>> {
    KrausChannel::dephasing(lambda)?.apply(rho, target)
}

/// Evolves every qubit independently for `dt` under its own T1 and T_φ.
///
/// Relaxation and dephasing commute, so the order of the two sub-channels is immaterial.
pub fn step_decoherence<T: Real>(
    rho: &ComplexMatrix<T>,
    dt: T,
    per_qubit: &[QubitDecoherence<T>],
) -> Result<ComplexMatrix<T>> {
    if !(dt > T::zero()) {
        return Err(Error::InvalidParameter(format!("time step dt = {dt} must be positive")));
    }
    if rho.rows() != 1usize << per_qubit.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} decoherence entries for a {}x{} density matrix",
            per_qubit.len(),
            rho.rows(),
            rho.cols()
        )));
    }
    let mut out = rho.clone();
    for (q, d) in per_qubit.iter().enumerate() {
        let damping = DampingParams::from_time(dt, d.t1)?;
        if damping.p() > T::zero() {
            let (a, b) = damping.kraus();
            out = apply_kraus(&out, &[a, b], &[q])?;
        }
        let dephasing = DephasingParams::from_time(dt, d.t_phi)?;
        if dephasing.lambda() > T::zero() {
            let (a, b) = dephasing.kraus();
            out = apply_kraus(&out, &[a, b], &[q])?;
        }
    }
    Ok(out)
}

/// Row-major vectorization, vec(ρ)[i·d + j] = ρ_ij.
pub fn vectorize<T: Real>(rho: &ComplexMatrix<T>) -> Vec<Complex<T>> {
    rho.as_slice().to_vec()
}

pub fn unvectorize<T: Real>(v: Vec<Complex<T>>) -> Result<ComplexMatrix<T>> {
    let d = (v.len() as f64).sqrt().round() as usize;
    if d * d != v.len() {
        return Err(Error::DimensionMismatch(format!("vector of length {} is not a square matrix", v.len())));
    }
    ComplexMatrix::from_vec(d, d, v)
}

/// Generator 𝓛 of dρ/dt = −i[H, ρ] + Σ_q (relaxation + dephasing), acting on row-major vec(ρ).
///
/// Relaxation uses the lowering operator |0⟩⟨1| at rate 1/T1; dephasing is
/// (1/2T_φ)(ZρZ − ρ), so coherences decay as e^{−t/T_φ}.
pub fn lindblad_generator<T: Real>(
    hamiltonian: &ComplexMatrix<T>,
    per_qubit: &[QubitDecoherence<T>],
) -> Result<ComplexMatrix<T>> {
    let n = per_qubit.len();
    let d = 1usize << n;
    if hamiltonian.rows() != d || hamiltonian.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} Hamiltonian for {n} qubits",
            hamiltonian.rows(),
            hamiltonian.cols()
        )));
    }
    let id = ComplexMatrix::<T>::identity(d);
    let minus_i = Complex::new(T::zero(), -T::one());
    let mut gen = (&hamiltonian.kron(&id)? - &id.kron(&hamiltonian.transpose())?).scale(minus_i);

    let z = T::zero();
    let lowering = ComplexMatrix::from_real(2, 2, &[z, T::one(), z, z])?;
    let pauli_z = ComplexMatrix::from_real(2, 2, &[T::one(), z, z, -T::one()])?;
    for (q, dec) in per_qubit.iter().enumerate() {
        let mut jumps = Vec::new();
        if dec.t1.is_finite() {
            jumps.push((T::one() / dec.t1, &lowering));
        }
        if dec.t_phi.is_finite() {
            jumps.push((T::one() / (dec.t_phi + dec.t_phi), &pauli_z));
        }
        for (rate, op) in jumps {
            let l = embed_operator(op, &[q], n)?;
            let ldl = &l.adjoint() * &l;
            let half = T::lit(0.5);
            let term = &(&l.kron(&l.conj())? - &ldl.kron(&id)?.scale_real(half)) - &id.kron(&ldl.transpose())?.scale_real(half);
            gen = &gen + &term.scale_real(rate);
        }
    }
    Ok(gen)
}

/// exp(𝓛·dt)
pub fn lindblad_propagator<T: Real>(
    hamiltonian: &ComplexMatrix<T>,
    per_qubit: &[QubitDecoherence<T>],
    dt: T,
) -> Result<ComplexMatrix<T>> {
    lindblad_generator(hamiltonian, per_qubit)?.scale_real(dt).expm()
}

/// Applies a superoperator to ρ.
pub fn apply_superoperator<T: Real>(
    superop: &ComplexMatrix<T>,
    rho: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    unvectorize(superop.apply(rho.as_slice())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{BlochPoint, PureState};

    fn rho_in() -> ComplexMatrix<f64> {
        BlochPoint::new(1.1, 0.4).unwrap().to_state().density()
    }

    #[test]
    fn damping_limits() {
        let (r, n) = damping_kraus(0.0f64).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::zeros(2, 2)) == 0.0);
        assert!(n.max_abs_diff(&ComplexMatrix::identity(2)) == 0.0);
        let (r, n) = damping_kraus(1.0f64).unwrap();
        assert_eq!(r.get(0, 1).re, 1.0);
        assert_eq!(n.get(1, 1).re, 0.0);
        assert!(damping_kraus(1.5f64).is_err());
        assert!(damping_kraus(-0.1f64).is_err());
    }

    #[test]
    fn damping_reproduces_density_matrix_form() {
        let p = 0.19;
        let rho = rho_in();
        let out = apply_damping(&rho, p, 0).unwrap();
        let (a2, b2) = (rho.get(0, 0).re, rho.get(1, 1).re);
        assert!((out.get(1, 1).re - b2 * 0.81).abs() < 1e-15);
        assert!((out.get(0, 0).re - (a2 + b2 * 0.19)).abs() < 1e-15);
        assert!((out.get(0, 1) - rho.get(0, 1) * 0.9).norm() < 1e-15);
    }

    #[test]
    fn ground_state_is_fixed() {
        let g = PureState::<f64>::basis(1, 0).unwrap().density();
        for p in [0.0, 0.3, 1.0] {
            assert!(apply_damping(&g, p, 0).unwrap().max_abs_diff(&g) < 1e-16);
        }
    }

    #[test]
    fn dephasing_limits_and_semigroup() {
        let rho = rho_in();
        assert!(apply_dephasing(&rho, 0.0, 0).unwrap().max_abs_diff(&rho) < 1e-16);
        let full = apply_dephasing(&rho, 1.0, 0).unwrap();
        assert!(full.get(0, 1).norm() < 1e-16);
        assert_eq!(full.get(0, 0), rho.get(0, 0));
        let one = DephasingParams::from_time(3.0, 20.0).unwrap().lambda();
        let two = DephasingParams::from_time(6.0, 20.0).unwrap().lambda();
        let twice = apply_dephasing(&apply_dephasing(&rho, one, 0).unwrap(), one, 0).unwrap();
        assert!(twice.max_abs_diff(&apply_dephasing(&rho, two, 0).unwrap()) < 1e-15);
    }

    #[test]
    fn channels_are_trace_preserving() {
        for x in [0.0, 0.2, 0.77, 1.0] {
            assert!(KrausChannel::damping(x).unwrap().completeness_deviation() < 1e-14);
            assert!(KrausChannel::dephasing(x).unwrap().completeness_deviation() < 1e-14);
        }
    }

    #[test]
    fn t2_conversions() {
        let d = QubitDecoherence::<f64>::from_t1_t2(500.0, 500.0).unwrap();
        assert!((d.t_phi() - 1000.0).abs() < 1e-9);
        assert!((d.t2() - 500.0).abs() < 1e-9);
        let d = QubitDecoherence::<f64>::from_t1_t2(500.0, 1000.0).unwrap();
        assert!(d.t_phi().is_infinite());
        assert!(QubitDecoherence::from_t1_t2(500.0, 1200.0).is_err());
        assert!(QubitDecoherence::from_times(500.0, Some(500.0), Some(1000.0)).is_ok());
        assert!(QubitDecoherence::from_times(500.0, Some(500.0), Some(1000.01)).is_err());
        assert!(QubitDecoherence::from_t1_tphi(-1.0, 3.0).is_err());
        assert!(QubitDecoherence::from_t1_tphi(f64::INFINITY, f64::INFINITY).is_ok());
    }

    #[test]
    fn step_examples() {
        let rho = rho_in();
        let ideal = [QubitDecoherence::ideal()];
        assert!(step_decoherence(&rho, 1.0, &ideal).unwrap().max_abs_diff(&rho) < 1e-16);

        let dec = [QubitDecoherence::from_t1_t2(500.0, 500.0).unwrap()];
        let excited = PureState::<f64>::basis(1, 1).unwrap().density();
        let out = step_decoherence(&excited, 135.0, &dec).unwrap();
        assert!((out.get(1, 1).re - (-0.27f64).exp()).abs() < 1e-14);

        let mut split = rho.clone();
        for _ in 0..10 {
            split = step_decoherence(&split, 13.5, &dec).unwrap();
        }
        let once = step_decoherence(&rho, 135.0, &dec).unwrap();
        assert!(split.max_abs_diff(&once) < 1e-12);
        assert!((once.get(0, 1).norm() - rho.get(0, 1).norm() * (-0.27f64).exp()).abs() < 1e-14);
        assert!(step_decoherence(&rho, 0.0, &dec).is_err());
    }

    #[test]
    fn sub_channels_commute() {
        let rho = rho_in();
        let a = apply_dephasing(&apply_damping(&rho, 0.3, 0).unwrap(), 0.4, 0).unwrap();
        let b = apply_damping(&apply_dephasing(&rho, 0.4, 0).unwrap(), 0.3, 0).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-15);
    }

    #[test]
    fn free_lindblad_evolution_matches_channels() {
        let dec = [
            QubitDecoherence::from_t1_t2(500.0, 500.0).unwrap(),
            QubitDecoherence::from_t1_tphi(300.0, 700.0).unwrap(),
        ];
        let h = ComplexMatrix::zeros(4, 4);
        let prop = lindblad_propagator(&h, &dec, 7.0).unwrap();
        let psi = BlochPoint::new(1.1, 0.4).unwrap().to_state().tensor(&BlochPoint::new(2.0, 5.0).unwrap().to_state()).unwrap();
        let rho = psi.density();
        let via_l = apply_superoperator(&prop, &rho).unwrap();
        let via_k = step_decoherence(&rho, 7.0, &dec).unwrap();
        assert!(via_l.max_abs_diff(&via_k) < 1e-13);
    }
}
