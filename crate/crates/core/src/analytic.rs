//! Closed-form average fidelities of repetitive codes under energy relaxation.
//!
//! Every average runs over the Bloch sphere with x = |β|² uniform on [0, 1].
//! The selected (post-measurement) fidelities all reduce to
//! ⟨(c0 + c1·x + c2·x²)/(1 + b·x)⟩, evaluated by [`rational_average`], which
//! switches to a convergent series when |b| is small to avoid the 0/0
//! cancellation of the logarithmic closed forms.

use crate::channels::relaxation_probability;
use crate::error::check_probability;
use crate::report::{FidelityKind, FidelityReport};
use crate::{Error, Real, Result};

fn third<T: Real>() -> T {
    T::one() / T::lit(3.0)
}

fn sixth<T: Real>() -> T {
    T::one() / T::lit(6.0)
}

fn pow_usize<T: Real>(x: T, n: usize) -> T {
    x.powi(n as i32)
}

/// (1−p)^{N/2}, computed as a power of √(1−p) so odd N stay exact.
fn survival_amplitude<T: Real>(p: T, n: usize) -> T {
    pow_usize((T::one() - p).sqrt(), n)
}

/// [∫x^k/(1+bx) dx over [0,1] for k = 0, 1, 2] by the power series in b.
fn moments_series<T: Real>(b: T) -> [T; 3] {
    let mut out = [T::zero(); 3];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut sum = T::zero();
        let mut power = T::one();
        for n in 0..400usize {
            let term = power / T::from_usize_lossy(n + k + 1);
            sum += term;
            if term.abs() <= T::epsilon() * T::lit(1e-3) * sum.abs() {
                break;
            }
            power *= -b;
        }
        *slot = sum;
    }
    out
}

/// ⟨(c0 + c1·x + c2·x²)/(1 + b·x)⟩ over x uniform on [0, 1]; needs 1 + b ≥ 0.
///
/// When 1 + b = 0 the result is finite only if the numerator vanishes at x = 1;
/// otherwise +∞ (or −∞) is returned.
pub fn rational_average<T: Real>(coeffs: [T; 3], b: T) -> T {
    if b.abs() < T::series_cutoff() {
        rational_series(coeffs, b)
    } else {
        rational_closed(coeffs, b)
    }
}

fn rational_series<T: Real>(coeffs: [T; 3], b: T) -> T {
    let [i0, i1, i2] = moments_series(b);
    coeffs[0] * i0 + coeffs[1] * i1 + coeffs[2] * i2
}

fn rational_closed<T: Real>(coeffs: [T; 3], b: T) -> T {
    let [c0, c1, c2] = coeffs;
    // numerator = (q0 + q1·x)(1 + b·x) + r
    let q1 = c2 / b;
    let q0 = (c1 - q1) / b;
    let r = c0 - q0;
    let poly = q0 + q1 * T::lit(0.5);
    if r == T::zero() {
        return poly;
    }
    poly + r * (b.ln_1p() / b)
}

/// Uniform average of the selected fidelity for one "survivor amplitude"
/// `s` (coherent factor of the no-relaxation branch) and undetected-full-relaxation
/// probability factor `q` (weight of |β|² whose result is |0⟩).
fn selected_uniform<T: Real>(s: T, q: T) -> T {
    let one = T::one();
    let b = s * s + q - one;
    let c1 = (s - one) * T::lit(2.0) + q;
    let c2 = (s - one) * (s - one) - q;
    rational_average([one, c1, c2], b)
}

/// Single qubit: 2/3 + √(1−p)/3 − p/6.
pub fn f_av_1q<T: Real>(p: T) -> Result<T> {
    check_probability("p", p)?;
    Ok(T::lit(2.0) * third::<T>() + (T::one() - p).sqrt() * third::<T>() - p * sixth::<T>())
}

/// Per-branch averages of an unencoded qubit, split by whether it relaxed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionalFidelities1q<T> {
    /// Relaxed branch, uniform weight.
    pub f_av_r: T,
    /// Not-relaxed branch, uniform weight.
    pub f_av_n: T,
    /// Relaxed branch, weighted by branch probability.
    pub f_av_r_weighted: T,
    /// Not-relaxed branch, weighted by branch probability.
    pub f_av_n_weighted: T,
    /// Bloch-averaged branch probabilities.
    pub p_r_avg: T,
    pub p_n_avg: T,
}

impl<T: Real> ConditionalFidelities1q<T> {
    /// Σ F̃·P̄ over both branches; equals [`f_av_1q`].
    pub fn reconstruct(&self) -> T {
        self.f_av_r_weighted * self.p_r_avg + self.f_av_n_weighted * self.p_n_avg
    }
}

pub fn conditional_fidelities_1q<T: Real>(p: T) -> Result<ConditionalFidelities1q<T>> {
    check_probability("p", p)?;
    let s = (T::one() - p).sqrt();
    let half = T::lit(0.5);
    Ok(ConditionalFidelities1q {
        f_av_r: half,
        f_av_n: selected_uniform(s, T::zero()),
        f_av_r_weighted: third(),
        f_av_n_weighted: (T::lit(2.0) - p + s) / (T::lit(3.0) - T::lit(1.5) * p),
        p_r_avg: p * half,
        p_n_avg: T::one() - p * half,
    })
}

/// Two-qubit encoding, measurement ignored.
pub fn f_ign_2q<T: Real>(p1: T, p2: T) -> Result<T> {
    check_probability("p1", p1)?;
    check_probability("p2", p2)?;
    let s = ((T::one() - p1) * (T::one() - p2)).sqrt();
    Ok(T::lit(2.0) * third::<T>() + s * third::<T>() - p1 * sixth::<T>())
}

/// Two-qubit encoding, result 0 selected, uniform Bloch weight.
pub fn f_qed_2q<T: Real>(p1: T, p2: T) -> Result<T> {
    check_probability("p1", p1)?;
    check_probability("p2", p2)?;
    let s = (T::one() - p1).sqrt() * (T::one() - p2).sqrt();
    Ok(selected_uniform(s, p1 * p2))
}

/// Two-qubit encoding, result 0 selected, weighted by its probability.
pub fn f_qed_2q_weighted<T: Real>(p1: T, p2: T) -> Result<T> {
    check_probability("p1", p1)?;
    check_probability("p2", p2)?;
    let s = (T::one() - p1).sqrt() * (T::one() - p2).sqrt();
    let num = T::lit(2.0) - p1 - p2 + T::lit(1.5) * p1 * p2 + s;
    let den = T::lit(3.0) * (T::one() + p1 * p2 - (p1 + p2) * T::lit(0.5));
    Ok(num / den)
}

/// Bloch-averaged probability of result 0 for the two-qubit encoding.
pub fn p_select_2q<T: Real>(p1: T, p2: T) -> Result<T> {
    check_probability("p1", p1)?;
    check_probability("p2", p2)?;
    Ok(T::one() + p1 * p2 - (p1 + p2) * T::lit(0.5))
}

/// Two-qubit encoding with the optimal unitary correction after result 1.
pub fn f_qec_2q<T: Real>(p1: T, p2: T) -> Result<T> {
    check_probability("p1", p1)?;
    check_probability("p2", p2)?;
    let s = ((T::one() - p1) * (T::one() - p2)).sqrt();
    Ok(T::lit(2.0) * third::<T>() + s * third::<T>() - p1.min(p2) * sixth::<T>())
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("the code needs at least one qubit".into()));
    }
    if n > 64 {
        return Err(Error::InvalidParameter(format!("N = {n} is unreasonably large")));
    }
    Ok(())
}

/// N-qubit repetitive code, measurement ignored.
pub fn f_ign_nq<T: Real>(n: usize, p: T) -> Result<T> {
    check_n(n)?;
    check_probability("p", p)?;
    Ok(T::lit(2.0) * third::<T>() + survival_amplitude(p, n) * third::<T>() - p * sixth::<T>())
}

/// N-qubit code, result 0 selected, uniform Bloch weight.
pub fn f_qed_nq<T: Real>(n: usize, p: T) -> Result<T> {
    check_n(n)?;
    check_probability("p", p)?;
    Ok(selected_uniform(survival_amplitude(p, n), pow_usize(p, n)))
}

/// N-qubit code, result 0 selected, weighted by its probability.
pub fn f_qed_nq_weighted<T: Real>(n: usize, p: T) -> Result<T> {
    check_n(n)?;
    check_probability("p", p)?;
    let one = T::one();
    let s = survival_amplitude(p, n);
    let q = pow_usize(p, n);
    let decay = s * s;
    Ok(T::lit(2.0) * third::<T>() * (one + decay + s + q * T::lit(0.5)) / (one + decay + q))
}

/// Bloch-averaged probability of result 0 for the N-qubit code.
pub fn p_select_nq<T: Real>(n: usize, p: T) -> Result<T> {
    check_n(n)?;
    check_probability("p", p)?;
    let s = survival_amplitude(p, n);
    Ok((T::one() + s * s + pow_usize(p, n)) * T::lit(0.5))
}

/// N-qubit code with the optimal correction chosen separately for every result.
///
/// A result with `o` ones among the N − 1 ancillas mixes |1⟩ with weight
/// (1−p)^(N−o)·p^o and |0⟩ with weight p^(N−o)·(1−p)^o (times |β|²); the
/// bit flip pays off whenever the second is larger and gains their difference / 6.
pub fn f_qec_nq<T: Real>(n: usize, p: T) -> Result<T> {
    let base = f_ign_nq(n, p)?;
    let q = T::one() - p;
    let mut gain = T::zero();
    let mut binom = T::one();
    for o in 1..n {
        binom = binom * T::from_usize_lossy(n - o) / T::from_usize_lossy(o);
        let diff = pow_usize(p, n - o) * pow_usize(q, o) - pow_usize(q, n - o) * pow_usize(p, o);
        if diff > T::zero() {
            gain += binom * diff;
        }
    }
    Ok(base + gain * sixth::<T>())
}

/// N-qubit QEC fidelity when one policy (flip on every non-zero result, or
/// never flip) is used for all results. Equals [`f_qec_nq`] for N = 2.
pub fn f_qec_nq_single_policy<T: Real>(n: usize, p: T) -> Result<T> {
    check_n(n)?;
    check_probability("p", p)?;
    let one = T::one();
    let s = survival_amplitude(p, n);
    let gain = (p - pow_usize(p, n)).max((one - p) - s * s);
    Ok(T::lit(0.5) + s * third::<T>() + s * s * sixth::<T>() + gain * sixth::<T>())
}

/// Per-qubit relaxation probabilities of an N-qubit repetitive code.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeParams<T> {
    p_list: Vec<T>,
}

impl<T: Real> CodeParams<T> {
    pub fn new(p_list: Vec<T>) -> Result<Self> {
        check_n(p_list.len())?;
        for &p in &p_list {
            check_probability("p", p)?;
        }
        Ok(Self { p_list })
    }

    pub fn uniform(n_qubits: usize, p: T) -> Result<Self> {
        check_n(n_qubits)?;
        Self::new(vec![p; n_qubits])
    }

    /// Every qubit idles for `t` with the same T1.
    pub fn from_times(n_qubits: usize, t: T, t1: T) -> Result<Self> {
        Self::uniform(n_qubits, relaxation_probability(t, t1)?)
    }

    pub fn n_qubits(&self) -> usize {
        self.p_list.len()
    }

    pub fn p_list(&self) -> &[T] {
        &self.p_list
    }

    /// The common p if all qubits share it.
    pub fn uniform_p(&self) -> Option<T> {
        let first = self.p_list[0];
        self.p_list.iter().all(|&p| p == first).then_some(first)
    }
}

/// All closed forms that apply to `params`.
///
/// Heterogeneous probabilities are only supported for two qubits.
pub fn report<T: Real>(params: &CodeParams<T>) -> Result<FidelityReport<T>> {
    let p_main = params.p_list[0];
    let mut r = FidelityReport {
        f_1q: Some(f_av_1q(p_main)?),
        ..Default::default()
    };
    match (params.n_qubits(), params.uniform_p()) {
        (1, _) => {
            r.f_ign = r.f_1q;
            r.f_qed = r.f_1q;
            r.f_qed_weighted = r.f_1q;
            r.f_qec = r.f_1q;
            r.p_select = Some(T::one());
        }
        (2, _) => {
            let (p1, p2) = (params.p_list[0], params.p_list[1]);
            r.f_ign = Some(f_ign_2q(p1, p2)?);
            r.f_qed = Some(f_qed_2q(p1, p2)?);
            r.f_qed_weighted = Some(f_qed_2q_weighted(p1, p2)?);
            r.f_qec = Some(f_qec_2q(p1, p2)?);
            r.p_select = Some(p_select_2q(p1, p2)?);
        }
        (n, Some(p)) => {
            r.f_ign = Some(f_ign_nq(n, p)?);
            r.f_qed = Some(f_qed_nq(n, p)?);
            r.f_qed_weighted = Some(f_qed_nq_weighted(n, p)?);
            r.f_qec = Some(f_qec_nq(n, p)?);
            r.p_select = Some(p_select_nq(n, p)?);
        }
        (n, None) => {
            return Err(Error::Incompatible(format!(
                "closed forms for N = {n} need a uniform p; use the scenario oracle for heterogeneous qubits"
            )))
        }
    }
    r.with_chi(FidelityKind::Ignore)
}

/// Smallest N whose 2^{N−1} two-dimensional subspaces can distinguish all
/// 2N single-qubit X/Y errors plus the no-error case.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HammingBound {
    pub min_qubits: usize,
    /// (N, 2^{N−1}, 1 + 2N, satisfied) for N = 1..=min_qubits.
    pub trace: Vec<(usize, u64, u64, bool)>,
}

pub fn hamming_min_qubits() -> HammingBound {
    let mut trace = Vec::new();
    for n in 1usize.. {
        let lhs = 1u64 << (n - 1);
        let rhs = 1 + 2 * n as u64;
        let ok = lhs >= rhs;
        trace.push((n, lhs, rhs, ok));
        if ok {
            return HammingBound { min_qubits: n, trace };
        }
    }
    unreachable!()
}

/// Leading-order estimate for M short QED cycles with π-pulses in between.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MulticycleEstimate<T> {
    pub fidelity: T,
    pub p_select: T,
    /// N·t/(M·T1); the estimate assumes this is small.
    pub validity_ratio: T,
}

pub fn f_qed_multicycle_estimate<T: Real>(
    n_qubits: usize,
    cycles: usize,
    t: T,
    t1: T,
) -> Result<MulticycleEstimate<T>> {
    check_n(n_qubits)?;
    if cycles == 0 || !cycles.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "the number of cycles must be even and positive for the π-pulses to cancel, got {cycles}"
        )));
    }
    if !(t >= T::zero()) || !(t1 > T::zero()) {
        return Err(Error::InvalidParameter(format!("need t >= 0 and T1 > 0, got t = {t}, T1 = {t1}")));
    }
    let m = T::from_usize_lossy(cycles);
    let n = T::from_usize_lossy(n_qubits);
    let per_cycle = t / (m * t1);
    Ok(MulticycleEstimate {
        fidelity: T::one() - m * pow_usize(per_cycle, n_qubits) * third::<T>(),
        p_select: (-t * n / (t1 + t1)).exp(),
        validity_ratio: n * per_cycle,
    })
}

/// Bloch-sphere averages with x = |β|² = (1 − cos θ)/2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlochMoment {
    /// ⟨|α|²⟩ = ⟨|β|²⟩
    Alpha2,
    /// ⟨|α|⁴⟩ = ⟨|β|⁴⟩
    Alpha4,
    /// ⟨|α|⁶⟩ = ⟨|β|⁶⟩
    Alpha6,
    Alpha2Beta2,
    /// ⟨|α|²|β|⁴⟩ = ⟨|α|⁴|β|²⟩
    Alpha2Beta4,
    Alpha4Beta4,
    /// ⟨1/(A + B|β|²)⟩
    InvLinear,
    /// ⟨|β|²/(A + B|β|²)⟩
    Beta2OverLinear,
    /// ⟨|β|⁴/(A + B|β|²)⟩
    Beta4OverLinear,
    /// ⟨|α|⁴/(A + B|β|²)⟩
    Alpha4OverLinear,
    /// ⟨|α|²|β|²/(A + B|β|²)⟩
    Alpha2Beta2OverLinear,
}

impl BlochMoment {
    pub const ALL: [BlochMoment; 11] = [
        BlochMoment::Alpha2,
        BlochMoment::Alpha4,
        BlochMoment::Alpha6,
        BlochMoment::Alpha2Beta2,
        BlochMoment::Alpha2Beta4,
        BlochMoment::Alpha4Beta4,
        BlochMoment::InvLinear,
        BlochMoment::Beta2OverLinear,
        BlochMoment::Beta4OverLinear,
        BlochMoment::Alpha4OverLinear,
        BlochMoment::Alpha2Beta2OverLinear,
    ];

    pub fn is_rational(&self) -> bool {
        matches!(
            self,
            BlochMoment::InvLinear
                | BlochMoment::Beta2OverLinear
                | BlochMoment::Beta4OverLinear
                | BlochMoment::Alpha4OverLinear
                | BlochMoment::Alpha2Beta2OverLinear
        )
    }

    /// Integrand as a function of |β|², for numerical cross-checks.
    pub fn integrand<T: Real>(&self, x: T, a: T, b: T) -> T {
        let y = T::one() - x;
        let den = a + b * x;
        match self {
            BlochMoment::Alpha2 => y,
            BlochMoment::Alpha4 => y * y,
            BlochMoment::Alpha6 => y * y * y,
            BlochMoment::Alpha2Beta2 => x * y,
            BlochMoment::Alpha2Beta4 => y * x * x,
            BlochMoment::Alpha4Beta4 => x * x * y * y,
            BlochMoment::InvLinear => T::one() / den,
            BlochMoment::Beta2OverLinear => x / den,
            BlochMoment::Beta4OverLinear => x * x / den,
            BlochMoment::Alpha4OverLinear => y * y / den,
            BlochMoment::Alpha2Beta2OverLinear => x * y / den,
        }
    }
}

/// Closed-form Bloch average; `a`, `b` parametrize the denominator a + b|β|².
pub fn bloch_average_closed<T: Real>(kind: BlochMoment, a: T, b: T) -> Result<T> {
    let frac = |n: f64, d: f64| T::lit(n) / T::lit(d);
    let value = match kind {
        BlochMoment::Alpha2 => frac(1.0, 2.0),
        BlochMoment::Alpha4 => frac(1.0, 3.0),
        BlochMoment::Alpha6 => frac(1.0, 4.0),
        BlochMoment::Alpha2Beta2 => frac(1.0, 6.0),
        BlochMoment::Alpha2Beta4 => frac(1.0, 12.0),
        BlochMoment::Alpha4Beta4 => frac(1.0, 30.0),
        _ => {
            if !(a > T::zero()) || !(a + b > T::zero()) {
                return Err(Error::InvalidParameter(format!(
                    "denominator A + B|β|² must stay positive, got A = {a}, B = {b}"
                )));
            }
            let one = T::one();
            let z = T::zero();
            let coeffs = match kind {
                BlochMoment::InvLinear => [one, z, z],
                BlochMoment::Beta2OverLinear => [z, one, z],
                BlochMoment::Beta4OverLinear => [z, z, one],
                BlochMoment::Alpha4OverLinear => [one, -one - one, one],
                BlochMoment::Alpha2Beta2OverLinear => [z, one, -one],
                _ => unreachable!(),
            };
            rational_average(coeffs, b / a) / a
        }
    };
    Ok(value)
}
