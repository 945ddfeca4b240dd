//! Brute-force simulation of the repetitive code: every relaxation scenario is
//! propagated through the encode/decode circuit and grouped by the ancilla readout.
//!
//! Bit `i` of a relaxation mask refers to qubit `i` (qubit 0 is the main qubit).
//! Bit `j − 1` of a result string is the readout of ancilla qubit `j`.

mod averaging;
mod fidelity;
mod monte_carlo;
mod multicycle;

pub use averaging::{bloch_average, gauss_legendre, BlochAverager, Linearity};
pub use fidelity::{fidelity_sweep, scenario_report, Mode};
pub use monte_carlo::{monte_carlo_fidelity, McEstimate};
pub use multicycle::{multicycle_simulate, MulticycleResult, PiPulsePlacement};

use num_complex::Complex;

use crate::channels::damping_kraus;
use crate::correction::LinearQubitOp;
use crate::error::check_probability;
use crate::qmath::{apply_gate, cnot, ComplexMatrix, GateMode, PureState};
use crate::{Error, Real, Result};

/// Largest code size the scenario engine accepts (2^N scenarios on a 2^N-dimensional register).
pub const MAX_CODE_QUBITS: usize = 10;

/// One relaxation history of the encoded register.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario<T> {
    pub relax_mask: u64,
    pub probability: T,
    /// Register right after storage, unnormalized (norm² = probability).
    pub relaxed: PureState<T>,
    /// Register after the decoding CNOTs, unnormalized.
    pub decoded: PureState<T>,
}

impl<T: Real> Scenario<T> {
    pub fn relaxed_qubits(&self) -> impl Iterator<Item = usize> + '_ {
        (0..64).filter(move |i| self.relax_mask >> i & 1 == 1)
    }

    /// Splits the decoded register into a normalized main-qubit state and the
    /// ancilla result string it is certain to produce.
    ///
    /// `None` for a zero-probability scenario; an error if the decoded
    /// register is not a product with ancillas in a basis state.
    pub fn main_state(&self) -> Result<Option<(PureState<T>, u64)>> {
        let n = self.decoded.n_qubits();
        let amps = self.decoded.amplitudes();
        let half = 1usize << (n - 1);
        let mut support = None;
        for idx in 0..half {
            let w = amps[idx].norm_sqr() + amps[idx | half].norm_sqr();
            if w > T::zero() {
                let cut = T::strict_tol() * self.probability.max(T::min_positive_value());
                if w <= cut {
                    continue;
                }
                if support.is_some() {
                    return Err(Error::InvariantViolation {
                        time: 0.0,
                        what: format!("decoded scenario {:b} is entangled with the ancillas", self.relax_mask),
                    });
                }
                support = Some(idx);
            }
        }
        let Some(idx) = support else { return Ok(None) };
        let main = PureState::unnormalized(vec![amps[idx], amps[idx | half]])?
            .normalize()
            .expect("non-zero support");
        Ok(Some((main, result_from_index(idx, n))))
    }
}

/// Converts the ancilla part of a basis index (MSB = qubit 1) into a result string.
fn result_from_index(idx: usize, n: usize) -> u64 {
    (1..n).fold(0u64, |acc, j| acc | (((idx >> (n - 1 - j)) & 1) as u64) << (j - 1))
}

fn index_from_result(bits: u64, n: usize) -> usize {
    (1..n).fold(0usize, |acc, j| acc | (((bits >> (j - 1)) & 1) as usize) << (n - 1 - j))
}

/// Result string predicted by the complement rule: an ancilla reads 1 iff it
/// relaxed, with every bit complemented when the main qubit relaxed.
pub fn outcome_for_mask(n_qubits: usize, relax_mask: u64) -> u64 {
    let all = if n_qubits > 1 { (1u64 << (n_qubits - 1)) - 1 } else { 0 };
    let ancillas = (relax_mask >> 1) & all;
    if relax_mask & 1 == 1 {
        !ancillas & all
    } else {
        ancillas
    }
}

fn check_code(n_qubits: usize, p_list: &[impl Real]) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_CODE_QUBITS {
        return Err(Error::InvalidParameter(format!(
            "code size must be between 1 and {MAX_CODE_QUBITS}, got {n_qubits}"
        )));
    }
    if p_list.len() != n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "{} relaxation probabilities for {n_qubits} qubits",
            p_list.len()
        )));
    }
    for &p in p_list {
        check_probability("p", p)?;
    }
    Ok(())
}

fn fan_out<T: Real>(state: &PureState<T>, n: usize, gate: &ComplexMatrix<T>) -> Result<PureState<T>> {
    (1..n).try_fold(state.clone(), |s, j| apply_gate(&s, gate, &[0, j], GateMode::Raw))
}

/// All 2^N relaxation scenarios for the encoded input α|0⟩ + β|1⟩.
pub fn unravel<T: Real>(n_qubits: usize, p_list: &[T], alpha: Complex<T>, beta: Complex<T>) -> Result<Vec<Scenario<T>>> {
    check_code(n_qubits, p_list)?;
    let input = PureState::qubit(alpha, beta)?;
    let register = if n_qubits > 1 {
        input.tensor(&PureState::basis(n_qubits - 1, 0)?)?
    } else {
        input
    };
    let gate = cnot::<T>();
    let encoded = fan_out(&register, n_qubits, &gate)?;
    let kraus: Vec<_> = p_list.iter().map(|&p| damping_kraus(p)).collect::<Result<_>>()?;

    (0..1u64 << n_qubits)
        .map(|mask| {
            let mut s = encoded.clone();
            for (q, (relax, keep)) in kraus.iter().enumerate() {
                let op = if mask >> q & 1 == 1 { relax } else { keep };
                s = apply_gate(&s, op, &[q], GateMode::Raw)?;
            }
            let decoded = fan_out(&s, n_qubits, &gate)?;
            Ok(Scenario {
                relax_mask: mask,
                probability: s.norm_sqr(),
                relaxed: s,
                decoded,
            })
        })
        .collect()
}

/// Main-qubit state conditioned on one ancilla result string.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeBranch<T: Real> {
    pub result_bits: u64,
    pub unnormalized_rho: ComplexMatrix<T>,
    pub probability: T,
    /// Scenarios with non-zero weight in this branch.
    pub masks: Vec<u64>,
}

/// Reads out the ancillas of every decoded scenario and sums the main-qubit
/// states by result string. Branches with zero probability are dropped.
pub fn decode_and_measure<T: Real>(scenarios: &[Scenario<T>], n_qubits: usize) -> Result<Vec<OutcomeBranch<T>>> {
    let n_results = 1usize << (n_qubits - 1);
    let half = n_results;
    let mut branches: Vec<OutcomeBranch<T>> = (0..n_results as u64)
        .map(|bits| OutcomeBranch {
            result_bits: bits,
            unnormalized_rho: ComplexMatrix::zeros(2, 2),
            probability: T::zero(),
            masks: Vec::new(),
        })
        .collect();
    for s in scenarios {
        if s.decoded.n_qubits() != n_qubits {
            return Err(Error::DimensionMismatch("scenario register size differs from code size".into()));
        }
        let amps = s.decoded.amplitudes();
        for b in branches.iter_mut() {
            let idx = index_from_result(b.result_bits, n_qubits);
            let v = [amps[idx], amps[idx | half]];
            let w = v[0].norm_sqr() + v[1].norm_sqr();
            if w == T::zero() {
                continue;
            }
            let rho = ComplexMatrix::outer(&v, &v);
            b.unnormalized_rho = b.unnormalized_rho.try_add(&rho)?;
            b.probability += w;
            b.masks.push(s.relax_mask);
        }
    }
    branches.retain(|b| b.probability > T::zero());
    Ok(branches)
}

/// Per-outcome main-qubit Kraus maps of the whole encode/store/decode/readout
/// cycle, compiled from the circuit run on |0⟩ and |1⟩.
#[derive(Clone, Debug)]
pub struct CompiledCode<T: Real> {
    n_qubits: usize,
    p_list: Vec<T>,
    outcomes: Vec<CompiledOutcome<T>>,
}

#[derive(Clone, Debug)]
pub struct CompiledOutcome<T: Real> {
    pub result_bits: u64,
    /// (relaxation mask, 2×2 Kraus factor) for every contributing scenario.
    pub kraus: Vec<(u64, ComplexMatrix<T>)>,
}

impl<T: Real> CompiledOutcome<T> {
    pub fn op(&self) -> LinearQubitOp<T> {
        let ks: Vec<_> = self.kraus.iter().map(|(_, k)| k.clone()).collect();
        LinearQubitOp::from_kraus(&ks).expect("2x2 Kraus factors")
    }

    /// Unnormalized main-qubit state for the input amplitudes `psi`.
    pub fn apply(&self, psi: &[Complex<T>; 2]) -> ComplexMatrix<T> {
        let mut rho = ComplexMatrix::zeros(2, 2);
        for (_, k) in &self.kraus {
            let v = [
                k.get(0, 0) * psi[0] + k.get(0, 1) * psi[1],
                k.get(1, 0) * psi[0] + k.get(1, 1) * psi[1],
            ];
            rho = &rho + &ComplexMatrix::outer(&v, &v);
        }
        rho
    }

    /// (⟨ψ|ρ|ψ⟩, Tr ρ) for the input amplitudes `psi`, with ρ the branch state.
    pub fn overlap_and_weight(&self, psi: &[Complex<T>; 2]) -> (T, T) {
        let mut overlap = T::zero();
        let mut weight = T::zero();
        for (_, k) in &self.kraus {
            let v0 = k.get(0, 0) * psi[0] + k.get(0, 1) * psi[1];
            let v1 = k.get(1, 0) * psi[0] + k.get(1, 1) * psi[1];
            overlap += (psi[0].conj() * v0 + psi[1].conj() * v1).norm_sqr();
            weight += v0.norm_sqr() + v1.norm_sqr();
        }
        (overlap, weight)
    }
}

impl<T: Real> CompiledCode<T> {
    pub fn new(n_qubits: usize, p_list: &[T]) -> Result<Self> {
        check_code(n_qubits, p_list)?;
        let (o, z) = (Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()));
        let from_zero = unravel(n_qubits, p_list, o, z)?;
        let from_one = unravel(n_qubits, p_list, z, o)?;
        let half = 1usize << (n_qubits - 1);
        let mut outcomes: Vec<CompiledOutcome<T>> = (0..half as u64)
            .map(|bits| CompiledOutcome {
                result_bits: bits,
                kraus: Vec::new(),
            })
            .collect();
        for (s0, s1) in from_zero.iter().zip(&from_one) {
            let (a0, a1) = (s0.decoded.amplitudes(), s1.decoded.amplitudes());
            for out in outcomes.iter_mut() {
                let idx = index_from_result(out.result_bits, n_qubits);
                let k = ComplexMatrix::from_vec(2, 2, vec![a0[idx], a1[idx], a0[idx | half], a1[idx | half]])?;
                if k.as_slice().iter().any(|c| c.norm_sqr() > T::zero()) {
                    out.kraus.push((s0.relax_mask, k));
                }
            }
        }
        outcomes.retain(|o| !o.kraus.is_empty());
        Ok(Self {
            n_qubits,
            p_list: p_list.to_vec(),
            outcomes,
        })
    }

    pub fn uniform(n_qubits: usize, p: T) -> Result<Self> {
        Self::new(n_qubits, &vec![p; n_qubits])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn p_list(&self) -> &[T] {
        &self.p_list
    }

    /// Outcomes with at least one contributing scenario, sorted by result string.
    pub fn outcomes(&self) -> &[CompiledOutcome<T>] {
        &self.outcomes
    }

    /// The all-zero ("no error detected") outcome.
    pub fn selected(&self) -> &CompiledOutcome<T> {
        self.outcomes
            .iter()
            .find(|o| o.result_bits == 0)
            .expect("outcome 0 always receives the no-relaxation scenario")
    }

    /// The ignore-the-result map: sum over all outcomes.
    pub fn total_op(&self) -> LinearQubitOp<T> {
        let mut ops = self.outcomes.iter().map(|o| o.op());
        let first = ops.next().expect("at least one outcome");
        ops.fold(first, |acc, o| acc.add(&o))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::apply_damping;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn two_qubit_scenarios() {
        let (alpha, beta) = (c(0.6), Complex::new(0.0, 0.8));
        let (p1, p2) = (0.3, 0.2);
        let s = unravel(2, &[p1, p2], alpha, beta).unwrap();
        let b2 = 0.64;
        let none = 0.36 + b2 * (1.0 - p1) * (1.0 - p2);
        let want = [none, b2 * p1 * (1.0 - p2), b2 * (1.0 - p1) * p2, b2 * p1 * p2];
        for (sc, w) in s.iter().zip(want) {
            assert!((sc.probability - w).abs() < 1e-15);
        }
        // relaxed states before decoding: |01⟩ for main relaxed, |10⟩ for ancilla relaxed
        let main_relaxed = s[1].relaxed.normalize().unwrap();
        assert!((main_relaxed.amplitudes()[1].norm() - 1.0).abs() < 1e-15);
        let anc_relaxed = s[2].relaxed.normalize().unwrap();
        assert!((anc_relaxed.amplitudes()[2].norm() - 1.0).abs() < 1e-15);
        let (main, bits) = s[0].main_state().unwrap().unwrap();
        assert_eq!(bits, 0);
        let k = ((1.0 - p1) * (1.0 - p2)).sqrt();
        assert!((main.amplitudes()[1] - beta * k / none.sqrt()).norm() < 1e-15);
        assert_eq!(s[1].main_state().unwrap().unwrap().1, 1);
        assert_eq!(s[2].main_state().unwrap().unwrap().1, 1);
        assert_eq!(s[3].main_state().unwrap().unwrap().1, 0);
    }

    #[test]
    fn single_qubit_split() {
        let s = unravel(1, &[0.4], c(0.8), c(0.6)).unwrap();
        assert!((s[1].probability - 0.36 * 0.4).abs() < 1e-15);
        assert!((s[0].probability - (0.64 + 0.36 * 0.6)).abs() < 1e-15);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..=5);
            let p: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
            let th: f64 = rng.gen::<f64>() * std::f64::consts::PI;
            let ph: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
            let s = unravel(n, &p, c((th / 2.0).cos()), Complex::from_polar((th / 2.0).sin(), ph)).unwrap();
            let total: f64 = s.iter().map(|x| x.probability).sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!(s.iter().all(|x| x.probability >= 0.0));
        }
    }

    #[test]
    fn rejects_unnormalized_input() {
        assert!(unravel(2, &[0.1, 0.1], c(1.0), c(1.0)).is_err());
        assert!(unravel(2, &[0.1], c(1.0), c(0.0)).is_err());
        assert!(unravel(2, &[0.1, 1.5], c(1.0), c(0.0)).is_err());
    }

    #[test]
    fn scenario_sum_is_damping_channel() {
        let p = [0.1, 0.35, 0.6];
        let (alpha, beta) = (c(0.28), Complex::from_polar(0.96, 0.9));
        let s = unravel(3, &p, alpha, beta).unwrap();
        let mixed = s
            .iter()
            .fold(ComplexMatrix::zeros(8, 8), |acc, x| &acc + &x.relaxed.density());
        let v: Vec<_> = (0..8).map(|i| if i == 0 { alpha } else if i == 7 { beta } else { c(0.0) }).collect();
        let mut want = ComplexMatrix::outer(&v, &v);
        for (q, &pq) in p.iter().enumerate() {
            want = apply_damping(&want, pq, q).unwrap();
        }
        assert!(mixed.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn complement_rule_matches_circuit() {
        for n in 1..=6 {
            let p: Vec<f64> = (0..n).map(|i| 0.1 + 0.13 * i as f64).collect();
            let s = unravel(n, &p, c(0.6), c(0.8)).unwrap();
            for sc in &s {
                if let Some((_, bits)) = sc.main_state().unwrap() {
                    assert_eq!(bits, outcome_for_mask(n, sc.relax_mask), "n={n} mask={:b}", sc.relax_mask);
                }
            }
        }
        // main and first ancilla relaxed, second ancilla intact: ancilla 2 reads 1
        assert_eq!(outcome_for_mask(3, 0b011), 0b10);
    }

    #[test]
    fn each_outcome_has_two_scenarios() {
        for n in 2..=5 {
            let s = unravel(n, &vec![0.3; n], c(0.6), c(0.8)).unwrap();
            let b = decode_and_measure(&s, n).unwrap();
            assert_eq!(b.len(), 1 << (n - 1));
            let total: f64 = b.iter().map(|x| x.probability).sum();
            assert!((total - 1.0).abs() < 1e-12);
            for br in &b {
                assert_eq!(br.masks.len(), 2);
                assert!((br.unnormalized_rho.trace().re - br.probability).abs() < 1e-14);
            }
            let zero = b.iter().find(|x| x.result_bits == 0).unwrap();
            assert_eq!(zero.masks, vec![0, (1u64 << n) - 1]);
        }
    }

    #[test]
    fn no_relaxation_keeps_input() {
        let s = unravel(3, &[0.0; 3], c(0.6), Complex::new(0.0, 0.8)).unwrap();
        let b = decode_and_measure(&s, 3).unwrap();
        assert_eq!(b.len(), 1);
        let psi = PureState::qubit(c(0.6), Complex::new(0.0, 0.8)).unwrap();
        assert!(b[0].unnormalized_rho.max_abs_diff(&psi.density()) < 1e-15);
    }

    #[test]
    fn compiled_code_matches_direct_unraveling() {
        let p = [0.2, 0.5, 0.3];
        let code = CompiledCode::new(3, &p).unwrap();
        let (alpha, beta) = (c(0.6), Complex::new(0.48, 0.64));
        let branches = decode_and_measure(&unravel(3, &p, alpha, beta).unwrap(), 3).unwrap();
        for br in &branches {
            let o = code.outcomes().iter().find(|o| o.result_bits == br.result_bits).unwrap();
            assert!(o.apply(&[alpha, beta]).max_abs_diff(&br.unnormalized_rho) < 1e-15);
        }
    }
}
