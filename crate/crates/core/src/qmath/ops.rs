//! Gate application, partial traces and fidelities on multi-qubit registers.

use num_complex::Complex;

use super::matrix::ComplexMatrix;
use super::state::PureState;
use crate::{Error, Real, Result};

/// Whether `apply_gate` insists on a unitary operator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GateMode {
    #[default]
    Unitary,
    /// Any operator, e.g. a single Kraus factor.
    Raw,
}

/// Kronecker product `a ⊗ b`.
pub fn tensor<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    a.kron(b)
}

/// Kronecker product of a list, left to right.
pub fn tensor_all<T: Real>(factors: &[ComplexMatrix<T>]) -> Result<ComplexMatrix<T>> {
    let mut it = factors.iter();
    let first = it
        .next()
        .ok_or_else(|| Error::InvalidParameter("empty tensor product".into()))?;
    it.try_fold(first.clone(), |acc, f| acc.kron(f))
}

/// Register of qubits that a gate can act on.
pub trait QubitRegister<T: Real>: Sized {
    fn n_qubits(&self) -> usize;

    /// Applies `gate` to `targets` without checking unitarity.
    fn apply_operator(&self, gate: &ComplexMatrix<T>, targets: &[usize]) -> Result<Self>;
}

impl<T: Real> QubitRegister<T> for PureState<T> {
    fn n_qubits(&self) -> usize {
        PureState::n_qubits(self)
    }

    fn apply_operator(&self, gate: &ComplexMatrix<T>, targets: &[usize]) -> Result<Self> {
        let n = QubitRegister::n_qubits(self);
        let plan = GatePlan::new(gate, targets, n)?;
        let mut amps = self.amplitudes().to_vec();
        plan.apply_strided(gate, &mut amps, 0, 1);
        let unitary_ok = self.is_normalized() && gate.is_unitary(T::input_tol());
        Ok(if unitary_ok {
            PureState::from_parts(amps, true)
        } else {
            PureState::unnormalized(amps)?
        })
    }
}

impl<T: Real> QubitRegister<T> for ComplexMatrix<T> {
    fn n_qubits(&self) -> usize {
        self.rows().trailing_zeros() as usize
    }

    fn apply_operator(&self, gate: &ComplexMatrix<T>, targets: &[usize]) -> Result<Self> {
        let dim = self.rows();
        if !self.is_square() || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "density matrix must be 2^n x 2^n, got {}x{}",
                self.rows(),
                self.cols()
            )));
        }
        let n = QubitRegister::n_qubits(self);
        let plan = GatePlan::new(gate, targets, n)?;
        let mut out = self.clone();
        let data = out.as_mut_slice();
        // G ρ: act on the row index of every column.
        for col in 0..dim {
            plan.apply_strided(gate, data, col, dim);
        }
        // (G ρ) G†: act with conj(G) on the column index of every row.
        let gate_conj = gate.conj();
        for row in 0..dim {
            plan.apply_strided(&gate_conj, data, row * dim, 1);
        }
        Ok(out)
    }
}

/// U|ψ⟩ or UρU† on the listed qubits; `targets[0]` is the most significant qubit of the gate.
pub fn apply_gate<T: Real, R: QubitRegister<T>>(
    register: &R,
    gate: &ComplexMatrix<T>,
    targets: &[usize],
    mode: GateMode,
) -> Result<R> {
    if mode == GateMode::Unitary {
        let dev = gate.unitarity_deviation();
        if !(dev <= T::input_tol()) {
            return Err(Error::NotUnitary {
                deviation: dev.as_f64(),
            });
        }
    }
    register.apply_operator(gate, targets)
}

/// Σ_k K_k ρ K_k† with every Kraus factor acting on `targets`.
pub fn apply_kraus<T: Real>(
    rho: &ComplexMatrix<T>,
    kraus: &[ComplexMatrix<T>],
    targets: &[usize],
) -> Result<ComplexMatrix<T>> {
    let mut acc: Option<ComplexMatrix<T>> = None;
    for k in kraus {
        let term = rho.apply_operator(k, targets)?;
        acc = Some(match acc {
            None => term,
            Some(a) => a.try_add(&term)?,
        });
    }
    acc.ok_or_else(|| Error::InvalidParameter("empty Kraus list".into()))
}

/// Full 2^n × 2^n matrix of `gate` acting on `targets`.
pub fn embed_operator<T: Real>(
    gate: &ComplexMatrix<T>,
    targets: &[usize],
    n_qubits: usize,
) -> Result<ComplexMatrix<T>> {
    let plan = GatePlan::new(gate, targets, n_qubits)?;
    let dim = 1usize << n_qubits;
    let mut m = ComplexMatrix::<T>::identity(dim);
    let data = m.as_mut_slice();
    for col in 0..dim {
        plan.apply_strided(gate, data, col, dim);
    }
    Ok(m)
}

struct GatePlan {
    n_qubits: usize,
    /// Bit positions in the register index, one per gate qubit, most significant first.
    bits: Vec<usize>,
}

impl GatePlan {
    fn new<T: Real>(gate: &ComplexMatrix<T>, targets: &[usize], n_qubits: usize) -> Result<Self> {
        let k = targets.len();
        if k == 0 {
            return Err(Error::InvalidParameter("gate needs at least one target".into()));
        }
        if !gate.is_square() || gate.rows() != 1usize << k {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} gate on {k} target qubit(s)",
                gate.rows(),
                gate.cols()
            )));
        }
        for (i, &t) in targets.iter().enumerate() {
            if t >= n_qubits {
                return Err(Error::DimensionMismatch(format!(
                    "target qubit {t} out of range for {n_qubits} qubits"
                )));
            }
            if targets[..i].contains(&t) {
                return Err(Error::InvalidParameter(format!("repeated target qubit {t}")));
            }
        }
        Ok(Self {
            n_qubits,
            bits: targets.iter().map(|&t| n_qubits - 1 - t).collect(),
        })
    }

    /// Applies the gate to the register vector stored at `data[offset + i * stride]`.
    fn apply_strided<T: Real>(
        &self,
        gate: &ComplexMatrix<T>,
        data: &mut [Complex<T>],
        offset: usize,
        stride: usize,
    ) {
        let k = self.bits.len();
        let sub = 1usize << k;
        let dim = 1usize << self.n_qubits;
        let mask: usize = self.bits.iter().map(|&b| 1usize << b).sum();
        let offsets: Vec<usize> = (0..sub)
            .map(|g| {
                (0..k)
                    .filter(|m| g >> (k - 1 - m) & 1 == 1)
                    .map(|m| 1usize << self.bits[m])
                    .sum()
            })
            .collect();
        let g = gate.as_slice();
        let mut buf = vec![Complex::new(T::zero(), T::zero()); sub];
        for base in 0..dim {
            if base & mask != 0 {
                continue;
            }
            for (j, off) in offsets.iter().enumerate() {
                buf[j] = data[offset + (base | off) * stride];
            }
            for (i, off) in offsets.iter().enumerate() {
                let row = &g[i * sub..(i + 1) * sub];
                let mut acc = Complex::new(T::zero(), T::zero());
                for j in 0..sub {
                    acc += row[j] * buf[j];
                }
                data[offset + (base | off) * stride] = acc;
            }
        }
    }
}

fn register_qubits<T: Real>(rho: &ComplexMatrix<T>, n_qubits: usize) -> Result<usize> {
    if n_qubits == 0 || n_qubits > 14 {
        return Err(Error::InvalidParameter(format!("n_qubits = {n_qubits}")));
    }
    let dim = 1usize << n_qubits;
    if rho.rows() != dim || rho.cols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "expected {dim}x{dim} density matrix for {n_qubits} qubits, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    Ok(dim)
}

/// Reduced 2×2 density matrix of qubit `keep`.
pub fn partial_trace<T: Real>(
    rho: &ComplexMatrix<T>,
    keep: usize,
    n_qubits: usize,
) -> Result<ComplexMatrix<T>> {
    let dim = register_qubits(rho, n_qubits)?;
    if keep >= n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "qubit {keep} out of range for {n_qubits} qubits"
        )));
    }
    let dev = rho.hermiticity_deviation();
    if !(dev <= T::input_tol()) {
        return Err(Error::NotHermitian {
            deviation: dev.as_f64(),
        });
    }
    let bit = 1usize << (n_qubits - 1 - keep);
    let mut out = ComplexMatrix::zeros(2, 2);
    for i in 0..dim {
        let a = usize::from(i & bit != 0);
        let rest = i & !bit;
        for b in 0..2 {
            let j = if b == 1 { rest | bit } else { rest };
            let v = out.get(a, b) + rho.get(i, j);
            out.set(a, b, v);
        }
    }
    Ok(out)
}

/// Π ρ Π with Π projecting qubit `qubit` onto |outcome⟩; the result is unnormalized.
pub fn project_qubit<T: Real>(
    rho: &ComplexMatrix<T>,
    qubit: usize,
    outcome: bool,
    n_qubits: usize,
) -> Result<ComplexMatrix<T>> {
    let dim = register_qubits(rho, n_qubits)?;
    if qubit >= n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "qubit {qubit} out of range for {n_qubits} qubits"
        )));
    }
    let bit = 1usize << (n_qubits - 1 - qubit);
    let keep = |i: usize| (i & bit != 0) == outcome;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for i in (0..dim).filter(|&i| keep(i)) {
        for j in (0..dim).filter(|&j| keep(j)) {
            out.set(i, j, rho.get(i, j));
        }
    }
    Ok(out)
}

/// ⟨ψ|ρ|ψ⟩ = Tr(ρ|ψ⟩⟨ψ|) for a possibly unnormalized ρ.
pub fn state_fidelity<T: Real>(rho: &ComplexMatrix<T>, psi: &PureState<T>) -> Result<T> {
    if !rho.is_square() || rho.rows() != psi.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} density matrix against {}-dimensional state",
            rho.rows(),
            rho.cols(),
            psi.dim()
        )));
    }
    let v = rho.apply(psi.amplitudes())?;
    let f = psi
        .amplitudes()
        .iter()
        .zip(&v)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b);
    Ok(f.re)
}
