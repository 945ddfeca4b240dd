use num_complex::Complex;

use super::matrix::{ComplexMatrix, MAX_DIM};
use crate::{Error, Real, Result};

/// State vector over `log2(dim)` qubits, qubit 0 being the most significant bit.
///
/// Selective branches (a single Kraus scenario, a projected outcome) are
/// carried as unnormalized states; everything else is normalized on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState<T> {
    amplitudes: Vec<Complex<T>>,
    normalized: bool,
}

impl<T: Real> PureState<T> {
    /// Normalized state; fails if Σ|a|² deviates from 1 by more than the strict tolerance.
    pub fn new(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let norm_sqr = norm_sqr(&amplitudes);
        if (norm_sqr - T::one()).abs() > T::strict_tol() {
            return Err(Error::NotNormalized {
                norm_sqr: norm_sqr.as_f64(),
            });
        }
        Ok(Self {
            amplitudes,
            normalized: true,
        })
    }

    /// Possibly sub-normalized branch state.
    pub fn unnormalized(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        Ok(Self {
            amplitudes,
            normalized: false,
        })
    }

    /// α|0⟩ + β|1⟩
    pub fn qubit(alpha: Complex<T>, beta: Complex<T>) -> Result<Self> {
        Self::new(vec![alpha, beta])
    }

    /// Computational basis state |index⟩ on `n_qubits` qubits.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize
            .checked_shl(n_qubits as u32)
            .filter(|&d| d <= MAX_DIM)
            .ok_or(Error::DimensionTooLarge {
                dim: usize::MAX,
                max: MAX_DIM,
            })?;
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = vec![Complex::new(T::zero(), T::zero()); dim];
        amps[index] = Complex::new(T::one(), T::zero());
        Ok(Self {
            amplitudes: amps,
            normalized: true,
        })
    }

    /// The six tomography probes |0⟩, |1⟩, |+⟩, |−⟩, |+i⟩, |−i⟩, in that order.
    pub fn six_probes() -> [Self; 6] {
        let z = T::zero();
        let o = T::one();
        let h = T::FRAC_1_SQRT_2();
        let mk = |a: Complex<T>, b: Complex<T>| Self {
            amplitudes: vec![a, b],
            normalized: true,
        };
        [
            mk(Complex::new(o, z), Complex::new(z, z)),
            mk(Complex::new(z, z), Complex::new(o, z)),
            mk(Complex::new(h, z), Complex::new(h, z)),
            mk(Complex::new(h, z), Complex::new(-h, z)),
            mk(Complex::new(h, z), Complex::new(z, h)),
            mk(Complex::new(h, z), Complex::new(z, -h)),
        ]
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    #[inline]
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        norm_sqr(&self.amplitudes)
    }

    /// Rescales to unit norm; `None` for the zero vector.
    pub fn normalize(&self) -> Option<Self> {
        let n = self.norm_sqr();
        if n <= T::zero() {
            return None;
        }
        let inv = T::one() / n.sqrt();
        Some(Self {
            amplitudes: self.amplitudes.iter().map(|a| a * inv).collect(),
            normalized: true,
        })
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "inner product of dims {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b))
    }

    /// self ⊗ other
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let dim = self.dim() * other.dim();
        if dim > MAX_DIM {
            return Err(Error::DimensionTooLarge { dim, max: MAX_DIM });
        }
        let mut amps = Vec::with_capacity(dim);
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        Ok(Self {
            amplitudes: amps,
            normalized: self.normalized && other.normalized,
        })
    }

    /// |ψ⟩⟨ψ|
    pub fn density(&self) -> ComplexMatrix<T> {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }

    pub(crate) fn from_parts(amplitudes: Vec<Complex<T>>, normalized: bool) -> Self {
        Self {
            amplitudes,
            normalized,
        }
    }
}

fn norm_sqr<T: Real>(amps: &[Complex<T>]) -> T {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {dim} is not a power of two"
        )));
    }
    if dim > MAX_DIM {
        return Err(Error::DimensionTooLarge { dim, max: MAX_DIM });
    }
    Ok(())
}

/// Point on the Bloch sphere, θ ∈ [0, π], φ ∈ [0, 2π).
///
/// Maps to α = cos(θ/2), β = e^{iφ} sin(θ/2), so |α|² = (1+cos θ)/2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochPoint<T> {
    theta: T,
    phi: T,
}

impl<T: Real> BlochPoint<T> {
    pub fn new(theta: T, phi: T) -> Result<Self> {
        if !(theta >= T::zero() && theta <= T::PI()) {
            return Err(Error::InvalidParameter(format!("theta = {theta} outside [0, π]")));
        }
        if !(phi >= T::zero() && phi < T::TAU()) {
            return Err(Error::InvalidParameter(format!("phi = {phi} outside [0, 2π)")));
        }
        Ok(Self { theta, phi })
    }

    /// From cos θ, clamping tiny excursions outside [-1, 1].
    pub fn from_cos_theta(cos_theta: T, phi: T) -> Result<Self> {
        let c = cos_theta.max(-T::one()).min(T::one());
        Self::new(c.acos(), phi)
    }

    #[inline]
    pub fn theta(&self) -> T {
        self.theta
    }

    #[inline]
    pub fn phi(&self) -> T {
        self.phi
    }

    /// |α|²
    pub fn alpha_sqr(&self) -> T {
        (T::one() + self.theta.cos()) * T::lit(0.5)
    }

    /// |β|²
    pub fn beta_sqr(&self) -> T {
        (T::one() - self.theta.cos()) * T::lit(0.5)
    }

    /// Cartesian coordinates (x, y, z); z = 1 is |0⟩.
    pub fn xyz(&self) -> [T; 3] {
        let s = self.theta.sin();
        [s * self.phi.cos(), s * self.phi.sin(), self.theta.cos()]
    }

    pub fn to_state(&self) -> PureState<T> {
        let half = self.theta * T::lit(0.5);
        let alpha = Complex::new(half.cos(), T::zero());
        let beta = Complex::from_polar(half.sin(), self.phi);
        PureState::from_parts(vec![alpha, beta], true)
    }
}
