//! Standard one- and two-qubit gates in |0⟩-first ordering.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use super::matrix::ComplexMatrix;
use crate::{Error, Real};

/// Rotation / Pauli axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        })
    }
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_uppercase().as_str() {
            "X" => Ok(Axis::X),
            "Y" => Ok(Axis::Y),
            "Z" => Ok(Axis::Z),
            other => Err(Error::InvalidParameter(format!("unknown axis '{other}'"))),
        }
    }
}

fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

pub fn identity<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::identity(2)
}

pub fn pauli<T: Real>(axis: Axis) -> ComplexMatrix<T> {
    let data = match axis {
        Axis::X => vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
        Axis::Y => vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)],
        Axis::Z => vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)],
    };
    ComplexMatrix::from_vec(2, 2, data).expect("2x2")
}

pub fn pauli_x<T: Real>() -> ComplexMatrix<T> {
    pauli(Axis::X)
}

pub fn pauli_y<T: Real>() -> ComplexMatrix<T> {
    pauli(Axis::Y)
}

pub fn pauli_z<T: Real>() -> ComplexMatrix<T> {
    pauli(Axis::Z)
}

/// R^axis(angle) = exp(−i·angle/2·σ_axis); `angle` is the Bloch-sphere rotation angle.
pub fn rotation_gate<T: Real>(axis: Axis, angle: T) -> ComplexMatrix<T> {
    let half = angle * T::lit(0.5);
    let (s, co) = half.sin_cos();
    let id = identity::<T>().scale_real(co);
    let sigma = pauli::<T>(axis).scale(Complex::new(T::zero(), -s));
    &id + &sigma
}

/// CNOT with the first (most significant) qubit as control.
pub fn cnot<T: Real>() -> ComplexMatrix<T> {
    let mut m = ComplexMatrix::zeros(4, 4);
    let one = Complex::new(T::one(), T::zero());
    m.set(0, 0, one);
    m.set(1, 1, one);
    m.set(2, 3, one);
    m.set(3, 2, one);
    m
}

pub fn cz<T: Real>() -> ComplexMatrix<T> {
    controlled_phase(T::PI())
}

/// diag(1, 1, 1, e^{iφ}); φ = π is CZ.
pub fn controlled_phase<T: Real>(phi: T) -> ComplexMatrix<T> {
    let one = Complex::new(T::one(), T::zero());
    ComplexMatrix::diag(&[one, one, one, Complex::from_polar(T::one(), phi)])
}

pub fn hadamard<T: Real>() -> ComplexMatrix<T> {
    let h = T::FRAC_1_SQRT_2();
    ComplexMatrix::from_real(2, 2, &[h, h, h, -h]).expect("2x2")
}
