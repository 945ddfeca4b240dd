//! Repetitive-code quantum error detection and correction under energy relaxation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
mod num;
pub mod analytic;
pub mod channels;
pub mod correction;
pub mod protocol;
pub mod qmath;
pub mod report;
pub mod scenario;

pub use error::{Error, Result};
pub use num::Real;

pub use num_complex::Complex;

pub type Complex64 = Complex<f64>;
pub type Matrix = qmath::ComplexMatrix<f64>;
pub type State = qmath::PureState<f64>;
pub type Bloch = qmath::BlochPoint<f64>;
