//! Averages over the Bloch sphere of initial states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::qmath::BlochPoint;
use crate::{Error, Real, Result};

/// How to average a function of the initial state over the sphere.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlochAverager {
    /// Gauss–Legendre in cos θ with `nodes` points, times `azimuths` equally spaced φ values.
    Quadrature { nodes: usize, azimuths: usize },
    /// Mean over |0⟩, |1⟩, |±⟩, |±i⟩.
    SixState,
    /// Mean over `samples` uniformly drawn states.
    MonteCarlo { samples: usize, seed: u64 },
}

impl Default for BlochAverager {
    fn default() -> Self {
        BlochAverager::Quadrature { nodes: 64, azimuths: 1 }
    }
}

impl BlochAverager {
    pub const MIN_NODES: usize = 32;
    pub const MIN_SAMPLES: usize = 1000;

    pub fn validate(&self) -> Result<()> {
        match *self {
            BlochAverager::Quadrature { nodes, azimuths } => {
                if nodes < Self::MIN_NODES {
                    return Err(Error::InvalidParameter(format!(
                        "quadrature needs at least {} nodes, got {nodes}",
                        Self::MIN_NODES
                    )));
                }
                if azimuths == 0 {
                    return Err(Error::InvalidParameter("at least one azimuthal angle is needed".into()));
                }
            }
            BlochAverager::MonteCarlo { samples, .. } if samples < Self::MIN_SAMPLES => {
                return Err(Error::InvalidParameter(format!(
                    "Monte-Carlo averaging needs at least {} samples, got {samples}",
                    Self::MIN_SAMPLES
                )));
            }
            _ => {}
        }
        Ok(())
    }
}

/// Whether the averaged function is linear in the initial density matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Linearity {
    Linear,
    NonLinear,
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre<T: Real>(n: usize) -> Vec<(T, T)> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let nf = n as f64;
    for i in 0..n {
        // Newton iteration from the Tricomi initial guess, in f64 regardless of T.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((T::lit(x), T::lit(w)));
    }
    out.reverse();
    out
}

/// Uniform point on the sphere from two uniform numbers in [0, 1).
pub(crate) fn haar_point<T: Real>(rng: &mut ChaCha8Rng) -> BlochPoint<T> {
    let u: f64 = rng.gen();
    let v: f64 = rng.gen();
    let cos_theta = T::lit(1.0 - 2.0 * u);
    BlochPoint::from_cos_theta(cos_theta, T::lit(v * std::f64::consts::TAU)).expect("in range")
}

fn six_points<T: Real>() -> [BlochPoint<T>; 6] {
    let (z, h, pi) = (T::zero(), T::FRAC_PI_2(), T::PI());
    let pt = |th, ph| BlochPoint::new(th, ph).expect("valid");
    [
        pt(z, z),
        pt(pi, z),
        pt(h, z),
        pt(h, pi),
        pt(h, h),
        pt(h, T::lit(3.0) * h),
    ]
}

/// Mean of `f` over the sphere of initial states.
///
/// Six-state averaging is exact only for functions linear in the initial
/// density matrix; requesting it for a `NonLinear` function is an error.
pub fn bloch_average<T, F>(f: F, averager: &BlochAverager, linearity: Linearity) -> Result<T>
where
    T: Real,
    F: Fn(&BlochPoint<T>) -> T,
{
    averager.validate()?;
    match *averager {
        BlochAverager::Quadrature { nodes, azimuths } => {
            let az = T::from_usize_lossy(azimuths);
            let mut sum = T::zero();
            for (x, w) in gauss_legendre::<T>(nodes) {
                let mut ring = T::zero();
                for k in 0..azimuths {
                    let phi = T::TAU() * T::from_usize_lossy(k) / az;
                    ring += f(&BlochPoint::from_cos_theta(x, phi)?);
                }
                sum += w * ring / az;
            }
            Ok(sum * T::lit(0.5))
        }
        BlochAverager::SixState => {
            if linearity == Linearity::NonLinear {
                return Err(Error::SixStateNonLinear);
            }
            Ok(six_points::<T>().iter().map(&f).sum::<T>() / T::lit(6.0))
        }
        BlochAverager::MonteCarlo { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut sum = T::zero();
            for _ in 0..samples {
                sum += f(&haar_point(&mut rng));
            }
            Ok(sum / T::from_usize_lossy(samples))
        }
    }
}
