//! Average fidelity of linear one-qubit operations against a unitary target,
//! and the optimal unitary correction for each measurement-outcome class.

use std::fmt;

use num_complex::Complex;
use rayon::prelude::*;

use crate::analytic::{f_ign_2q, f_qec_2q};
use crate::qmath::{pauli_x, state_fidelity, ComplexMatrix, PureState};
use crate::{Error, Real, Result};

/// A linear, possibly trace-decreasing, map on one qubit, stored through the
/// images of |0⟩, |1⟩, |+⟩ and |+i⟩.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearQubitOp<T: Real> {
    zero: ComplexMatrix<T>,
    one: ComplexMatrix<T>,
    plus: ComplexMatrix<T>,
    plus_i: ComplexMatrix<T>,
}

impl<T: Real> LinearQubitOp<T> {
    pub fn from_images(
        zero: ComplexMatrix<T>,
        one: ComplexMatrix<T>,
        plus: ComplexMatrix<T>,
        plus_i: ComplexMatrix<T>,
    ) -> Result<Self> {
        for m in [&zero, &one, &plus, &plus_i] {
            if m.rows() != 2 || m.cols() != 2 {
                return Err(Error::DimensionMismatch(format!(
                    "probe image must be 2x2, got {}x{}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(Self {
            zero,
            one,
            plus,
            plus_i,
        })
    }

    /// From the images of all six probes, in the order |0⟩, |1⟩, |+⟩, |−⟩, |+i⟩, |−i⟩.
    ///
    /// Fails unless the images of antipodal probes share the same center.
    pub fn from_six_images(images: [ComplexMatrix<T>; 6], tol: T) -> Result<Self> {
        let [zero, one, plus, minus, plus_i, minus_i] = images;
        let c = (&zero + &one).scale_real(T::lit(0.5));
        let cx = (&plus + &minus).scale_real(T::lit(0.5));
        let cy = (&plus_i + &minus_i).scale_real(T::lit(0.5));
        let dev = c.max_abs_diff(&cx).max(c.max_abs_diff(&cy));
        if dev > tol {
            return Err(Error::InvalidParameter(format!(
                "probe images are not consistent with a linear map (deviation {dev})"
            )));
        }
        Self::from_images(zero, one, plus, plus_i)
    }

    /// ρ ↦ Σ K ρ K†
    pub fn from_kraus(kraus: &[ComplexMatrix<T>]) -> Result<Self> {
        for k in kraus {
            if k.rows() != 2 || k.cols() != 2 {
                return Err(Error::DimensionMismatch("Kraus operators must be 2x2".into()));
            }
        }
        let image = |psi: &PureState<T>| {
            let rho = psi.density();
            kraus
                .iter()
                .fold(ComplexMatrix::zeros(2, 2), |acc, k| &acc + &(&(k * &rho) * &k.adjoint()))
        };
        let [p0, p1, pp, _, ppi, _] = PureState::six_probes();
        Self::from_images(image(&p0), image(&p1), image(&pp), image(&ppi))
    }

    pub fn identity() -> Self {
        Self::from_kraus(&[ComplexMatrix::identity(2)]).expect("2x2")
    }

    /// Image of the maximally mixed input I/2.
    pub fn center(&self) -> ComplexMatrix<T> {
        (&self.zero + &self.one).scale_real(T::lit(0.5))
    }

    /// Images of |0⟩, |1⟩, |+⟩, |+i⟩.
    pub fn images(&self) -> [&ComplexMatrix<T>; 4] {
        [&self.zero, &self.one, &self.plus, &self.plus_i]
    }

    /// Image of an arbitrary 2×2 input, by linearity.
    pub fn apply(&self, rho: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        if rho.rows() != 2 || rho.cols() != 2 {
            return Err(Error::DimensionMismatch("input must be 2x2".into()));
        }
        let c = self.center();
        let dx = &self.plus - &c;
        let dy = &self.plus_i - &c;
        let i = Complex::new(T::zero(), T::one());
        let e01 = &dx + &dy.scale(i);
        let e10 = &dx - &dy.scale(i);
        let out = &(&(&self.zero.scale(rho.get(0, 0)) + &self.one.scale(rho.get(1, 1))) + &e01.scale(rho.get(0, 1)))
            + &e10.scale(rho.get(1, 0));
        Ok(out)
    }

    /// The map followed by the unitary `v`.
    pub fn then_unitary(&self, v: &ComplexMatrix<T>) -> Result<Self> {
        check_unitary(v)?;
        let conj = |m: &ComplexMatrix<T>| &(v * m) * &v.adjoint();
        Self::from_images(conj(&self.zero), conj(&self.one), conj(&self.plus), conj(&self.plus_i))
    }

    /// Sum of two maps (incoherent mixture of branches).
    pub fn add(&self, other: &Self) -> Self {
        Self {
            zero: &self.zero + &other.zero,
            one: &self.one + &other.one,
            plus: &self.plus + &other.plus,
            plus_i: &self.plus_i + &other.plus_i,
        }
    }

    /// w_ab = Tr[(ρ_a − ρ_c) σ_b]/2 for a, b ∈ {x, y, z}.
    fn bloch_weights(&self) -> [[T; 3]; 3] {
        let c = self.center();
        let d = [&self.plus - &c, &self.plus_i - &c, &self.zero - &c];
        let mut w = [[T::zero(); 3]; 3];
        for (a, da) in d.iter().enumerate() {
            // Tr(D σx) = D01 + D10, Tr(D σy) = i(D01 − D10), Tr(D σz) = D00 − D11
            let (d00, d01, d10, d11) = (da.get(0, 0), da.get(0, 1), da.get(1, 0), da.get(1, 1));
            let half = T::lit(0.5);
            w[a][0] = (d01 + d10).re * half;
            w[a][1] = (-(d01 - d10).im) * half;
            w[a][2] = (d00 - d11).re * half;
        }
        w
    }
}

fn check_unitary<T: Real>(u: &ComplexMatrix<T>) -> Result<()> {
    if u.rows() != 2 || u.cols() != 2 {
        return Err(Error::DimensionMismatch("correction must be a 2x2 unitary".into()));
    }
    let dev = u.unitarity_deviation();
    if !(dev <= T::input_tol()) {
        return Err(Error::NotUnitary { deviation: dev.as_f64() });
    }
    Ok(())
}

/// Bloch-sphere average of Tr[op(ρ_in) · Uρ_inU†], valid for trace-decreasing maps too.
pub fn avg_fidelity_vs_unitary<T: Real>(op: &LinearQubitOp<T>, u: &ComplexMatrix<T>) -> Result<T> {
    check_unitary(u)?;
    let c = op.center();
    let half_id = ComplexMatrix::identity(2).scale_real(T::lit(0.5));
    let [p0, _, pp, _, ppi, _] = PureState::six_probes();
    let mut sum = T::zero();
    for (image, probe) in [(&op.plus, &pp), (&op.plus_i, &ppi), (&op.zero, &p0)] {
        let target = &(&(u * &probe.density()) * &u.adjoint()) - &half_id;
        sum += (image - &c).trace_product(&target)?.re;
    }
    Ok(c.trace().re * T::lit(0.5) + sum / T::lit(3.0))
}

/// Mean of the state fidelity over the six probes.
pub fn six_state_average<T: Real>(op: &LinearQubitOp<T>, u: &ComplexMatrix<T>) -> Result<T> {
    check_unitary(u)?;
    let mut sum = T::zero();
    for probe in PureState::six_probes() {
        let out = op.apply(&probe.density())?;
        let target = PureState::unnormalized(u.apply(probe.amplitudes())?)?;
        sum += state_fidelity(&out, &target)?;
    }
    Ok(sum / T::lit(6.0))
}

/// Whether a branch is the "no error" result or one flagging an error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OutcomeClass {
    NoError,
    ErrorResult,
}

/// A measurement branch as a mixture of two maps.
///
/// No error: α|0⟩+β|1⟩ → α|0⟩ + kβ|1⟩ and → k̃β|0⟩.
/// Error result: α|0⟩+β|1⟩ → kβ|1⟩ and → k̃β|0⟩.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchKK<T> {
    k: T,
    k_tilde: T,
    class: OutcomeClass,
}

impl<T: Real> BranchKK<T> {
    pub fn new(k: T, k_tilde: T, class: OutcomeClass) -> Result<Self> {
        if !(k >= T::zero()) || !(k_tilde >= T::zero()) {
            return Err(Error::InvalidParameter(format!("k = {k}, k~ = {k_tilde} must be non-negative")));
        }
        if k * k + k_tilde * k_tilde > T::one() + T::strict_tol() {
            return Err(Error::InvalidParameter(format!(
                "k^2 + k~^2 = {} exceeds 1",
                k * k + k_tilde * k_tilde
            )));
        }
        Ok(Self { k, k_tilde, class })
    }

    /// Reads k and k̃ off the image of |1⟩: k² = ⟨1|ρ|1⟩, k̃² = ⟨0|ρ|0⟩.
    pub fn from_op(op: &LinearQubitOp<T>, class: OutcomeClass) -> Result<Self> {
        let one = &op.one;
        Self::new(
            one.get(1, 1).re.max(T::zero()).sqrt(),
            one.get(0, 0).re.max(T::zero()).sqrt(),
            class,
        )
    }

    #[inline]
    pub fn k(&self) -> T {
        self.k
    }

    #[inline]
    pub fn k_tilde(&self) -> T {
        self.k_tilde
    }

    #[inline]
    pub fn class(&self) -> OutcomeClass {
        self.class
    }

    pub fn kraus(&self) -> [ComplexMatrix<T>; 2] {
        let z = T::zero();
        let decay = ComplexMatrix::from_real(2, 2, &[z, self.k_tilde, z, z]).expect("2x2");
        let keep = match self.class {
            OutcomeClass::NoError => ComplexMatrix::from_real(2, 2, &[T::one(), z, z, self.k]),
            OutcomeClass::ErrorResult => ComplexMatrix::from_real(2, 2, &[z, z, z, self.k]),
        }
        .expect("2x2");
        [keep, decay]
    }

    pub fn to_op(&self) -> LinearQubitOp<T> {
        LinearQubitOp::from_kraus(&self.kraus()).expect("2x2 Kraus")
    }

    /// Bloch-averaged probability of the branch.
    pub fn p_avg(&self) -> T {
        let s = self.k * self.k + self.k_tilde * self.k_tilde;
        match self.class {
            OutcomeClass::NoError => (T::one() + s) * T::lit(0.5),
            OutcomeClass::ErrorResult => s * T::lit(0.5),
        }
    }
}

/// Equivalence class of a correcting unitary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnitaryClass {
    /// Leaves |0⟩ unchanged up to phase (includes the identity).
    FixesGround,
    /// Exchanges |0⟩ and |1⟩ up to phases.
    BitFlip,
}

impl fmt::Display for UnitaryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnitaryClass::FixesGround => "fixes-ground",
            UnitaryClass::BitFlip => "bit-flip",
        })
    }
}

impl UnitaryClass {
    /// Classifies by |⟨1|U|0⟩|, the overlap of U|0⟩ with |1⟩.
    pub fn of<T: Real>(u: &ComplexMatrix<T>) -> Self {
        if u.get(1, 0).norm() > T::FRAC_1_SQRT_2() {
            UnitaryClass::BitFlip
        } else {
            UnitaryClass::FixesGround
        }
    }

    /// I or X.
    pub fn representative<T: Real>(&self) -> ComplexMatrix<T> {
        match self {
            UnitaryClass::FixesGround => ComplexMatrix::identity(2),
            UnitaryClass::BitFlip => pauli_x(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimalCorrection<T> {
    pub class: UnitaryClass,
    pub f_bar_max: T,
    /// Both classes reach the maximum.
    pub tie: bool,
}

impl<T: Real> OptimalCorrection<T> {
    pub fn unitary(&self) -> ComplexMatrix<T> {
        self.class.representative()
    }
}

/// Best unitary correction for a branch and the resulting unnormalized average fidelity.
pub fn optimal_correction<T: Real>(branch: &BranchKK<T>) -> OptimalCorrection<T> {
    let (k, kt) = (branch.k, branch.k_tilde);
    let (k2, kt2) = (k * k, kt * kt);
    match branch.class {
        OutcomeClass::NoError => OptimalCorrection {
            class: UnitaryClass::FixesGround,
            f_bar_max: (T::one() + k + k2 + kt2 * T::lit(0.5)) / T::lit(3.0),
            tie: false,
        },
        OutcomeClass::ErrorResult => {
            let six = T::lit(6.0);
            if k >= kt {
                OptimalCorrection {
                    class: UnitaryClass::FixesGround,
                    f_bar_max: (k2 + k2 + kt2) / six,
                    tie: k == kt,
                }
            } else {
                OptimalCorrection {
                    class: UnitaryClass::BitFlip,
                    f_bar_max: (k2 + kt2 + kt2) / six,
                    tie: false,
                }
            }
        }
    }
}

/// F_qec − F_ign for the two-qubit code: (p1 − min(p1, p2))/6.
///
/// Positive exactly when the main qubit is the more likely to relax (p1 > p2),
/// in which case the π-pulse after result 1 helps.
pub fn qec_gain_2q<T: Real>(p1: T, p2: T) -> Result<T> {
    Ok(f_qec_2q(p1, p2)? - f_ign_2q(p1, p2)?)
}

/// Rotation by `angle` about z or y as a 3×3 SO(3) matrix.
fn rot_z<T: Real>(angle: T) -> [[T; 3]; 3] {
    let (s, c) = angle.sin_cos();
    let (o, z) = (T::one(), T::zero());
    [[c, -s, z], [s, c, z], [z, z, o]]
}

fn rot_y<T: Real>(angle: T) -> [[T; 3]; 3] {
    let (s, c) = angle.sin_cos();
    let (o, z) = (T::one(), T::zero());
    [[c, z, s], [z, o, z], [-s, z, c]]
}

fn mat3<T: Real>(a: &[[T; 3]; 3], b: &[[T; 3]; 3]) -> [[T; 3]; 3] {
    let mut out = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// ZYZ Euler grid over SU(2): first and last angles 2πi/res, middle πj/res (j = 0..=res).
#[derive(Clone, Debug)]
pub struct EulerGrid<T> {
    resolution: usize,
    /// Rz(a)·Ry(b) in SO(3) for every (a, b) pair, row-major over (i, j).
    outer: Vec<[[T; 3]; 3]>,
    /// (cos c, sin c) for every last angle.
    inner: Vec<(T, T)>,
}

impl<T: Real> EulerGrid<T> {
    pub fn new(resolution: usize) -> Result<Self> {
        if resolution < 24 {
            return Err(Error::InvalidParameter(format!(
                "Euler grid resolution must be at least 24, got {resolution}"
            )));
        }
        let res = T::from_usize_lossy(resolution);
        let mut outer = Vec::with_capacity(resolution * (resolution + 1));
        for i in 0..resolution {
            let a = T::TAU() * T::from_usize_lossy(i) / res;
            for j in 0..=resolution {
                let b = T::PI() * T::from_usize_lossy(j) / res;
                outer.push(mat3(&rot_z(a), &rot_y(b)));
            }
        }
        let inner = (0..resolution)
            .map(|l| (T::TAU() * T::from_usize_lossy(l) / res).sin_cos())
            .map(|(s, c)| (c, s))
            .collect();
        Ok(Self {
            resolution,
            outer,
            inner,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.outer.len() * self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn angles(&self, outer_idx: usize, inner_idx: usize) -> (T, T, T) {
        let res = T::from_usize_lossy(self.resolution);
        let i = outer_idx / (self.resolution + 1);
        let j = outer_idx % (self.resolution + 1);
        (
            T::TAU() * T::from_usize_lossy(i) / res,
            T::PI() * T::from_usize_lossy(j) / res,
            T::TAU() * T::from_usize_lossy(inner_idx) / res,
        )
    }
}

/// Rz(a)·Ry(b)·Rz(c) in SU(2).
pub fn euler_zyz<T: Real>(a: T, b: T, c: T) -> ComplexMatrix<T> {
    use crate::qmath::{rotation_gate, Axis};
    &(&rotation_gate(Axis::Z, a) * &rotation_gate(Axis::Y, b)) * &rotation_gate(Axis::Z, c)
}

#[derive(Clone, Debug)]
pub struct UnitarySearchResult<T: Real> {
    pub best_u: ComplexMatrix<T>,
    pub f_bar: T,
    /// (a, b, c) of the maximizing ZYZ rotation.
    pub euler: (T, T, T),
    pub class: UnitaryClass,
}

/// Exhaustive search of the Euler grid for the unitary target maximizing
/// [`avg_fidelity_vs_unitary`].
///
/// The objective is linear in the SO(3) image R of U:
/// F̄ = Tr ρ_c/2 + (1/3) Σ_ab R_ba w_ab, so each grid point costs a few flops.
pub fn numeric_unitary_search<T: Real>(op: &LinearQubitOp<T>, grid: &EulerGrid<T>) -> UnitarySearchResult<T> {
    let w = op.bloch_weights();
    let base = op.center().trace().re * T::lit(0.5);
    // For R = M·Rz(c): Σ_ab R_ba w_ab = Σ_{a,k} Rz(c)_ka G_ka with G_ka = Σ_b M_bk w_ab.
    let best = grid
        .outer
        .par_iter()
        .enumerate()
        .map(|(oi, m)| {
            let mut g = [[T::zero(); 3]; 3];
            for (k, row) in g.iter_mut().enumerate() {
                for (a, slot) in row.iter_mut().enumerate() {
                    *slot = (0..3).map(|b| m[b][k] * w[a][b]).sum();
                }
            }
            let diag = g[0][0] + g[1][1];
            let skew = g[1][0] - g[0][1];
            let mut best = (T::neg_infinity(), 0usize);
            for (ci, &(c, s)) in grid.inner.iter().enumerate() {
                let v = g[2][2] + c * diag + s * skew;
                if v > best.0 {
                    best = (v, ci);
                }
            }
            (best.0, oi, best.1)
        })
        .reduce(
            || (T::neg_infinity(), usize::MAX, usize::MAX),
            |x, y| {
                // Deterministic: larger value wins, ties go to the lower index.
                if y.0 > x.0 || (y.0 == x.0 && (y.1, y.2) < (x.1, x.2)) {
                    y
                } else {
                    x
                }
            },
        );
    let (a, b, c) = grid.angles(best.1, best.2);
    let best_u = euler_zyz(a, b, c);
    let class = UnitaryClass::of(&best_u);
    UnitarySearchResult {
        best_u,
        f_bar: base + best.0 / T::lit(3.0),
        euler: (a, b, c),
        class,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{f_av_1q, f_qed_2q_weighted};
    use crate::channels::KrausChannel;
    use crate::qmath::{pauli_y, pauli_z, rotation_gate, Axis};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn identity_op_is_perfect() {
        let op = LinearQubitOp::<f64>::identity();
        assert!(close(avg_fidelity_vs_unitary(&op, &ComplexMatrix::identity(2)).unwrap(), 1.0, 1e-15));
        let r = numeric_unitary_search(&op, &EulerGrid::new(24).unwrap());
        assert!(close(r.f_bar, 1.0, 1e-14));
        assert_eq!(r.class, UnitaryClass::FixesGround);
    }

    #[test]
    fn damping_matches_single_qubit_average() {
        for p in [0.0, 0.3, 0.8] {
            let ch = KrausChannel::damping(p).unwrap();
            let op = LinearQubitOp::from_kraus(ch.operators()).unwrap();
            let f = avg_fidelity_vs_unitary(&op, &ComplexMatrix::identity(2)).unwrap();
            assert!(close(f, f_av_1q(p).unwrap(), 1e-14));
        }
    }

    #[test]
    fn non_unitary_target_rejected() {
        let op = LinearQubitOp::<f64>::identity();
        let bad = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.5]).unwrap();
        assert!(matches!(avg_fidelity_vs_unitary(&op, &bad), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn apply_reconstructs_images() {
        let kraus = [
            rotation_gate(Axis::X, 0.4).scale_real(0.7),
            ComplexMatrix::from_vec(2, 2, vec![Complex::new(0.1, 0.2), Complex::new(0.3, 0.0), Complex::new(0.0, -0.2), Complex::new(0.4, 0.1)]).unwrap(),
        ];
        let op = LinearQubitOp::from_kraus(&kraus).unwrap();
        for probe in PureState::<f64>::six_probes() {
            let rho = probe.density();
            let want = kraus.iter().fold(ComplexMatrix::zeros(2, 2), |acc, k| &acc + &(&(k * &rho) * &k.adjoint()));
            assert!(op.apply(&rho).unwrap().max_abs_diff(&want) < 1e-15);
        }
    }

    #[test]
    fn six_images_must_be_linear() {
        let op = LinearQubitOp::from_kraus(KrausChannel::damping(0.3).unwrap().operators()).unwrap();
        let imgs: Vec<_> = PureState::<f64>::six_probes().iter().map(|p| op.apply(&p.density()).unwrap()).collect();
        let arr: [ComplexMatrix<f64>; 6] = imgs.clone().try_into().unwrap();
        assert!(LinearQubitOp::from_six_images(arr, 1e-12).is_ok());
        let mut bad = imgs;
        bad[3] = ComplexMatrix::identity(2);
        let arr: [ComplexMatrix<f64>; 6] = bad.try_into().unwrap();
        assert!(LinearQubitOp::from_six_images(arr, 1e-12).is_err());
    }

    #[test]
    fn no_error_branch_gives_weighted_qed() {
        for &(p1, p2) in &[(0.1f64, 0.2f64), (0.5, 0.5), (0.9, 0.3)] {
            let k = ((1.0 - p1) * (1.0 - p2)).sqrt();
            let kt = (p1 * p2).sqrt();
            let b = BranchKK::new(k, kt, OutcomeClass::NoError).unwrap();
            let best = optimal_correction(&b);
            assert_eq!(best.class, UnitaryClass::FixesGround);
            let direct = avg_fidelity_vs_unitary(&b.to_op(), &ComplexMatrix::identity(2)).unwrap();
            assert!(close(best.f_bar_max, direct, 1e-15));
            let weighted = best.f_bar_max / b.p_avg();
            assert!(close(weighted, f_qed_2q_weighted(p1, p2).unwrap(), 1e-14));
        }
    }

    #[test]
    fn error_branch_classes() {
        let tie = optimal_correction(&BranchKK::new(0.5f64, 0.5, OutcomeClass::ErrorResult).unwrap());
        assert!(tie.tie);
        assert!(close(tie.f_bar_max, 0.125, 1e-16));
        let flip = optimal_correction(&BranchKK::new(0.0f64, 1.0, OutcomeClass::ErrorResult).unwrap());
        assert_eq!(flip.class, UnitaryClass::BitFlip);
        assert!(close(flip.f_bar_max, 1.0 / 3.0, 1e-16));
        let b = BranchKK::new(0.0f64, 1.0, OutcomeClass::ErrorResult).unwrap();
        let f = avg_fidelity_vs_unitary(&b.to_op(), &pauli_x()).unwrap();
        assert!(close(f, 1.0 / 3.0, 1e-15));
        assert!(BranchKK::new(0.9f64, 0.9, OutcomeClass::NoError).is_err());
    }

    #[test]
    fn closed_forms_match_direct_evaluation() {
        for &(k, kt) in &[(0.3f64, 0.6f64), (0.7, 0.2), (0.0, 0.0)] {
            let b = BranchKK::new(k, kt, OutcomeClass::ErrorResult).unwrap();
            let best = optimal_correction(&b);
            let f = avg_fidelity_vs_unitary(&b.to_op(), &best.unitary()).unwrap();
            assert!(close(best.f_bar_max, f, 1e-15));
            let back = BranchKK::from_op(&b.to_op(), OutcomeClass::ErrorResult).unwrap();
            assert!(close(back.k(), k, 1e-15) && close(back.k_tilde(), kt, 1e-15));
        }
    }

    #[test]
    fn six_state_equals_bloch_formula() {
        let kraus = [
            ComplexMatrix::from_vec(2, 2, vec![Complex::new(0.5, 0.1), Complex::new(0.2, -0.3), Complex::new(0.0, 0.4), Complex::new(-0.1, 0.2)]).unwrap(),
            ComplexMatrix::from_real(2, 2, &[0.0, 0.3, 0.2, 0.1]).unwrap(),
        ];
        let op = LinearQubitOp::from_kraus(&kraus).unwrap();
        for u in [ComplexMatrix::identity(2), pauli_y(), pauli_z(), euler_zyz(0.3, 1.2, -0.7)] {
            let a = avg_fidelity_vs_unitary(&op, &u).unwrap();
            let b = six_state_average(&op, &u).unwrap();
            assert!(close(a, b, 1e-15));
        }
    }

    #[test]
    fn grid_search_value_matches_direct_evaluation() {
        let op = BranchKK::new(0.4f64, 0.7, OutcomeClass::NoError).unwrap().to_op();
        let r = numeric_unitary_search(&op, &EulerGrid::new(24).unwrap());
        let direct = avg_fidelity_vs_unitary(&op, &r.best_u).unwrap();
        assert!(close(r.f_bar, direct, 1e-14));
    }

    #[test]
    fn damping_no_error_branch_search() {
        // Result-0 branch of a damped single qubit: keep only the not-relaxed factor.
        let p = 0.4f64;
        let b = BranchKK::new((1.0 - p).sqrt(), 0.0, OutcomeClass::NoError).unwrap();
        let closed = optimal_correction(&b).f_bar_max;
        let r = numeric_unitary_search(&b.to_op(), &EulerGrid::new(48).unwrap());
        assert!(r.f_bar - closed < 1e-4);
        assert!(r.f_bar <= closed + 1e-12);
    }

    #[test]
    fn result_one_branch_flips_when_main_relaxes_more() {
        let (p1, p2) = (0.4f64, 0.1f64);
        let b = BranchKK::new(((1.0 - p1) * p2).sqrt(), (p1 * (1.0 - p2)).sqrt(), OutcomeClass::ErrorResult).unwrap();
        let r = numeric_unitary_search(&b.to_op(), &EulerGrid::new(96).unwrap());
        assert_eq!(r.class, UnitaryClass::BitFlip);
        assert!(r.best_u.get(1, 0).norm() > 0.99);
        assert!(close(r.f_bar, optimal_correction(&b).f_bar_max, 1e-12));
    }

    #[test]
    fn qec_gain() {
        assert_eq!(qec_gain_2q(0.2f64, 0.2).unwrap(), 0.0);
        assert!(close(qec_gain_2q(0.3f64, 0.1).unwrap(), 1.0 / 30.0, 1e-15));
        assert_eq!(qec_gain_2q(0.0f64, 0.5).unwrap(), 0.0);
        assert_eq!(qec_gain_2q(0.1f64, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn grid_resolution_floor() {
        assert!(EulerGrid::<f64>::new(23).is_err());
        assert_eq!(EulerGrid::<f64>::new(24).unwrap().len(), 24 * 25 * 24);
    }
}
