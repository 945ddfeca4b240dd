//! Trajectory sampling: random initial state, random relaxation scenario.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::averaging::{haar_point, BlochAverager};
use super::fidelity::{amplitudes, Mode};
use super::CompiledCode;
use crate::qmath::ComplexMatrix;
use crate::{Error, Real, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate<T> {
    pub estimate: T,
    pub std_error: T,
    pub samples: usize,
    /// Trajectories that produced result 0.
    pub selected: usize,
}

struct Entry<T: Real> {
    outcome: u64,
    kraus: ComplexMatrix<T>,
}

fn apply<T: Real>(k: &ComplexMatrix<T>, psi: &[Complex<T>; 2]) -> [Complex<T>; 2] {
    [
        k.get(0, 0) * psi[0] + k.get(0, 1) * psi[1],
        k.get(1, 0) * psi[0] + k.get(1, 1) * psi[1],
    ]
}

fn norm_sqr<T: Real>(v: &[Complex<T>; 2]) -> T {
    v[0].norm_sqr() + v[1].norm_sqr()
}

fn state_fidelity<T: Real>(psi: &[Complex<T>; 2], v: &[Complex<T>; 2]) -> T {
    let ov = psi[0].conj() * v[0] + psi[1].conj() * v[1];
    ov.norm_sqr() / (norm_sqr(psi) * norm_sqr(v))
}

fn mean_and_error(sum: f64, sum_sq: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sum_sq - sum * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

/// Estimates one strategy fidelity from `n_samples` sampled trajectories.
///
/// The stream is ChaCha8 seeded with `seed`; per trajectory it draws
/// cos θ, φ and one uniform number that picks the scenario, so results are
/// reproducible across platforms. The weighted QED error comes from the
/// delta method for a ratio estimator.
pub fn monte_carlo_fidelity<T: Real>(n_qubits: usize, p_list: &[T], mode: Mode, n_samples: usize, seed: u64) -> Result<McEstimate<T>> {
    BlochAverager::MonteCarlo { samples: n_samples, seed }.validate()?;
    let code = CompiledCode::new(n_qubits, p_list)?;
    let outcomes = if mode == Mode::QecOptimal {
        code.corrected_outcomes()?
    } else {
        code.outcomes().to_vec()
    };
    let entries: Vec<Entry<T>> = outcomes
        .iter()
        .flat_map(|o| {
            o.kraus.iter().map(move |(_, k)| Entry {
                outcome: o.result_bits,
                kraus: k.clone(),
            })
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = vec![T::zero(); entries.len()];
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    let (mut sel_sum, mut cross_sq) = (0.0f64, 0.0f64);
    let mut selected = 0usize;
    let mut records: Vec<(bool, f64)> = if mode == Mode::QedWeighted {
        Vec::with_capacity(n_samples)
    } else {
        Vec::new()
    };

    for _ in 0..n_samples {
        let psi = amplitudes(&haar_point::<T>(&mut rng));
        let norm = norm_sqr(&psi);
        let mut total = T::zero();
        let mut p_sel = T::zero();
        for (w, e) in weights.iter_mut().zip(&entries) {
            *w = norm_sqr(&apply(&e.kraus, &psi));
            total += *w;
            if e.outcome == 0 {
                p_sel += *w;
            }
        }
        let u: f64 = rng.gen();
        let target = T::lit(u) * total;
        let mut acc = T::zero();
        let mut pick = entries.len() - 1;
        for (i, &w) in weights.iter().enumerate() {
            acc += w;
            if target < acc {
                pick = i;
                break;
            }
        }
        // skip zero-weight entries at the tail
        while weights[pick] == T::zero() && pick > 0 {
            pick -= 1;
        }
        let e = &entries[pick];
        let f = state_fidelity(&psi, &apply(&e.kraus, &psi)).as_f64();
        let is_sel = e.outcome == 0;
        selected += usize::from(is_sel);
        let x = match mode {
            Mode::Ignore | Mode::QecOptimal => f,
            Mode::QedUniform => {
                if is_sel {
                    f * norm.as_f64() / p_sel.as_f64()
                } else {
                    0.0
                }
            }
            Mode::QedWeighted => {
                records.push((is_sel, f));
                if is_sel {
                    sel_sum += 1.0;
                    f
                } else {
                    0.0
                }
            }
        };
        sum += x;
        sum_sq += x * x;
    }

    let (estimate, std_error) = if mode == Mode::QedWeighted {
        if selected == 0 {
            return Err(Error::InvalidParameter("no trajectory produced result 0".into()));
        }
        let ratio = sum / sel_sum;
        for &(s, f) in &records {
            if s {
                cross_sq += (f - ratio) * (f - ratio);
            }
        }
        let n = n_samples as f64;
        let mean_sel = sel_sum / n;
        let se = (cross_sq / (n * (n - 1.0))).sqrt() / mean_sel;
        (ratio, se)
    } else {
        mean_and_error(sum, sum_sq, n_samples)
    };
    Ok(McEstimate {
        estimate: T::lit(estimate),
        std_error: T::lit(std_error),
        samples: n_samples,
        selected,
    })
}
