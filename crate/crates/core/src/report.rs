//! Fidelity summary for one parameter point.

use std::fmt;

use crate::{Error, Real, Result};

/// Which average a process fidelity was converted from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FidelityKind {
    SingleQubit,
    Ignore,
    Qed,
    QedWeighted,
    Qec,
}

impl fmt::Display for FidelityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FidelityKind::SingleQubit => "1q",
            FidelityKind::Ignore => "ign",
            FidelityKind::Qed => "qed",
            FidelityKind::QedWeighted => "qed_weighted",
            FidelityKind::Qec => "qec",
        })
    }
}

/// F_χ = (3·F_av − 1)/2, valid for a trace-preserving map.
pub fn f_chi_from_av<T: Real>(f_av: T) -> Result<T> {
    let third = T::one() / T::lit(3.0);
    if f_av.is_nan() || f_av < third - T::strict_tol() {
        return Err(Error::InvalidParameter(format!(
            "average fidelity {f_av} is below the fully depolarized value 1/3"
        )));
    }
    Ok(((T::lit(3.0) * f_av - T::one()) * T::lit(0.5)).max(T::zero()))
}

/// The fidelity family at one parameter point. Entries that do not apply are `None`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FidelityReport<T> {
    pub f_1q: Option<T>,
    pub f_ign: Option<T>,
    pub f_qed: Option<T>,
    pub f_qed_weighted: Option<T>,
    pub f_qec: Option<T>,
    pub f_chi: Option<T>,
    pub chi_source: Option<FidelityKind>,
    pub p_select: Option<T>,
}

impl<T: Real> FidelityReport<T> {
    pub fn get(&self, kind: FidelityKind) -> Option<T> {
        match kind {
            FidelityKind::SingleQubit => self.f_1q,
            FidelityKind::Ignore => self.f_ign,
            FidelityKind::Qed => self.f_qed,
            FidelityKind::QedWeighted => self.f_qed_weighted,
            FidelityKind::Qec => self.f_qec,
        }
    }

    /// Fills `f_chi` from the chosen entry; only trace-preserving averages qualify.
    pub fn with_chi(mut self, source: FidelityKind) -> Result<Self> {
        if matches!(source, FidelityKind::Qed | FidelityKind::QedWeighted) {
            return Err(Error::InvalidParameter(
                "process fidelity conversion needs a trace-preserving average".into(),
            ));
        }
        let f = self.get(source).ok_or_else(|| {
            Error::InvalidParameter(format!("report has no '{source}' fidelity to convert"))
        })?;
        self.f_chi = Some(f_chi_from_av(f)?);
        self.chi_source = Some(source);
        Ok(self)
    }

    /// Checks every present entry lies in [0, 1] up to `tol`.
    pub fn validate(&self, tol: T) -> Result<()> {
        let entries = [
            ("f_1q", self.f_1q),
            ("f_ign", self.f_ign),
            ("f_qed", self.f_qed),
            ("f_qed_weighted", self.f_qed_weighted),
            ("f_qec", self.f_qec),
            ("f_chi", self.f_chi),
            ("p_select", self.p_select),
        ];
        for (name, v) in entries {
            if let Some(v) = v {
                if !(v >= -tol && v <= T::one() + tol) {
                    return Err(Error::InvariantViolation {
                        time: 0.0,
                        what: format!("{name} = {v} outside [0, 1]"),
                    });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_conversion() {
        assert_eq!(f_chi_from_av(1.0f64).unwrap(), 1.0);
        assert_eq!(f_chi_from_av(1.0f64 / 3.0).unwrap(), 0.0);
        assert!(f_chi_from_av(0.2f64).is_err());
    }

    #[test]
    fn chi_only_from_trace_preserving() {
        let r = FidelityReport {
            f_ign: Some(0.9f64),
            f_qed: Some(0.95),
            ..Default::default()
        };
        assert!(r.clone().with_chi(FidelityKind::Qed).is_err());
        assert!(r.clone().with_chi(FidelityKind::Qec).is_err());
        let r = r.with_chi(FidelityKind::Ignore).unwrap();
        assert!((r.f_chi.unwrap() - 0.85).abs() < 1e-15);
        assert!(r.validate(1e-12).is_ok());
    }
}
