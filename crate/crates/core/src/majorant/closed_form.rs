// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::{Coefficient, Extended, MajorantSeries};
use crate::error::{Error, Result};

/// Closed-form majorant families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClosedFormMajorant {
    /// `C / (R - t)`, coefficients `C / R^{k+1}`.
    Geometric { c: f64, r: f64 },
    /// `C e^{t / R}`, coefficients `C / (R^k k!)`.
    Exponential { c: f64, r: f64 },
    /// `Σ c_k t^k` with `c_k >= 0`.
    Polynomial { coeffs: Vec<f64> },
}

impl ClosedFormMajorant {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Self::Geometric { c, r } | Self::Exponential { c, r } => *c > 0.0 && *r > 0.0 && c.is_finite() && r.is_finite(),
            Self::Polynomial { coeffs } => !coeffs.is_empty() && coeffs.iter().all(|c| *c >= 0.0 && c.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid closed form {self:?}")))
        }
    }

    /// Expansion at `t = 0` to order `n`.
    pub fn expand<T: Coefficient>(&self, n: usize) -> Result<MajorantSeries<T>> {
        self.expand_at(&T::zero(), n)
    }

    /// Expansion of `t ↦ g(a + t)` to order `n`, computed in `T` arithmetic.
    pub fn expand_at<T: Coefficient>(&self, a: &T, n: usize) -> Result<MajorantSeries<T>> {
        self.validate()?;
        let n = n.max(1);
        if !(*a >= T::zero()) {
            return Err(Error::InvalidArgument(format!("recentering point {a} is negative")));
        }
        let coeffs: Vec<T> = match self {
            Self::Geometric { c, r } => {
                let (c, r) = (T::from_param(*c)?, T::from_param(*r)?);
                if *a >= r {
                    return Err(Error::PastPole { a: a.to_f64().unwrap_or(f64::NAN), radius: r.to_f64().unwrap_or(f64::NAN) });
                }
                let rr = r - a.clone();
                let mut v = c / rr.clone();
                let mut out = Vec::with_capacity(n + 1);
                for _ in 0..=n {
                    out.push(v.clone());
                    v = v / rr.clone();
                }
                out
            }
            Self::Exponential { c, r } => {
                let shift = if a.is_zero() {
                    T::one()
                } else if T::EXACT {
                    return Err(Error::Inexact("exponential recentering"));
                } else {
                    let af = a.to_f64().unwrap_or(f64::NAN);
                    T::from_param((af / r).exp())?
                };
                let (c, r) = (T::from_param(*c)?, T::from_param(*r)?);
                let mut v = c * shift;
                let mut out = Vec::with_capacity(n + 1);
                for k in 0..=n {
                    if k > 0 {
                        v = v / (r.clone() * T::from_usize(k).expect("small integer"));
                    }
                    out.push(v.clone());
                }
                out
            }
            Self::Polynomial { coeffs } => {
                let p: Vec<T> = coeffs.iter().map(|&c| T::from_param(c)).collect::<Result<_>>()?;
                taylor_shift(&p, a, n)
            }
        };
        MajorantSeries::new(coeffs.into_iter().map(Extended::Fin).collect())
    }
}

/// Coefficients of `p(a + t)` up to order `n`.
fn taylor_shift<T: Coefficient>(p: &[T], a: &T, n: usize) -> Vec<T> {
    // repeated synthetic division
    let mut work = p.to_vec();
    let mut out = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        if work.is_empty() {
            out.push(T::zero());
            continue;
        }
        let mut carry = T::zero();
        let mut quotient = vec![T::zero(); work.len() - 1];
        for i in (0..work.len()).rev() {
            carry = carry * a.clone() + work[i].clone();
            if i > 0 {
                quotient[i - 1] = carry.clone();
            }
        }
        out.push(carry);
        work = quotient;
    }
    out
}

/// Re-expansion of a closed form at `a >= 0`: `C/(R - t)` becomes `C/((R - a) - t)`,
/// `C e^{t/R}` becomes `C e^{a/R} e^{t/R}`, polynomials are Taylor-shifted.
pub fn recenter(cf: &ClosedFormMajorant, a: f64) -> Result<ClosedFormMajorant> {
    cf.validate()?;
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::InvalidArgument(format!("recentering point {a} must be finite and >= 0")));
    }
    Ok(match cf {
        ClosedFormMajorant::Geometric { c, r } => {
            if a >= *r {
                return Err(Error::PastPole { a, radius: *r });
            }
            ClosedFormMajorant::Geometric { c: *c, r: r - a }
        }
        ClosedFormMajorant::Exponential { c, r } => ClosedFormMajorant::Exponential { c: c * (a / r).exp(), r: *r },
        ClosedFormMajorant::Polynomial { coeffs } => {
            ClosedFormMajorant::Polynomial { coeffs: taylor_shift(coeffs, &a, coeffs.len().saturating_sub(1)) }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn recenter_examples() {
        let g = ClosedFormMajorant::Geometric { c: 1.0, r: 2.0 };
        assert_eq!(recenter(&g, 0.0).unwrap(), g);
        assert_eq!(recenter(&g, 1.0).unwrap(), ClosedFormMajorant::Geometric { c: 1.0, r: 1.0 });
        assert!(matches!(recenter(&g, 2.0), Err(Error::PastPole { .. })));
        let e = ClosedFormMajorant::Exponential { c: 2.0, r: 0.5 };
        assert_eq!(recenter(&e, 0.5).unwrap(), ClosedFormMajorant::Exponential { c: 2.0 * 1f64.exp(), r: 0.5 });
        let p = ClosedFormMajorant::Polynomial { coeffs: vec![1.0, 2.0, 1.0] };
        // (1 + (t + 1))^2 = 4 + 4t + t^2
        assert_eq!(recenter(&p, 1.0).unwrap(), ClosedFormMajorant::Polynomial { coeffs: vec![4.0, 4.0, 1.0] });
    }

    #[test]
    fn expansions() {
        let g = ClosedFormMajorant::Geometric { c: 3.0, r: 2.0 }.expand::<BigRational>(5).unwrap();
        assert_eq!(g.coeff(3), &Extended::Fin(BigRational::new(3.into(), 16.into())));
        let at = ClosedFormMajorant::Geometric { c: 1.0, r: 2.0 }.expand_at(&BigRational::from_integer(1.into()), 6).unwrap();
        assert!(at.coeffs().iter().all(|c| *c == Extended::Fin(BigRational::from_integer(1.into()))));
        let e = ClosedFormMajorant::Exponential { c: 1.0, r: 1.0 }.expand::<BigRational>(6).unwrap();
        assert_eq!(e, MajorantSeries::exp(6));
        assert!(matches!(
            ClosedFormMajorant::Exponential { c: 1.0, r: 1.0 }.expand_at(&BigRational::from_integer(1.into()), 3),
            Err(Error::Inexact(_))
        ));
        let p = ClosedFormMajorant::Polynomial { coeffs: vec![0.0, 1.0] }.expand::<f64>(3).unwrap();
        assert_eq!(p.to_f64s(), vec![0.0, 1.0, 0.0, 0.0]);
        assert!(ClosedFormMajorant::Geometric { c: -1.0, r: 1.0 }.expand::<f64>(3).is_err());
    }
}
