// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::{add, compose, mul, ClosedFormMajorant, Coefficient, Extended, MajorantSeries, SeriesJson};
use crate::error::{Error, Result};

/// Right-hand side built from `t`, `Π`, `Ω`, constants, sums, products and closed forms.
///
/// JSON examples: `"omega"`, `{"mul": ["omega", "omega"]}`,
/// `{"apply": {"outer": {"family": "geometric", "c": 1, "r": 2}, "inner": "pi"}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    T,
    Pi,
    Omega,
    Const(f64),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    /// A closed form in `t`.
    Closed(ClosedFormMajorant),
    /// `outer(inner)`, re-expanded at the constant term of `inner`.
    Apply { outer: ClosedFormMajorant, inner: Box<Expr> },
    /// `inner` minus its constant term.
    DropConstant(Box<Expr>),
    /// Explicit coefficients in `t`, zero-padded or truncated.
    Series(SeriesJson),
}

impl Expr {
    pub fn omega_squared() -> Self {
        Expr::Mul(vec![Expr::Omega, Expr::Omega])
    }

    /// Expansion to order `n` given the current `Π`, `Ω` (both of order `n`).
    pub fn eval<T: Coefficient>(&self, pi: &MajorantSeries<T>, omega: &MajorantSeries<T>, n: usize) -> Result<MajorantSeries<T>> {
        Ok(match self {
            Expr::T => MajorantSeries::identity(n),
            Expr::Pi => pi.with_order(n),
            Expr::Omega => omega.with_order(n),
            Expr::Const(c) => {
                if !(*c >= 0.0) || !c.is_finite() {
                    return Err(Error::InvalidArgument(format!("constant {c} must be finite and >= 0")));
                }
                MajorantSeries::constant(Extended::Fin(T::from_param(*c)?), n)
            }
            Expr::Add(terms) => {
                let mut acc = MajorantSeries::zero(n);
                for e in terms {
                    acc = add(&acc, &e.eval(pi, omega, n)?);
                }
                acc
            }
            Expr::Mul(terms) => {
                let mut acc = MajorantSeries::constant(Extended::Fin(T::one()), n);
                for e in terms {
                    acc = mul(&acc, &e.eval(pi, omega, n)?);
                }
                acc
            }
            Expr::Closed(cf) => cf.expand(n)?,
            Expr::Apply { outer, inner } => {
                let s = inner.eval(pi, omega, n)?;
                let a = s.coeff(0).finite().cloned().ok_or(Error::InfiniteCoefficient { order: 0 })?;
                compose(&outer.expand_at(&a, n)?, &s.drop_constant())?
            }
            Expr::DropConstant(inner) => inner.eval(pi, omega, n)?.drop_constant(),
            Expr::Series(j) => MajorantSeries::from_json(j)?.with_order(n),
        })
    }
}

/// Solves `Ω' = M(t, Π, Ω)`, `Π' = N(t, Π, Ω)` in formal power series to order `order`.
///
/// Coefficient `k + 1` of each unknown is coefficient `k` of its right-hand side
/// divided by `k + 1`, with the right-hand sides expanded on the coefficients known
/// through order `k`.
pub fn ode_solve<T: Coefficient>(
    m: &Expr,
    nrhs: &Expr,
    pi0: f64,
    omega0: f64,
    order: usize,
) -> Result<(MajorantSeries<T>, MajorantSeries<T>)> {
    if order < 1 {
        return Err(Error::InvalidArgument("order must be >= 1".into()));
    }
    if !(pi0 >= 0.0 && omega0 >= 0.0) || !pi0.is_finite() || !omega0.is_finite() {
        return Err(Error::InvalidArgument(format!("initial values ({pi0}, {omega0}) must be finite and >= 0")));
    }
    let mut pi = vec![Extended::Fin(T::from_param(pi0)?)];
    let mut om = vec![Extended::Fin(T::from_param(omega0)?)];
    for k in 0..order {
        let n = k.max(1);
        let ps = padded(&pi, n);
        let os = padded(&om, n);
        let mk = m.eval(&ps, &os, n)?.coeff(k).clone();
        let nk = nrhs.eval(&ps, &os, n)?.coeff(k).clone();
        let div = |c: Extended<T>| -> Result<Extended<T>> {
            match c {
                Extended::Fin(v) => Ok(Extended::Fin(v / T::from_usize(k + 1).expect("small integer"))),
                Extended::Inf => Err(Error::InfiniteCoefficient { order: k }),
            }
        };
        om.push(div(mk)?);
        pi.push(div(nk)?);
    }
    Ok((MajorantSeries::new(pi)?, MajorantSeries::new(om)?))
}

fn padded<T: Coefficient>(c: &[Extended<T>], n: usize) -> MajorantSeries<T> {
    let mut v = c.to_vec();
    v.resize(n + 1, Extended::zero());
    MajorantSeries::new(v).expect("coefficients already validated")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::majorant::{majorizes, ExactSeries};
    use num_rational::BigRational;
    use num_traits::One;

    #[test]
    fn exponential_benchmark() {
        let (_, om) = ode_solve::<BigRational>(&Expr::Omega, &Expr::Const(0.0), 0.0, 1.0, 15).unwrap();
        assert_eq!(om, ExactSeries::exp(15));
    }

    #[test]
    fn riccati_benchmark() {
        let (_, om) = ode_solve::<BigRational>(&Expr::omega_squared(), &Expr::Const(0.0), 0.0, 1.0, 20).unwrap();
        assert!(om.coeffs().iter().all(|c| *c == Extended::Fin(BigRational::one())));
    }

    #[test]
    fn zero_right_hand_sides_give_constants() {
        let (pi, om) = ode_solve::<f64>(&Expr::Const(0.0), &Expr::Const(0.0), 0.5, 2.0, 6).unwrap();
        assert_eq!(pi.to_f64s(), vec![0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(om.to_f64s(), vec![2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn infinite_coefficient_aborts_with_order() {
        let bad: Expr = serde_json::from_str(r#"{"series": {"N": 3, "coeffs": [0, 0, "inf", 0]}}"#).unwrap();
        let err = ode_solve::<f64>(&Expr::Add(vec![Expr::Omega, bad]), &Expr::Const(0.0), 0.0, 1.0, 5);
        assert!(matches!(err, Err(Error::InfiniteCoefficient { order: 2 })), "{err:?}");
        let inf = Expr::Mul(vec![Expr::T, Expr::Apply {
            outer: ClosedFormMajorant::Geometric { c: 1.0, r: 1.0 },
            inner: Box::new(Expr::Omega),
        }]);
        // Ω_0 = 1 sits on the pole of 1/(1 - x)
        assert!(matches!(ode_solve::<f64>(&inf, &Expr::Const(0.0), 0.0, 1.0, 5), Err(Error::PastPole { .. })));
    }

    #[test]
    fn coupled_system_with_closed_forms() {
        // Ω' = 1/(2 - Ω) (Π + t), Π' = Ω
        let m = Expr::Mul(vec![
            Expr::Apply { outer: ClosedFormMajorant::Geometric { c: 1.0, r: 2.0 }, inner: Box::new(Expr::Omega) },
            Expr::Add(vec![Expr::Pi, Expr::T]),
        ]);
        let (pi, om) = ode_solve::<f64>(&m, &Expr::Omega, 0.0, 0.5, 12).unwrap();
        assert_eq!(pi.coeff(1), &Extended::Fin(0.5));
        assert_eq!(om.coeff(1), &Extended::Fin(0.0));
        // Ω_2 = (Π_1 + 1) / (1.5 * 2)
        assert!((om.coeff(2).to_f64() - 1.5 / 3.0).abs() < 1e-15);
        let (pi_big, om_big) = ode_solve::<f64>(&m, &Expr::Omega, 0.0, 0.6, 12).unwrap();
        assert!(majorizes(&pi_big, &pi).unwrap() && majorizes(&om_big, &om).unwrap());
        let (_, om_long) = ode_solve::<f64>(&m, &Expr::Omega, 0.0, 0.5, 20).unwrap();
        assert_eq!(&om_long.coeffs()[..=12], om.coeffs());
    }

    #[test]
    fn json_form() {
        let e: Expr = serde_json::from_str(r#"{"mul": ["omega", {"apply": {"outer": {"family": "geometric", "c": 1, "r": 2}, "inner": "pi"}}]}"#).unwrap();
        assert!(matches!(e, Expr::Mul(ref v) if v.len() == 2));
        assert!(serde_json::from_str::<Expr>(r#""psi""#).is_err());
    }
}
