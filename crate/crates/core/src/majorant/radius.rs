// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::{Coefficient, MajorantSeries};
use crate::error::{Error, Result};

/// Estimates above this are reported as `+∞`.
pub const RADIUS_SENTINEL: f64 = 1e6;
/// Trailing orders inspected for usable coefficients.
const TRAILING: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusMethod {
    /// `1 / median(a_k^{1/k})` over the last three usable orders.
    Root,
    /// `median(a_k / a_{k+1})` over the last three usable consecutive pairs.
    Ratio,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

/// Radius of convergence from the coefficient tail.
///
/// A coefficient is usable when it is finite and positive. The series is entire
/// (`+∞`) when the last six coefficients vanish; any infinite coefficient of order
/// `>= 1` gives radius `0`. At least six usable orders are required.
pub fn radius_estimate<T: Coefficient>(f: &MajorantSeries<T>, method: RadiusMethod) -> Result<f64> {
    let a: Vec<f64> = f.to_f64s();
    if a[1..].iter().any(|v| v.is_infinite()) {
        return Ok(0.0);
    }
    let n = f.order();
    if a[n.saturating_sub(TRAILING - 1).max(1)..].iter().all(|&v| v == 0.0) {
        return Ok(f64::INFINITY);
    }
    let usable: Vec<usize> = (1..=n).filter(|&k| a[k] > 0.0).collect();
    if usable.len() < TRAILING {
        return Err(Error::TooFewCoefficients { needed: TRAILING, found: usable.len() });
    }
    let est = match method {
        RadiusMethod::Root => {
            let roots: Vec<f64> = usable.iter().rev().take(3).map(|&k| a[k].powf(1.0 / k as f64)).collect();
            1.0 / median(roots)
        }
        RadiusMethod::Ratio => {
            let pairs: Vec<f64> =
                usable.windows(2).rev().filter(|w| w[1] == w[0] + 1).take(3).map(|w| a[w[0]] / a[w[1]]).collect();
            if pairs.is_empty() {
                return Err(Error::TooFewCoefficients { needed: 2, found: 0 });
            }
            median(pairs)
        }
    };
    Ok(if est > RADIUS_SENTINEL { f64::INFINITY } else { est })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::majorant::{ode_solve, Expr, Series};

    #[test]
    fn geometric_radius() {
        let s = Series::from_f64s(&(0..=32).map(|k| 0.5f64.powi(k)).collect::<Vec<_>>()).unwrap();
        for m in [RadiusMethod::Root, RadiusMethod::Ratio] {
            assert!((radius_estimate(&s, m).unwrap() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn entire_series() {
        let e = Series::exp(32);
        assert!(radius_estimate(&e, RadiusMethod::Root).unwrap() > 10.0);
        assert!(radius_estimate(&e, RadiusMethod::Ratio).unwrap() > 30.0);
        let p = Series::from_f64s(&[1.0, 2.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(radius_estimate(&p, RadiusMethod::Root).unwrap(), f64::INFINITY);
        let tiny = Series::from_f64s(&(0..=16).map(|k| 1e-7f64.powi(k)).collect::<Vec<_>>()).unwrap();
        assert_eq!(radius_estimate(&tiny, RadiusMethod::Ratio).unwrap(), f64::INFINITY);
    }

    #[test]
    fn riccati_radius() {
        let (_, om) = ode_solve::<f64>(&Expr::omega_squared(), &Expr::Const(0.0), 0.0, 1.0, 32).unwrap();
        for m in [RadiusMethod::Root, RadiusMethod::Ratio] {
            assert!((radius_estimate(&om, m).unwrap() - 1.0).abs() <= 0.15);
        }
    }

    #[test]
    fn degenerate_inputs() {
        let s = Series::from_f64s(&[1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(radius_estimate(&s, RadiusMethod::Root), Err(Error::TooFewCoefficients { .. })));
        let s = Series::from_f64s(&[1.0, f64::INFINITY, 1.0]).unwrap();
        assert_eq!(radius_estimate(&s, RadiusMethod::Root).unwrap(), 0.0);
    }
}
