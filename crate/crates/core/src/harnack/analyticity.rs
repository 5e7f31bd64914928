// SPDX-License-Identifier: Apache-2.0

//! Taylor coefficients of a free-boundary curve by least squares on a window,
//! and a radius-of-convergence estimate from their growth.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::straighten::{CurveKind, CurveModel};

/// Largest accepted condition number of the monomial design matrix in `x`.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Coefficients must exceed this multiple of the RMS fit residual.
const NOISE_FACTOR: f64 = 10.0;
/// And this multiple of their own standard error.
const SIGMA_FACTOR: f64 = 3.0;
/// And this fraction of the largest scaled coefficient.
const RELATIVE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticityReport {
    pub kmax_requested: usize,
    pub kmax_used: usize,
    pub window: f64,
    pub samples: usize,
    /// `|c_k|`, `k = 0..=kmax_used`.
    pub coefficients: Vec<f64>,
    pub usable: Vec<bool>,
    /// RMS residual of the fit.
    pub noise: f64,
    pub condition: f64,
    /// `+∞` when the usable orders stop at or below `kmax_used / 2`.
    pub radius: f64,
    pub warnings: Vec<String>,
}

fn samples(c: &CurveModel, kmax: usize, window: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let xs: Vec<f64> = match &c.kind {
        CurveKind::Spline(s) => s.knots().iter().copied().filter(|x| x.abs() <= window * (1.0 + 1e-12)).collect(),
        _ => {
            let m = (4 * kmax).max(64);
            (0..m).map(|i| window * (-1.0 + 2.0 * i as f64 / (m - 1) as f64)).collect()
        }
    };
    let ys = xs.iter().map(|&x| c.eval(x)).collect::<Vec<_>>();
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::InvalidArgument("curve is not finite on the window".into()));
    }
    Ok((xs, ys))
}

fn vandermonde(xs: &[f64], k: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(xs.len(), k + 1, |r, c| (xs[r] / scale).powi(c as i32))
}

fn condition(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let hi = sv.max();
    let lo = sv.min();
    if lo > 0.0 { hi / lo } else { f64::INFINITY }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

/// Fits `Γ(x) ≈ Σ_{k <= Kmax} c_k x^k` on `[-window, window]`.
///
/// Closed-form curves are sampled at `max(4 Kmax, 64)` equispaced points, splines at
/// their knots inside the window. `Kmax` drops while the design matrix in `x` is worse
/// conditioned than [`CONDITION_LIMIT`]. A coefficient of order `k >= 1` is usable
/// when its scaled size `|c_k| window^k` clears the noise floor of that order. The radius is the
/// median over the last three usable orders of `(c_{k0} / c_k)^{1/(k - k0)}`, `k0`
/// the lowest usable order.
pub fn analyticity_scan(c: &CurveModel, kmax: usize, window: f64) -> Result<AnalyticityReport> {
    if kmax < 1 || !(window > 0.0) {
        return Err(Error::InvalidArgument(format!("need Kmax >= 1 and a positive window, got {kmax}, {window}")));
    }
    let (xs, ys) = samples(c, kmax, window)?;
    let mut warnings = Vec::new();
    let mut k = kmax;
    if xs.len() < 4 * k {
        k = xs.len() / 4;
        if k < 1 {
            return Err(Error::InvalidArgument(format!("only {} samples inside the window", xs.len())));
        }
        warnings.push(format!("{} samples support Kmax = {k} only", xs.len()));
    }
    let mut cond = condition(&vandermonde(&xs, k, 1.0));
    while cond > CONDITION_LIMIT && k > 1 {
        k -= 1;
        cond = condition(&vandermonde(&xs, k, 1.0));
    }
    if k < kmax {
        warnings.push(format!("Kmax reduced from {kmax} to {k} (condition {cond:.2e})"));
    }
    let v = vandermonde(&xs, k, window);
    let y = DVector::from_vec(ys);
    let svd = v.clone().svd(true, true);
    let b = svd.solve(&y, 1e-15).map_err(|e| Error::InvalidArgument(format!("least squares failed: {e}")))?;
    let resid = &v * &b - &y;
    let noise = (resid.norm_squared() / xs.len() as f64).sqrt();
    // standard error of each scaled coefficient: noise * sqrt(diag (V^T V)^{-1})
    let vt = svd.v_t.as_ref().expect("requested");
    let gain: Vec<f64> = (0..=k)
        .map(|o| {
            svd.singular_values
                .iter()
                .enumerate()
                .map(|(j, s)| if *s > 0.0 { (vt[(j, o)] / s).powi(2) } else { f64::INFINITY })
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let top = b.iter().skip(1).fold(0.0f64, |m, v| m.max(v.abs()));
    let usable: Vec<bool> = b
        .iter()
        .enumerate()
        .map(|(order, v)| {
            order >= 1
                && v.abs() > NOISE_FACTOR * noise
                && v.abs() > SIGMA_FACTOR * noise * gain[order]
                && v.abs() > RELATIVE_FLOOR * top
        })
        .collect();
    let coefficients: Vec<f64> = b.iter().enumerate().map(|(order, v)| v.abs() / window.powi(order as i32)).collect();
    let orders: Vec<usize> = (1..=k).filter(|&o| usable[o]).collect();
    let radius = match (orders.first(), orders.last()) {
        (Some(&k0), Some(&last)) if 2 * last > k => {
            let tail: Vec<usize> = orders.iter().rev().take(3).copied().filter(|&o| o > k0).collect();
            if tail.is_empty() {
                1.0 / coefficients[last].powf(1.0 / last as f64)
            } else {
                median(tail.iter().map(|&o| (coefficients[k0] / coefficients[o]).powf(1.0 / (o - k0) as f64)).collect())
            }
        }
        _ => f64::INFINITY,
    };
    Ok(AnalyticityReport {
        kmax_requested: kmax,
        kmax_used: k,
        window,
        samples: xs.len(),
        coefficients,
        usable,
        noise,
        condition: cond,
        radius,
        warnings,
    })
}
