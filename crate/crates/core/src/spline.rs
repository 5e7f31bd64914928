// SPDX-License-Identifier: Apache-2.0

//! Not-a-knot cubic spline interpolation.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivative at every knot.
    m: Vec<f64>,
}

impl CubicSpline {
    /// Fits through `(xs, ys)`; `xs` must be strictly increasing with at least two points.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::InvalidArgument(format!("spline needs >= 2 matching samples, got {n}/{}", ys.len())));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("spline abscissae must be strictly increasing".into()));
        }
        let m = if n == 2 { vec![0.0; 2] } else { second_derivatives(&xs, &ys)? };
        Ok(Self { xs, ys, m })
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.partition_point(|&k| k <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        }
    }

    /// Value and first three derivatives; extrapolates with the end cubics.
    pub fn eval_all(&self, x: f64) -> [f64; 4] {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let (a, b) = (self.xs[i + 1] - x, x - self.xs[i]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let v = m0 * a.powi(3) / (6.0 * h) + m1 * b.powi(3) / (6.0 * h) + (y0 / h - m0 * h / 6.0) * a + (y1 / h - m1 * h / 6.0) * b;
        let d1 = -m0 * a * a / (2.0 * h) + m1 * b * b / (2.0 * h) + (y1 - y0) / h - (m1 - m0) * h / 6.0;
        let d2 = (m0 * a + m1 * b) / h;
        let d3 = (m1 - m0) / h;
        [v, d1, d2, d3]
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_all(x)[0]
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.eval_all(x)[1]
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        self.eval_all(x)[2]
    }
}

fn second_derivatives(xs: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut r = DVector::<f64>::zeros(n);
    for i in 1..n - 1 {
        a[(i, i - 1)] = h[i - 1];
        a[(i, i)] = 2.0 * (h[i - 1] + h[i]);
        a[(i, i + 1)] = h[i];
        r[i] = 6.0 * ((ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1]);
    }
    if n == 3 {
        // both not-a-knot conditions coincide; the interpolant is the parabola
        a[(0, 0)] = 1.0;
        a[(0, 1)] = -1.0;
        a[(2, 1)] = 1.0;
        a[(2, 2)] = -1.0;
    } else {
        a[(0, 0)] = h[1];
        a[(0, 1)] = -(h[0] + h[1]);
        a[(0, 2)] = h[0];
        a[(n - 1, n - 3)] = h[n - 2];
        a[(n - 1, n - 2)] = -(h[n - 3] + h[n - 2]);
        a[(n - 1, n - 1)] = h[n - 3];
    }
    a.lu()
        .solve(&r)
        .map(|m| m.iter().copied().collect())
        .ok_or_else(|| Error::InvalidArgument("singular spline system".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics_exactly() {
        let xs: Vec<f64> = vec![-1.0, -0.7, -0.2, 0.1, 0.5, 0.6, 1.0];
        let p = |x: f64| 0.3 - x + 2.0 * x * x - 0.7 * x.powi(3);
        let s = CubicSpline::new(xs.clone(), xs.iter().map(|&x| p(x)).collect()).unwrap();
        for t in [-0.9, -0.33, 0.0, 0.42, 0.99, 1.2] {
            let [v, d1, d2, d3] = s.eval_all(t);
            assert!((v - p(t)).abs() < 1e-12);
            assert!((d1 - (-1.0 + 4.0 * t - 2.1 * t * t)).abs() < 1e-11);
            assert!((d2 - (4.0 - 4.2 * t)).abs() < 1e-10);
            assert!((d3 + 4.2).abs() < 1e-9);
        }
    }

    #[test]
    fn small_sample_counts() {
        let s = CubicSpline::new(vec![0.0, 1.0], vec![1.0, 3.0]).unwrap();
        assert_eq!(s.eval(0.5), 2.0);
        let s = CubicSpline::new(vec![0.0, 1.0, 3.0], vec![0.0, 1.0, 9.0]).unwrap();
        assert!((s.eval(2.0) - 4.0).abs() < 1e-12);
        assert!(CubicSpline::new(vec![0.0], vec![0.0]).is_err());
        assert!(CubicSpline::new(vec![0.0, 0.0, 1.0], vec![0.0; 3]).is_err());
    }

    #[test]
    fn smooth_function_converges() {
        let err = |n: usize| {
            let xs: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
            let s = CubicSpline::new(xs.clone(), xs.iter().map(|x| x.sin()).collect()).unwrap();
            (0..200).map(|i| (s.eval(i as f64 / 199.0) - (i as f64 / 199.0).sin()).abs()).fold(0.0, f64::max)
        };
        assert!(err(10) / err(20) > 12.0);
    }
}
