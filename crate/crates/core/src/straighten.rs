// SPDX-License-Identifier: Apache-2.0

//! Boundary-straightening chart `y(x) = x + Γ(x_1) e_n` and the induced transforms of
//! divergence-form coefficients, right-hand sides and functions.
//!
//! With `J = ∂x/∂y = [[1, 0], [-Γ', 1]]` and `det(∂y/∂x) = 1`, the operator
//! `∂_p(b^{pq} ∂_q u) = ∂_p f_p` in `y` becomes `∂_i(a^{ij} ∂_j u) = ∂_i g_i` in `x`
//! with `A = J B Jᵀ` and `g = J f`, everything sampled at `y(x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::spline::CubicSpline;
use crate::weighted::{CoefficientField, Sym2, VectorField};

/// Closed-form or sampled curve `Γ(x_1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveKind {
    Zero,
    /// `c x`.
    Linear { c: f64 },
    /// `amp sin(omega x)`.
    Sine { amp: f64, omega: f64 },
    /// `c / (1 - x / r)`.
    Geometric { c: f64, r: f64 },
    /// Upper arc `sqrt(a^2 - x^2)`.
    Circle { a: f64 },
    /// `Σ c_k x^k`.
    Polynomial { coeffs: Vec<f64> },
    #[serde(skip)]
    Spline(CubicSpline),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveModel {
    pub kind: CurveKind,
    /// Subtracted from every value; `recentered` makes `Γ(0) = 0`.
    pub offset: f64,
}

impl CurveModel {
    pub fn new(kind: CurveKind) -> Self {
        Self { kind, offset: 0.0 }
    }

    pub fn zero() -> Self {
        Self::new(CurveKind::Zero)
    }

    pub fn spline(s: CubicSpline) -> Self {
        Self::new(CurveKind::Spline(s))
    }

    pub fn recentered(mut self) -> Self {
        self.offset = 0.0;
        self.offset = self.eval(0.0);
        self
    }

    /// `Γ` and its first three derivatives.
    pub fn derivs(&self, x: f64) -> [f64; 4] {
        let mut d = match &self.kind {
            CurveKind::Zero => [0.0; 4],
            CurveKind::Linear { c } => [c * x, *c, 0.0, 0.0],
            CurveKind::Sine { amp, omega } => {
                let (s, c) = (omega * x).sin_cos();
                let w = *omega;
                [amp * s, amp * w * c, -amp * w * w * s, -amp * w * w * w * c]
            }
            CurveKind::Geometric { c, r } => {
                let q = 1.0 / (1.0 - x / r);
                [c * q, c * q * q / r, 2.0 * c * q.powi(3) / (r * r), 6.0 * c * q.powi(4) / r.powi(3)]
            }
            CurveKind::Circle { a } => {
                let s = (a * a - x * x).max(0.0).sqrt();
                [s, -x / s, -a * a / s.powi(3), -3.0 * a * a * x / s.powi(5)]
            }
            CurveKind::Polynomial { coeffs } => {
                let mut d = [0.0; 4];
                for (order, slot) in d.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (k, &c) in coeffs.iter().enumerate().skip(order).rev() {
                        let fall: f64 = (0..order).map(|m| (k - m) as f64).product();
                        acc = acc * x + c * fall;
                    }
                    *slot = acc;
                }
                d
            }
            CurveKind::Spline(s) => s.eval_all(x),
        };
        d[0] -= self.offset;
        d
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.derivs(x)[0]
    }

    pub fn slope(&self, x: f64) -> f64 {
        self.derivs(x)[1]
    }

    /// `max |Γ'|` over the first coordinates of `grid`.
    pub fn max_slope(&self, grid: &Grid) -> f64 {
        (0..=grid.nx).map(|i| self.slope(grid.x(i)).abs()).fold(0.0, f64::max)
    }

    /// `y(x) = (x_1, x_n + Γ(x_1))`.
    pub fn to_y(&self, x: [f64; 2]) -> [f64; 2] {
        [x[0], x[1] + self.eval(x[0])]
    }

    /// `x(y) = (y_1, y_n - Γ(y_1))`.
    pub fn to_x(&self, y: [f64; 2]) -> [f64; 2] {
        [y[0], y[1] - self.eval(y[0])]
    }
}

pub type Mat2 = [[f64; 2]; 2];

/// `(∂y/∂x, ∂x/∂y, det ∂y/∂x)` at `x`.
pub fn jacobians(c: &CurveModel, x: [f64; 2]) -> (Mat2, Mat2, f64) {
    let g = c.slope(x[0]);
    ([[1.0, 0.0], [g, 1.0]], [[1.0, 0.0], [-g, 1.0]], 1.0)
}

/// Coefficient field evaluated in the curved frame.
pub trait CoefficientSource {
    fn value(&self, y: [f64; 2]) -> Option<Sym2>;

    /// `(∂_{y_1} B, ∂_{y_n} B)`; centered differences unless overridden.
    fn gradient(&self, y: [f64; 2]) -> Option<[Sym2; 2]> {
        let step = 1e-5;
        let d = |e: [f64; 2]| -> Option<Sym2> {
            let p = self.value([y[0] + step * e[0], y[1] + step * e[1]])?;
            let m = self.value([y[0] - step * e[0], y[1] - step * e[1]])?;
            let s = 0.5 / step;
            Some(Sym2::new((p.a11 - m.a11) * s, (p.a12 - m.a12) * s, (p.a22 - m.a22) * s))
        };
        Some([d([1.0, 0.0])?, d([0.0, 1.0])?])
    }

    /// Lower ellipticity bound.
    fn lambda(&self) -> f64;
}

/// Closed-form coefficients with an optional exact gradient.
pub struct AnalyticCoefficient<F, G = fn([f64; 2]) -> [Sym2; 2]> {
    pub value: F,
    pub gradient: Option<G>,
    pub lambda: f64,
}

impl<F: Fn([f64; 2]) -> Sym2> AnalyticCoefficient<F> {
    pub fn new(value: F, lambda: f64) -> Self {
        Self { value, gradient: None, lambda }
    }
}

impl<F: Fn([f64; 2]) -> Sym2, G: Fn([f64; 2]) -> [Sym2; 2]> AnalyticCoefficient<F, G> {
    pub fn with_gradient(value: F, gradient: G, lambda: f64) -> Self {
        Self { value, gradient: Some(gradient), lambda }
    }
}

impl<F: Fn([f64; 2]) -> Sym2, G: Fn([f64; 2]) -> [Sym2; 2]> CoefficientSource for AnalyticCoefficient<F, G> {
    fn value(&self, y: [f64; 2]) -> Option<Sym2> {
        Some((self.value)(y))
    }

    fn gradient(&self, y: [f64; 2]) -> Option<[Sym2; 2]> {
        match &self.gradient {
            Some(g) => Some(g(y)),
            None => {
                let step = 1e-5;
                let d = |e: [f64; 2]| {
                    let p = (self.value)([y[0] + step * e[0], y[1] + step * e[1]]);
                    let m = (self.value)([y[0] - step * e[0], y[1] - step * e[1]]);
                    let s = 0.5 / step;
                    Sym2::new((p.a11 - m.a11) * s, (p.a12 - m.a12) * s, (p.a22 - m.a22) * s)
                };
                Some([d([1.0, 0.0]), d([0.0, 1.0])])
            }
        }
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// The identity matrix everywhere.
pub struct IdentityCoefficient;

impl CoefficientSource for IdentityCoefficient {
    fn value(&self, _: [f64; 2]) -> Option<Sym2> {
        Some(Sym2::IDENTITY)
    }

    fn gradient(&self, _: [f64; 2]) -> Option<[Sym2; 2]> {
        let z = Sym2::new(0.0, 0.0, 0.0);
        Some([z, z])
    }

    fn lambda(&self) -> f64 {
        1.0
    }
}

/// Grid-sampled coefficients, bilinearly interpolated.
impl CoefficientSource for CoefficientField {
    fn value(&self, y: [f64; 2]) -> Option<Sym2> {
        let comp = |f: fn(&Sym2) -> f64| {
            let vals = self.entries.iter().map(f).collect();
            GridFunction { grid: self.grid, values: vals }.interpolate(y[0], y[1])
        };
        Some(Sym2::new(comp(|a| a.a11)?, comp(|a| a.a12)?, comp(|a| a.a22)?))
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Scalar function evaluated in the curved frame.
pub trait ScalarSource {
    fn value(&self, y: [f64; 2]) -> Option<f64>;
}

impl<F: Fn([f64; 2]) -> f64> ScalarSource for F {
    fn value(&self, y: [f64; 2]) -> Option<f64> {
        Some(self(y))
    }
}

impl ScalarSource for GridFunction {
    fn value(&self, y: [f64; 2]) -> Option<f64> {
        self.interpolate(y[0], y[1])
    }
}

/// Largest squared singular value of `[[1, 0], [g, 1]]`.
fn sigma_max_sq(g: f64) -> f64 {
    let g = g.abs();
    0.5 * (2.0 + g * g + g * (g * g + 4.0).sqrt())
}

/// Guaranteed lower eigenvalue bound of `J B Jᵀ` for `|Γ'| <= g`.
pub fn ellipticity_floor(lambda_b: f64, g: f64) -> f64 {
    lambda_b / sigma_max_sq(g)
}

fn check_slope(c: &CurveModel, target: &Grid) -> Result<f64> {
    let g = c.max_slope(target);
    if !(g <= 1.0) {
        return Err(Error::InvalidArgument(format!("max |Γ'| = {g:.4} exceeds 1")));
    }
    Ok(g)
}

/// `a^{ij} = (∂x_i/∂y_p) b^{pq}(y(x)) (∂x_j/∂y_q)` at every node of `target`.
pub fn transform_coefficients(b: &dyn CoefficientSource, c: &CurveModel, target: &Grid) -> Result<CoefficientField> {
    let g = check_slope(c, target)?;
    let floor = ellipticity_floor(b.lambda(), g);
    let mut entries = Vec::with_capacity(target.node_count());
    let mut big: f64 = 0.0;
    for k in 0..target.node_count() {
        let (x1, xn) = target.coords(k);
        let y = c.to_y([x1, xn]);
        let by = b.value(y).ok_or(Error::OutOfDomain(y[0], y[1]))?;
        let (_, jinv, _) = jacobians(c, [x1, xn]);
        let a = by.congruence(jinv);
        let (lo, hi) = a.eigenvalues();
        if lo < floor - 1e-10 {
            return Err(Error::Ellipticity { node: k, min_eig: lo, max_eig: hi, lambda: floor, big_lambda: f64::INFINITY });
        }
        big = big.max(hi);
        entries.push(a);
    }
    CoefficientField::new(*target, entries, floor, big)
}

/// `g_i = (∂x_i/∂y_p) f_p(y(x))`.
pub fn transform_rhs(f: &dyn Fn([f64; 2]) -> Option<[f64; 2]>, c: &CurveModel, target: &Grid) -> Result<VectorField> {
    check_slope(c, target)?;
    let n = target.node_count();
    let (mut f1, mut f2) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for k in 0..n {
        let (x1, xn) = target.coords(k);
        let y = c.to_y([x1, xn]);
        let fy = f(y).ok_or(Error::OutOfDomain(y[0], y[1]))?;
        let (_, j, _) = jacobians(c, [x1, xn]);
        f1.push(j[0][0] * fy[0] + j[0][1] * fy[1]);
        f2.push(j[1][0] * fy[0] + j[1][1] * fy[1]);
    }
    VectorField::new(*target, f1, f2)
}

/// Nodal samples `u(y(x))`.
pub fn pullback_function(u: &dyn ScalarSource, c: &CurveModel, target: &Grid) -> Result<GridFunction> {
    let mut values = Vec::with_capacity(target.node_count());
    for k in 0..target.node_count() {
        let (x1, xn) = target.coords(k);
        let y = c.to_y([x1, xn]);
        values.push(u.value(y).ok_or(Error::OutOfDomain(y[0], y[1]))?);
    }
    GridFunction::new(*target, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, Shape};

    fn half(n: usize) -> Grid {
        build_grid(Shape::Half, 2 * n, n).unwrap()
    }

    #[test]
    fn jacobian_examples() {
        let (dy, dx, det) = jacobians(&CurveModel::zero(), [0.3, 0.2]);
        assert_eq!(dy, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(dx, dy);
        assert_eq!(det, 1.0);
        let (dy, dx, _) = jacobians(&CurveModel::new(CurveKind::Linear { c: 0.7 }), [0.1, 0.5]);
        assert_eq!(dx, [[1.0, 0.0], [-0.7, 1.0]]);
        let prod = [
            [dy[0][0] * dx[0][0] + dy[0][1] * dx[1][0], dy[0][0] * dx[0][1] + dy[0][1] * dx[1][1]],
            [dy[1][0] * dx[0][0] + dy[1][1] * dx[1][0], dy[1][0] * dx[0][1] + dy[1][1] * dx[1][1]],
        ];
        assert_eq!(prod, [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn chart_roundtrip() {
        let c = CurveModel::new(CurveKind::Sine { amp: 0.1, omega: std::f64::consts::PI });
        for &x in &[[0.3, 0.1], [-0.9, 0.7], [0.0, 0.0]] {
            let back = c.to_x(c.to_y(x));
            assert!((back[0] - x[0]).abs() < 1e-15 && (back[1] - x[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_chart_keeps_coefficients() {
        let g = half(4);
        let b = AnalyticCoefficient::new(|y: [f64; 2]| Sym2::new(2.0 + y[0], 0.1 * y[1], 1.5), 0.5);
        let a = transform_coefficients(&b, &CurveModel::zero(), &g).unwrap();
        for k in 0..g.node_count() {
            let (x, y) = g.coords(k);
            assert_eq!(a.entries[k], Sym2::new(2.0 + x, 0.1 * y, 1.5));
        }
    }

    #[test]
    fn linear_chart_example() {
        let g = half(4);
        let c = 0.6;
        let a = transform_coefficients(&IdentityCoefficient, &CurveModel::new(CurveKind::Linear { c }), &g).unwrap();
        for e in &a.entries {
            assert!((e.a11 - 1.0).abs() < 1e-15 && (e.a12 + c).abs() < 1e-15 && (e.a22 - 1.0 - c * c).abs() < 1e-15);
        }
        let f = transform_rhs(&|_| Some([0.0, 1.0]), &CurveModel::new(CurveKind::Linear { c }), &g).unwrap();
        assert!(f.f1.iter().all(|&v| v == 0.0) && f.f2.iter().all(|&v| v == 1.0));
        let f = transform_rhs(&|_| Some([1.0, 0.0]), &CurveModel::new(CurveKind::Linear { c }), &g).unwrap();
        assert!(f.f1.iter().all(|&v| v == 1.0) && f.f2.iter().all(|&v| v == -c));
    }

    #[test]
    fn floor_is_sharp_at_unit_slope() {
        let g = half(4);
        let a = transform_coefficients(&IdentityCoefficient, &CurveModel::new(CurveKind::Linear { c: 1.0 }), &g).unwrap();
        let (lo, _) = a.eigen_bounds();
        assert!((lo - ellipticity_floor(1.0, 1.0)).abs() < 1e-12);
        assert!(lo < 0.5, "the 1/(1+g^2) level would reject this valid transform");
        let steep = transform_coefficients(&IdentityCoefficient, &CurveModel::new(CurveKind::Linear { c: 1.5 }), &g);
        assert!(steep.is_err());
    }

    #[test]
    fn pullback_of_distance_is_xn() {
        let g = half(8);
        let c = CurveModel::new(CurveKind::Sine { amp: 0.1, omega: std::f64::consts::PI });
        let cc = c.clone();
        let u = move |y: [f64; 2]| y[1] - cc.eval(y[0]);
        let p = pullback_function(&u, &c, &g).unwrap();
        for k in 0..g.node_count() {
            assert!((p.values[k] - g.coords(k).1).abs() < 1e-15);
        }
        let grid_u = GridFunction::from_fn(g, |_, y| y);
        assert!(pullback_function(&grid_u, &CurveModel::new(CurveKind::Linear { c: 0.5 }), &g).is_err());
    }

    #[test]
    fn closed_form_derivatives_match_differences() {
        let kinds = [
            CurveKind::Sine { amp: 0.1, omega: 3.0 },
            CurveKind::Geometric { c: 0.1, r: 0.8 },
            CurveKind::Circle { a: 0.4 },
            CurveKind::Polynomial { coeffs: vec![0.5, -1.0, 0.25, 2.0, -0.5] },
        ];
        for kind in kinds {
            let c = CurveModel::new(kind.clone());
            let x = 0.13;
            let h = 1e-4;
            let d = c.derivs(x);
            let (p, m) = (c.derivs(x + h), c.derivs(x - h));
            for o in 0..3 {
                let fd = (p[o] - m[o]) / (2.0 * h);
                assert!((fd - d[o + 1]).abs() < 1e-5 * (1.0 + d[o + 1].abs()), "{kind:?} order {o}");
            }
        }
    }

    #[test]
    fn recentering_zeroes_origin() {
        let c = CurveModel::new(CurveKind::Circle { a: 0.4 }).recentered();
        assert_eq!(c.eval(0.0), 0.0);
        assert!((c.eval(0.2) - ((0.16f64 - 0.04).sqrt() - 0.4)).abs() < 1e-15);
    }

    #[test]
    fn pullback_satisfies_transformed_equation() {
        use crate::weighted::{assemble_weighted_with, LoadVector, PlanarCondition};
        let c = CurveModel::new(CurveKind::Sine { amp: 0.1, omega: std::f64::consts::PI });
        let u = |y: [f64; 2]| y[0].exp() * y[1].sin();
        let res: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| {
                let g = half(n);
                let a = transform_coefficients(&IdentityCoefficient, &c, &g).unwrap();
                let op = assemble_weighted_with(&g, &a, 0.0, PlanarCondition::Dirichlet).unwrap();
                let w = pullback_function(&u, &c, &g).unwrap();
                op.scaled_residual(&w, &LoadVector::zeros(g, 0.0))
            })
            .collect();
        for p in res.windows(2) {
            assert!((p[0] / p[1]).log2() >= 1.8, "{res:?}");
        }
    }
}
