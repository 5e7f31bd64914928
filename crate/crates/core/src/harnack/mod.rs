// SPDX-License-Identifier: Apache-2.0

//! Boundary Harnack quotients: the Hopf floor, the quotient `w = u_1 / u_2`, the
//! divergence identity it satisfies, and the derived degenerate system obtained by
//! differentiating along the straightened free boundary.

mod analyticity;
mod campanato;
mod global_norm;
mod holder;

pub use analyticity::{analyticity_scan, AnalyticityReport, CONDITION_LIMIT};
pub use campanato::{campanato_scan, CampanatoMode, CampanatoParams, CampanatoReport};
pub use global_norm::{global_norm_coeff, GlobalNormReport, GlobalNormSpec};
pub use holder::{holder_seminorm, holder_seminorm_vector, ALL_PAIRS_LIMIT};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, NodeTag, Shape};
use crate::straighten::{jacobians, transform_coefficients, CoefficientSource, CurveModel};
use crate::weighted::{flux_load, stiffness_matrix, CoefficientField, Sym2, VectorField};
use crate::linalg;

fn require_half(grid: &Grid) -> Result<()> {
    if grid.shape != Shape::Half || grid.ny < 1 {
        return Err(Error::InvalidGrid("quotients need a half grid".into()));
    }
    Ok(())
}

/// `u / x_n`, with the one-sided quotient `(u(x', h) - u(x', 0)) / h` on the planar row.
pub fn quotient_by_xn(u: &GridFunction) -> Result<Vec<f64>> {
    let g = &u.grid;
    require_half(g)?;
    let h2 = g.h2();
    Ok((0..g.node_count())
        .map(|k| {
            let (i, j) = g.ij(k);
            if j == 0 {
                (u.at(i, 1) - u.at(i, 0)) / h2
            } else {
                u.values[k] / g.y(j)
            }
        })
        .collect())
}

/// `min u / x_n` over the grid (planar row via the one-sided quotient).
pub fn hopf_floor(u: &GridFunction) -> Result<f64> {
    Ok(quotient_by_xn(u)?.into_iter().fold(f64::INFINITY, f64::min))
}

/// `w = u_1 / u_2`; on the planar row the ratio of one-sided normal differences.
///
/// Fails with [`Error::FloorViolation`] unless the Hopf floor of `u_2` is at least `floor_tol > 0`.
pub fn ratio(u1: &GridFunction, u2: &GridFunction, floor_tol: f64) -> Result<GridFunction> {
    if u1.grid != u2.grid {
        return Err(Error::ShapeMismatch("quotient of functions on different grids".into()));
    }
    if !(floor_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("floor tolerance must be positive, got {floor_tol}")));
    }
    let q1 = quotient_by_xn(u1)?;
    let q2 = quotient_by_xn(u2)?;
    let floor = q2.iter().copied().fold(f64::INFINITY, f64::min);
    if !(floor >= floor_tol) {
        return Err(Error::FloorViolation { floor, required: floor_tol });
    }
    GridFunction::new(u1.grid, q1.iter().zip(&q2).map(|(a, b)| a / b).collect())
}

/// Strong-form residual of
/// `div(u_2² A ∇w) = div(u_2 f_1 - u_1 f_2) + f_2·∇u_1 - f_1·∇u_2`
/// over the interior nodes, for `u_i` solving `div(A ∇u_i) = div f_i`.
///
/// Discretized with the unweighted stiffness of `u_2² A`; the gradients in the
/// zeroth-order term are nodal central differences. Returns the discrete `L²`
/// norm of `(K w + l)_i / |cell_i|`.
pub fn ratio_residual(
    w: &GridFunction,
    u1: &GridFunction,
    u2: &GridFunction,
    a: &CoefficientField,
    f1: &VectorField,
    f2: &VectorField,
) -> Result<f64> {
    let g = w.grid;
    require_half(&g)?;
    if [u1.grid, u2.grid, a.grid, f1.grid, f2.grid].iter().any(|o| *o != g) {
        return Err(Error::ShapeMismatch("ratio residual inputs live on different grids".into()));
    }
    let n = g.node_count();
    let coef: Vec<Sym2> = (0..n).map(|k| a.entries[k].scale(u2.values[k] * u2.values[k])).collect();
    let stiff = stiffness_matrix(&g, &coef, 0.0);
    let big_g1: Vec<f64> = (0..n).map(|k| u2.values[k] * f1.f1[k] - u1.values[k] * f2.f1[k]).collect();
    let big_g2: Vec<f64> = (0..n).map(|k| u2.values[k] * f1.f2[k] - u1.values[k] * f2.f2[k]).collect();
    let mut load = flux_load(&g, 0.0, &big_g1, &big_g2);
    let (d1u1, d2u1) = u1.gradient();
    let (d1u2, d2u2) = u2.gradient();
    let area = g.dual_areas();
    for k in 0..n {
        let src = f2.f1[k] * d1u1[k] + f2.f2[k] * d2u1[k] - f1.f1[k] * d1u2[k] - f1.f2[k] * d2u2[k];
        load[k] += area[k] * src;
    }
    let kw = linalg::mat_vec(&stiff, &w.values);
    Ok((0..n)
        .filter(|&k| g.tag(k) == NodeTag::Interior)
        .map(|k| {
            let r = kw[k] + load[k];
            r * r / area[k]
        })
        .sum::<f64>()
        .sqrt())
}

/// Coefficients of the degenerate system for the tangential quotients after straightening:
///
/// * `atilde = (u_n / x_n)² A`
/// * `f_i = (u_k/x_n)(u_q/x_n) J_ip ∂_{y_n} b^{pq} - (u_n/x_n)(u_q/x_n) J_ip ∂_{y_k} b^{pq}`
/// * `g = (u_q/x_n) J_ip ∂_{y_k} b^{pq} ∂_i u_n - (u_q/x_n) J_ip ∂_{y_n} b^{pq} ∂_i u_k`
/// * `h_i = J_ip ∂_{y_k} b^{pq} u_q`
///
/// with `J = ∂x/∂y`, `A = J B Jᵀ` and `B` differentiated at `y(x)`.
#[derive(Debug, Clone)]
pub struct RatioSystemFields {
    pub atilde: CoefficientField,
    pub f: VectorField,
    pub g: GridFunction,
    pub h: VectorField,
}

/// `u = [u_1, u_2]` are the pulled-back functions on a half grid; `k` is the
/// tangential index (only `1` exists in the plane).
pub fn build_ratio_system(
    u: [&GridFunction; 2],
    c: &CurveModel,
    b: &dyn CoefficientSource,
    k: usize,
) -> Result<RatioSystemFields> {
    if k != 1 {
        return Err(Error::InvalidArgument(format!("tangential index must be 1 in two dimensions, got {k}")));
    }
    let grid = u[0].grid;
    require_half(&grid)?;
    if u[1].grid != grid {
        return Err(Error::ShapeMismatch("system inputs live on different grids".into()));
    }
    let q = [quotient_by_xn(u[0])?, quotient_by_xn(u[1])?];
    let floor = q[1].iter().copied().fold(f64::INFINITY, f64::min);
    if !(floor > 0.0) {
        return Err(Error::FloorViolation { floor, required: f64::MIN_POSITIVE });
    }
    let a = transform_coefficients(b, c, &grid)?;
    let grad = [u[0].gradient(), u[1].gradient()];
    let n = grid.node_count();
    let mut entries = Vec::with_capacity(n);
    let (mut f1, mut f2, mut g, mut h1, mut h2) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for node in 0..n {
        let (x1, xn) = grid.coords(node);
        let y = c.to_y([x1, xn]);
        let [db_k, db_n] = b.gradient(y).ok_or(Error::OutOfDomain(y[0], y[1]))?;
        let (_, jm, _) = jacobians(c, [x1, xn]);
        // J D v
        let jdv = |d: Sym2, v: [f64; 2]| {
            let dv = d.apply(v);
            [jm[0][0] * dv[0] + jm[0][1] * dv[1], jm[1][0] * dv[0] + jm[1][1] * dv[1]]
        };
        let qv = [q[0][node], q[1][node]];
        let uv = [u[0].values[node], u[1].values[node]];
        let (qk, qn) = (qv[0], qv[1]);
        let dk_q = jdv(db_k, qv);
        let dn_q = jdv(db_n, qv);
        f1[node] = qk * dn_q[0] - qn * dk_q[0];
        f2[node] = qk * dn_q[1] - qn * dk_q[1];
        let grad_un = [grad[1].0[node], grad[1].1[node]];
        let grad_uk = [grad[0].0[node], grad[0].1[node]];
        g[node] = dk_q[0] * grad_un[0] + dk_q[1] * grad_un[1] - dn_q[0] * grad_uk[0] - dn_q[1] * grad_uk[1];
        let hv = jdv(db_k, uv);
        h1[node] = hv[0];
        h2[node] = hv[1];
        entries.push(a.entries[node].scale(qn * qn));
    }
    Ok(RatioSystemFields {
        atilde: CoefficientField::measured(grid, entries)?,
        f: VectorField::new(grid, f1, f2)?,
        g: GridFunction::new(grid, g)?,
        h: VectorField::new(grid, h1, h2)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::straighten::{AnalyticCoefficient, CurveKind};

    #[test]
    fn hopf_floor_examples() {
        let g = build_grid(Shape::Half, 16, 8).unwrap();
        let u = GridFunction::from_fn(g, |_, y| y);
        assert!((hopf_floor(&u).unwrap() - 1.0).abs() < 1e-12);
        let u = GridFunction::from_fn(g, |x, y| 2.0 * x * y);
        assert!((hopf_floor(&u).unwrap() + 2.0).abs() < 1e-12);
        let u = GridFunction::from_fn(g, |_, y| y - 0.6);
        let v = GridFunction::from_fn(g, |_, y| y);
        assert!(matches!(ratio(&v, &u, 1e-3), Err(Error::FloorViolation { .. })));
    }

    #[test]
    fn ratio_of_linear_multiples() {
        let g = Grid::half_rect(0.1, 1.0, 1.0, 18, 20).unwrap();
        let u1 = GridFunction::from_fn(g, |x, y| 2.0 * x * y);
        let u2 = GridFunction::from_fn(g, |_, y| y);
        let w = ratio(&u1, &u2, 1e-6).unwrap();
        for k in 0..g.node_count() {
            assert!((w.values[k] - 2.0 * g.coords(k).0).abs() < 1e-12);
        }
        let a = CoefficientField::identity(g);
        let z = VectorField::zeros(g);
        let r = ratio_residual(&w, &u1, &u2, &a, &z, &z).unwrap();
        assert!(r < 1e-11, "{r}");
    }

    /// `u_i` with fluxes `f_i = A∇u_i + curl ψ_i`, so `div(A∇u_i) = div f_i` holds exactly.
    fn manufactured(n: usize) -> f64 {
        let g = build_grid(Shape::Half, 2 * n, n).unwrap();
        let amat = |x: f64, y: f64| Sym2::new(1.0 + 0.2 * x * x, 0.1 * x * y, 1.0 + 0.1 * y);
        let u1f = |x: f64, y: f64| y * (x + 0.5 * x * x - 0.3 * y);
        let u1g = |x: f64, y: f64| [y * (1.0 + x), x + 0.5 * x * x - 0.6 * y];
        let u2f = |x: f64, y: f64| y * (1.0 + 0.3 * x + 0.2 * y);
        let u2g = |x: f64, y: f64| [0.3 * y, 1.0 + 0.3 * x + 0.4 * y];
        // curl of ψ_1 = sin(x) y², ψ_2 = x y³
        let c1 = |x: f64, y: f64| [2.0 * x.sin() * y, -x.cos() * y * y];
        let c2 = |x: f64, y: f64| [3.0 * x * y * y, -y.powi(3)];
        let flux = |grad: [f64; 2], curl: [f64; 2], x: f64, y: f64| {
            let a = amat(x, y).apply(grad);
            [a[0] + curl[0], a[1] + curl[1]]
        };
        let u1 = GridFunction::from_fn(g, u1f);
        let u2 = GridFunction::from_fn(g, u2f);
        let a = CoefficientField::measured(g, (0..g.node_count()).map(|k| { let (x, y) = g.coords(k); amat(x, y) }).collect()).unwrap();
        let f1 = VectorField::from_fn(g, |x, y| flux(u1g(x, y), c1(x, y), x, y));
        let f2 = VectorField::from_fn(g, |x, y| flux(u2g(x, y), c2(x, y), x, y));
        let w = GridFunction::from_fn(g, |x, y| (x + 0.5 * x * x - 0.3 * y) / (1.0 + 0.3 * x + 0.2 * y));
        ratio_residual(&w, &u1, &u2, &a, &f1, &f2).unwrap()
    }

    #[test]
    fn manufactured_identity_converges_at_second_order() {
        let r: Vec<f64> = [16, 32, 64].iter().map(|&n| manufactured(n)).collect();
        for p in r.windows(2) {
            let order = (p[0] / p[1]).log2();
            assert!(order >= 1.8, "{r:?}");
        }
    }

    #[test]
    fn ratio_system_oracle() {
        let eps = 0.05;
        let g = build_grid(Shape::Half, 16, 8).unwrap();
        let curve = CurveModel::new(CurveKind::Sine { amp: 0.1, omega: 1.0 });
        let b = AnalyticCoefficient::with_gradient(
            move |y: [f64; 2]| Sym2::new(1.0 + eps * y[1].sin(), 0.0, 1.0),
            move |y: [f64; 2]| [Sym2::new(0.0, 0.0, 0.0), Sym2::new(eps * y[1].cos(), 0.0, 0.0)],
            1.0 - eps,
        );
        let u1 = GridFunction::from_fn(g, |x, y| y * (0.5 + 0.2 * x));
        let u2 = GridFunction::from_fn(g, |x, y| y * (1.0 + 0.1 * x * x));
        let sys = build_ratio_system([&u1, &u2], &curve, &b, 1).unwrap();
        let q1 = quotient_by_xn(&u1).unwrap();
        let (d1u1, d2u1) = u1.gradient();
        for k in 0..g.node_count() {
            let (x1, xn) = g.coords(k);
            let y = curve.to_y([x1, xn]);
            let gp = curve.slope(x1);
            let e = eps * y[1].cos();
            assert!((sys.f.f1[k] - q1[k] * q1[k] * e).abs() < 1e-12);
            assert!((sys.f.f2[k] + gp * q1[k] * q1[k] * e).abs() < 1e-12);
            assert!((sys.g.values[k] + q1[k] * e * (d1u1[k] - gp * d2u1[k])).abs() < 1e-12);
            assert_eq!(sys.h.f1[k], 0.0);
            assert_eq!(sys.h.f2[k], 0.0);
            let (lo, _) = sys.atilde.entries[k].eigenvalues();
            assert!(lo > 0.0);
        }
        let bad = GridFunction::from_fn(g, |_, y| y - 0.6);
        assert!(matches!(build_ratio_system([&u1, &bad], &curve, &b, 1), Err(Error::FloorViolation { .. })));
        assert!(build_ratio_system([&u1, &u2], &curve, &b, 2).is_err());
    }
}
