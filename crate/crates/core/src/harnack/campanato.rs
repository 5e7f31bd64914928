// SPDX-License-Identifier: Apache-2.0

//! Iterated affine approximation on shrinking half-boxes `[-S^k, S^k] x [0, S^k]`.
//!
//! At each scale the tangential-affine part `l_k = p_0 + p_1 x_1` of the current
//! remainder `w_k` is removed, `w_{k+1} = w_k - l_k`, and the normalized excess
//! `σ_k² = S^{-k(n+2+2α)} ∫ w_k²` is recorded.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::holder::holder_seminorm_vector;
use crate::error::{Error, Result};
use crate::grid::{integrate_region, Grid, GridFunction, Rect, Shape};
use crate::weighted::{assemble_weighted, assemble_rhs, solve, BoundaryData, CoefficientField, VectorField};

const DIM: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CampanatoMode {
    /// `L²` projection onto `{1, x_1}` over the box.
    L2fit,
    /// Affine Taylor part at the origin of the weighted replacement with the same outer data.
    Replacement,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampanatoParams {
    pub alpha: f64,
    /// Contraction factor `S` in `(0, 1)`.
    pub factor: f64,
    /// Last scale `K`.
    pub scales: usize,
    pub mode: CampanatoMode,
    /// Weight exponent of the replacement problem.
    #[serde(default = "default_weight")]
    pub weight: f64,
}

fn default_weight() -> f64 {
    2.0
}

impl CampanatoParams {
    pub fn new(alpha: f64, factor: f64, scales: usize, mode: CampanatoMode) -> Self {
        Self { alpha, factor, scales, mode, weight: default_weight() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampanatoReport {
    pub mode: CampanatoMode,
    pub alpha: f64,
    pub factor: f64,
    /// Box sizes `S^k`, `k = 0..=K`.
    pub radii: Vec<f64>,
    pub sigma: Vec<f64>,
    /// `[f_k]_{C^α}` over each box; zero when no flux was supplied.
    pub chi: Vec<f64>,
    /// Accumulated affine part `P = Σ l_k` as `(p_0, p_1, p_n)`.
    pub p: [f64; 3],
    /// Least-squares slope of `ln σ_k` against `k`.
    pub fitted_decay: f64,
}

impl CampanatoReport {
    /// `σ_{k+1} / σ_k` for consecutive scales with `σ_k > 0`.
    pub fn ratios(&self) -> Vec<f64> {
        self.sigma.windows(2).filter(|p| p[0] > 0.0).map(|p| p[1] / p[0]).collect()
    }

    pub fn mean_ratio(&self) -> Option<f64> {
        let r = self.ratios();
        (!r.is_empty()).then(|| r.iter().sum::<f64>() / r.len() as f64)
    }

    /// Writes `k,radius,sigma,chi` rows.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["k", "radius", "sigma", "chi"])?;
        for k in 0..self.sigma.len() {
            w.serialize((k, self.radii[k], self.sigma[k], self.chi[k]))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn l2_affine_fit(grid: &Grid, w: &[f64], rect: &Rect) -> Result<[f64; 2]> {
    let x1: Vec<f64> = (0..grid.node_count()).map(|k| grid.coords(k).0).collect();
    let prod = |a: &dyn Fn(usize) -> f64| -> f64 {
        let v: Vec<f64> = (0..grid.node_count()).map(a).collect();
        integrate_region(grid, &v, rect)
    };
    let m00 = prod(&|_| 1.0);
    let m01 = prod(&|k| x1[k]);
    let m11 = prod(&|k| x1[k] * x1[k]);
    let b0 = prod(&|k| w[k]);
    let b1 = prod(&|k| w[k] * x1[k]);
    let det = m00 * m11 - m01 * m01;
    if !(det.abs() > 1e-300) {
        return Err(Error::InvalidArgument("degenerate projection box".into()));
    }
    Ok([(b0 * m11 - b1 * m01) / det, (m00 * b1 - m01 * b0) / det])
}

fn replacement_fit(grid: &Grid, w: &[f64], r: f64, weight: f64) -> Result<[f64; 2]> {
    let m = ((r / grid.h2()).round() as usize).clamp(8, 128);
    let sub = Grid::half_rect(-r, r, r, 2 * m, m)?;
    let wk = GridFunction { grid: *grid, values: w.to_vec() };
    let bd = BoundaryData::from_fn(sub, |x, y| wk.interpolate(x, y).unwrap_or(0.0));
    let op = assemble_weighted(&sub, &CoefficientField::identity(sub), weight)?;
    let rhs = assemble_rhs(&sub, weight, &VectorField::zeros(sub), &GridFunction::zeros(sub))?;
    let h = solve(&op, &rhs, &bd)?;
    let d1 = (h.at(m + 1, 0) - h.at(m - 1, 0)) / (2.0 * sub.h1());
    Ok([h.at(m, 0), d1])
}

fn ls_slope(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    if y.len() < 2 {
        return 0.0;
    }
    let xm = (n - 1.0) / 2.0;
    let ym = y.iter().sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (k, v) in y.iter().enumerate() {
        let dx = k as f64 - xm;
        num += dx * (v - ym);
        den += dx * dx;
    }
    num / den
}

/// Runs the scan for `w` on a half grid. `f` is the flux of the equation and `a`
/// its coefficients; when present, `f_{k+1} = f_k + (I - A) ∇l_k` and its Hölder
/// seminorm is reported as `χ_k`.
pub fn campanato_scan(
    w: &GridFunction,
    f: Option<&VectorField>,
    a: Option<&CoefficientField>,
    params: &CampanatoParams,
) -> Result<CampanatoReport> {
    let grid = w.grid;
    if grid.shape != Shape::Half {
        return Err(Error::InvalidGrid("Campanato scan needs a half grid".into()));
    }
    let CampanatoParams { alpha, factor, scales, mode, weight } = *params;
    if !(factor > 0.0 && factor < 1.0) || !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("need 0 < S < 1 and 0 < α < 1, got S = {factor}, α = {alpha}")));
    }
    if f.is_some_and(|f| f.grid != grid) || a.is_some_and(|a| a.grid != grid) {
        return Err(Error::ShapeMismatch("flux or coefficients live on a different grid".into()));
    }
    let h = grid.h1().max(grid.h2());
    let smallest = factor.powi(scales as i32);
    if smallest < 4.0 * h - 1e-12 {
        return Err(Error::ScaleUnderflow { scale: scales, size: smallest, h });
    }
    let mut wk = w.values.clone();
    let mut fk = f.cloned();
    let (mut radii, mut sigma, mut chi) = (Vec::new(), Vec::new(), Vec::new());
    let mut p = [0.0; 3];
    for k in 0..=scales {
        let r = factor.powi(k as i32);
        let rect = Rect::half_box(r);
        let sq: Vec<f64> = wk.iter().map(|v| v * v).collect();
        let excess = integrate_region(&grid, &sq, &rect).max(0.0);
        radii.push(r);
        sigma.push((excess * r.powf(-(DIM + 2.0 + 2.0 * alpha))).sqrt());
        chi.push(match &fk {
            Some(fv) => holder_seminorm_vector(fv, alpha, &rect)?,
            None => 0.0,
        });
        let [p0, p1] = match mode {
            CampanatoMode::L2fit => l2_affine_fit(&grid, &wk, &rect)?,
            CampanatoMode::Replacement => replacement_fit(&grid, &wk, r, weight)?,
        };
        p[0] += p0;
        p[1] += p1;
        for (node, v) in wk.iter_mut().enumerate() {
            *v -= p0 + p1 * grid.coords(node).0;
        }
        if let (Some(fv), Some(a)) = (fk.as_mut(), a) {
            for node in 0..grid.node_count() {
                let m = a.entries[node];
                fv.f1[node] += (1.0 - m.a11) * p1;
                fv.f2[node] -= m.a12 * p1;
            }
        }
    }
    let logs: Vec<f64> = sigma.iter().map(|s| s.max(1e-300).ln()).collect();
    Ok(CampanatoReport { mode, alpha, factor, radii, sigma, chi, p, fitted_decay: ls_slope(&logs) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    fn grid() -> Grid {
        build_grid(Shape::Half, 256, 128).unwrap()
    }

    #[test]
    fn affine_data_is_removed_at_the_first_scale() {
        let g = grid();
        let w = GridFunction::from_fn(g, |x, _| 0.7 - 1.3 * x);
        let rep = campanato_scan(&w, None, None, &CampanatoParams::new(0.5, 0.5, 4, CampanatoMode::L2fit)).unwrap();
        assert!(rep.sigma[0] > 0.1);
        for s in &rep.sigma[1..] {
            assert!(*s < 1e-10 * rep.sigma[0], "{:?}", rep.sigma);
        }
        assert!((rep.p[0] - 0.7).abs() < 1e-12 && (rep.p[1] + 1.3).abs() < 1e-12);
    }

    #[test]
    fn quadratic_solution_decays_at_rate() {
        let g = grid();
        let w = GridFunction::from_fn(g, |x, y| 3.0 * x * x - y * y);
        let alpha = 0.5;
        let target = 0.5f64.powf(1.0 - alpha);
        for mode in [CampanatoMode::L2fit, CampanatoMode::Replacement] {
            let rep = campanato_scan(&w, None, None, &CampanatoParams::new(alpha, 0.5, 5, mode)).unwrap();
            let mean = rep.mean_ratio().unwrap();
            assert!((0.57..=0.85).contains(&mean), "{mode:?}: {mean} vs {target}");
            assert!(rep.fitted_decay < 0.0);
        }
    }

    #[test]
    fn non_holder_data_does_not_decay() {
        let g = grid();
        let w = GridFunction::from_fn(g, |x, _| x.abs().powf(1.3));
        let rep = campanato_scan(&w, None, None, &CampanatoParams::new(0.5, 0.5, 5, CampanatoMode::L2fit)).unwrap();
        assert!(rep.mean_ratio().unwrap() >= 1.05, "{:?}", rep.sigma);
    }

    #[test]
    fn too_many_scales_underflow() {
        let g = build_grid(Shape::Half, 32, 16).unwrap();
        let w = GridFunction::zeros(g);
        let err = campanato_scan(&w, None, None, &CampanatoParams::new(0.5, 0.5, 3, CampanatoMode::L2fit));
        assert!(matches!(err, Err(Error::ScaleUnderflow { .. })));
        assert!(campanato_scan(&w, None, None, &CampanatoParams::new(0.5, 0.5, 2, CampanatoMode::L2fit)).is_ok());
    }

    #[test]
    fn identity_coefficients_leave_flux_unchanged() {
        let g = build_grid(Shape::Half, 64, 32).unwrap();
        let w = GridFunction::from_fn(g, |x, y| x + y * y);
        let f = VectorField::from_fn(g, |x, y| [x.abs().sqrt(), y]);
        let a = CoefficientField::identity(g);
        let rep = campanato_scan(&w, Some(&f), Some(&a), &CampanatoParams::new(0.5, 0.5, 3, CampanatoMode::L2fit)).unwrap();
        assert!(rep.chi.iter().all(|c| (0.9..1.6).contains(c)), "{:?}", rep.chi);
    }
}
