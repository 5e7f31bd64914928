// SPDX-License-Identifier: Apache-2.0

//! Distance-weighted interior derivative norms
//! `sup_X Δ^l ( sup_B |D^β f| + Δ^α [D^β f]_{C^α(B)} )`, `B = B_{Δ/(l+1)}(X)`,
//! with `Δ` the distance to the outer boundary and `β` ranging over multi-indices of
//! order `k` with at most `b` normal derivatives.

use serde::{Deserialize, Serialize};

use super::holder::holder_on_nodes;
use crate::error::{Error, Result};
use crate::grid::{diff1, Grid, GridFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalNormSpec {
    /// Derivative order.
    pub k: usize,
    pub alpha: f64,
    /// Maximum number of normal derivatives.
    pub b: usize,
    /// Distance exponent.
    pub l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlobalNormReport {
    pub value: f64,
    /// Centers that contributed.
    pub centers: usize,
    /// Centers whose ball was too small to resolve.
    pub skipped: usize,
}

/// Upper bounds on centers per axis and on ball samples per axis for the Hölder part.
const CENTER_TARGET: usize = 32;
const BALL_TARGET: usize = 15;

fn partial(grid: &Grid, v: &[f64], normal: bool) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    if normal {
        for i in 0..=grid.nx {
            let line: Vec<f64> = (0..=grid.ny).map(|j| v[grid.index(i, j)]).collect();
            for (j, d) in diff1(&line, grid.h2()).into_iter().enumerate() {
                out[grid.index(i, j)] = d;
            }
        }
    } else {
        for j in 0..=grid.ny {
            let line: Vec<f64> = (0..=grid.nx).map(|i| v[grid.index(i, j)]).collect();
            for (i, d) in diff1(&line, grid.h1()).into_iter().enumerate() {
                out[grid.index(i, j)] = d;
            }
        }
    }
    out
}

/// Strided sequence of indices in `[lo, hi]` that contains `anchor` when it lies inside.
fn strided(lo: usize, hi: usize, anchor: usize, stride: usize) -> Vec<usize> {
    let start = lo + (anchor + stride * (hi + 1) - lo) % stride;
    (start..=hi).step_by(stride).collect()
}

pub fn global_norm_coeff(f: &GridFunction, spec: &GlobalNormSpec) -> Result<GlobalNormReport> {
    let GlobalNormSpec { k, alpha, b, l } = *spec;
    if b > k || !(alpha > 0.0 && alpha <= 1.0) || !(l >= 0.0) {
        return Err(Error::InvalidArgument(format!("bad norm parameters k = {k}, b = {b}, α = {alpha}, l = {l}")));
    }
    let grid = f.grid;
    let derivs: Vec<Vec<f64>> = (0..=b)
        .map(|normal| {
            let mut v = f.values.clone();
            for _ in 0..k - normal {
                v = partial(&grid, &v, false);
            }
            for _ in 0..normal {
                v = partial(&grid, &v, true);
            }
            v
        })
        .collect();
    let (h1, h2) = (grid.h1(), grid.h2());
    let h = h1.max(h2);
    let stride = grid.nx.max(grid.ny).div_ceil(CENTER_TARGET).max(1);
    let ci = strided(0, grid.nx, grid.nx / 2, stride);
    let cj = strided(0, grid.ny, 0, stride);
    let mut report = GlobalNormReport { value: 0.0, centers: 0, skipped: 0 };
    for &j in &cj {
        for &i in &ci {
            let (x, y) = (grid.x(i), grid.y(j));
            let delta = grid.outer_distance(x, y);
            let rho = delta / (l + 1.0);
            if !(rho >= 2.0 * h) {
                report.skipped += 1;
                continue;
            }
            report.centers += 1;
            let ri = (rho / h1).floor() as usize;
            let rj = (rho / h2).floor() as usize;
            let (i0, i1) = (i.saturating_sub(ri), (i + ri).min(grid.nx));
            let (j0, j1) = (j.saturating_sub(rj), (j + rj).min(grid.ny));
            let inside = |a: usize, c: usize| (grid.x(a) - x).hypot(grid.y(c) - y) <= rho * (1.0 + 1e-12);
            let all: Vec<usize> = (j0..=j1)
                .flat_map(|c| (i0..=i1).map(move |a| (a, c)))
                .filter(|&(a, c)| inside(a, c))
                .map(|(a, c)| grid.index(a, c))
                .collect();
            let step = (2 * ri.max(rj) + 1).div_ceil(BALL_TARGET).max(1);
            let sample: Vec<usize> = strided(j0, j1, j, step)
                .into_iter()
                .flat_map(|c| strided(i0, i1, i, step).into_iter().map(move |a| (a, c)))
                .filter(|&(a, c)| inside(a, c))
                .map(|(a, c)| grid.index(a, c))
                .collect();
            for d in &derivs {
                let sup = all.iter().map(|&n| d[n].abs()).fold(0.0, f64::max);
                let semi = holder_on_nodes(&grid, d, &sample, alpha);
                let v = delta.powf(l) * (sup + delta.powf(alpha) * semi);
                report.value = report.value.max(v);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, Shape};

    #[test]
    fn linear_function_first_order() {
        let g = build_grid(Shape::Half, 64, 32).unwrap();
        let f = GridFunction::from_fn(g, |x, _| x);
        let r = global_norm_coeff(&f, &GlobalNormSpec { k: 1, alpha: 0.5, b: 0, l: 1.0 }).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12, "{r:?}");
        assert!(r.skipped > 0 && r.centers > 0);
    }

    #[test]
    fn normal_derivatives_only_increase_the_norm() {
        let g = build_grid(Shape::Half, 64, 32).unwrap();
        let f = GridFunction::from_fn(g, |x, y| (2.0 * x).sin() * (1.0 + y * y) + y.powi(3));
        for k in 1..=2 {
            let mut last = 0.0;
            for b in 0..=k {
                let v = global_norm_coeff(&f, &GlobalNormSpec { k, alpha: 0.5, b, l: 1.0 }).unwrap().value;
                assert!(v >= last);
                last = v;
            }
        }
    }

    #[test]
    fn rejects_more_normal_derivatives_than_order() {
        let g = build_grid(Shape::Half, 8, 4).unwrap();
        let f = GridFunction::zeros(g);
        assert!(global_norm_coeff(&f, &GlobalNormSpec { k: 1, alpha: 0.5, b: 2, l: 1.0 }).is_err());
    }
}
