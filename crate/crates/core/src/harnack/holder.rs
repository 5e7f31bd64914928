// SPDX-License-Identifier: Apache-2.0

//! Discrete Hölder seminorms `max |f(x) - f(y)| / |x - y|^α` over node pairs.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, Rect};
use crate::weighted::VectorField;

/// Regions with fewer nodes use every pair.
pub const ALL_PAIRS_LIMIT: usize = 2000;

fn pair_offsets(ni: usize, nj: usize) -> Vec<(i64, i64)> {
    let mut steps = Vec::new();
    let mut s = 1usize;
    while s <= ni.max(nj) {
        steps.push(s);
        s *= 2;
    }
    let mut out = Vec::new();
    for &s in &steps {
        let s = s as i64;
        out.extend([(s, 0), (0, s), (s, s), (s, -s)]);
    }
    let (a, b) = (ni as i64, nj as i64);
    out.extend([(a, 0), (0, b), (a, b), (a, -b)]);
    out.retain(|&(di, dj)| di.unsigned_abs() as usize <= ni && dj.unsigned_abs() as usize <= nj && (di, dj) != (0, 0));
    out.sort_unstable();
    out.dedup();
    out
}

/// Generic scan: `diff(k, m)` is `|f(x_k) - f(x_m)|`.
fn seminorm_with(grid: &Grid, alpha: f64, region: &Rect, diff: impl Fn(usize, usize) -> f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("Hölder exponent {alpha} outside (0, 1]")));
    }
    let (i0, i1, j0, j1) = grid
        .node_range(region)
        .ok_or_else(|| Error::InvalidArgument("region contains no nodes".into()))?;
    let nodes: Vec<usize> = (j0..=j1).flat_map(|j| (i0..=i1).map(move |i| grid.index(i, j))).collect();
    if nodes.len() < 2 {
        return Err(Error::InvalidArgument("region contains fewer than two nodes".into()));
    }
    let quotient = |k: usize, m: usize| {
        let (xa, ya) = grid.coords(k);
        let (xb, yb) = grid.coords(m);
        diff(k, m) / (xa - xb).hypot(ya - yb).powf(alpha)
    };
    let mut best: f64 = 0.0;
    if nodes.len() < ALL_PAIRS_LIMIT {
        for (p, &k) in nodes.iter().enumerate() {
            for &m in &nodes[p + 1..] {
                best = best.max(quotient(k, m));
            }
        }
        return Ok(best);
    }
    let offsets = pair_offsets(i1 - i0, j1 - j0);
    for j in j0..=j1 {
        for i in i0..=i1 {
            let k = grid.index(i, j);
            for &(di, dj) in &offsets {
                let (ti, tj) = (i as i64 + di, j as i64 + dj);
                if ti < i0 as i64 || ti > i1 as i64 || tj < j0 as i64 || tj > j1 as i64 {
                    continue;
                }
                best = best.max(quotient(k, grid.index(ti as usize, tj as usize)));
            }
        }
    }
    Ok(best)
}

/// `[f]_{C^α(region)}` estimated over node pairs: every pair below
/// [`ALL_PAIRS_LIMIT`] nodes, otherwise axis and diagonal pairs at dyadic index
/// offsets plus the full extents.
pub fn holder_seminorm(f: &GridFunction, alpha: f64, region: &Rect) -> Result<f64> {
    seminorm_with(&f.grid, alpha, region, |k, m| (f.values[k] - f.values[m]).abs())
}

/// Vector-valued variant with Euclidean differences.
pub fn holder_seminorm_vector(f: &VectorField, alpha: f64, region: &Rect) -> Result<f64> {
    seminorm_with(&f.grid, alpha, region, |k, m| (f.f1[k] - f.f1[m]).hypot(f.f2[k] - f.f2[m]))
}

/// Seminorm of nodal values on a subset of nodes (used on strided ball samples).
pub(crate) fn holder_on_nodes(grid: &Grid, values: &[f64], nodes: &[usize], alpha: f64) -> f64 {
    let mut best: f64 = 0.0;
    for (p, &k) in nodes.iter().enumerate() {
        let (xa, ya) = grid.coords(k);
        for &m in &nodes[p + 1..] {
            let (xb, yb) = grid.coords(m);
            let d = (xa - xb).hypot(ya - yb);
            best = best.max((values[k] - values[m]).abs() / d.powf(alpha));
        }
    }
    best
}
