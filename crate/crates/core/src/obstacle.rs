// SPDX-License-Identifier: Apache-2.0

//! Obstacle problem `div(A∇U) = χ_{U>0}`, `U >= 0` on full grids, free-boundary
//! extraction and blow-up classification.
//!
//! The discrete complementarity system is `U >= 0`, `K U + m >= 0`,
//! `U·(K U + m) = 0` with `K` the unweighted stiffness (a positive multiple of
//! `-div(A∇·)`) and `m` the lumped cell areas.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, Shape};
use crate::linalg::{self, SparseMatrix};
use crate::spline::CubicSpline;
use crate::weighted::{stiffness_matrix, BoundaryData, CoefficientField};

/// Relative activation threshold for `U > 0`.
pub const ACTIVATION: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObstacleOptions {
    pub omega: f64,
    pub tol: f64,
    pub max_sweeps: usize,
    /// Sweeps between complementarity checks.
    pub check_every: usize,
    /// Start from the interpolated solution on the twice coarser grid.
    pub warm_start: bool,
}

impl Default for ObstacleOptions {
    fn default() -> Self {
        Self { omega: 1.5, tol: 1e-8, max_sweeps: 100_000, check_every: 10, warm_start: false }
    }
}

#[derive(Debug, Clone)]
pub struct ObstacleSolution {
    pub u: GridFunction,
    pub active: Vec<bool>,
    pub iterations: usize,
    pub complementarity_residual: f64,
}

impl ObstacleSolution {
    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn threshold(&self) -> f64 {
        ACTIVATION * self.u.max_abs()
    }
}

fn active_mask(u: &[f64]) -> Vec<bool> {
    let thr = ACTIVATION * u.iter().fold(0.0f64, |m, v| m.max(*v));
    u.iter().map(|&v| thr > 0.0 && v > thr).collect()
}

/// `max_i |min(U_i, (K U + m)_i / m_i)|` over the free nodes.
pub fn complementarity_residual(k: &SparseMatrix, mass: &[f64], grid: &Grid, u: &[f64]) -> f64 {
    let ku = linalg::mat_vec(k, u);
    (0..grid.node_count())
        .filter(|&n| !grid.is_dirichlet(n))
        .map(|n| u[n].min((ku[n] + mass[n]) / mass[n]).abs())
        .fold(0.0, f64::max)
}

/// Projected SOR in lexicographic node order.
pub fn solve_obstacle(
    grid: &Grid,
    a: &CoefficientField,
    bd: &BoundaryData,
    opts: &ObstacleOptions,
) -> Result<ObstacleSolution> {
    if grid.shape != Shape::Full {
        return Err(Error::InvalidGrid("obstacle problems live on full grids".into()));
    }
    if a.grid != *grid || bd.grid != *grid {
        return Err(Error::ShapeMismatch("coefficients or boundary data on a different grid".into()));
    }
    if let Some((k, v)) = bd.outer_values().find(|&(_, v)| !(v >= 0.0)) {
        return Err(Error::InvalidArgument(format!("boundary value {v} < 0 at node {k}")));
    }
    if !(opts.omega > 0.0 && opts.omega < 2.0) {
        return Err(Error::InvalidArgument(format!("relaxation factor {} outside (0, 2)", opts.omega)));
    }
    let n = grid.node_count();
    let mut u = vec![0.0; n];
    if opts.warm_start && grid.nx % 2 == 0 && grid.ny % 2 == 0 && grid.nx >= 32 && grid.ny >= 32 {
        let coarse = Grid::new(Shape::Full, grid.nx / 2, grid.ny / 2, grid.x_lo, grid.x_hi, grid.y_lo, grid.y_hi)?;
        let pick = |k: usize| {
            let (i, j) = coarse.ij(k);
            grid.index(2 * i, 2 * j)
        };
        let ac = CoefficientField {
            grid: coarse,
            entries: (0..coarse.node_count()).map(|k| a.entries[pick(k)]).collect(),
            lambda: a.lambda,
            big_lambda: a.big_lambda,
        };
        let bc = BoundaryData::from_fn(coarse, |x, y| bd.value(grid.nearest(x, y)));
        let sc = solve_obstacle(&coarse, &ac, &bc, opts)?;
        for (k, v) in u.iter_mut().enumerate() {
            let (x, y) = grid.coords(k);
            *v = sc.u.interpolate(x, y).unwrap_or(0.0).max(0.0);
        }
    }
    for k in 0..n {
        if grid.is_dirichlet(k) {
            u[k] = bd.value(k);
        }
    }

    let kmat = stiffness_matrix(grid, &a.entries, 0.0);
    let mass = grid.dual_areas();
    let free: Vec<usize> = (0..n).filter(|&k| !grid.is_dirichlet(k)).collect();
    let diag = linalg::diagonal(&kmat);
    let omega = opts.omega;
    let check = opts.check_every.max(1);

    let mut sweeps = 0;
    let mut residual = complementarity_residual(&kmat, &mass, grid, &u);
    while residual > opts.tol {
        if sweeps >= opts.max_sweeps {
            return Err(Error::NoConvergence { iterations: sweeps, residual, history: Vec::new() });
        }
        for _ in 0..check {
            for &i in &free {
                let row = kmat.outer_view(i).expect("row in range");
                let mut off = 0.0;
                for (j, &v) in row.iter() {
                    if j != i {
                        off += v * u[j];
                    }
                }
                let gs = (-mass[i] - off) / diag[i];
                u[i] = (u[i] + omega * (gs - u[i])).max(0.0);
            }
            sweeps += 1;
        }
        residual = complementarity_residual(&kmat, &mass, grid, &u);
    }
    let active = active_mask(&u);
    Ok(ObstacleSolution { u: GridFunction::new(*grid, u)?, active, iterations: sweeps, complementarity_residual: residual })
}

/// Direction along which the free boundary is read as a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphAxis {
    /// `x_n = Γ(x_1)`: columns of fixed `x_1`, scanned upward.
    Xn,
    /// `x_1 = Γ(x_n)`: rows of fixed `x_n`, scanned left to right.
    X1,
}

#[derive(Debug, Clone)]
pub struct FreeBoundaryCurve {
    pub axis: GraphAxis,
    pub samples: Vec<(f64, f64)>,
    pub spline: CubicSpline,
}

impl FreeBoundaryCurve {
    pub fn from_samples(axis: GraphAxis, samples: Vec<(f64, f64)>) -> Result<Self> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
        let spline = CubicSpline::new(xs, ys)?;
        Ok(Self { axis, samples, spline })
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.spline.eval(t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.spline.derivative(t)
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        self.spline.second_derivative(t)
    }

    pub fn range(&self) -> (f64, f64) {
        self.spline.range()
    }

    /// Writes `x',gamma,dgamma,d2gamma` at the samples.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x'", "gamma", "dgamma", "d2gamma"])?;
        for &(t, _) in &self.samples {
            let [v, d1, d2, _] = self.spline.eval_all(t);
            w.serialize((t, v, d1, d2))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads `Γ` off the last zero-to-positive transition of every grid line along `axis`.
///
/// The crossing is placed where the linear extrapolation of `√U` vanishes, using the
/// second and third positive nodes when available (the first and second otherwise),
/// clamped to the crossing cell and the cell below it. `√U` is linear across a
/// regular free boundary, so this is exact for the half-plane profile.
pub fn extract_free_boundary(sol: &ObstacleSolution, axis: GraphAxis) -> Result<FreeBoundaryCurve> {
    let g = &sol.u.grid;
    let active = sol.active_count();
    if active == 0 {
        return Err(Error::NoFreeBoundary("empty"));
    }
    if active == g.node_count() {
        return Err(Error::NoFreeBoundary("full"));
    }
    let (lines, len) = match axis {
        GraphAxis::Xn => (g.nx + 1, g.ny + 1),
        GraphAxis::X1 => (g.ny + 1, g.nx + 1),
    };
    let node = |line: usize, p: usize| match axis {
        GraphAxis::Xn => g.index(line, p),
        GraphAxis::X1 => g.index(p, line),
    };
    let (line_coord, pos_coord, h): (Box<dyn Fn(usize) -> f64>, Box<dyn Fn(usize) -> f64>, f64) = match axis {
        GraphAxis::Xn => (Box::new(|i| g.x(i)), Box::new(|j| g.y(j)), g.h2()),
        GraphAxis::X1 => (Box::new(|j| g.y(j)), Box::new(|i| g.x(i)), g.h1()),
    };
    let thr = sol.threshold();
    let mut samples = Vec::new();
    for line in 0..lines {
        let ups: Vec<usize> = (0..len - 1)
            .filter(|&p| !sol.active[node(line, p)] && sol.active[node(line, p + 1)])
            .collect();
        if ups.len() > 1 {
            return Err(Error::NonGraph { coord: line_coord(line), crossings: ups.len() });
        }
        let Some(&p) = ups.last() else { continue };
        let (lo, hi) = (pos_coord(p), pos_coord(p + 1));
        let u1 = sol.u.values[node(line, p + 1)];
        let active_run = (p + 1..len).take_while(|&q| sol.active[node(line, q)]).count();
        // the first positive node carries an O(h^2) error comparable to its value
        let extrapolate = |q: usize| {
            let (s1, s2) = (sol.u.values[node(line, q)].sqrt(), sol.u.values[node(line, q + 1)].sqrt());
            (s2 > s1).then(|| pos_coord(q) - s1 * h / (s2 - s1))
        };
        let root = match active_run {
            r if r >= 3 => extrapolate(p + 2).or_else(|| extrapolate(p + 1)),
            2 => extrapolate(p + 1),
            _ => None,
        };
        let gamma = root.unwrap_or_else(|| {
            let u0 = sol.u.values[node(line, p)] - thr;
            lo + (hi - lo) * (-u0) / (u1 - thr - u0)
        });
        // nodes with U below the activity threshold can hide the crossing one cell lower
        samples.push((line_coord(line), gamma.clamp(lo - h, hi)));
    }
    if samples.is_empty() {
        return Err(Error::NoFreeBoundary("without crossings along the axis"));
    }
    FreeBoundaryCurve::from_samples(axis, samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Regular,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupFit {
    pub r: f64,
    pub k: f64,
    pub e: [f64; 2],
    pub residual: f64,
    /// The rescaled stencil left the grid; no fit was made.
    pub skipped: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularPointReport {
    pub x0: [f64; 2],
    pub fits: Vec<BlowupFit>,
    pub verdict: Verdict,
}

/// Slack allowed when checking that the fit residual does not grow as `r` shrinks.
pub const RESIDUAL_SLACK: f64 = 1e-3;
/// Final residual below which a point is classified regular.
pub const REGULAR_RESIDUAL: f64 = 1e-2;

fn ball_samples(u: &GridFunction, x0: [f64; 2], r: f64) -> (Vec<[f64; 2]>, Vec<f64>) {
    let g = &u.grid;
    let rect = crate::grid::Rect::new(x0[0] - r, x0[0] + r, x0[1] - r, x0[1] + r);
    let mut z = Vec::new();
    let mut v = Vec::new();
    if let Some((i0, i1, j0, j1)) = g.node_range(&rect) {
        for j in j0..=j1 {
            for i in i0..=i1 {
                let q = [(g.x(i) - x0[0]) / r, (g.y(j) - x0[1]) / r];
                if q[0].hypot(q[1]) <= 1.0 + 1e-12 {
                    z.push(q);
                    v.push(u.at(i, j) / (r * r));
                }
            }
        }
    }
    (z, v)
}

/// `(k, residual)` of the best fit of `(k/2)((z·e)^+)^2` for `e = (sin θ, cos θ)`.
fn fit_at(theta: f64, z: &[[f64; 2]], v: &[f64], vnorm: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    let p: Vec<f64> = z.iter().map(|q| 0.5 * (q[0] * s + q[1] * c).max(0.0).powi(2)).collect();
    let pp = linalg::dot(&p, &p);
    let k = if pp > 0.0 { linalg::dot(&p, v) / pp } else { 0.0 };
    let r2: f64 = v.iter().zip(&p).map(|(v, p)| (v - k * p).powi(2)).sum();
    (k, r2.sqrt() / vnorm)
}

fn initial_direction(u: &GridFunction, active: &[bool], x0: [f64; 2]) -> Option<f64> {
    let g = &u.grid;
    let c = g.nearest(x0[0], x0[1]);
    let (ci, cj) = g.ij(c);
    let mut best: Option<(usize, f64)> = None;
    for dj in -4i64..=4 {
        for di in -4i64..=4 {
            let (i, j) = (ci as i64 + di, cj as i64 + dj);
            if i < 1 || j < 1 || i >= g.nx as i64 || j >= g.ny as i64 {
                continue;
            }
            let k = g.index(i as usize, j as usize);
            if !active[k] {
                continue;
            }
            let (x, y) = g.coords(k);
            let d = (x - x0[0]).hypot(y - x0[1]);
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((k, d));
            }
        }
    }
    let (k, _) = best?;
    let (i, j) = g.ij(k);
    let gx = (u.at(i + 1, j) - u.at(i - 1, j)) / (2.0 * g.h1());
    let gy = (u.at(i, j + 1) - u.at(i, j - 1)) / (2.0 * g.h2());
    (gx != 0.0 || gy != 0.0).then(|| gx.atan2(gy))
}

/// Smallest radius, in grid spacings, at which a blow-up fit is attempted.
pub const MIN_RADIUS_CELLS: f64 = 3.0;

/// Fits the quadratic blow-up `U(x0 + r z)/r^2` at each radius.
///
/// The rescaled profile is sampled at the grid nodes of the closed ball of radius
/// `r` around `x0`, so the fit sees nodal values rather than an interpolant. Radii
/// whose ball leaves the grid or spans fewer than three cells are skipped.
pub fn blowup_check(sol: &ObstacleSolution, x0: [f64; 2], radii: &[f64]) -> Result<RegularPointReport> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidArgument("radii must be positive and nonempty".into()));
    }
    let g = &sol.u.grid;
    if !g.domain().contains(x0[0], x0[1]) {
        return Err(Error::OutOfDomain(x0[0], x0[1]));
    }
    let h = g.h1().max(g.h2());
    let theta0 = initial_direction(&sol.u, &sol.active, x0);
    let mut fits = Vec::with_capacity(radii.len());
    for &r in radii {
        let inside = g.domain().contains(x0[0] - r, x0[1] - r) && g.domain().contains(x0[0] + r, x0[1] + r);
        if !inside || r < MIN_RADIUS_CELLS * h {
            fits.push(BlowupFit { r, k: 0.0, e: [0.0, 1.0], residual: f64::NAN, skipped: true });
            continue;
        }
        let (z, v) = ball_samples(&sol.u, x0, r);
        let vnorm = linalg::norm2(&v);
        if vnorm == 0.0 {
            fits.push(BlowupFit { r, k: 0.0, e: [0.0, 1.0], residual: 1.0, skipped: false });
            continue;
        }
        let obj = |t: f64| fit_at(t, &z, &v, vnorm).1;
        let steps = 72;
        let mut best = (0.0, f64::INFINITY);
        let candidates = (0..steps).map(|i| 2.0 * PI * i as f64 / steps as f64).chain(theta0);
        for t in candidates {
            let f = obj(t);
            if f < best.1 {
                best = (t, f);
            }
        }
        let half = 2.0 * PI / steps as f64;
        let theta = golden_min(&obj, best.0 - half, best.0 + half, 80);
        let theta = if obj(theta) <= best.1 { theta } else { best.0 };
        let (k, residual) = fit_at(theta, &z, &v, vnorm);
        fits.push(BlowupFit { r, k, e: [theta.sin(), theta.cos()], residual, skipped: false });
    }
    let used: Vec<&BlowupFit> = fits.iter().filter(|f| !f.skipped).collect();
    let regular = !used.is_empty()
        && used.windows(2).all(|w| w[1].residual <= w[0].residual + RESIDUAL_SLACK)
        && used.last().is_some_and(|f| f.residual < REGULAR_RESIDUAL && f.k > 0.0);
    Ok(RegularPointReport {
        x0,
        fits,
        verdict: if regular { Verdict::Regular } else { Verdict::Inconclusive },
    })
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Radial solution `(r^2 - a^2)/4 - (a^2/2) ln(r/a)` outside the disc of radius `a`, zero inside.
pub fn radial_profile(a: f64, x: f64, y: f64) -> f64 {
    let r = x.hypot(y);
    if r <= a {
        0.0
    } else {
        (r * r - a * a) / 4.0 - 0.5 * a * a * (r / a).ln()
    }
}

/// Half-plane solution `((x·e)^+)^2 / 2`.
pub fn half_plane_profile(e: [f64; 2], x: f64, y: f64) -> f64 {
    0.5 * (x * e[0] + y * e[1]).max(0.0).powi(2)
}
