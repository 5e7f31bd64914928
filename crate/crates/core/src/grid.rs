// SPDX-License-Identifier: Apache-2.0

//! Structured node-centered grids on the half-rectangle `[-1,1] x [0,1]` and the
//! full rectangle `[-1,1] x [-1,1]`.
//!
//! Nodes are numbered lexicographically with the first coordinate running
//! fastest: `k = j * (nx + 1) + i`. Quadrature treats a grid function as
//! bilinear on each cell and integrates the weight `x_n^s` exactly in the normal
//! direction, so the degenerate bottom row never needs a pointwise weight.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// `x_n >= 0`; the bottom row lies on the planar boundary.
    Half,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeTag {
    Interior,
    /// On `x_n = 0` of a half grid (corners included).
    Planar,
    Outer,
}

/// Axis-aligned rectangle used to restrict quadrature and seminorm scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Rect {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Self {
        Self { x_lo, x_hi, y_lo, y_hi }
    }

    /// Half-rectangle `[-r, r] x [0, r]` centered on the planar boundary.
    pub fn half_box(r: f64) -> Self {
        Self::new(-r, r, 0.0, r)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let eps = 1e-12 * (1.0 + self.x_hi.abs().max(self.y_hi.abs()));
        x >= self.x_lo - eps && x <= self.x_hi + eps && y >= self.y_lo - eps && y <= self.y_hi + eps
    }

    /// Splits along the longer side into two closed halves sharing the midline.
    pub fn halves(&self) -> (Rect, Rect) {
        if self.x_hi - self.x_lo >= self.y_hi - self.y_lo {
            let m = 0.5 * (self.x_lo + self.x_hi);
            (Rect::new(self.x_lo, m, self.y_lo, self.y_hi), Rect::new(m, self.x_hi, self.y_lo, self.y_hi))
        } else {
            let m = 0.5 * (self.y_lo + self.y_hi);
            (Rect::new(self.x_lo, self.x_hi, self.y_lo, m), Rect::new(self.x_lo, self.x_hi, m, self.y_hi))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub shape: Shape,
    pub nx: usize,
    pub ny: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

/// Builds the standard half grid on `[-1,1] x [0,1]` or full grid on `[-1,1]^2`.
pub fn build_grid(shape: Shape, nx: usize, ny: usize) -> Result<Grid> {
    let (y_lo, y_hi) = match shape {
        Shape::Half => (0.0, 1.0),
        Shape::Full => (-1.0, 1.0),
    };
    Grid::new(shape, nx, ny, -1.0, 1.0, y_lo, y_hi)
}

impl Grid {
    pub fn new(shape: Shape, nx: usize, ny: usize, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidGrid(format!("need nx, ny >= 2, got {nx} x {ny}")));
        }
        if !(x_hi > x_lo) || !(y_hi > y_lo) {
            return Err(Error::InvalidGrid("empty extent".into()));
        }
        if shape == Shape::Half && y_lo != 0.0 {
            return Err(Error::InvalidGrid("half grids start at x_n = 0".into()));
        }
        Ok(Self { shape, nx, ny, x_lo, x_hi, y_lo, y_hi })
    }

    /// Half grid on `[x_lo, x_hi] x [0, y_hi]`.
    pub fn half_rect(x_lo: f64, x_hi: f64, y_hi: f64, nx: usize, ny: usize) -> Result<Self> {
        Self::new(Shape::Half, nx, ny, x_lo, x_hi, 0.0, y_hi)
    }

    #[inline]
    pub fn h1(&self) -> f64 {
        (self.x_hi - self.x_lo) / self.nx as f64
    }

    #[inline]
    pub fn h2(&self) -> f64 {
        (self.y_hi - self.y_lo) / self.ny as f64
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % (self.nx + 1), k / (self.nx + 1))
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        if i == self.nx {
            self.x_hi
        } else {
            self.x_lo + i as f64 * self.h1()
        }
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        if j == self.ny {
            self.y_hi
        } else {
            self.y_lo + j as f64 * self.h2()
        }
    }

    #[inline]
    pub fn coords(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.ij(k);
        (self.x(i), self.y(j))
    }

    pub fn tag(&self, k: usize) -> NodeTag {
        let (i, j) = self.ij(k);
        match self.shape {
            Shape::Half if j == 0 => NodeTag::Planar,
            Shape::Half if i == 0 || i == self.nx || j == self.ny => NodeTag::Outer,
            Shape::Full if i == 0 || i == self.nx || j == 0 || j == self.ny => NodeTag::Outer,
            _ => NodeTag::Interior,
        }
    }

    /// Nodes carrying Dirichlet data: the outer boundary and, on half grids, the two
    /// planar corners, which also lie on the lateral sides.
    pub fn is_dirichlet(&self, k: usize) -> bool {
        match self.tag(k) {
            NodeTag::Outer => true,
            NodeTag::Planar => {
                let (i, _) = self.ij(k);
                i == 0 || i == self.nx
            }
            NodeTag::Interior => false,
        }
    }

    pub fn tags(&self) -> Vec<NodeTag> {
        (0..self.node_count()).map(|k| self.tag(k)).collect()
    }

    pub fn count_tag(&self, tag: NodeTag) -> usize {
        (0..self.node_count()).filter(|&k| self.tag(k) == tag).count()
    }

    pub fn is_same(&self, other: &Grid) -> bool {
        self == other
    }

    pub fn domain(&self) -> Rect {
        Rect::new(self.x_lo, self.x_hi, self.y_lo, self.y_hi)
    }

    /// Distance from `(x, y)` to the outer (non-planar) boundary.
    pub fn outer_distance(&self, x: f64, y: f64) -> f64 {
        let dx = (x - self.x_lo).min(self.x_hi - x);
        let dy_top = self.y_hi - y;
        match self.shape {
            Shape::Half => dx.min(dy_top),
            Shape::Full => dx.min(dy_top).min(y - self.y_lo),
        }
    }

    /// Dual-cell extent of node `i` along the first axis.
    pub(crate) fn dual_x(&self, i: usize) -> (f64, f64) {
        let h = 0.5 * self.h1();
        let x = self.x(i);
        ((x - h).max(self.x_lo), (x + h).min(self.x_hi))
    }

    pub(crate) fn dual_y(&self, j: usize) -> (f64, f64) {
        let h = 0.5 * self.h2();
        let y = self.y(j);
        ((y - h).max(self.y_lo), (y + h).min(self.y_hi))
    }

    pub(crate) fn check_weight(&self, s: f64) -> Result<()> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::InvalidArgument(format!("weight exponent must be >= 0, got {s}")));
        }
        if s != 0.0 && self.shape != Shape::Half {
            return Err(Error::InvalidArgument("nonzero weight exponent needs a half grid".into()));
        }
        Ok(())
    }

    /// `∫ x_n^s φ_k dx` for every bilinear hat function `φ_k`.
    pub fn node_weights(&self, s: f64) -> Result<Vec<f64>> {
        self.check_weight(s)?;
        let h1 = self.h1();
        let wx: Vec<f64> = (0..=self.nx)
            .map(|i| if i == 0 || i == self.nx { 0.5 * h1 } else { h1 })
            .collect();
        let h2 = self.h2();
        let mut wy = vec![0.0; self.ny + 1];
        for j in 0..self.ny {
            let (a, b) = (self.y(j), self.y(j + 1));
            let m0 = moment(s, a, b);
            let m1 = moment(s + 1.0, a, b);
            let rising = (m1 - a * m0) / h2;
            wy[j + 1] += rising;
            wy[j] += m0 - rising;
        }
        let mut out = Vec::with_capacity(self.node_count());
        for wj in &wy {
            for wi in &wx {
                out.push(wi * wj);
            }
        }
        Ok(out)
    }

    /// Area of the dual cell of every node (lumped mass).
    pub fn dual_areas(&self) -> Vec<f64> {
        (0..self.node_count())
            .map(|k| {
                let (i, j) = self.ij(k);
                let (a, b) = self.dual_x(i);
                let (c, d) = self.dual_y(j);
                (b - a) * (d - c)
            })
            .collect()
    }

    /// Index of the node nearest to `(x, y)`, clamped to the grid.
    pub fn nearest(&self, x: f64, y: f64) -> usize {
        let i = ((x - self.x_lo) / self.h1()).round().clamp(0.0, self.nx as f64) as usize;
        let j = ((y - self.y_lo) / self.h2()).round().clamp(0.0, self.ny as f64) as usize;
        self.index(i, j)
    }

    /// Node index ranges `[i0, i1] x [j0, j1]` of nodes lying in `rect`.
    pub fn node_range(&self, rect: &Rect) -> Option<(usize, usize, usize, usize)> {
        let tol = 1e-9;
        let i0 = ((rect.x_lo - self.x_lo) / self.h1() - tol).ceil().max(0.0) as usize;
        let i1 = ((rect.x_hi - self.x_lo) / self.h1() + tol).floor().min(self.nx as f64);
        let j0 = ((rect.y_lo - self.y_lo) / self.h2() - tol).ceil().max(0.0) as usize;
        let j1 = ((rect.y_hi - self.y_lo) / self.h2() + tol).floor().min(self.ny as f64);
        if i1 < 0.0 || j1 < 0.0 {
            return None;
        }
        let (i1, j1) = (i1 as usize, j1 as usize);
        (i0 <= i1 && j0 <= j1).then_some((i0, i1, j0, j1))
    }
}

/// `∫_a^b y^s dy` for `0 <= a <= b` (or any interval when `s = 0`).
pub(crate) fn moment(s: f64, a: f64, b: f64) -> f64 {
    if s == 0.0 {
        b - a
    } else if s == 1.0 {
        0.5 * (b * b - a * a)
    } else if s == 2.0 {
        (b * b * b - a * a * a) / 3.0
    } else {
        (b.powf(s + 1.0) - a.powf(s + 1.0)) / (s + 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value at node {k}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.node_count()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.node_count())
            .map(|k| {
                let (x, y) = grid.coords(k);
                f(x, y)
            })
            .collect();
        Self { grid, values }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch("grid functions live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid, values })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Bilinear interpolation; `None` outside the grid.
    pub fn interpolate(&self, x: f64, y: f64) -> Option<f64> {
        let g = &self.grid;
        let eps = 1e-12;
        if !g.domain().contains(x, y) {
            return None;
        }
        let tx = ((x - g.x_lo) / g.h1()).clamp(0.0, g.nx as f64 - eps);
        let ty = ((y - g.y_lo) / g.h2()).clamp(0.0, g.ny as f64 - eps);
        let (i, j) = (tx.floor() as usize, ty.floor() as usize);
        let (fx, fy) = (tx - i as f64, ty - j as f64);
        let v00 = self.at(i, j);
        let v10 = self.at(i + 1, j);
        let v01 = self.at(i, j + 1);
        let v11 = self.at(i + 1, j + 1);
        Some((1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11))
    }

    /// Nodal gradient: centered differences inside, second-order one-sided at the ends.
    pub fn gradient(&self) -> (Vec<f64>, Vec<f64>) {
        let g = &self.grid;
        let mut gx = vec![0.0; g.node_count()];
        let mut gy = vec![0.0; g.node_count()];
        for j in 0..=g.ny {
            let row: Vec<f64> = (0..=g.nx).map(|i| self.at(i, j)).collect();
            for (i, d) in diff1(&row, g.h1()).into_iter().enumerate() {
                gx[g.index(i, j)] = d;
            }
        }
        for i in 0..=g.nx {
            let col: Vec<f64> = (0..=g.ny).map(|j| self.at(i, j)).collect();
            for (j, d) in diff1(&col, g.h2()).into_iter().enumerate() {
                gy[g.index(i, j)] = d;
            }
        }
        (gx, gy)
    }

    /// Writes `i,j,x1,xn,value` rows.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["i", "j", "x1", "xn", "value"])?;
        for k in 0..self.grid.node_count() {
            let (i, j) = self.grid.ij(k);
            let (x, y) = self.grid.coords(k);
            w.serialize((i, j, x, y, self.values[k]))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> GridFunctionJson {
        GridFunctionJson {
            shape: self.grid.shape,
            nx: self.grid.nx,
            ny: self.grid.ny,
            values: self.values.clone(),
        }
    }

    pub fn write_json(&self, mut out: impl Write) -> Result<()> {
        serde_json::to_writer(&mut out, &self.to_json())?;
        Ok(())
    }
}

/// JSON envelope for grid functions on the standard grids.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridFunctionJson {
    pub shape: Shape,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl TryFrom<GridFunctionJson> for GridFunction {
    type Error = Error;

    fn try_from(env: GridFunctionJson) -> Result<Self> {
        let grid = build_grid(env.shape, env.nx, env.ny)?;
        GridFunction::new(grid, env.values)
    }
}

/// First derivative of equally spaced samples.
pub(crate) fn diff1(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    if n == 2 {
        let s = (v[1] - v[0]) / h;
        return vec![s, s];
    }
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    d
}

/// Composite quadrature of `∫ x_n^s f dx` with `f` bilinear per cell.
pub fn integrate_weighted(f: &GridFunction, s: f64) -> Result<f64> {
    let w = f.grid.node_weights(s)?;
    Ok(f.values.iter().zip(&w).map(|(v, w)| v * w).sum())
}

/// `sqrt(∫ x_n^s |∇f|^2)` with edge differences and exactly integrated edge weights.
///
/// Horizontal edges carry the weight integrated over the dual interval of their row,
/// vertical edges the weight integrated over their own span, which is the quadratic
/// form of the identity-coefficient stiffness matrix.
pub fn weighted_h1_seminorm(f: &GridFunction, s: f64) -> Result<f64> {
    Ok(weighted_energy(f, s)?.sqrt())
}

pub(crate) fn weighted_energy(f: &GridFunction, s: f64) -> Result<f64> {
    let g = &f.grid;
    g.check_weight(s)?;
    let (h1, h2) = (g.h1(), g.h2());
    let mut e = 0.0;
    for j in 0..=g.ny {
        let (c, d) = g.dual_y(j);
        let wy = moment(s, c, d);
        for i in 0..g.nx {
            let df = f.at(i + 1, j) - f.at(i, j);
            e += wy * df * df / h1;
        }
    }
    for j in 0..g.ny {
        let wy = moment(s, g.y(j), g.y(j + 1));
        for i in 0..=g.nx {
            let (a, b) = g.dual_x(i);
            let df = f.at(i, j + 1) - f.at(i, j);
            e += (b - a) * wy * df * df / (h2 * h2);
        }
    }
    Ok(e)
}

/// `∫_lo^hi` of the linear hat piece on `[a, b]` that equals 1 at `b` (rising) or `a`.
fn hat_piece(a: f64, b: f64, lo: f64, hi: f64, rising: bool) -> f64 {
    let h = b - a;
    let (lo, hi) = (lo.max(a), hi.min(b));
    if hi <= lo {
        return 0.0;
    }
    let m1 = 0.5 * (hi * hi - lo * lo);
    let m0 = hi - lo;
    if rising {
        (m1 - a * m0) / h
    } else {
        (b * m0 - m1) / h
    }
}

/// Unweighted integral of the bilinear interpolant of nodal `values` over `rect`.
pub fn integrate_region(grid: &Grid, values: &[f64], rect: &Rect) -> f64 {
    let mut total = 0.0;
    for j in 0..grid.ny {
        let (ya, yb) = (grid.y(j), grid.y(j + 1));
        if yb <= rect.y_lo || ya >= rect.y_hi {
            continue;
        }
        let py0 = hat_piece(ya, yb, rect.y_lo, rect.y_hi, false);
        let py1 = hat_piece(ya, yb, rect.y_lo, rect.y_hi, true);
        for i in 0..grid.nx {
            let (xa, xb) = (grid.x(i), grid.x(i + 1));
            if xb <= rect.x_lo || xa >= rect.x_hi {
                continue;
            }
            let px0 = hat_piece(xa, xb, rect.x_lo, rect.x_hi, false);
            let px1 = hat_piece(xa, xb, rect.x_lo, rect.x_hi, true);
            total += values[grid.index(i, j)] * px0 * py0
                + values[grid.index(i + 1, j)] * px1 * py0
                + values[grid.index(i, j + 1)] * px0 * py1
                + values[grid.index(i + 1, j + 1)] * px1 * py1;
        }
    }
    total
}
