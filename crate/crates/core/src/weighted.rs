// SPDX-License-Identifier: Apache-2.0

//! Assembly and solution of `div(x_n^s A ∇w) = div(x_n^s f) + x_n g` on half grids.
//!
//! Each cell is split into four corner quadrants. A quadrant sees the two cell
//! edges through its corner, takes the one-sided differences along them and the
//! coefficient of the corner node, and integrates `x_n^s` over its quarter of the
//! cell in closed form. The resulting bilinear form is the five-point flux stencil
//! when `a12 = 0`, is symmetric positive semidefinite whenever `A` is, and gives the
//! degenerate bottom row strictly positive weights.
//!
//! Sign convention: the discrete problem is `K w + l = 0` where `K` represents
//! `-div(x_n^s A ∇·)` and `l_i = -∫ x_n^s f·∇φ_i + ∫ x_n g φ_i`.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{moment, Grid, GridFunction, NodeTag, Shape};
use crate::linalg::{self, CgOptions, CgReport, SparseMatrix};

const ELLIPTICITY_TOL: f64 = 1e-10;

/// Symmetric 2x2 matrix `[[a11, a12], [a12, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sym2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl Sym2 {
    pub const IDENTITY: Sym2 = Sym2 { a11: 1.0, a12: 0.0, a22: 1.0 };

    pub fn new(a11: f64, a12: f64, a22: f64) -> Self {
        Self { a11, a12, a22 }
    }

    pub fn scale(self, c: f64) -> Self {
        Self::new(c * self.a11, c * self.a12, c * self.a22)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = 0.5 * (self.a11 + self.a22);
        let r = (0.5 * (self.a11 - self.a22)).hypot(self.a12);
        (m - r, m + r)
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a11 * v[0] + self.a12 * v[1], self.a12 * v[0] + self.a22 * v[1]]
    }

    /// `J S Jᵀ` for a general 2x2 `J`.
    pub fn congruence(&self, j: [[f64; 2]; 2]) -> Sym2 {
        let s = [[self.a11, self.a12], [self.a12, self.a22]];
        let mut js = [[0.0; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                js[r][c] = j[r][0] * s[0][c] + j[r][1] * s[1][c];
            }
        }
        let e = |r: usize, c: usize| js[r][0] * j[c][0] + js[r][1] * j[c][1];
        Sym2::new(e(0, 0), 0.5 * (e(0, 1) + e(1, 0)), e(1, 1))
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a22.is_finite()
    }
}

/// Symmetric coefficient matrix per node with ellipticity bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    pub grid: Grid,
    pub entries: Vec<Sym2>,
    pub lambda: f64,
    pub big_lambda: f64,
}

impl CoefficientField {
    /// Checks that every eigenvalue lies in `[lambda, big_lambda]`.
    pub fn new(grid: Grid, entries: Vec<Sym2>, lambda: f64, big_lambda: f64) -> Result<Self> {
        if entries.len() != grid.node_count() {
            return Err(Error::ShapeMismatch(format!("{} entries for {} nodes", entries.len(), grid.node_count())));
        }
        if !(lambda > 0.0) || !(big_lambda >= lambda) {
            return Err(Error::InvalidArgument(format!("bad ellipticity bounds [{lambda}, {big_lambda}]")));
        }
        for (node, a) in entries.iter().enumerate() {
            let (lo, hi) = a.eigenvalues();
            if !a.is_finite() || lo < lambda - ELLIPTICITY_TOL || hi > big_lambda + ELLIPTICITY_TOL {
                return Err(Error::Ellipticity { node, min_eig: lo, max_eig: hi, lambda, big_lambda });
            }
        }
        Ok(Self { grid, entries, lambda, big_lambda })
    }

    /// Bounds taken from the extreme nodal eigenvalues; fails if the field is not elliptic.
    pub fn measured(grid: Grid, entries: Vec<Sym2>) -> Result<Self> {
        let (lo, hi) = eigen_range(&entries);
        if !(lo > 0.0) {
            let node = entries
                .iter()
                .position(|a| !(a.eigenvalues().0 > 0.0))
                .unwrap_or(0);
            let (min_eig, max_eig) = entries.get(node).map(Sym2::eigenvalues).unwrap_or((lo, hi));
            return Err(Error::Ellipticity { node, min_eig, max_eig, lambda: 0.0, big_lambda: f64::INFINITY });
        }
        Self::new(grid, entries, lo, hi)
    }

    pub fn identity(grid: Grid) -> Self {
        Self { grid, entries: vec![Sym2::IDENTITY; grid.node_count()], lambda: 1.0, big_lambda: 1.0 }
    }

    pub fn from_fn(grid: Grid, lambda: f64, big_lambda: f64, a: impl Fn(f64, f64) -> Sym2) -> Result<Self> {
        let entries = (0..grid.node_count())
            .map(|k| {
                let (x, y) = grid.coords(k);
                a(x, y)
            })
            .collect();
        Self::new(grid, entries, lambda, big_lambda)
    }

    pub fn eigen_bounds(&self) -> (f64, f64) {
        eigen_range(&self.entries)
    }

    /// Writes `i,j,a11,a12,a22` rows.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["i", "j", "a11", "a12", "a22"])?;
        for (k, a) in self.entries.iter().enumerate() {
            let (i, j) = self.grid.ij(k);
            w.serialize((i, j, a.a11, a.a12, a.a22))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn eigen_range(entries: &[Sym2]) -> (f64, f64) {
    entries.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| {
        let (l, h) = a.eigenvalues();
        (lo.min(l), hi.max(h))
    })
}

/// Two-component vector field per node.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: Grid,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
}

impl VectorField {
    pub fn new(grid: Grid, f1: Vec<f64>, f2: Vec<f64>) -> Result<Self> {
        let n = grid.node_count();
        if f1.len() != n || f2.len() != n {
            return Err(Error::ShapeMismatch(format!("vector field of {}/{} for {n} nodes", f1.len(), f2.len())));
        }
        if f1.iter().chain(&f2).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite vector field entry".into()));
        }
        Ok(Self { grid, f1, f2 })
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.node_count();
        Self { grid, f1: vec![0.0; n], f2: vec![0.0; n] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let (f1, f2) = (0..grid.node_count())
            .map(|k| {
                let (x, y) = grid.coords(k);
                let v = f(x, y);
                (v[0], v[1])
            })
            .unzip();
        Self { grid, f1, f2 }
    }

    pub fn max_abs(&self) -> f64 {
        self.f1.iter().chain(&self.f2).fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// One corner quadrant of a cell: corner node, its horizontal and vertical edges, and weight.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Quadrant {
    pub corner: usize,
    pub h_edge: (usize, usize),
    pub v_edge: (usize, usize),
    pub weight: f64,
}

pub(crate) fn for_each_quadrant(grid: &Grid, s: f64, mut f: impl FnMut(Quadrant)) {
    let (h1, h2) = (grid.h1(), grid.h2());
    for j in 0..grid.ny {
        let (ya, yb) = (grid.y(j), grid.y(j + 1));
        let ym = ya + 0.5 * h2;
        let w_lo = 0.5 * h1 * moment(s, ya, ym);
        let w_hi = 0.5 * h1 * moment(s, ym, yb);
        for i in 0..grid.nx {
            for (ci, cj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                let (ic, jc) = (i + ci, j + cj);
                f(Quadrant {
                    corner: grid.index(ic, jc),
                    h_edge: (grid.index(i, jc), grid.index(i + 1, jc)),
                    v_edge: (grid.index(ic, j), grid.index(ic, j + 1)),
                    weight: if cj == 0 { w_lo } else { w_hi },
                });
            }
        }
    }
}

/// Stiffness matrix over all nodes for nodal coefficients `coef` (no ellipticity check).
pub(crate) fn stiffness_matrix(grid: &Grid, coef: &[Sym2], s: f64) -> SparseMatrix {
    let n = grid.node_count();
    let (ih1, ih2) = (1.0 / grid.h1(), 1.0 / grid.h2());
    let mut t = Vec::with_capacity(16 * 4 * grid.nx * grid.ny);
    for_each_quadrant(grid, s, |q| {
        let a = coef[q.corner];
        let nodes = [q.h_edge.0, q.h_edge.1, q.v_edge.0, q.v_edge.1];
        let ch = [-ih1, ih1, 0.0, 0.0];
        let cv = [0.0, 0.0, -ih2, ih2];
        for p in 0..4 {
            for r in 0..4 {
                let v = q.weight
                    * (a.a11 * ch[p] * ch[r] + a.a12 * (ch[p] * cv[r] + cv[p] * ch[r]) + a.a22 * cv[p] * cv[r]);
                if v != 0.0 {
                    t.push((nodes[p], nodes[r], v));
                }
            }
        }
    });
    linalg::from_triplets(n, n, &t)
}

/// `-∫ x_n^s f·∇φ_i` with the quadrant rule; `f1` averaged along horizontal edges, `f2` along vertical ones.
pub(crate) fn flux_load(grid: &Grid, s: f64, f1: &[f64], f2: &[f64]) -> Vec<f64> {
    let mut l = vec![0.0; grid.node_count()];
    let (ih1, ih2) = (1.0 / grid.h1(), 1.0 / grid.h2());
    for_each_quadrant(grid, s, |q| {
        let fh = 0.5 * (f1[q.h_edge.0] + f1[q.h_edge.1]);
        let fv = 0.5 * (f2[q.v_edge.0] + f2[q.v_edge.1]);
        let th = q.weight * fh * ih1;
        let tv = q.weight * fv * ih2;
        l[q.h_edge.0] += th;
        l[q.h_edge.1] -= th;
        l[q.v_edge.0] += tv;
        l[q.v_edge.1] -= tv;
    });
    l
}

/// Load vector over all nodes of a half grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadVector {
    pub grid: Grid,
    pub s: f64,
    pub values: Vec<f64>,
}

impl LoadVector {
    pub fn zeros(grid: Grid, s: f64) -> Self {
        Self { grid, s, values: vec![0.0; grid.node_count()] }
    }

    /// Entries at the non-outer nodes, in operator order.
    pub fn unknowns(&self, op: &WeightedOperator) -> Vec<f64> {
        op.unknowns.iter().map(|&k| self.values[k]).collect()
    }

    pub fn norm(&self, op: &WeightedOperator) -> f64 {
        linalg::norm2(&self.unknowns(op))
    }
}

/// Boundary values indexed by node. Outer nodes and the two planar corners always
/// carry Dirichlet data; the remaining planar values are used only by operators
/// assembled with [`PlanarCondition::Dirichlet`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub grid: Grid,
    values: Vec<f64>,
}

impl BoundaryData {
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.node_count())
            .map(|k| {
                if grid.tag(k) == NodeTag::Interior {
                    0.0
                } else {
                    let (x, y) = grid.coords(k);
                    f(x, y)
                }
            })
            .collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.node_count()] }
    }

    /// Takes the boundary-node values of `f`.
    pub fn from_function(f: &GridFunction) -> Self {
        let grid = f.grid;
        let values = (0..grid.node_count())
            .map(|k| if grid.tag(k) == NodeTag::Interior { 0.0 } else { f.values[k] })
            .collect();
        Self { grid, values }
    }

    #[inline]
    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn outer_values(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.grid.node_count())
            .filter(|&k| self.grid.is_dirichlet(k))
            .map(|k| (k, self.values[k]))
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.outer_values()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, v)| (lo.min(v), hi.max(v)))
    }
}

/// Treatment of the planar row `x_n = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanarCondition {
    /// No condition; the natural (flux) condition of the weak form.
    #[default]
    Natural,
    /// Prescribed values, admissible only for weights that do not degenerate (`s < 1`).
    Dirichlet,
}

/// Stiffness split into unknown and Dirichlet (`fixed`) blocks.
#[derive(Debug, Clone)]
pub struct WeightedOperator {
    pub grid: Grid,
    pub s: f64,
    /// Full stiffness over all nodes.
    pub full: SparseMatrix,
    /// Node index of every unknown.
    pub unknowns: Vec<usize>,
    pub fixed: Vec<usize>,
    pub planar: PlanarCondition,
    /// `K_uu`.
    pub matrix: SparseMatrix,
    /// `K_ub`, the Dirichlet lifting.
    pub lifting: SparseMatrix,
}

impl WeightedOperator {
    pub(crate) fn from_full(grid: Grid, s: f64, full: SparseMatrix, planar: PlanarCondition) -> Self {
        let n = grid.node_count();
        let is_fixed = |k: usize| match planar {
            PlanarCondition::Natural => grid.is_dirichlet(k),
            PlanarCondition::Dirichlet => grid.tag(k) != NodeTag::Interior,
        };
        let mut pos = vec![usize::MAX; n];
        let mut unknowns = Vec::new();
        let mut fixed = Vec::new();
        for k in 0..n {
            if is_fixed(k) {
                pos[k] = fixed.len();
                fixed.push(k);
            } else {
                pos[k] = unknowns.len();
                unknowns.push(k);
            }
        }
        let mut tu = Vec::new();
        let mut tb = Vec::new();
        for (r, &k) in unknowns.iter().enumerate() {
            if let Some(row) = full.outer_view(k) {
                for (c, &v) in row.iter() {
                    if is_fixed(c) {
                        tb.push((r, pos[c], v));
                    } else {
                        tu.push((r, pos[c], v));
                    }
                }
            }
        }
        let matrix = linalg::from_triplets(unknowns.len(), unknowns.len(), &tu);
        let lifting = linalg::from_triplets(unknowns.len(), fixed.len(), &tb);
        Self { grid, s, full, unknowns, fixed, planar, matrix, lifting }
    }

    pub fn unknown_count(&self) -> usize {
        self.unknowns.len()
    }

    /// Writes `K_uu` as `row col value` lines.
    pub fn write_coo(&self, mut out: impl Write) -> Result<()> {
        for (r, row) in self.matrix.outer_iterator().enumerate() {
            for (c, v) in row.iter() {
                writeln!(out, "{r} {c} {v:.17e}")?;
            }
        }
        Ok(())
    }

    /// `(K w + l)` restricted to the unknowns.
    pub fn residual_vector(&self, w: &GridFunction, rhs: &LoadVector) -> Vec<f64> {
        let kw = linalg::mat_vec(&self.full, &w.values);
        self.unknowns.iter().map(|&k| kw[k] + rhs.values[k]).collect()
    }

    /// Discrete `L²` norm of the strong-form residual `(K w + l)_i / |cell_i|` over the unknowns.
    pub fn scaled_residual(&self, w: &GridFunction, rhs: &LoadVector) -> f64 {
        let area = self.grid.dual_areas();
        let r = self.residual_vector(w, rhs);
        self.unknowns.iter().zip(&r).map(|(&k, r)| r * r / area[k]).sum::<f64>().sqrt()
    }

    /// `wᵀ K w`, the discrete `∫ x_n^s ∇wᵀ A ∇w`.
    pub fn energy(&self, w: &GridFunction) -> f64 {
        linalg::dot(&w.values, &linalg::mat_vec(&self.full, &w.values))
    }
}

/// Stiffness operator for `-div(x_n^s A ∇·)` on a half grid.
pub fn assemble_weighted(grid: &Grid, a: &CoefficientField, s: f64) -> Result<WeightedOperator> {
    assemble_weighted_with(grid, a, s, PlanarCondition::Natural)
}

pub fn assemble_weighted_with(
    grid: &Grid,
    a: &CoefficientField,
    s: f64,
    planar: PlanarCondition,
) -> Result<WeightedOperator> {
    if planar == PlanarCondition::Dirichlet && s >= 1.0 {
        return Err(Error::InvalidArgument(format!("planar Dirichlet data cannot be posed for s = {s}")));
    }
    if grid.shape != Shape::Half {
        return Err(Error::InvalidGrid("weighted assembly needs a half grid".into()));
    }
    if a.grid != *grid {
        return Err(Error::ShapeMismatch("coefficient field lives on a different grid".into()));
    }
    grid.check_weight(s)?;
    // re-validate: fields may have been edited after construction
    CoefficientField::new(*grid, a.entries.clone(), a.lambda, a.big_lambda)?;
    Ok(WeightedOperator::from_full(*grid, s, stiffness_matrix(grid, &a.entries, s), planar))
}

/// Load vector `l` of the discrete problem `K w + l = 0`.
pub fn assemble_rhs(grid: &Grid, s: f64, f: &VectorField, g: &GridFunction) -> Result<LoadVector> {
    if grid.shape != Shape::Half {
        return Err(Error::InvalidGrid("weighted assembly needs a half grid".into()));
    }
    if f.grid != *grid || g.grid != *grid {
        return Err(Error::ShapeMismatch("load fields live on a different grid".into()));
    }
    grid.check_weight(s)?;
    let mut values = flux_load(grid, s, &f.f1, &f.f2);
    let wg = grid.node_weights(1.0)?;
    for ((l, w), g) in values.iter_mut().zip(&wg).zip(&g.values) {
        *l += w * g;
    }
    Ok(LoadVector { grid: *grid, s, values })
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub unknowns: usize,
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<f64>,
}

impl From<&CgReport> for SolveReport {
    fn from(r: &CgReport) -> Self {
        Self { unknowns: r.x.len(), iterations: r.iterations, residual: r.residual, history: r.history.clone() }
    }
}

pub fn solve(op: &WeightedOperator, rhs: &LoadVector, bd: &BoundaryData) -> Result<GridFunction> {
    solve_with(op, rhs, bd, &CgOptions::default()).map(|(w, _)| w)
}

/// Solves `K_uu x = -l_u - K_ub w_b` and reassembles the full nodal function.
pub fn solve_with(
    op: &WeightedOperator,
    rhs: &LoadVector,
    bd: &BoundaryData,
    opts: &CgOptions,
) -> Result<(GridFunction, SolveReport)> {
    if rhs.grid != op.grid || bd.grid != op.grid {
        return Err(Error::ShapeMismatch("operator, load and boundary data disagree".into()));
    }
    let wb: Vec<f64> = op.fixed.iter().map(|&k| bd.value(k)).collect();
    let lift = linalg::mat_vec(&op.lifting, &wb);
    let b: Vec<f64> = op.unknowns.iter().zip(&lift).map(|(&k, l)| -rhs.values[k] - l).collect();
    let rep = linalg::conjugate_gradient(&op.matrix, &b, None, opts)?;
    let mut values = vec![0.0; op.grid.node_count()];
    for (&k, &v) in op.fixed.iter().zip(&wb) {
        values[k] = v;
    }
    for (&k, &v) in op.unknowns.iter().zip(&rep.x) {
        values[k] = v;
    }
    let report = SolveReport::from(&rep);
    Ok((GridFunction::new(op.grid, values)?, report))
}

/// Euclidean norm of `K w + l` over the unknown rows, with `w` taking `bd` on the outer nodes.
pub fn residual_norm(op: &WeightedOperator, w: &GridFunction, rhs: &LoadVector, bd: &BoundaryData) -> Result<f64> {
    if w.grid != op.grid || rhs.grid != op.grid || bd.grid != op.grid {
        return Err(Error::ShapeMismatch("operator, function, load and boundary data disagree".into()));
    }
    let mut v = w.values.clone();
    for &k in &op.fixed {
        v[k] = bd.value(k);
    }
    let w = GridFunction { grid: w.grid, values: v };
    Ok(linalg::norm2(&op.residual_vector(&w, rhs)))
}

/// `∫ f² / ∫ x_n² |∇f|²` for `f` with zero outer trace; `None` when the denominator vanishes.
pub fn poincare_ratio(f: &GridFunction) -> Result<Option<f64>> {
    let g = &f.grid;
    if g.shape != Shape::Half {
        return Err(Error::InvalidGrid("Poincaré ratio needs a half grid".into()));
    }
    if let Some(k) = (0..g.node_count()).find(|&k| g.is_dirichlet(k) && f.values[k] != 0.0) {
        return Err(Error::InvalidArgument(format!("nonzero outer trace at node {k}")));
    }
    let mass = crate::grid::integrate_weighted(&f.map(|v| v * v), 0.0)?;
    let energy = crate::grid::weighted_energy(f, 2.0)?;
    Ok((energy > 0.0).then(|| mass / energy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, integrate_weighted};

    fn half(nx: usize, ny: usize) -> Grid {
        build_grid(Shape::Half, nx, ny).unwrap()
    }

    fn op(g: &Grid, s: f64) -> WeightedOperator {
        assemble_weighted(g, &CoefficientField::identity(*g), s).unwrap()
    }

    #[test]
    fn unweighted_identity_gives_five_point_rows() {
        let g = half(6, 6);
        let o = op(&g, 0.0);
        let (h1, h2) = (g.h1(), g.h2());
        let k = g.index(3, 3);
        assert!((o.full.get(k, k).unwrap() - (2.0 * h2 / h1 + 2.0 * h1 / h2)).abs() < 1e-12);
        assert!((o.full.get(k, k + 1).unwrap() + h2 / h1).abs() < 1e-12);
        assert!((o.full.get(k, g.index(3, 4)).unwrap() + h1 / h2).abs() < 1e-12);
        assert!(o.full.get(k, g.index(4, 4)).is_none());
        assert_eq!(o.full.outer_view(k).unwrap().nnz(), 5);
    }

    #[test]
    fn mixed_coefficients_give_nine_points() {
        let g = half(6, 6);
        let a = CoefficientField::from_fn(g, 0.5, 2.0, |_, _| Sym2::new(1.2, 0.3, 0.9)).unwrap();
        let o = assemble_weighted(&g, &a, 2.0).unwrap();
        assert_eq!(o.full.outer_view(g.index(3, 3)).unwrap().nnz(), 9);
        assert!(linalg::symmetry_defect(&o.full) <= 1e-12);
    }

    #[test]
    fn weighted_matrix_is_symmetric() {
        let g = half(4, 4);
        let o = op(&g, 2.0);
        assert!(linalg::symmetry_defect(&o.full) <= 1e-12);
        assert!(linalg::symmetry_defect(&o.matrix) <= 1e-12);
        assert_eq!(o.unknown_count(), g.node_count() - g.count_tag(NodeTag::Outer) - 2);
    }

    #[test]
    fn rejects_full_grids_and_bad_coefficients() {
        let f = build_grid(Shape::Full, 4, 4).unwrap();
        assert!(assemble_weighted(&f, &CoefficientField::identity(f), 0.0).is_err());
        let g = half(4, 4);
        let err = CoefficientField::from_fn(g, 0.5, 2.0, |x, _| Sym2::new(1.0 + 2.0 * x.max(0.0), 0.0, 1.0));
        assert!(matches!(err, Err(Error::Ellipticity { .. })));
    }

    #[test]
    fn vertically_constant_linear_is_exact() {
        let g = half(8, 6);
        let o = op(&g, 2.0);
        let w = GridFunction::from_fn(g, |x, _| x);
        let r = o.residual_vector(&w, &LoadVector::zeros(g, 2.0));
        assert!(r.iter().all(|v| v.abs() <= 1e-12), "{r:?}");
    }

    #[test]
    fn zero_load() {
        let g = half(5, 4);
        let l = assemble_rhs(&g, 2.0, &VectorField::zeros(g), &GridFunction::zeros(g)).unwrap();
        assert!(l.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn source_load_integrates_xn() {
        for (nx, ny) in [(4, 2), (9, 7), (32, 16)] {
            let g = half(nx, ny);
            let one = GridFunction::from_fn(g, |_, _| 1.0);
            let l = assemble_rhs(&g, 2.0, &VectorField::zeros(g), &one).unwrap();
            let total: f64 = l.values.iter().sum();
            assert!((total - 1.0).abs() <= 1e-12);
            // entries are ∫ x_n φ_i
            let w = g.node_weights(1.0).unwrap();
            assert_eq!(l.values, w);
        }
    }

    #[test]
    fn flux_load_telescopes() {
        let g = half(8, 4);
        let o = op(&g, 0.0);
        let f = VectorField::from_fn(g, |_, _| [1.0, 0.0]);
        let l = assemble_rhs(&g, 0.0, &f, &GridFunction::zeros(g)).unwrap();
        let all: f64 = l.values.iter().sum();
        let unknown: f64 = l.unknowns(&o).iter().sum();
        assert!(all.abs() < 1e-14);
        assert!(unknown.abs() < 1e-14, "horizontal field: side fluxes cancel");
        // vertical unit field: the unknown rows see the flux through the top only
        let f = VectorField::from_fn(g, |_, _| [0.0, 1.0]);
        let l = assemble_rhs(&g, 0.0, &f, &GridFunction::zeros(g)).unwrap();
        let unknown: f64 = l.unknowns(&o).iter().sum();
        let outer: f64 = o.fixed.iter().map(|&k| l.values[k]).sum();
        assert!((unknown + outer).abs() < 1e-14);
        // top edge of the interior columns only
        let expected = 2.0 - g.h1();
        assert!((unknown - expected).abs() < 1e-13, "{unknown}");
    }

    #[test]
    fn constant_and_linear_data_are_reproduced() {
        let g = half(16, 8);
        let o = op(&g, 2.0);
        let zero = LoadVector::zeros(g, 2.0);
        let w = solve(&o, &zero, &BoundaryData::from_fn(g, |_, _| 1.0)).unwrap();
        assert!(w.values.iter().all(|v| (v - 1.0).abs() < 1e-9));
        let w = solve(&o, &zero, &BoundaryData::from_fn(g, |x, _| x)).unwrap();
        for k in 0..g.node_count() {
            assert!((w.values[k] - g.coords(k).0).abs() < 1e-9);
        }
    }

    fn quad(x: f64, y: f64) -> f64 {
        3.0 * x * x - y * y
    }

    #[test]
    fn quadratic_solution_converges() {
        let mut errs = Vec::new();
        for n in [16, 32, 64] {
            let g = half(2 * n, n);
            let o = op(&g, 2.0);
            let w = solve(&o, &LoadVector::zeros(g, 2.0), &BoundaryData::from_fn(g, quad)).unwrap();
            let exact = GridFunction::from_fn(g, quad);
            let e = w.zip_with(&exact, |a, b| (a - b).powi(2)).unwrap();
            errs.push(integrate_weighted(&e, 0.0).unwrap().sqrt());
        }
        for p in errs.windows(2) {
            assert!((p[0] / p[1]).log2() > 1.8, "{errs:?}");
        }
    }

    #[test]
    fn residual_of_solution_and_perturbation() {
        let g = half(12, 6);
        let o = op(&g, 2.0);
        let rhs = assemble_rhs(&g, 2.0, &VectorField::zeros(g), &GridFunction::from_fn(g, |x, _| x.cos())).unwrap();
        let bd = BoundaryData::from_fn(g, |x, y| x * y);
        let w = solve(&o, &rhs, &bd).unwrap();
        let r = residual_norm(&o, &w, &rhs, &bd).unwrap();
        assert!(r <= 1e-10 * rhs.norm(&o) + 1e-12 + 1e-10 * linalg::norm2(&linalg::mat_vec(&o.lifting, &o.fixed.iter().map(|&k| bd.value(k)).collect::<Vec<_>>())));
        let k = g.index(5, 3);
        let mut p = w.clone();
        p.values[k] += 1.0;
        let rp = residual_norm(&o, &p, &rhs, &bd).unwrap();
        let col: f64 = o.unknowns.iter().map(|&u| o.full.get(u, k).copied().unwrap_or(0.0).powi(2)).sum::<f64>().sqrt();
        assert!((rp - col).abs() <= 1e-8 * col, "{rp} vs {col}");
    }

    #[test]
    fn energy_matches_boundary_pairing() {
        let g = half(20, 10);
        let a = CoefficientField::from_fn(g, 0.5, 3.0, |x, y| Sym2::new(1.5 + 0.5 * x, 0.2 * y, 1.0 + y)).unwrap();
        let o = assemble_weighted(&g, &a, 2.0).unwrap();
        let bd = BoundaryData::from_fn(g, |x, y| (2.0 * x).sin() + y);
        let w = solve(&o, &LoadVector::zeros(g, 2.0), &bd).unwrap();
        let kw = linalg::mat_vec(&o.full, &w.values);
        let pairing: f64 = o.fixed.iter().map(|&k| w.values[k] * kw[k]).sum();
        let e = o.energy(&w);
        assert!((e - pairing).abs() <= 1e-8 * e.abs());
    }

    #[test]
    fn maximum_principle_surrogate() {
        let g = half(16, 8);
        let o = op(&g, 2.0);
        let bd = BoundaryData::from_fn(g, |x, y| (3.0 * x).cos() * (1.0 + y));
        let w = solve(&o, &LoadVector::zeros(g, 2.0), &bd).unwrap();
        let (lo, hi) = bd.min_max();
        assert!(w.values.iter().all(|&v| v >= lo - 1e-8 && v <= hi + 1e-8));
    }

    #[test]
    fn forced_iteration_cap_fails() {
        let g = half(8, 4);
        let o = op(&g, 2.0);
        let opts = CgOptions { max_iter: Some(1), ..Default::default() };
        let r = solve_with(&o, &LoadVector::zeros(g, 2.0), &BoundaryData::from_fn(g, quad), &opts);
        assert!(matches!(r, Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn poincare_examples() {
        let g = half(64, 32);
        let f = GridFunction::from_fn(g, |x, y| y * (1.0 - y) * (1.0 - x * x));
        let r = poincare_ratio(&f).unwrap().unwrap();
        assert!(r <= 4.0 * 1.05, "{r}");
        assert_eq!(poincare_ratio(&GridFunction::zeros(g)).unwrap(), None);
        assert!(poincare_ratio(&GridFunction::from_fn(g, |_, _| 1.0)).is_err());
    }

    #[test]
    fn coo_export_lists_entries() {
        let g = half(2, 2);
        let o = op(&g, 0.0);
        let mut buf = Vec::new();
        o.write_coo(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), o.matrix.nnz());
    }

    #[test]
    fn congruence_matches_product() {
        let s = Sym2::new(2.0, 0.5, 1.0);
        let j = [[1.0, 0.0], [-0.3, 1.0]];
        let r = s.congruence(j);
        // J S Jᵀ by hand
        assert!((r.a11 - 2.0).abs() < 1e-15);
        assert!((r.a12 - (-0.6 + 0.5)).abs() < 1e-15);
        assert!((r.a22 - (0.18 - 0.3 + 1.0)).abs() < 1e-15);
    }
}
