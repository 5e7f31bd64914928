// SPDX-License-Identifier: Apache-2.0

//! Sparse helpers and the conjugate-gradient solver.

use serde::Serialize;
use sprs::{CsMat, TriMat};

use crate::error::{Error, Result};

pub type SparseMatrix = CsMat<f64>;

/// `y = A x` for a CSR matrix.
pub fn spmv(a: &SparseMatrix, x: &[f64], y: &mut [f64]) {
    for (row, vec) in a.outer_iterator().enumerate() {
        let mut acc = 0.0;
        for (col, &v) in vec.iter() {
            acc += v * x[col];
        }
        y[row] = acc;
    }
}

pub fn mat_vec(a: &SparseMatrix, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.rows()];
    spmv(a, x, &mut y);
    y
}

pub fn diagonal(a: &SparseMatrix) -> Vec<f64> {
    let mut d = vec![0.0; a.rows()];
    for (row, vec) in a.outer_iterator().enumerate() {
        d[row] = vec.get(row).copied().unwrap_or(0.0);
    }
    d
}

/// Largest `|A_ij - A_ji|` relative to the largest entry.
pub fn symmetry_defect(a: &SparseMatrix) -> f64 {
    let mut scale: f64 = 0.0;
    let mut defect: f64 = 0.0;
    for (row, vec) in a.outer_iterator().enumerate() {
        for (col, &v) in vec.iter() {
            scale = scale.max(v.abs());
            let t = a.get(col, row).copied().unwrap_or(0.0);
            defect = defect.max((v - t).abs());
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        defect / scale
    }
}

pub(crate) fn from_triplets(rows: usize, cols: usize, t: &[(usize, usize, f64)]) -> SparseMatrix {
    let mut tri = TriMat::with_capacity((rows, cols), t.len());
    for &(r, c, v) in t {
        if v != 0.0 {
            tri.add_triplet(r, c, v);
        }
    }
    tri.to_csr()
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    pub tol: f64,
    /// Defaults to `20 * n` when `None`.
    pub max_iter: Option<usize>,
    pub jacobi: bool,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: None, jacobi: false }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CgReport {
    #[serde(skip)]
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final `‖b - A x‖ / ‖b‖`.
    pub residual: f64,
    pub history: Vec<f64>,
}

/// Conjugate gradients for symmetric positive definite `A`, stopping at relative residual `tol`.
pub fn conjugate_gradient(a: &SparseMatrix, b: &[f64], x0: Option<&[f64]>, opts: &CgOptions) -> Result<CgReport> {
    let n = b.len();
    if a.rows() != n || a.cols() != n {
        return Err(Error::ShapeMismatch(format!("matrix {}x{} vs rhs {}", a.rows(), a.cols(), n)));
    }
    let max_iter = opts.max_iter.unwrap_or(20 * n.max(1));
    let mut x = match x0 {
        Some(x0) => x0.to_vec(),
        None => vec![0.0; n],
    };
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(CgReport { x: vec![0.0; n], iterations: 0, residual: 0.0, history: vec![0.0] });
    }
    let inv_diag: Option<Vec<f64>> = opts
        .jacobi
        .then(|| diagonal(a).into_iter().map(|d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect());
    let precond = |r: &[f64], z: &mut [f64]| match &inv_diag {
        Some(m) => z.iter_mut().zip(r).zip(m).for_each(|((z, r), m)| *z = r * m),
        None => z.copy_from_slice(r),
    };

    let mut ax = vec![0.0; n];
    spmv(a, &x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut history = vec![norm2(&r) / bnorm];

    for it in 0..max_iter {
        let rel = *history.last().unwrap();
        if rel <= opts.tol {
            return Ok(CgReport { x, iterations: it, residual: rel, history });
        }
        spmv(a, &p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        history.push(norm2(&r) / bnorm);
    }
    // The recursive residual drifts; confirm with a true residual before giving up.
    spmv(a, &x, &mut ax);
    let true_rel = b.iter().zip(&ax).map(|(b, ax)| (b - ax).powi(2)).sum::<f64>().sqrt() / bnorm;
    if true_rel <= opts.tol {
        return Ok(CgReport { x, iterations: history.len() - 1, residual: true_rel, history });
    }
    Err(Error::NoConvergence { iterations: history.len() - 1, residual: true_rel, history })
}
