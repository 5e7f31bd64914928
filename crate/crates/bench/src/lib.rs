// SPDX-License-Identifier: Apache-2.0

//! Problem fixtures shared by the benchmarks.

use harnack_core::*;

/// Weighted operator and data for `3x² − y²` with `s = 2` on an `n × n/2` half grid.
pub fn weighted_problem(n: usize) -> (WeightedOperator, LoadVector, BoundaryData) {
    let g = build_grid(Shape::Half, n, n / 2).expect("grid");
    let op = assemble_weighted(&g, &CoefficientField::identity(g), 2.0).expect("assembly");
    let bd = BoundaryData::from_fn(g, |x, y| 3.0 * x * x - y * y);
    (op, LoadVector::zeros(g, 2.0), bd)
}

/// Radial obstacle data with radius `0.4` on an `n × n` full grid.
pub fn radial_obstacle(n: usize) -> (Grid, CoefficientField, BoundaryData) {
    let g = build_grid(Shape::Full, n, n).expect("grid");
    let bd = BoundaryData::from_fn(g, |x, y| obstacle::radial_profile(0.4, x, y));
    (g, CoefficientField::identity(g), bd)
}
