// SPDX-License-Identifier: Apache-2.0

//! Numerical laboratory for degenerate elliptic equations on half domains, obstacle
//! free boundaries, boundary Harnack quotients and majorant power series.

pub mod error;
pub mod grid;
pub mod harnack;
pub mod linalg;
pub mod majorant;
pub mod obstacle;
pub mod spline;
pub mod straighten;
pub mod weighted;

pub use error::{Error, Result};
pub use grid::{build_grid, integrate_weighted, weighted_h1_seminorm, Grid, GridFunction, NodeTag, Rect, Shape};
pub use harnack::{
    analyticity_scan, build_ratio_system, campanato_scan, global_norm_coeff, holder_seminorm, hopf_floor, ratio,
    ratio_residual, AnalyticityReport, CampanatoMode, CampanatoParams, CampanatoReport, GlobalNormSpec, RatioSystemFields,
};
pub use linalg::CgOptions;
pub use majorant::{
    ode_solve, radius_estimate, ClosedFormMajorant, Coefficient, ExactSeries, Expr, Extended, MajorantSeries, RadiusMethod,
    Series,
};
pub use weighted::{
    assemble_rhs, assemble_weighted, assemble_weighted_with, poincare_ratio, residual_norm, solve, solve_with, BoundaryData, CoefficientField,
    LoadVector, PlanarCondition, SolveReport, Sym2, VectorField, WeightedOperator,
};
pub use obstacle::{
    blowup_check, extract_free_boundary, solve_obstacle, FreeBoundaryCurve, GraphAxis, ObstacleOptions,
    ObstacleSolution, RegularPointReport, Verdict,
};
pub use spline::CubicSpline;
pub use straighten::{
    jacobians, pullback_function, transform_coefficients, transform_rhs, CoefficientSource, CurveKind, CurveModel,
};
