// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ellipticity violated at node {node}: eigenvalues ({min_eig:.3e}, {max_eig:.3e}) outside [{lambda:.3e}, {big_lambda:.3e}]")]
    Ellipticity {
        node: usize,
        min_eig: f64,
        max_eig: f64,
        lambda: f64,
        big_lambda: f64,
    },

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("no free boundary: active set is {0}")]
    NoFreeBoundary(&'static str),

    #[error("free boundary is not a graph: column at {coord:.6} has {crossings} separated crossings")]
    NonGraph { coord: f64, crossings: usize },

    #[error("Hopf floor {floor:.3e} below required {required:.3e}")]
    FloorViolation { floor: f64, required: f64 },

    #[error("evaluation point ({0:.6}, {1:.6}) outside the domain")]
    OutOfDomain(f64, f64),

    #[error("scale {scale} of size {size:.3e} underflows grid resolution {h:.3e}")]
    ScaleUnderflow { scale: usize, size: f64, h: f64 },

    #[error("infinite coefficient at order {order}")]
    InfiniteCoefficient { order: usize },

    #[error("too few usable coefficients: need {needed}, found {found}")]
    TooFewCoefficients { needed: usize, found: usize },

    #[error("inner series has nonzero constant term")]
    NonzeroConstantTerm,

    #[error("recentering at {a} reaches the pole at {radius}")]
    PastPole { a: f64, radius: f64 },

    #[error("exact arithmetic cannot represent {0}")]
    Inexact(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
