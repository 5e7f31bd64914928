// SPDX-License-Identifier: Apache-2.0

//! Truncated power series with coefficients in `[0, +∞]` and the majorant calculus:
//! the order `≪`, sums, Cauchy products, integration, composition, closed-form
//! families, the majorant ODE recurrence and radius estimation.
//!
//! Coefficients are raw Taylor coefficients `a_k = P^{(k)} / k!`. The arithmetic is
//! generic over [`Coefficient`], implemented for `f64` and exact [`BigRational`].

mod closed_form;
mod ode;
mod radius;
mod series;

pub use closed_form::{recenter, ClosedFormMajorant};
pub use ode::{ode_solve, Expr};
pub use radius::{radius_estimate, RadiusMethod, RADIUS_SENTINEL};
pub use series::{
    add, composition_majorant, compose, integrate_rule, majorizes, mul, CompositionBound, MajorantSeries, SeriesJson,
};

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, ToPrimitive};
use serde_json::Value;

use crate::error::{Error, Result};

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 32;

pub type Series = MajorantSeries<f64>;
pub type ExactSeries = MajorantSeries<BigRational>;

/// Scalar field for series coefficients.
pub trait Coefficient: Num + Clone + PartialOrd + FromPrimitive + ToPrimitive + fmt::Debug + fmt::Display {
    /// True when arithmetic is exact.
    const EXACT: bool;

    fn to_json(&self) -> Value;

    fn from_json(v: &Value) -> Result<Self>;

    /// Converts a binary64 parameter; exact for rationals.
    fn from_param(x: f64) -> Result<Self> {
        Self::from_f64(x).ok_or_else(|| Error::InvalidArgument(format!("cannot represent {x}")))
    }
}

impl Coefficient for f64 {
    const EXACT: bool = false;

    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self).map(Value::Number).unwrap_or(Value::Null)
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => n.as_f64().ok_or_else(|| Error::InvalidArgument(format!("bad number {n}"))),
            Value::String(s) => {
                if let Ok(r) = BigRational::from_str(s) {
                    return r.to_f64().ok_or_else(|| Error::InvalidArgument(format!("bad coefficient {s}")));
                }
                s.parse().map_err(|_| Error::InvalidArgument(format!("bad coefficient {s:?}")))
            }
            other => Err(Error::InvalidArgument(format!("bad coefficient {other}"))),
        }
    }
}

impl Coefficient for BigRational {
    const EXACT: bool = true;

    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => n
                .as_f64()
                .and_then(BigRational::from_float)
                .ok_or_else(|| Error::InvalidArgument(format!("bad number {n}"))),
            Value::String(s) => BigRational::from_str(s).map_err(|_| Error::InvalidArgument(format!("bad rational {s:?}"))),
            other => Err(Error::InvalidArgument(format!("bad coefficient {other}"))),
        }
    }
}

/// A coefficient in `[0, +∞]`. `Fin` values order below `Inf`.
#[derive(Debug, Clone, PartialEq, PartialOrd)]
pub enum Extended<T> {
    Fin(T),
    Inf,
}

impl<T: Coefficient> Extended<T> {
    pub fn zero() -> Self {
        Extended::Fin(T::zero())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Extended::Fin(v) if v.is_zero())
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, Extended::Inf)
    }

    pub fn finite(&self) -> Option<&T> {
        match self {
            Extended::Fin(v) => Some(v),
            Extended::Inf => None,
        }
    }

    /// `∞ + x = ∞`.
    pub fn add(&self, o: &Self) -> Self {
        match (self, o) {
            (Extended::Fin(a), Extended::Fin(b)) => Extended::Fin(a.clone() + b.clone()),
            _ => Extended::Inf,
        }
    }

    /// `0 · ∞ = 0`, `x · ∞ = ∞` for `x > 0`.
    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        match (self, o) {
            (Extended::Fin(a), Extended::Fin(b)) => Extended::Fin(a.clone() * b.clone()),
            _ => Extended::Inf,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Extended::Fin(v) => v.to_f64().unwrap_or(f64::NAN),
            Extended::Inf => f64::INFINITY,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Extended::Fin(v) => v.to_json(),
            Extended::Inf => Value::String("inf".into()),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        if v.as_str() == Some("inf") {
            return Ok(Extended::Inf);
        }
        let x = T::from_json(v)?;
        if !(x >= T::zero()) {
            return Err(Error::InvalidArgument(format!("coefficient {x} is not in [0, inf]")));
        }
        Ok(Extended::Fin(x))
    }
}

impl<T: fmt::Display> fmt::Display for Extended<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Fin(v) => v.fmt(f),
            Extended::Inf => f.write_str("inf"),
        }
    }
}

impl<T> From<T> for Extended<T> {
    fn from(v: T) -> Self {
        Extended::Fin(v)
    }
}
