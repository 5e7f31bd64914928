// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Coefficient, Extended};
use crate::error::{Error, Result};

/// `Σ_{k <= N} a_k t^k` with `a_k ∈ [0, +∞]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorantSeries<T> {
    coeffs: Vec<Extended<T>>,
}

/// JSON form `{"N": .., "coeffs": [..]}` with `"inf"` for infinite coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub coeffs: Vec<Value>,
}

impl<T: Coefficient> MajorantSeries<T> {
    /// Checks `N >= 1` and `a_k >= 0`; infinite floats become `Inf`.
    pub fn new(coeffs: Vec<Extended<T>>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidArgument(format!("series needs order >= 1, got {} coefficients", coeffs.len())));
        }
        let mut out = Vec::with_capacity(coeffs.len());
        for c in coeffs {
            out.push(match c {
                Extended::Fin(v) if v.to_f64() == Some(f64::INFINITY) && !T::EXACT => Extended::Inf,
                Extended::Fin(v) if !(v >= T::zero()) => {
                    return Err(Error::InvalidArgument(format!("coefficient {v} is not in [0, inf]")))
                }
                c => c,
            });
        }
        Ok(Self { coeffs: out })
    }

    pub fn from_finite(coeffs: Vec<T>) -> Result<Self> {
        Self::new(coeffs.into_iter().map(Extended::Fin).collect())
    }

    /// Builds from binary64 values, `f64::INFINITY` meaning `∞` (exact for rationals).
    pub fn from_f64s(values: &[f64]) -> Result<Self> {
        let c = values
            .iter()
            .map(|&v| if v == f64::INFINITY { Ok(Extended::Inf) } else { T::from_param(v).map(Extended::Fin) })
            .collect::<Result<Vec<_>>>()?;
        Self::new(c)
    }

    pub fn zero(order: usize) -> Self {
        Self { coeffs: vec![Extended::zero(); order.max(1) + 1] }
    }

    /// The constant `c`.
    pub fn constant(c: Extended<T>, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// The series `t`.
    pub fn identity(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[1] = Extended::Fin(T::one());
        s
    }

    /// `e^t`, coefficients `1 / k!`.
    pub fn exp(order: usize) -> Self {
        let mut c = Vec::with_capacity(order + 1);
        let mut v = T::one();
        for k in 0..=order.max(1) {
            if k > 0 {
                v = v / T::from_usize(k).expect("small integer");
            }
            c.push(Extended::Fin(v.clone()));
        }
        Self { coeffs: c }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Extended<T>] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &Extended<T> {
        &self.coeffs[k]
    }

    pub fn into_coeffs(self) -> Vec<Extended<T>> {
        self.coeffs
    }

    /// Truncates or zero-pads to order `n`.
    pub fn with_order(&self, n: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(n.max(1) + 1, Extended::zero());
        Self { coeffs: c }
    }

    pub fn to_f64s(&self) -> Vec<f64> {
        self.coeffs.iter().map(Extended::to_f64).collect()
    }

    /// Series without its constant term.
    pub fn drop_constant(&self) -> Self {
        let mut s = self.clone();
        s.coeffs[0] = Extended::zero();
        s
    }

    pub fn scale(&self, c: &Extended<T>) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| c.mul(a)).collect() }
    }

    /// First order carrying `∞`.
    pub fn first_infinite(&self) -> Option<usize> {
        self.coeffs.iter().position(Extended::is_inf)
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson { n: self.order(), coeffs: self.coeffs.iter().map(Extended::to_json).collect() }
    }

    pub fn from_json(j: &SeriesJson) -> Result<Self> {
        if j.coeffs.len() != j.n + 1 {
            return Err(Error::InvalidArgument(format!("N = {} but {} coefficients", j.n, j.coeffs.len())));
        }
        Self::new(j.coeffs.iter().map(Extended::from_json).collect::<Result<_>>()?)
    }

    /// Writes `k,a_k,a_k_times_kfact` rows.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "a_k", "a_k_times_kfact"])?;
        let mut fact = Extended::Fin(T::one());
        for (k, a) in self.coeffs.iter().enumerate() {
            if k > 0 {
                fact = fact.mul(&Extended::Fin(T::from_usize(k).expect("small integer")));
            }
            w.write_record([k.to_string(), a.to_string(), a.mul(&fact).to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Coefficient-wise sum, truncated to the common order.
pub fn add<T: Coefficient>(f: &MajorantSeries<T>, g: &MajorantSeries<T>) -> MajorantSeries<T> {
    let n = f.order().min(g.order());
    MajorantSeries { coeffs: (0..=n).map(|k| f.coeffs[k].add(&g.coeffs[k])).collect() }
}

/// Truncated Cauchy product, `0 · ∞ = 0`.
pub fn mul<T: Coefficient>(f: &MajorantSeries<T>, g: &MajorantSeries<T>) -> MajorantSeries<T> {
    let n = f.order().min(g.order());
    let coeffs = (0..=n)
        .map(|k| {
            let mut acc = Extended::zero();
            for j in 0..=k {
                acc = acc.add(&f.coeffs[j].mul(&g.coeffs[k - j]));
            }
            acc
        })
        .collect();
    MajorantSeries { coeffs }
}

/// `f ≪ g`: `f_k <= g_k` for every `k`, with `∞` dominating.
pub fn majorizes<T: Coefficient>(g: &MajorantSeries<T>, f: &MajorantSeries<T>) -> Result<bool> {
    if f.order() != g.order() {
        return Err(Error::InvalidArgument(format!("truncation orders differ: {} vs {}", f.order(), g.order())));
    }
    Ok(f.coeffs.iter().zip(&g.coeffs).all(|(a, b)| a <= b))
}

/// `t g(t) + C`.
pub fn integrate_rule<T: Coefficient>(g: &MajorantSeries<T>, c: Extended<T>) -> MajorantSeries<T> {
    let mut coeffs = Vec::with_capacity(g.coeffs.len());
    coeffs.push(c);
    coeffs.extend(g.coeffs[..g.order()].iter().cloned());
    MajorantSeries { coeffs }
}

/// `g ∘ f` by Horner substitution; needs `f_0 = 0`.
pub fn compose<T: Coefficient>(g: &MajorantSeries<T>, f: &MajorantSeries<T>) -> Result<MajorantSeries<T>> {
    if !f.coeffs[0].is_zero() {
        return Err(Error::NonzeroConstantTerm);
    }
    let n = f.order().min(g.order());
    let f = f.with_order(n);
    let mut acc = MajorantSeries::constant(g.coeffs[n].clone(), n);
    for j in (0..n).rev() {
        acc = mul(&acc, &f);
        acc.coeffs[0] = acc.coeffs[0].add(&g.coeffs[j]);
    }
    Ok(acc)
}

/// `2 ḡ ∘ P` together with whether the `[f]_{C¹} <= 2` hypothesis behind the factor holds.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionBound<T> {
    pub series: MajorantSeries<T>,
    pub hypothesis_holds: bool,
}

/// Majorant of a composition `g ∘ f` from a caller-supplied majorant `ḡ` of `g` and
/// the majorant `P` of `f` (constant term dropped). `c1_seminorm` is `[f]_{C¹}`; it
/// is only compared against 2, not verified.
pub fn composition_majorant<T: Coefficient>(
    gbar: &MajorantSeries<T>,
    p: &MajorantSeries<T>,
    c1_seminorm: f64,
) -> Result<CompositionBound<T>> {
    let two = Extended::Fin(T::one() + T::one());
    let series = compose(gbar, &p.drop_constant())?.scale(&two);
    Ok(CompositionBound { series, hypothesis_holds: c1_seminorm <= 2.0 })
}
