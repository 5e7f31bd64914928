// SPDX-License-Identifier: Apache-2.0

//! Built-in closed forms named by identifiers such as `"radial_obstacle(0.4)"`.

use anyhow::{anyhow, bail, Result};
use harnack_core::obstacle::{half_plane_profile, radial_profile};
use harnack_core::{CurveKind, CurveModel, Sym2};

/// Splits `name(a, b)` into the name and its numeric arguments.
fn split(id: &str) -> Result<(String, Vec<f64>)> {
    let id = id.trim();
    let Some(open) = id.find('(') else {
        return Ok((id.to_string(), Vec::new()));
    };
    let inner = id[open + 1..].strip_suffix(')').ok_or_else(|| anyhow!("unbalanced parentheses in {id:?}"))?;
    let args = inner
        .split(',')
        .map(|a| a.trim().parse::<f64>().map_err(|_| anyhow!("bad argument {a:?} in {id:?}")))
        .collect::<Result<Vec<f64>>>()?;
    Ok((id[..open].trim().to_string(), args))
}

fn arity(id: &str, args: &[f64], n: usize) -> Result<()> {
    if args.len() != n {
        bail!("{id:?} takes {n} argument(s), got {}", args.len());
    }
    Ok(())
}

pub type Scalar = Box<dyn Fn(f64, f64) -> f64>;

/// Scalar functions of `(x_1, x_n)`.
pub fn scalar(id: &str) -> Result<Scalar> {
    let (name, a) = split(id)?;
    let f: Scalar = match name.as_str() {
        "zero" => {
            arity(id, &a, 0)?;
            Box::new(|_, _| 0.0)
        }
        "constant" => {
            arity(id, &a, 1)?;
            let c = a[0];
            Box::new(move |_, _| c)
        }
        "x1" => {
            arity(id, &a, 0)?;
            Box::new(|x, _| x)
        }
        "xn" => {
            arity(id, &a, 0)?;
            Box::new(|_, y| y)
        }
        "degenerate_quadratic" => {
            arity(id, &a, 0)?;
            Box::new(|x, y| 3.0 * x * x - y * y)
        }
        "harmonic_re_z2" => {
            arity(id, &a, 0)?;
            Box::new(|x, y| x * x - y * y)
        }
        "harmonic_im_z2" => {
            arity(id, &a, 0)?;
            Box::new(|x, y| 2.0 * x * y)
        }
        "exp_sin" => {
            arity(id, &a, 0)?;
            Box::new(|x, y| x.exp() * y.sin())
        }
        "radial_obstacle" => {
            arity(id, &a, 1)?;
            let r = a[0];
            if !(r > 0.0) {
                bail!("radial_obstacle radius must be positive");
            }
            Box::new(move |x, y| radial_profile(r, x, y))
        }
        "half_plane" => {
            arity(id, &a, 2)?;
            let n = a[0].hypot(a[1]);
            if !(n > 0.0) {
                bail!("half_plane direction must be nonzero");
            }
            let e = [a[0] / n, a[1] / n];
            Box::new(move |x, y| half_plane_profile(e, x, y))
        }
        "abs_power" => {
            arity(id, &a, 1)?;
            let p = a[0];
            Box::new(move |x, _| x.abs().powf(p))
        }
        _ => bail!("unknown function identifier {id:?}"),
    };
    Ok(f)
}

pub type Matrix = Box<dyn Fn(f64, f64) -> Sym2>;

/// Coefficient matrices with their ellipticity bounds `(λ, Λ)`.
pub fn coefficients(id: &str) -> Result<(Matrix, f64, f64)> {
    let (name, a) = split(id)?;
    match name.as_str() {
        "identity" => {
            arity(id, &a, 0)?;
            Ok((Box::new(|_, _| Sym2::IDENTITY), 1.0, 1.0))
        }
        "constant" => {
            arity(id, &a, 3)?;
            let m = Sym2::new(a[0], a[1], a[2]);
            let (lo, hi) = m.eigenvalues();
            if !(lo > 0.0) {
                bail!("constant coefficients {id:?} are not positive definite");
            }
            Ok((Box::new(move |_, _| m), lo, hi))
        }
        "sine_perturbation" => {
            arity(id, &a, 1)?;
            let eps = a[0];
            if !(eps.abs() < 1.0) {
                bail!("sine_perturbation needs |eps| < 1");
            }
            Ok((Box::new(move |_, y| Sym2::new(1.0 + eps * y.sin(), 0.0, 1.0)), 1.0 - eps.abs(), 1.0 + eps.abs()))
        }
        _ => bail!("unknown coefficient identifier {id:?}"),
    }
}

/// Curves `x_n = Γ(x_1)`.
pub fn curve(id: &str) -> Result<CurveModel> {
    let (name, a) = split(id)?;
    let kind = match name.as_str() {
        "flat" => {
            arity(id, &a, 0)?;
            CurveKind::Zero
        }
        "linear" => {
            arity(id, &a, 1)?;
            CurveKind::Linear { c: a[0] }
        }
        "sine" => {
            arity(id, &a, 2)?;
            CurveKind::Sine { amp: a[0], omega: a[1] }
        }
        "geometric" => {
            arity(id, &a, 2)?;
            CurveKind::Geometric { c: a[0], r: a[1] }
        }
        _ => bail!("unknown curve identifier {id:?}"),
    };
    Ok(CurveModel::new(kind))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identifiers_parse() {
        assert_eq!(scalar("harmonic_im_z2").unwrap()(0.5, 2.0), 2.0);
        assert_eq!(scalar(" constant( 2.5 ) ").unwrap()(0.0, 0.0), 2.5);
        assert!(scalar("radial_obstacle(0.4)").unwrap()(0.0, 0.0) == 0.0);
        assert!(scalar("radial_obstacle").is_err());
        assert!(scalar("psi").is_err());
        assert!(scalar("constant(x)").is_err());
        let (m, lo, _) = coefficients("constant(2, 0, 1)").unwrap();
        assert_eq!(m(0.0, 0.0), Sym2::new(2.0, 0.0, 1.0));
        assert!((lo - 1.0).abs() < 1e-12);
        assert!(coefficients("constant(1, 2, 1)").is_err());
        assert!((curve("sine(0.1, 3.14)").unwrap().eval(0.5) - 0.1 * (1.57f64).sin()).abs() < 1e-12);
    }
}
