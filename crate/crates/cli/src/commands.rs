// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use harnack_core::majorant::SeriesJson;
use harnack_core::straighten::IdentityCoefficient;
use harnack_core::*;
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::config::*;
use crate::names;

/// A failed run: exit code, error kind and message.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
    /// Series order at which a majorant computation broke down.
    pub order: Option<usize>,
}

pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;
pub const EXIT_HYPOTHESIS: u8 = 3;

impl Failure {
    pub fn config(message: impl ToString) -> Self {
        Self { code: EXIT_CONFIG, kind: "config", message: message.to_string(), order: None }
    }

    pub fn hypothesis(message: impl ToString) -> Self {
        Self { code: EXIT_HYPOTHESIS, kind: "hypothesis", message: message.to_string(), order: None }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({ "kind": self.kind, "message": self.message, "exit_code": self.code });
        if let Some(k) = self.order {
            v["order"] = json!(k);
        }
        v
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind, order) = match &e {
            Error::InvalidGrid(_)
            | Error::ShapeMismatch(_)
            | Error::InvalidArgument(_)
            | Error::OutOfDomain(..)
            | Error::Ellipticity { .. } => (EXIT_CONFIG, "config", None),
            Error::FloorViolation { .. } => (EXIT_HYPOTHESIS, "floor_violation", None),
            Error::NoConvergence { .. } => (EXIT_NUMERICAL, "no_convergence", None),
            Error::NoFreeBoundary(_) => (EXIT_NUMERICAL, "no_free_boundary", None),
            Error::NonGraph { .. } => (EXIT_NUMERICAL, "non_graph", None),
            Error::ScaleUnderflow { .. } => (EXIT_NUMERICAL, "scale_underflow", None),
            Error::InfiniteCoefficient { order } => (EXIT_NUMERICAL, "infinite_coefficient", Some(*order)),
            Error::TooFewCoefficients { .. } => (EXIT_NUMERICAL, "too_few_coefficients", None),
            Error::NonzeroConstantTerm | Error::PastPole { .. } | Error::Inexact(_) => (EXIT_NUMERICAL, "series", None),
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => (EXIT_NUMERICAL, "io", None),
        };
        Self { code, kind, message: e.to_string(), order }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::config(format!("{e:#}"))
    }
}

type Run = Result<Value, Failure>;

/// Finite numbers as JSON numbers, `±∞` as strings, NaN as null.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        Value::Null
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

fn coefficient_field(id: &str, g: Grid) -> Result<CoefficientField, Failure> {
    let (m, lo, hi) = names::coefficients(id)?;
    // slack for rounding in the eigenvalue bounds
    Ok(CoefficientField::from_fn(g, lo * (1.0 - 1e-12), hi * (1.0 + 1e-12), m)?)
}

pub fn run(cfg: &RunConfig, out: &Path) -> Run {
    match cfg {
        RunConfig::SolveWeighted(c) => solve_weighted(c, out),
        RunConfig::Obstacle(c) => obstacle(c, out),
        RunConfig::Harnack(c) => harnack(c, out),
        RunConfig::AnalyticScan(c) => analytic_scan(c, out),
        RunConfig::MajorantOde(c) => majorant_ode(c, out),
    }
}

fn solve_weighted(c: &SolveWeightedConfig, out: &Path) -> Run {
    let g = build_grid(Shape::Half, c.grid.nx, c.grid.ny)?;
    let a = coefficient_field(&c.coefficients, g)?;
    let boundary = names::scalar(&c.boundary)?;
    let exact = c.exact.as_deref().map(names::scalar).transpose()?;
    let op = assemble_weighted_with(&g, &a, c.s, c.planar)?;
    let rhs = LoadVector::zeros(g, c.s);
    let bd = BoundaryData::from_fn(g, boundary);
    let (w, rep) = solve_with(&op, &rhs, &bd, &c.solver.options())?;
    w.write_csv(out.join("solution.csv"))?;
    let mut report = json!({
        "grid": { "nx": g.nx, "ny": g.ny },
        "s": c.s,
        "planar": c.planar,
        "unknowns": rep.unknowns,
        "iterations": rep.iterations,
        "solver_residual": num(rep.residual),
        "strong_residual": num(op.scaled_residual(&w, &rhs)),
    });
    if let Some(f) = exact {
        let e = GridFunction::from_fn(g, f);
        let sq = w.zip_with(&e, |a, b| (a - b).powi(2))?;
        let l2 = integrate_weighted(&sq, 0.0)?.sqrt();
        let norm = integrate_weighted(&e.map(|v| v * v), 0.0)?.sqrt();
        let max = w.values.iter().zip(&e.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        report["error"] = json!({
            "l2": num(l2),
            "relative_l2": if norm > 0.0 { num(l2 / norm) } else { Value::Null },
            "max": num(max),
        });
    }
    Ok(report)
}

fn solve_full_obstacle(grid: GridSpec, coefficients: &str, boundary: &str, psor: &ObstacleOptions) -> Result<ObstacleSolution, Failure> {
    let g = build_grid(Shape::Full, grid.nx, grid.ny)?;
    let a = coefficient_field(coefficients, g)?;
    let bd = BoundaryData::from_fn(g, names::scalar(boundary)?);
    Ok(solve_obstacle(&g, &a, &bd, psor)?)
}

fn obstacle_summary(sol: &ObstacleSolution) -> Value {
    json!({
        "grid": { "nx": sol.u.grid.nx, "ny": sol.u.grid.ny },
        "sweeps": sol.iterations,
        "complementarity_residual": num(sol.complementarity_residual),
        "active_nodes": sol.active_count(),
        "nodes": sol.u.grid.node_count(),
    })
}

fn obstacle(c: &ObstacleConfig, out: &Path) -> Run {
    let sol = solve_full_obstacle(c.grid, &c.coefficients, &c.boundary, &c.psor)?;
    sol.u.write_csv(out.join("solution.csv"))?;
    let mut report = json!({ "obstacle": obstacle_summary(&sol), "axis": c.axis });
    report["free_boundary"] = match extract_free_boundary(&sol, c.axis) {
        Ok(fb) => {
            fb.write_csv(out.join("boundary.csv"))?;
            let (lo, hi) = fb.range();
            json!({ "status": "found", "samples": fb.samples.len(), "range": [num(lo), num(hi)] })
        }
        Err(Error::NoFreeBoundary(reason)) => json!({ "status": "none", "reason": format!("active set is {reason}") }),
        Err(e) => return Err(e.into()),
    };
    let checks = c
        .blowup
        .iter()
        .map(|b| -> Result<Value, Failure> {
            let rep = blowup_check(&sol, b.x0, &b.radii)?;
            let fits: Vec<Value> = rep
                .fits
                .iter()
                .map(|f| {
                    json!({ "r": num(f.r), "k": num(f.k), "e": nums(&f.e), "residual": num(f.residual), "skipped": f.skipped })
                })
                .collect();
            Ok(json!({ "x0": nums(&rep.x0), "verdict": rep.verdict, "fits": fits }))
        })
        .collect::<Result<Vec<_>, _>>()?;
    report["blowup"] = Value::Array(checks);
    Ok(report)
}

fn campanato_json(rep: &CampanatoReport) -> Value {
    json!({
        "mode": rep.mode,
        "alpha": rep.alpha,
        "factor": rep.factor,
        "radii": nums(&rep.radii),
        "sigma": nums(&rep.sigma),
        "chi": nums(&rep.chi),
        "p": nums(&rep.p),
        "fitted_decay": num(rep.fitted_decay),
        "mean_ratio": rep.mean_ratio().map_or(Value::Null, num),
    })
}

fn harnack(c: &HarnackConfig, out: &Path) -> Run {
    let g = build_grid(Shape::Half, c.grid.nx, c.grid.ny)?;
    let curve = names::curve(&c.curve)?;
    let slope = curve.max_slope(&g);
    if !(slope <= 1.0) {
        return Err(Failure::hypothesis(format!("max |Γ'| = {slope:.4} exceeds 1")));
    }
    let a = transform_coefficients(&IdentityCoefficient, &curve, &g)?;
    let op = assemble_weighted_with(&g, &a, 0.0, PlanarCondition::Dirichlet)?;
    let rhs = LoadVector::zeros(g, 0.0);
    let pulled = |id: &str| -> Result<BoundaryData, Failure> {
        let f = names::scalar(id)?;
        Ok(BoundaryData::from_fn(g, |x1, xn| {
            if xn == 0.0 {
                return 0.0;
            }
            let y = curve.to_y([x1, xn]);
            f(y[0], y[1])
        }))
    };
    let (u1, r1) = solve_with(&op, &rhs, &pulled(&c.u1)?, &c.solver.options())?;
    let (u2, r2) = solve_with(&op, &rhs, &pulled(&c.u2)?, &c.solver.options())?;
    u1.write_csv(out.join("u1.csv"))?;
    u2.write_csv(out.join("u2.csv"))?;
    let floor = hopf_floor(&u2)?;
    let solves = json!({
        "u1": { "iterations": r1.iterations, "residual": num(r1.residual) },
        "u2": { "iterations": r2.iterations, "residual": num(r2.residual) },
    });
    let w = match ratio(&u1, &u2, c.floor_tol) {
        Ok(w) => w,
        Err(e @ Error::FloorViolation { .. }) => {
            let mut f = Failure::from(e);
            f.message = format!("{} (hopf floor of u2 = {floor:.6e})", f.message);
            return Err(f);
        }
        Err(e) => return Err(e.into()),
    };
    w.write_csv(out.join("ratio.csv"))?;
    let scan = campanato_scan(&w, None, Some(&a), &c.campanato)?;
    scan.write_csv(out.join("campanato.csv"))?;
    let mut report = json!({
        "grid": { "nx": g.nx, "ny": g.ny },
        "curve": c.curve,
        "max_slope": num(slope),
        "solves": solves,
        "hopf_floor": num(floor),
        "floor_tol": c.floor_tol,
        "ratio_max_abs": num(w.max_abs()),
        "campanato": campanato_json(&scan),
    });
    if let Some(id) = &c.expected_ratio {
        let f = names::scalar(id)?;
        let err = (0..g.node_count())
            .map(|k| {
                let (x1, xn) = g.coords(k);
                let y = curve.to_y([x1, xn]);
                (w.values[k] - f(y[0], y[1])).abs()
            })
            .fold(0.0, f64::max);
        report["ratio_max_error"] = num(err);
    }
    Ok(report)
}

fn analytic_scan(c: &AnalyticScanConfig, out: &Path) -> Run {
    let sol = solve_full_obstacle(c.grid, "identity", &c.boundary, &c.psor)?;
    let fb = extract_free_boundary(&sol, c.axis)?;
    fb.write_csv(out.join("boundary.csv"))?;
    let rep = analyticity_scan(&CurveModel::spline(fb.spline.clone()), c.kmax, c.window)?;
    let mut w = csv::Writer::from_path(out.join("coefficients.csv")).map_err(Error::from)?;
    w.write_record(["k", "c_k", "usable"]).map_err(Error::from)?;
    for (k, (ck, usable)) in rep.coefficients.iter().zip(&rep.usable).enumerate() {
        w.serialize((k, ck, usable)).map_err(Error::from)?;
    }
    w.flush().map_err(Error::from)?;
    Ok(json!({
        "obstacle": obstacle_summary(&sol),
        "axis": c.axis,
        "boundary_samples": fb.samples.len(),
        "scan": {
            "kmax_requested": rep.kmax_requested,
            "kmax_used": rep.kmax_used,
            "window": rep.window,
            "samples": rep.samples,
            "coefficients": nums(&rep.coefficients),
            "usable": rep.usable,
            "noise": num(rep.noise),
            "condition": num(rep.condition),
            "radius": num(rep.radius),
            "warnings": rep.warnings,
        },
    }))
}

fn series_report<T: Coefficient>(c: &MajorantOdeConfig, out: &Path) -> Run {
    let (pi, omega) = ode_solve::<T>(&c.m, &c.n, c.pi0, c.omega0, c.order)?;
    pi.write_csv_file(out.join("pi.csv"))?;
    omega.write_csv_file(out.join("omega.csv"))?;
    let radius = |s: &MajorantSeries<T>| match radius_estimate(s, c.radius_method) {
        Ok(r) => json!({ "value": num(r) }),
        Err(e) => json!({ "value": Value::Null, "note": e.to_string() }),
    };
    let series = |s: SeriesJson| serde_json::to_value(s).map_err(Error::from);
    Ok(json!({
        "order": c.order,
        "arithmetic": if T::EXACT { "exact" } else { "float" },
        "radius_method": c.radius_method,
        "pi": series(pi.to_json())?,
        "omega": series(omega.to_json())?,
        "radius": { "pi": radius(&pi), "omega": radius(&omega) },
    }))
}

fn majorant_ode(c: &MajorantOdeConfig, out: &Path) -> Run {
    match c.arithmetic {
        Arithmetic::Float => series_report::<f64>(c, out),
        Arithmetic::Exact => series_report::<BigRational>(c, out),
    }
}
