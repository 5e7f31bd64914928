// SPDX-License-Identifier: Apache-2.0

use harnack_core::majorant::{add, compose, integrate_rule, majorizes, mul};
use harnack_core::*;
use proptest::prelude::*;

fn coeffs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0..4.0f64], n + 1)
}

fn pair_with_majorant(n: usize) -> impl Strategy<Value = (Series, Series)> {
    (coeffs(n), coeffs(n)).prop_map(|(a, d)| {
        let big: Vec<f64> = a.iter().zip(&d).map(|(x, y)| x + y).collect();
        (Series::from_f64s(&a).unwrap(), Series::from_f64s(&big).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn majorization_is_a_partial_order(a in coeffs(6), b in coeffs(6), c in coeffs(6)) {
        let (a, b, c) = (Series::from_f64s(&a).unwrap(), Series::from_f64s(&b).unwrap(), Series::from_f64s(&c).unwrap());
        prop_assert!(majorizes(&a, &a).unwrap());
        if majorizes(&a, &b).unwrap() && majorizes(&b, &a).unwrap() {
            prop_assert_eq!(&a, &b);
        }
        if majorizes(&b, &a).unwrap() && majorizes(&c, &b).unwrap() {
            prop_assert!(majorizes(&c, &a).unwrap());
        }
    }

    #[test]
    fn operations_preserve_majorization((f, fb) in pair_with_majorant(7), (g, gb) in pair_with_majorant(7)) {
        prop_assert!(majorizes(&add(&fb, &gb), &add(&f, &g)).unwrap());
        prop_assert!(majorizes(&mul(&fb, &gb), &mul(&f, &g)).unwrap());
        let (f0, fb0) = (f.drop_constant(), fb.drop_constant());
        prop_assert!(majorizes(&compose(&gb, &fb0).unwrap(), &compose(&g, &f0).unwrap()).unwrap());
        let c = Extended::Fin(1.0);
        prop_assert!(majorizes(&integrate_rule(&gb, c.clone()), &integrate_rule(&g, c)).unwrap());
    }

    #[test]
    fn product_truncation_is_stable(a in coeffs(10), b in coeffs(10), m in 1usize..10) {
        let (a, b) = (Series::from_f64s(&a).unwrap(), Series::from_f64s(&b).unwrap());
        prop_assert_eq!(mul(&a, &b).with_order(m), mul(&a.with_order(m), &b.with_order(m)));
    }

    #[test]
    fn ode_solution_is_monotone_in_data(w0 in 0.0..0.5f64, dw in 0.0..0.3f64, p0 in 0.0..0.5f64, dp in 0.0..0.3f64) {
        // Ω' = Ω² + Π, Π' = Ω + t
        let m = Expr::Add(vec![Expr::omega_squared(), Expr::Pi]);
        let n = Expr::Add(vec![Expr::Omega, Expr::T]);
        let (pi, om) = ode_solve::<f64>(&m, &n, p0, w0, 12).unwrap();
        let (pi_b, om_b) = ode_solve::<f64>(&m, &n, p0 + dp, w0 + dw, 12).unwrap();
        prop_assert!(majorizes(&pi_b, &pi).unwrap() && majorizes(&om_b, &om).unwrap());
        let (pi_short, _) = ode_solve::<f64>(&m, &n, p0, w0, 6).unwrap();
        prop_assert_eq!(pi.with_order(6), pi_short);
    }

    #[test]
    fn holder_subdivision_with_slack(
        modes in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64, 0.0..6.3f64), 1..4),
        alpha in 0.2..1.0f64,
    ) {
        let g = build_grid(Shape::Half, 24, 12).unwrap();
        let f = GridFunction::from_fn(g, |x, y| modes.iter().map(|&(a, b, p)| (a * x + b * y + p).sin()).sum());
        let region = Rect::new(-1.0, 1.0, 0.0, 1.0);
        let (l, r) = region.halves();
        let whole = holder_seminorm(&f, alpha, &region).unwrap();
        let halves = holder_seminorm(&f, alpha, &l).unwrap().max(holder_seminorm(&f, alpha, &r).unwrap());
        prop_assert!(whole <= 2f64.powf(1.0 - alpha) * halves * 1.10 + 1e-12);
    }

    #[test]
    fn global_norm_grows_with_normal_derivatives(a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64) {
        let g = build_grid(Shape::Half, 48, 24).unwrap();
        let f = GridFunction::from_fn(g, |x, y| a * x * x + b * x * y + c * (2.0 * y).sin());
        let spec = |nb| GlobalNormSpec { k: 1, alpha: 0.5, b: nb, l: 1.0 };
        let p0 = global_norm_coeff(&f, &spec(0)).unwrap().value;
        let p1 = global_norm_coeff(&f, &spec(1)).unwrap().value;
        prop_assert!(p0 <= p1 + 1e-12);
    }

    #[test]
    fn campanato_affine_part_has_no_normal_slope(a in -1.0..1.0f64, b in -1.0..1.0f64) {
        let g = build_grid(Shape::Half, 64, 32).unwrap();
        let w = GridFunction::from_fn(g, |x, y| a * x + b * y * y + x * y);
        let rep = campanato_scan(&w, None, None, &CampanatoParams::new(0.5, 0.5, 2, CampanatoMode::L2fit)).unwrap();
        prop_assert_eq!(rep.p[2], 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn weighted_solution_respects_data_bounds(c in -2.0..2.0f64, k in 0.5..4.0f64) {
        let g = build_grid(Shape::Half, 24, 12).unwrap();
        let op = assemble_weighted(&g, &CoefficientField::identity(g), 2.0).unwrap();
        let bd = BoundaryData::from_fn(g, |x, y| c + (k * x).sin() * (1.0 + y));
        let w = solve(&op, &LoadVector::zeros(g, 2.0), &bd).unwrap();
        let (lo, hi) = bd.min_max();
        prop_assert!(w.values.iter().all(|&v| v >= lo - 1e-8 && v <= hi + 1e-8));
    }

    #[test]
    fn obstacle_comparison(a1 in 0.2..0.5f64, da in 0.0..0.2f64) {
        let g = build_grid(Shape::Full, 24, 24).unwrap();
        let id = CoefficientField::identity(g);
        let opts = ObstacleOptions::default();
        let big = solve_obstacle(&g, &id, &BoundaryData::from_fn(g, |x, y| obstacle::radial_profile(a1, x, y)), &opts).unwrap();
        let small = solve_obstacle(&g, &id, &BoundaryData::from_fn(g, |x, y| obstacle::radial_profile(a1 + da, x, y)), &opts).unwrap();
        prop_assert!(small.u.values.iter().zip(&big.u.values).all(|(s, b)| *s <= b + 1e-8));
    }
}
