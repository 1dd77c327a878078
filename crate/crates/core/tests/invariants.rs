use cloak_core::geometry::{pushforward_tensor, singular_cloak_tensor, CloakParams, Point, RadialMap, Scenario};
use cloak_core::halfspace::{solve_amplitudes, transmission_residuals, HalfspaceParams};
use cloak_core::harmonics::ModeIndex;
use cloak_core::modal::{BoundaryCoeffs, ModalSolution, SourceCoeffs};
use cloak_core::specfun::BesselTable;
use cloak_core::weak_limit::{interior_trace_normal, richardson_first_order, PolynomialBump, Profile, RadialTestFunction};
use nalgebra::Matrix3;
use num_complex::Complex64;
use proptest::prelude::*;

fn point(r: f64, c: f64, ph: f64) -> Point {
    let s = (1.0 - c * c).sqrt();
    Point::new(s * ph.cos(), s * ph.sin(), c) * r
}

fn unit() -> Scenario {
    Scenario::new(1.0, 1.0, 1.0, 0.5).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cross_product_identity(n in 0usize..40, t in 0.05f64..60.0) {
        let b = BesselTable::new(n, t).unwrap();
        let w = (b.jcal(n) * b.h(n) - b.hcal(n) * b.j(n)).to_complex() * Complex64::new(0.0, t);
        prop_assert!((w - 1.0).norm() < 1e-11, "{w}");
    }

    #[test]
    fn singular_pushforward_matches_closed_form(r in 1e-3f64..2.0, c in -1.0f64..1.0, ph in 0.0f64..std::f64::consts::TAU) {
        let y = point(r, c, ph);
        let m = pushforward_tensor(&RadialMap::Singular, &y, &Matrix3::identity()).unwrap();
        let closed = singular_cloak_tensor(&m.point).unwrap();
        prop_assert!((m.tensor - closed).abs().max() < 1e-12 * closed.abs().max());
        prop_assert!((m.tensor - m.tensor.transpose()).abs().max() == 0.0);
        prop_assert!(m.tensor.symmetric_eigen().eigenvalues.min() > 0.0);
    }

    #[test]
    fn regularized_map_inverts(rho in 1e-4f64..0.5, s in 0.0f64..1.0, c in -1.0f64..1.0, ph in 0.0f64..std::f64::consts::TAU) {
        let p = CloakParams::new(unit(), rho).unwrap();
        let map = p.outer_map();
        let y = point(rho + s * (2.0 - rho), c, ph);
        let back = map.inverse(&map.apply(&y).unwrap()).unwrap();
        prop_assert!((back - y).norm() < 1e-12 * y.norm().max(1.0));
        prop_assert!(map.apply(&y).unwrap().norm() >= 1.0 - 1e-12);
    }

    #[test]
    fn modal_solve_satisfies_matching(
        rho in 1e-4f64..0.4,
        n in 1usize..6,
        pr in -2.0f64..2.0, qr in -2.0f64..2.0, qi in -2.0f64..2.0,
        fr in -1.0f64..1.0,
    ) {
        let k = ModeIndex::new(n, 0).unwrap();
        let src = SourceCoeffs::single(k, Complex64::new(pr, 0.0), Complex64::new(qr, qi)).unwrap();
        let bdry = BoundaryCoeffs::single(k, Complex64::new(fr, 0.0), Complex64::new(0.0, fr)).unwrap();
        let sol = ModalSolution::solve(&CloakParams::new(unit(), rho).unwrap(), &src, &bdry, n).unwrap();
        prop_assert!(sol.max_residual().unwrap() < 1e-10);
    }

    #[test]
    fn limit_interior_trace_vanishes_on_interface(n in 1usize..12, qr in -3.0f64..3.0, qi in -3.0f64..3.0) {
        let k = ModeIndex::new(n, 0).unwrap();
        let src = SourceCoeffs::single(k, Complex64::new(0.0, 0.0), Complex64::new(qr, qi)).unwrap();
        for (_, v) in interior_trace_normal(&src, &unit(), 1.0).unwrap() {
            prop_assert!(v.norm() <= 1e-13);
        }
    }

    #[test]
    fn evanescent_reflection_is_total(kz in 0.05f64..0.95, rho in 1e-5f64..0.02) {
        let p = HalfspaceParams::new(1.0, kz, rho, Complex64::new(0.6, -0.8)).unwrap();
        prop_assume!(p.is_evanescent());
        let a = solve_amplitudes(&p).unwrap();
        prop_assert!((a.h_sc.norm() - 1.0).abs() < 1e-13);
        let (r1, r2) = transmission_residuals(&p, 0.7).unwrap();
        prop_assert!(r1.max(r2) < 1e-11);
    }

    #[test]
    fn richardson_is_exact_on_linear_data(c0 in -5.0f64..5.0, c1 in -5.0f64..5.0, r1 in 1e-4f64..0.1, r2 in 0.2f64..0.5) {
        let f = |r: f64| Complex64::new(c0 + c1 * r, c1 - c0 * r);
        let at_zero = richardson_first_order(r1, f(r1), r2, f(r2));
        prop_assert!((at_zero - f(0.0)).norm() < 1e-12 * (1.0 + f(0.0).norm()));
    }

    #[test]
    fn test_function_serde_round_trip(n in 1usize..6, ra in 0.5f64..1.0, width in 0.1f64..1.0, scale in 0.1f64..10.0) {
        let k = ModeIndex::new(n, 0).unwrap();
        let phi = RadialTestFunction::single(k, Profile::Bump(PolynomialBump::new(ra, ra + width, scale).unwrap()));
        let back: RadialTestFunction = serde_json::from_str(&serde_json::to_string(&phi).unwrap()).unwrap();
        prop_assert_eq!(back, phi);
    }
}
