mod common;

use pleg_core::cases;
use pleg_core::solver::{BoundaryData, SolveOptions, sinh_ratio_derivative, solve_1p1, solve_dual_laplace};
use pleg_core::torus_field::{TorusField, TorusGrid};
use proptest::prelude::*;

fn data(g: &TorusGrid, modes: &[cases::TrigMode], scale: f64) -> TorusField {
    cases::trig_polynomial(g, modes).unwrap().map(|v| scale * v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dual_solve_hits_its_data(
        m0 in common::modes(1, 6, 4),
        m1 in common::modes(1, 6, 4),
        epsilon in 1e-4f64..1.0,
    ) {
        let g = TorusGrid::new(&[32]).unwrap();
        let (f0, f1) = (data(&g, &m0, 0.01), data(&g, &m1, 0.01));
        let sol = solve_dual_laplace(&f0, &f1, epsilon).unwrap();
        prop_assert!(sol.slice(0.0, 0).distance(&f0) <= 1e-13);
        prop_assert!(sol.slice(1.0, 0).distance(&f1) <= 1e-13);
        prop_assert!(sol.residual(16).unwrap() <= 1e-10);
    }

    #[test]
    fn constant_shifts_add_a_linear_profile(
        m0 in common::modes(1, 4, 3),
        m1 in common::modes(1, 4, 3),
        c0 in -5.0f64..5.0,
        c1 in -5.0f64..5.0,
        epsilon in 1e-3f64..1.0,
    ) {
        let g = TorusGrid::new(&[32]).unwrap();
        let (f0, f1) = (data(&g, &m0, 0.01), data(&g, &m1, 0.01));
        let base = solve_dual_laplace(&f0, &f1, epsilon).unwrap();
        let shifted = solve_dual_laplace(&f0.map(|v| v + c0), &f1.map(|v| v + c1), epsilon).unwrap();
        prop_assert!(shifted.residual(16).unwrap() <= 1e-10);
        for l in 0..=8 {
            let s = l as f64 / 8.0;
            let want = base.slice(s, 0).map(|v| v + (1.0 - s) * c0 + s * c1);
            prop_assert!(shifted.slice(s, 0).distance(&want) <= 1e-12);
        }
    }

    #[test]
    fn sinh_ratios_stay_finite(mu in 0.0f64..1e4, a in 0.0f64..=1.0, k in 0u32..4) {
        let v = sinh_ratio_derivative(mu, a, k);
        prop_assert!(v.is_finite());
        if k == 0 {
            prop_assert!((0.0..=1.0 + 1e-15).contains(&v));
        }
    }

    #[test]
    fn high_modes_at_small_epsilon_do_not_overflow(k in 100i64..128, epsilon in 1e-8f64..1.0) {
        let g = TorusGrid::new(&[256]).unwrap();
        let m = [cases::TrigMode { k: vec![k], cos: 1e-6, sin: 0.0 }];
        let sol = solve_dual_laplace(&data(&g, &m, 1.0), &data(&g, &m, -1.0), epsilon).unwrap();
        let strip = sol.strip(8).unwrap();
        prop_assert!(strip.slices().iter().all(|s| s.values().iter().all(|v| v.is_finite())));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn solutions_keep_the_boundary_margin(
        m0 in common::modes(1, 1, 2),
        m1 in common::modes(1, 1, 2),
        c0 in 0.0f64..0.4,
        c1 in 0.0f64..0.4,
        epsilon in 0.01f64..0.9,
    ) {
        let g = TorusGrid::new(&[64]).unwrap();
        let b = BoundaryData::new(common::potential(&g, &m0, c0), common::potential(&g, &m1, c1)).unwrap();
        let r = solve_1p1(&b, epsilon, &SolveOptions::default()).unwrap();
        prop_assert!(r.margin_min >= b.lambda - 1e-6, "{} < {}", r.margin_min, b.lambda);
        prop_assert!(r.u.slice(0).distance(&b.u0) <= 1e-9);
        prop_assert!(r.u.slice(r.u.intervals()).distance(&b.u1) <= 1e-9);
    }
}
