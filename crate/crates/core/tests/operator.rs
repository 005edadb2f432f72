use proptest::prelude::*;

use randcf::operator::{
    apply_lp, gauss_density, invariance_residual, solve_density, OperatorConfig,
};
use randcf::GridFunction;

fn config(p: f64) -> OperatorConfig {
    OperatorConfig { grid: 1024, ..OperatorConfig::new(p) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mass_is_preserved_and_positivity_kept(
        p in 0.05f64..=1.0,
        knots in prop::collection::vec(0.0f64..5.0, 9),
    ) {
        let f = GridFunction::from_fn(1024, |x| {
            let s = x * 8.0;
            let i = (s.floor() as usize).min(7);
            let t = s - i as f64;
            knots[i] * (1.0 - t) + knots[i + 1] * t
        }).unwrap();
        let out = apply_lp(&f, &config(p)).unwrap();
        prop_assert!(out.f.is_nonnegative());
        let interpolation = 1e-4 * f.sup_abs();
        let gap = (out.f.integral() - f.integral()).abs();
        prop_assert!(gap <= 2.0 * (out.tail_bound.unwrap() + interpolation), "gap {}", gap);
    }
}

#[test]
fn solved_densities_are_invariant() {
    for p in [0.2, 0.5, 0.8] {
        let sol = solve_density(&config(p)).unwrap();
        assert!((sol.density.integral() - 1.0).abs() < 1e-12);
        assert!(sol.residuals_contract(), "p = {p}: {:?}", sol.history);
        assert!(sol.diagnostics.h_min > 0.0);
        for (a, b) in [(0.0, 0.5), (0.1, 0.35), (0.5, 1.0), (0.9, 0.95)] {
            let r = invariance_residual(&sol.density, p, a, b, 1000).unwrap();
            assert!(r.residual < 1e-3, "p = {p} ({a}, {b}): {r:?}");
        }
    }
}

#[test]
fn near_one_solutions_approach_gauss() {
    let exact = GridFunction::from_fn(1024, gauss_density).unwrap();
    let d1 = solve_density(&config(1.0)).unwrap().density.l1_distance(&exact);
    let d9 = solve_density(&config(0.9)).unwrap().density.l1_distance(&exact);
    assert!(d1 < 1e-3);
    assert!(d9 > d1);
}

#[test]
fn csv_roundtrip_of_a_solution() {
    let sol = solve_density(&OperatorConfig { grid: 256, k_max: 100, ..OperatorConfig::new(0.6) }).unwrap();
    let back = GridFunction::from_csv(&sol.density.to_csv()).unwrap();
    assert_eq!(back, sol.density);
}
