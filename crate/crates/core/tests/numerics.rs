use nulab::quadrature::{integrate_radial_power_log, power_log_converges_at_origin};
use nulab::solver::{solve_radial, RadialProblem, SolverConfig, Source};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pure_powers_match_closed_form(a in -0.95f64..4.0) {
        let v = integrate_radial_power_log(a, 0.0, 0.0, 0.5, 1e-10).unwrap().value().unwrap();
        let want = 0.5f64.powf(a + 1.0) / (a + 1.0);
        prop_assert!(((v - want) / want).abs() < 1e-9, "a = {a}: {v} vs {want}");
    }

    #[test]
    fn divergence_flag_matches_the_test(a in -3.0f64..1.0, b in -3.0f64..3.0) {
        let r = integrate_radial_power_log(a, b, 0.0, 0.5, 1e-8).unwrap();
        prop_assert_eq!(r.is_divergent(), !power_log_converges_at_origin(a, b));
    }

    #[test]
    fn positive_source_gives_positive_solution(beta in 0.0f64..1.5, scale in 0.1f64..10.0, n in 2u32..5) {
        let a = move |r: f64| scale * (r + 0.05).powf(beta);
        let f = |_: f64| Ok(1.0);
        let problem = RadialProblem {
            n,
            radius: 1.0,
            a1: &a,
            source: Source { f: &f, breakpoints: &[] },
            outer_value: 0.0,
            inner_value: None,
        };
        let sol = solve_radial(&problem, &SolverConfig { cells: 128, ..SolverConfig::default() }).unwrap();
        prop_assert!(sol.min() >= -1e-14);
        // u decreases outward for a positive source.
        prop_assert!(sol.values.windows(2).all(|w| w[1] <= w[0] + 1e-14));
    }
}
