use lmcflow_core::convex_transform::{convexity_check_where, rotated_auxiliary};
use lmcflow_core::soliton_profiles::{build_rotated_rotator, rotator_profile, rotator_profile_with};
use lmcflow_core::GridSpec;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn profile_solves_the_ode(n in 1usize..=4, a in -1.0f64..0.0) {
        let p = rotator_profile(n, a, 0.125, 2000).unwrap();
        prop_assert_eq!(p.f[0], 0.0);
        prop_assert_eq!(p.fp[0], 1.0);
        prop_assert!((p.fpp0() - 4.0 * a / (n as f64 + 2.0)).abs() <= 1e-10);
        prop_assert!(p.max_residual().unwrap() <= 1e-8);
        prop_assert!(p.s.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(p.f.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn leading_coefficient_is_linear_in_a(n in 1usize..=4, a in -1.0f64..-0.01, t in 0.1f64..1.0) {
        let p = rotator_profile(n, a, 0.05, 50).unwrap();
        let q = rotator_profile(n, t * a, 0.05, 50).unwrap();
        prop_assert!((q.fpp0() - t * p.fpp0()).abs() <= 1e-10);
    }

    #[test]
    fn series_hands_off_continuously(n in 1usize..=4, a in -1.0f64..-0.01) {
        let p = rotator_profile(n, a, 0.125, 100).unwrap();
        let delta = 1e-4;
        let step = rotator_profile_with(n, a, p.s0, 1, p.s0 - delta).unwrap();
        // step.s = [0, s0 - delta, s0]; p.s[1] = s0 comes from the series
        prop_assert!((step.s[2] - p.s[1]).abs() <= 1e-15);
        prop_assert!((step.f[2] - p.f[1]).abs() <= 1e-9);
        prop_assert!((step.fp[2] - p.fp[1]).abs() <= 1e-9);
    }

    #[test]
    fn rotated_auxiliary_is_convex_off_the_origin(n in 1usize..=3, a in -1.0f64..-0.05) {
        let p = rotator_profile(n, a, 0.125, 2000).unwrap();
        let half = if n == 3 { 0.2 } else { 0.35 };
        let grid = GridSpec::centered(n, half, 29).unwrap();
        let h = grid.spacing();
        let ubar = build_rotated_rotator(&p, &grid).unwrap();
        let big = rotated_auxiliary(&ubar);
        let report = convexity_check_where(&big, 0.0, |x| x.iter().map(|v| v * v).sum::<f64>().sqrt() >= 2.0 * h);
        prop_assert!(report.min_eigenvalue > 0.0, "min eigenvalue {}", report.min_eigenvalue);
    }
}
