//! Property tests for the mean functions.

use entroflow::means::{
    f_mean, log_mean, log_mean_partials, power_mean, Density, Mean,
};
use proptest::prelude::*;

fn positive() -> impl Strategy<Value = f64> {
    // log-uniform over [1e-2, 1e2]
    (-2.0f64..2.0).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #[test]
    fn log_mean_between_min_and_max(s in positive(), t in positive()) {
        let lam = log_mean(s, t).unwrap();
        prop_assert!(lam >= s.min(t) - 1e-12 * s.max(t));
        prop_assert!(lam <= s.max(t) + 1e-12 * s.max(t));
    }

    #[test]
    fn log_mean_symmetric_exactly(s in positive(), t in positive()) {
        prop_assert_eq!(log_mean(s, t).unwrap(), log_mean(t, s).unwrap());
    }

    #[test]
    fn power_mean_between_min_and_max(alpha in 0.2f64..3.0, s in positive(), t in positive()) {
        let lam = power_mean(alpha, s, t).unwrap();
        prop_assert!(lam >= s.min(t) - 1e-10 * s.max(t));
        prop_assert!(lam <= s.max(t) + 1e-10 * s.max(t));
    }

    #[test]
    fn boltzmann_f_mean_is_log_mean(s in positive(), t in positive()) {
        let a = f_mean(&Density::Boltzmann, s, t).unwrap();
        let b = log_mean(s, t).unwrap();
        prop_assert!((a - b).abs() <= 4.0 * f64::EPSILON * b);
    }

    #[test]
    fn power_two_is_arithmetic_exactly(s in positive(), t in positive()) {
        prop_assert_eq!(power_mean(2.0, s, t).unwrap(), 0.5 * (s + t));
    }

    #[test]
    fn log_partials_match_finite_differences(s in positive(), t in positive()) {
        // away from the diagonal, the closed forms agree with central
        // differences at step 1e-5 to 1e-6 relative
        prop_assume!((s - t).abs() > 1e-2 * s.max(t));
        let (d1, d2) = log_mean_partials(s, t).unwrap();
        let hs = 1e-5 * s;
        let ht = 1e-5 * t;
        let fd1 = (log_mean(s + hs, t).unwrap() - log_mean(s - hs, t).unwrap()) / (2.0 * hs);
        let fd2 = (log_mean(s, t + ht).unwrap() - log_mean(s, t - ht).unwrap()) / (2.0 * ht);
        prop_assert!((d1 - fd1).abs() <= 1e-6 * d1.abs().max(1e-9));
        prop_assert!((d2 - fd2).abs() <= 1e-6 * d2.abs().max(1e-9));
    }

    #[test]
    fn partial_sum_rule(s in positive(), t in positive()) {
        let (d1, d2) = log_mean_partials(s, t).unwrap();
        let lam = log_mean(s, t).unwrap();
        let rhs = lam * lam / (s * t);
        prop_assert!((d1 + d2 - rhs).abs() <= 1e-10 * rhs);
    }

    #[test]
    fn second_difference_inequality_log(u0 in positive(), u1 in positive(),
                                        u2 in positive(), u3 in positive()) {
        let mean = Mean::Logarithmic;
        let lhs = -mean.eval(u0, u1).unwrap() + 2.0 * mean.eval(u1, u2).unwrap()
            - mean.eval(u2, u3).unwrap();
        let (p1, p2) = mean.partials(u1, u2).unwrap();
        let rhs = p1 * (-u0 + 2.0 * u1 - u2) + p2 * (-u1 + 2.0 * u2 - u3);
        let scale = u0.max(u1).max(u2).max(u3);
        prop_assert!(lhs >= rhs - 1e-10 * scale);
    }

    #[test]
    fn second_difference_inequality_power_density(
        alpha in 1.05f64..2.0,
        u0 in positive(), u1 in positive(), u2 in positive(), u3 in positive()
    ) {
        let mean = Mean::F(Density::Power { alpha });
        let lhs = -mean.eval(u0, u1).unwrap() + 2.0 * mean.eval(u1, u2).unwrap()
            - mean.eval(u2, u3).unwrap();
        let (p1, p2) = mean.partials(u1, u2).unwrap();
        let rhs = p1 * (-u0 + 2.0 * u1 - u2) + p2 * (-u1 + 2.0 * u2 - u3);
        let scale = u0.max(u1).max(u2).max(u3);
        prop_assert!(lhs >= rhs - 1e-9 * scale);
    }
}
