use approx::assert_relative_eq;
use proptest::prelude::*;

use super::*;
use crate::arrivals::standard;

fn hawkes_std() -> RateFunction {
    RateFunction::hawkes(1.0, 0.5).unwrap()
}

fn cox_std() -> RateFunction {
    RateFunction::cox(1.0, 1.0, 0.5).unwrap()
}

fn sc_std() -> RateFunction {
    RateFunction::self_correcting(0.5, 2.0).unwrap()
}

/// `max_θ θx − Λ(θ)` over `θ ∈ [−20, 20]` at step 1e−4.
fn cox_brute(x: f64, nu: f64, gamma: f64, l1: f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for i in 0..=400_000 {
        let th = -20.0 + i as f64 * 1e-4;
        if let Ok(l) = cox_cumulant(th, nu, gamma, l1) {
            best = best.max(th * x - l);
        }
    }
    best
}

#[test]
fn hawkes_examples() {
    assert_eq!(hawkes_rate(2.0, 1.0, 0.5), Ext::Finite(0.0));
    assert_eq!(hawkes_rate(0.0, 1.0, 0.5), Ext::Finite(1.0));
    assert_relative_eq!(hawkes_rate(4.0, 1.0, 0.5).unwrap(), 4.0 * (4.0f64 / 3.0).ln() - 1.0, max_relative = 1e-15);
    assert!((hawkes_rate(4.0, 1.0, 0.5).unwrap() - 0.150728).abs() < 1e-6);
    assert!(hawkes_rate(-0.1, 1.0, 0.5).is_infinite());
    assert_relative_eq!(hawkes_rate(3.0, 1.0, 0.5).unwrap(), 3.0 * 1.2f64.ln() - 0.5, max_relative = 1e-14);
}

#[test]
fn cox_cumulant_examples() {
    assert_eq!(cox_cumulant(0.0, 1.3, 0.7, 2.0).unwrap(), 0.0);
    assert_relative_eq!(cox_cumulant(2f64.ln(), 1.0, 1.0, 0.5).unwrap(), 0.5f64.exp(), max_relative = 1e-14);
    let h = 1e-6;
    let d = (cox_cumulant(h, 1.0, 2.0, 0.25).unwrap() - cox_cumulant(-h, 1.0, 2.0, 0.25).unwrap()) / (2.0 * h);
    assert!((d - 1.5).abs() < 1e-8);
    assert_relative_eq!(cox_cumulant_deriv(0.0, 1.0, 2.0, 0.25), 1.5);
    assert!(matches!(cox_cumulant(8.0, 1.0, 1.0, 1.0), Err(Error::Saturation(_))));
}

#[test]
fn cox_rate_examples() {
    assert!(cox_rate(1.5, 1.0, 1.0, 0.5).unwrap().unwrap().abs() < 1e-10);
    assert!(cox_rate(1.5 * (1.0 + 1e-12), 1.0, 1.0, 0.5).unwrap().unwrap().abs() < 1e-10);
    let i0 = cox_rate(0.0, 1.0, 1.0, 0.5).unwrap().unwrap();
    assert_relative_eq!(i0, 2.0 - (-0.5f64).exp(), max_relative = 1e-15);
    assert!((i0 - 1.393469).abs() < 1e-6);
    // the optimizer converges to the same limit as x ↓ 0
    let near = cox_rate(1e-9, 1.0, 1.0, 0.5).unwrap().unwrap();
    assert!((near - i0).abs() < 1e-7);
    for x in [0.5, 1.5, 3.0, 7.0] {
        let brute = cox_brute(x, 1.0, 1.0, 0.5);
        let v = cox_rate(x, 1.0, 1.0, 0.5).unwrap().unwrap();
        assert!((v - brute).abs() < 1e-6, "x={x}: {v} vs {brute}");
        assert!(v >= brute - 1e-12);
    }
    assert!(cox_rate(-1.0, 1.0, 1.0, 0.5).unwrap().is_infinite());
}

#[test]
fn sc_examples() {
    assert_eq!(sc_rate(1.0, 0.5, 2.0), Ext::Finite(0.0));
    assert_eq!(sc_rate(0.0, 0.5, 2.0), Ext::Finite(2.0));
    let v = sc_rate(2.0, 0.5, 2.0).unwrap();
    assert!((v - (2.0 * 4f64.ln() - 1.5)).abs() < 1e-12);
    assert!((v - 1.272589).abs() < 1e-6);
    assert!(sc_rate(-1e-9, 0.5, 2.0).is_infinite());
}

#[test]
fn extended_value_ordering() {
    assert!(Ext::Finite(1e308) < Ext::Infinite);
    assert!(Ext::Finite(1.0) < Ext::Finite(2.0));
    assert_eq!(Ext::Infinite.to_string(), "inf");
}

#[test]
fn rate_functions_from_models() {
    let h = RateFunction::for_model(&standard::hawkes()).unwrap();
    let c = RateFunction::for_model(&standard::cox()).unwrap();
    let s = RateFunction::for_model(&standard::self_correcting()).unwrap();
    assert_eq!(h.mu(), 2.0);
    assert_eq!(c.mu(), 1.5);
    assert_eq!(s.mu(), 1.0);
    for r in [&h, &c, &s] {
        let mu = r.mu();
        assert!(r.eval(mu).unwrap().unwrap().abs() < 1e-12);
        assert!(r.eval(mu + 0.1).unwrap().unwrap() > 1e-4);
        assert!(r.eval(mu - 0.1).unwrap().unwrap() > 1e-4);
    }
    assert!(RateFunction::hawkes(1.0, 1.0).is_err());
    assert!(RateFunction::self_correcting(1.0, 2.0).is_err());
}

#[test]
fn hawkes_double_transform_recovers_rate() {
    let r = hawkes_std();
    let f = |x: f64| r.eval(x).unwrap().unwrap();
    // Λ̂(θ) = sup_x θx − I(x) is concave-maximized over x
    let lambda_hat = |th: f64| -golden_section_min(|x| f(x) - th * x, 0.0, 200.0, 1e-11).1;
    let thetas: Vec<f64> = (0..=31_500).map(|i| -2.5 + i as f64 * 1e-4).collect();
    let lh: Vec<f64> = thetas.iter().map(|&t| lambda_hat(t)).collect();
    for k in 0..=40 {
        let x = 0.1 + k as f64 * (9.9 / 40.0);
        let rec = thetas.iter().zip(&lh).map(|(t, l)| t * x - l).fold(f64::NEG_INFINITY, f64::max);
        assert!((rec - f(x)).abs() < 1e-6, "x={x}: {rec} vs {}", f(x));
    }
}

#[test]
fn cox_rate_is_convex() {
    let r = cox_std();
    let xs: Vec<f64> = (0..1000).map(|i| 0.01 + i as f64 * 0.01).collect();
    for w in xs.windows(3).step_by(1) {
        let (a, m, b) = (w[0], w[1], w[2]);
        let lhs = r.eval(m).unwrap().unwrap();
        let rhs = 0.5 * (r.eval(a).unwrap().unwrap() + r.eval(b).unwrap().unwrap());
        assert!(lhs <= rhs + 1e-9, "x={m}");
    }
}

#[test]
fn c_mu_prime_examples() {
    let sc = c_mu_prime(&sc_std(), 2.0).unwrap();
    assert!(sc.holds);
    assert!((sc.value - (4f64.ln() + 0.25 - 1.0)).abs() < 1e-8, "{}", sc.value);
    assert!((sc.value - 0.636294).abs() < 1e-6);
    // grid cross-check: I(x)/x = ln(2x) + 0.5/x − 1 on [2, 100]
    let grid_min = (0..=98_000).map(|i| 2.0 + i as f64 * 1e-3).map(|x| (2.0 * x).ln() + 0.5 / x - 1.0).fold(f64::INFINITY, f64::min);
    assert!((grid_min - sc.value).abs() < 1e-8);

    let h = c_mu_prime(&hawkes_std(), 2.0).unwrap();
    assert!(!h.holds);
    assert_eq!(h.value, 0.0);

    let cox = cox_std();
    let c = c_mu_prime(&cox, 3.0).unwrap();
    let mut grid_best = f64::INFINITY;
    for i in 0..=9_700 {
        let x = 3.0 + i as f64 * 0.01;
        grid_best = grid_best.min(cox.eval(x).unwrap().unwrap() / x);
    }
    assert!(c.holds);
    assert!((c.value - grid_best).abs() < 1e-6, "{} vs {grid_best}", c.value);
    assert!(c.value <= grid_best + 1e-12);
}

#[test]
fn c_mu_prime_sc_just_above_mean() {
    let c = c_mu_prime(&sc_std(), 1.1).unwrap();
    let expected = (1.1 * 2.2f64.ln() + 0.5 - 1.1) / 1.1;
    assert!((c.value - expected).abs() < 1e-8);
    assert!((c.value - 0.2430).abs() < 1e-4);
}

#[test]
fn c_mu_prime_hawkes_above_mean() {
    let c = c_mu_prime(&hawkes_std(), 2.2).unwrap();
    assert!(c.holds);
    assert_relative_eq!(c.value, hawkes_rate(2.2, 1.0, 0.5).unwrap() / 2.2, max_relative = 1e-6);
}

#[test]
fn c_mu_prime_zero_rate_fails() {
    let zero = RateFunction::custom("zero", 1.0, |x| if x < 0.0 { Ext::Infinite } else { Ext::Finite(0.0) });
    let c = c_mu_prime(&zero, 1.5).unwrap();
    assert!(!c.holds);
}

#[test]
fn a1_passes_for_standard_models() {
    for r in [hawkes_std(), cox_std(), sc_std(), RateFunction::poisson(2.0).unwrap()] {
        let rep = verify_assumption_a1(&r);
        assert!(rep.passed(), "{rep:#?}");
    }
}

#[test]
fn a1_negative_control_fails_monotonicity() {
    let flipped = RateFunction::custom("sign-flipped lower branch", 1.0, |x| {
        if x < 0.0 {
            Ext::Infinite
        } else if x < 1.0 {
            Ext::Finite(-sc_rate(x, 0.5, 2.0).unwrap())
        } else {
            sc_rate(x, 0.5, 2.0)
        }
    });
    let rep = verify_assumption_a1(&flipped);
    assert!(!rep.passed());
    assert!(!rep.clause("decreasing_below_mu").unwrap().passed);
    assert!(rep.clause("increasing_above_mu").unwrap().passed);
}

#[test]
fn a1_detects_misplaced_zero() {
    let shifted = RateFunction::custom("claims mu=1, zero at 2", 1.0, |x| hawkes_rate(x, 1.0, 0.5));
    let rep = verify_assumption_a1(&shifted);
    assert!(!rep.clause("zero_unique_at_mu").unwrap().passed);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn c_mu_prime_non_decreasing(a in 1.05f64..5.0, d in 0.0f64..3.0) {
        for r in [hawkes_std(), cox_std(), sc_std()] {
            let lo = c_mu_prime(&r, a * r.mu()).unwrap().value;
            let hi = c_mu_prime(&r, (a + d) * r.mu()).unwrap().value;
            prop_assert!(hi >= lo - 1e-9);
        }
    }

    #[test]
    fn rates_nonnegative_and_zero_only_at_mean(x in 0.0f64..50.0) {
        for r in [hawkes_std(), cox_std(), sc_std()] {
            let v = r.eval(x).unwrap().unwrap();
            prop_assert!(v >= 0.0);
            if (x - r.mu()).abs() > 1e-3 {
                prop_assert!(v > 0.0);
            }
        }
    }

    #[test]
    fn cox_rate_matches_legendre_inequality(x in 0.01f64..20.0, th in -5.0f64..2.0) {
        // Fenchel–Young: I(x) ≥ θx − Λ(θ)
        let v = cox_rate(x, 1.0, 1.0, 0.5).unwrap().unwrap();
        let l = cox_cumulant(th, 1.0, 1.0, 0.5).unwrap();
        prop_assert!(v >= th * x - l - 1e-10);
    }
}
