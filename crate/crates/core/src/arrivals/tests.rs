use approx::assert_relative_eq;

use super::standard;
use super::*;
use crate::harness::rng::PathStream;
use crate::numeric::quad::{integrate, integrate_breaks};

fn run_counts(model: &ArrivalModel, horizon: f64, paths: u64, seed: u64) -> Vec<f64> {
    let plan = RngStreamPlan::new(seed);
    (0..paths).map(|i| simulate(model, horizon, &mut plan.stream_for(i)).unwrap().count() as f64).collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
}

#[test]
fn mean_rate_examples() {
    assert_relative_eq!(standard::hawkes().mean_rate(), 2.0);
    let cox = ArrivalModel::cox(Baseline::Constant { nu: 1.0 }, 2.0, Kernel::exp(0.5, 2.0).unwrap()).unwrap();
    assert_relative_eq!(cox.mean_rate(), 1.5);
    assert_eq!(standard::self_correcting().mean_rate(), 1.0);
    let sc = ArrivalModel::self_correcting(StressRate::ClampedExp { lambda_minus: 0.2, lambda_plus: 7.0 }).unwrap();
    assert_eq!(sc.mean_rate(), 1.0);
    assert_eq!(ArrivalModel::poisson(3.5).unwrap().mean_rate(), 3.5);
}

#[test]
fn supercritical_hawkes_rejected_with_clause() {
    let err = ArrivalModel::hawkes(1.0, Kernel::exp(1.2, 1.0).unwrap()).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("1.2") && msg.contains("subcriticality"), "{msg}");
}

#[test]
fn invalid_components_rejected() {
    assert!(Kernel::tabulated(vec![0.0, 1.0], vec![0.1, 0.2]).is_err());
    assert!(Kernel::tabulated(vec![0.5, 1.0], vec![0.2, 0.1]).is_err());
    assert!(Kernel::tabulated(vec![0.0, 1.0, 1.0], vec![0.2, 0.1, 0.1]).is_err());
    assert!(Kernel::exp(-1.0, 1.0).is_err());
    assert!(ArrivalModel::self_correcting(StressRate::logistic(1.2, 2.0)).is_err());
    assert!(ArrivalModel::self_correcting(StressRate::logistic(0.5, 0.9)).is_err());
    assert!(ArrivalModel::self_correcting(StressRate::Tabulated { z: vec![0.0, 1.0], values: vec![1.5, 0.5] }).is_err());
    assert!(ArrivalModel::cox(Baseline::Constant { nu: 0.0 }, 1.0, Kernel::exp(1.0, 1.0).unwrap()).is_err());
    assert!(ArrivalModel::poisson(0.0).is_err());
}

#[test]
fn kernel_norms_and_integrals_match_quadrature() {
    let tab = Kernel::tabulated(vec![0.0, 0.5, 2.0, 3.0], vec![0.6, 0.3, 0.1, 0.05]).unwrap();
    let exp = Kernel::exp(1.0, 2.0).unwrap();
    for k in [&tab, &exp] {
        let end = k.support_end().min(60.0);
        let l1 = integrate(|t| k.eval(t), 0.0, end, Default::default()).unwrap().value;
        assert!((l1 - k.l1_norm()).abs() < 1e-8);
        for &t in &[0.3, 1.0, 2.5, 7.0] {
            let mut breaks: Vec<f64> = [0.0, 0.5, 2.0, 3.0].into_iter().filter(|&b| b < t).collect();
            breaks.push(t);
            let q = integrate_breaks(|v| (t - v) * k.eval(v), &breaks, Default::default()).unwrap().value;
            assert!((q - k.double_integral(t)).abs() < 1e-10, "t={t}: {q} vs {}", k.double_integral(t));
        }
    }
}

#[test]
fn intensity_examples() {
    let h = standard::hawkes();
    assert_eq!(h.intensity_at(&[], 5.0).unwrap(), 1.0);
    assert_relative_eq!(h.intensity_at(&[4.0], 5.0).unwrap(), 1.0 + 0.5 * (-1.0f64).exp(), max_relative = 1e-15);
    assert!((h.intensity_at(&[4.0], 5.0).unwrap() - 1.18394).abs() < 1e-5);
    // events at or after t do not contribute
    assert_eq!(h.intensity_at(&[5.0, 6.0], 5.0).unwrap(), 1.0);
    let sc = ArrivalModel::self_correcting(StressRate::ClampedExp { lambda_minus: 0.5, lambda_plus: 2.0 }).unwrap();
    assert_eq!(sc.intensity_at(&[1.0, 2.0], 3.0).unwrap(), 2.0);
    assert_relative_eq!(sc.intensity_at(&[1.0, 2.0], 2.5).unwrap(), 0.5f64.exp());
    assert!(matches!(h.intensity_at(&[2.0, 1.0], 3.0), Err(Error::Domain(_))));
}

#[test]
fn sampler_intensity_agrees_with_direct_sum() {
    // accepted points must satisfy y ≤ λ(t); check the recursion against the direct sum
    let models =
        [standard::hawkes(), ArrivalModel::hawkes(0.7, Kernel::tabulated(vec![0.0, 1.0, 3.0], vec![0.4, 0.2, 0.05]).unwrap()).unwrap()];
    for m in &models {
        let path = simulate(m, 200.0, &mut PathStream::from_seed(3)).unwrap();
        let direct = m.intensity_at(&path.times, 150.0).unwrap();
        let mut sampler = ArrivalSampler::new(m);
        let mut stream = PathStream::from_seed(3);
        while sampler.next_arrival(&mut stream, 150.0).unwrap().is_some() {}
        let n = path.count_before(150.0);
        assert_eq!(sampler.count() as usize, n);
        assert!(direct > 0.7);
    }
}

#[test]
fn nonpositive_horizon_rejected() {
    let m = standard::hawkes();
    assert!(matches!(simulate(&m, 0.0, &mut PathStream::from_seed(1)), Err(Error::Domain(_))));
    assert!(matches!(simulate(&m, -3.0, &mut PathStream::from_seed(1)), Err(Error::Domain(_))));
}

#[test]
fn candidate_budget_enforced() {
    let m = standard::hawkes();
    let mut s = ArrivalSampler::new(&m).with_budget(50);
    let mut stream = PathStream::from_seed(1);
    let mut result = Ok(None);
    for _ in 0..1000 {
        result = s.next_arrival(&mut stream, 1e6);
        if result.is_err() {
            break;
        }
    }
    assert!(matches!(result, Err(Error::SimulationBudget { .. })));
}

#[test]
fn paths_are_ordered_and_inside_horizon() {
    for m in [standard::hawkes(), standard::cox(), standard::self_correcting(), ArrivalModel::poisson(2.0).unwrap()] {
        let p = simulate(&m, 300.0, &mut PathStream::from_seed(5)).unwrap();
        assert!(p.times.windows(2).all(|w| w[0] < w[1]));
        assert!(p.times.iter().all(|&t| t > 0.0 && t <= 300.0));
    }
}

#[test]
fn determinism_and_prefix_consistency() {
    for m in [standard::hawkes(), standard::cox(), standard::self_correcting(), ArrivalModel::poisson(2.0).unwrap()] {
        let a = simulate(&m, 100.0, &mut PathStream::from_seed(9)).unwrap();
        let b = simulate(&m, 100.0, &mut PathStream::from_seed(9)).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        let long = simulate(&m, 180.0, &mut PathStream::from_seed(9)).unwrap();
        assert_eq!(&long.times[..a.count()], &a.times[..]);
        assert!(long.times.get(a.count()).is_none_or(|&t| t > 100.0));
    }
}

#[test]
fn poisson_lln() {
    let p = simulate(&ArrivalModel::poisson(1.0).unwrap(), 1e4, &mut PathStream::from_seed(2)).unwrap();
    let rate = p.count() as f64 / 1e4;
    assert!((rate - 1.0).abs() < 5.0 * 0.01, "{rate}");
}

#[test]
fn hawkes_lln() {
    let counts = run_counts(&standard::hawkes(), 1e3, 100, 4);
    let r = mean(&counts) / 1e3;
    assert!((r - 2.0).abs() < 0.1, "{r}");
}

#[test]
fn self_correcting_lln() {
    let counts = run_counts(&standard::self_correcting(), 1e3, 20, 4);
    for c in counts {
        assert!((c / 1e3 - 1.0).abs() < 0.1);
    }
}

#[test]
fn expected_count_poisson() {
    let m = ArrivalModel::poisson(2.0).unwrap();
    let e = expected_count(&m, 50.0, 4000, &RngStreamPlan::new(8), 1).unwrap();
    assert_eq!(e.exact, Some(100.0));
    assert!((e.mc_mean - 100.0).abs() < 4.0 * e.std_error);
}

#[test]
fn expected_count_cox_exact_value() {
    let m = standard::cox();
    let exact = m.exact_expected_count(100.0).unwrap();
    let closed = 100.0 + (0.5 * 100.0 - 0.25 * (1.0 - (-200.0f64).exp()));
    assert_relative_eq!(exact, closed, max_relative = 1e-14);
    assert!((exact - 149.75).abs() < 1e-9);
    // independent route: quadrature of the double integral
    let inner = |s: f64| integrate(|v| (-2.0 * v).exp(), 0.0, s, Default::default()).unwrap().value;
    let q = 100.0 + integrate(inner, 0.0, 100.0, Default::default()).unwrap().value;
    assert!((q - exact).abs() < 1e-8);
    let e = expected_count(&m, 100.0, 4000, &RngStreamPlan::new(2), 1).unwrap();
    assert!((e.mc_mean - exact).abs() < 4.0 * e.std_error, "{} vs {exact}", e.mc_mean);
}

#[test]
fn expected_count_cox_relaxing_and_tabulated() {
    let m = ArrivalModel::cox(
        Baseline::Relaxing { nu: 1.0, nu0: 3.0, rate: 0.2 },
        0.8,
        Kernel::tabulated(vec![0.0, 1.0, 4.0], vec![0.9, 0.5, 0.1]).unwrap(),
    )
    .unwrap();
    let exact = m.exact_expected_count(30.0).unwrap();
    let e = expected_count(&m, 30.0, 6000, &RngStreamPlan::new(12), 1).unwrap();
    assert!((e.mc_mean - exact).abs() < 4.0 * e.std_error, "{} vs {exact}", e.mc_mean);
}

#[test]
fn expected_count_hawkes_below_bound() {
    let m = standard::hawkes();
    let e = expected_count(&m, 1e3, 200, &RngStreamPlan::new(3), 1).unwrap();
    assert_eq!(e.upper_bound, 2e3);
    let r = e.mc_mean / 1e3;
    assert!((1.9..=2.0).contains(&r), "{r}");
    let exact = e.exact.unwrap();
    assert!(exact < e.upper_bound);
    assert!((e.mc_mean - exact).abs() < 4.0 * e.std_error);
}

#[test]
fn tabulated_hawkes_matches_renewal_equation() {
    // m(t) = E[λ_t] solves m(t) = ν + ∫₀ᵗ h(t − s) m(s) ds; E[N_T] = ∫₀ᵀ m
    let kernel = Kernel::tabulated(vec![0.0, 1.0, 2.0], vec![0.4, 0.2, 0.1]).unwrap();
    let nu = 1.0;
    let horizon = 10.0;
    let steps = 4000;
    let dt = horizon / steps as f64;
    let mut m = vec![nu; steps + 1];
    for i in 1..=steps {
        let t = i as f64 * dt;
        let mut acc = 0.5 * kernel.eval(t) * m[0];
        for (j, mj) in m.iter().enumerate().take(i).skip(1) {
            acc += kernel.eval(t - j as f64 * dt) * mj;
        }
        // implicit trapezoid end point
        m[i] = (nu + dt * acc) / (1.0 - 0.5 * dt * kernel.eval(0.0));
    }
    let en: f64 = dt * (m.iter().sum::<f64>() - 0.5 * (m[0] + m[steps]));
    let model = ArrivalModel::hawkes(nu, kernel).unwrap();
    let e = expected_count(&model, horizon, 20_000, &RngStreamPlan::new(21), 1).unwrap();
    assert!((e.mc_mean - en).abs() < 4.0 * e.std_error + 1e-3, "{} vs {en}", e.mc_mean);
}

#[test]
fn hawkes_first_arrival_is_exponential() {
    let m = standard::hawkes();
    let plan = RngStreamPlan::new(77);
    let n = 100_000;
    let mut firsts: Vec<f64> = (0..n)
        .map(|i| {
            let mut s = ArrivalSampler::new(&m);
            s.next_arrival(&mut plan.stream_for(i), 1e3).unwrap().unwrap()
        })
        .collect();
    firsts.sort_by(f64::total_cmp);
    let ks = firsts
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let f = 1.0 - (-t).exp();
            (f - i as f64 / n as f64).abs().max((f - (i + 1) as f64 / n as f64).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks <= 5.0 / (n as f64).sqrt(), "ks {ks}");
}

#[test]
fn coupling_is_monotone_in_baseline() {
    let lo = standard::hawkes();
    let hi = ArrivalModel::hawkes(1.3, Kernel::exp(0.5, 1.0).unwrap()).unwrap();
    let plan = RngStreamPlan::new(5);
    for i in 0..200 {
        let a = simulate(&lo, 200.0, &mut plan.stream_for(i)).unwrap();
        let b = simulate(&hi, 200.0, &mut plan.stream_for(i)).unwrap();
        assert!(a.times.iter().all(|t| b.times.binary_search_by(|x| x.total_cmp(t)).is_ok()));
        for &t in &[10.0, 50.0, 200.0] {
            assert!(b.count_before(t) >= a.count_before(t));
        }
    }
}

#[test]
fn coupling_is_monotone_in_stress_rate() {
    let lo = ArrivalModel::self_correcting(StressRate::Logistic { lambda_minus: 0.5, lambda_plus: 2.0, slope: 1.0 }).unwrap();
    let hi = ArrivalModel::self_correcting(StressRate::Logistic { lambda_minus: 0.5, lambda_plus: 2.0, slope: 3.0 }).unwrap();
    // the steeper logistic is not pointwise larger; shift it instead via tabulated forms
    let _ = hi;
    let lo_tab = StressRate::Tabulated { z: vec![-2.0, 0.0, 2.0], values: vec![0.5, 1.0, 1.8] };
    let hi_tab = StressRate::Tabulated { z: vec![-2.0, 0.0, 2.0], values: vec![0.7, 1.4, 1.8] };
    let pairs = [
        (lo.clone(), ArrivalModel::self_correcting(StressRate::Logistic { lambda_minus: 0.7, lambda_plus: 2.0, slope: 1.0 }).unwrap()),
        (ArrivalModel::self_correcting(lo_tab).unwrap(), ArrivalModel::self_correcting(hi_tab).unwrap()),
    ];
    let plan = RngStreamPlan::new(6);
    for (a_model, b_model) in &pairs {
        for i in 0..200 {
            let a = simulate(a_model, 300.0, &mut plan.stream_for(i)).unwrap();
            let b = simulate(b_model, 300.0, &mut plan.stream_for(i)).unwrap();
            for k in 1..=30 {
                let t = 10.0 * k as f64;
                assert!(b.count_before(t) >= a.count_before(t));
            }
        }
    }
}

#[test]
fn self_correcting_stays_near_its_mean() {
    let m = standard::self_correcting();
    let plan = RngStreamPlan::new(31);
    let checkpoints = [100.0, 500.0, 1000.0];
    let mut z = vec![Vec::new(); 3];
    for i in 0..300 {
        let p = simulate(&m, 1000.0, &mut plan.stream_for(i)).unwrap();
        for (k, &t) in checkpoints.iter().enumerate() {
            z[k].push(t - p.count_before(t) as f64);
        }
    }
    for zs in &z {
        assert!(mean(zs).abs() < 3.0);
    }
    // N_t = t − Z_t, so Var(N_t)/t = Var(Z_t)/t shrinks
    assert!(var(&z[2]) / 1000.0 < var(&z[0]) / 100.0);
    assert!(var(&z[2]) < 10.0);
}

#[test]
fn csv_has_time_column() {
    let p = ArrivalPath { horizon: 2.0, times: vec![0.5, 1.25] };
    assert_eq!(p.to_csv(), "time\n0.5\n1.25\n");
}
