use condsym::power::*;
use condsym::Error;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

/// Exact `P(Bin(trials, num/den) ≤ k)` in rational arithmetic.
fn exact_cdf(k: i64, trials: u32, num: i64, den: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let p = BigRational::new(BigInt::from(num), BigInt::from(den));
    let q = BigRational::one() - &p;
    let mut sum = BigRational::zero();
    let mut choose = BigInt::one();
    for j in 0..=(k.min(trials as i64) as u32) {
        if j > 0 {
            choose = choose * BigInt::from(trials - j + 1) / BigInt::from(j);
        }
        let term = BigRational::from_integer(choose.clone()) * num_traits::pow(p.clone(), j as usize) * num_traits::pow(q.clone(), (trials - j) as usize);
        sum += term;
    }
    sum.to_f64().unwrap()
}

fn inputs(delta: f64) -> PowerBoundInputs {
    PowerBoundInputs { n: 200, b: 99, alpha: 0.05, nu: 1.0, eta: 1.0, delta, l: None }
}

#[test]
fn remainder_term_by_term() {
    let (n, nu, eta) = (100.0f64, 1.0f64, 1.0f64);
    let terms = [
        9.0 / (2.0 * n) * nu * nu,
        16.0 * nu * nu * 2f64.sqrt() / (n * n * n).sqrt(),
        6.0 * nu * (2.0 / n).sqrt(),
        1.5 * nu * eta.sqrt() * (2.0 / n + 32.0 * (2.0 / (n * n * n)).sqrt()).sqrt(),
        4.0 * eta * nu / n,
    ];
    let expect: f64 = terms.iter().sum();
    assert!((r_n_eta(100, 1.0, 1.0).unwrap() - expect).abs() < 1e-12);
    // the √(2/n) terms alone give 7.5·√2·10⁻⁴ at n = 10⁸
    let at_1e8 = r_n_eta(100_000_000, 1.0, 1.0).unwrap();
    assert!((at_1e8 - 7.5 * 2f64.sqrt() * 1e-4).abs() < 1e-6);
    assert!(r_n_eta(1_000_000_000, 1.0, 1.0).unwrap() < 1e-3);
    let mut prev = 0.0;
    for k in 1..50 {
        let r = r_n_eta(100, 1.0, 0.1 * k as f64).unwrap();
        assert!(r > prev);
        prev = r;
    }
}

#[test]
fn remainder_errors() {
    assert!(matches!(r_n_eta(0, 1.0, 1.0), Err(Error::InvalidArgument(_))));
    assert!(r_n_eta(10, 0.0, 1.0).is_err());
    assert!(r_n_eta(10, 1.0, -1.0).is_err());
    assert!(success_prob(-0.1, 10, 1.0, 1.0).is_err());
    assert!(adaptive_success_prob(1.0, 10, 1.0, 1.0, 0).is_err());
}

#[test]
fn success_probability_cases() {
    assert_eq!(success_prob(0.0, 50, 1.0, 1.0).unwrap(), 1.0);
    assert!(success_prob(1e4, 50, 1.0, 1.0).unwrap() < 1e-300);
    let r = r_n_eta(80, 1.5, 0.5).unwrap();
    assert!((success_prob(2.0 * r / 3.0, 80, 1.5, 0.5).unwrap() - 1.0).abs() < 1e-15);
    for delta in [0.5, 1.0, 3.0, 10.0] {
        let base = success_prob(delta, 300, 1.0, 1.0).unwrap();
        assert_eq!(adaptive_success_prob(delta, 300, 1.0, 1.0, 1).unwrap(), base);
        let mut prev = base;
        for l in 2..30 {
            let p = adaptive_success_prob(delta, 300, 1.0, 1.0, l).unwrap();
            assert!(p >= prev);
            prev = p;
        }
    }
    assert!(adaptive_success_prob(1e4, 300, 1.0, 1.0, 20).unwrap() < 1e-300);
}

#[test]
fn bound_degenerate_cases() {
    assert_eq!(binomial_cdf(4, 99, 0.0).unwrap(), 1.0);
    assert_eq!(binomial_cdf(4, 99, 1.0).unwrap(), 0.0);
    assert_eq!(binomial_cdf(-1, 99, 0.3).unwrap(), 0.0);
    assert_eq!(binomial_cdf(99, 99, 0.3).unwrap(), 1.0);
    assert!(binomial_cdf(2, 10, 1.5).is_err());
    // p_η = 1 at zero separation
    assert_eq!(power_lower_bound(&inputs(0.0)).unwrap(), 0.0);
    assert!((power_lower_bound(&inputs(1e3)).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn binomial_cdf_hand_sum() {
    let mut sum = 0.0;
    let mut choose = 1.0f64;
    for k in 0..=4 {
        if k > 0 {
            choose *= (99 - k + 1) as f64 / k as f64;
        }
        sum += choose * 0.01f64.powi(k) * 0.99f64.powi(99 - k);
    }
    assert!((binomial_cdf(4, 99, 0.01).unwrap() - sum).abs() < 1e-12);
    assert!((binomial_cdf(4, 99, 0.01).unwrap() - exact_cdf(4, 99, 1, 100)).abs() < 1e-12);
}

#[test]
fn binomial_cdf_matches_rational_oracle() {
    for trials in [1u32, 2, 5, 13, 30, 50] {
        for num in [1i64, 37, 250, 500, 731, 999] {
            for k in -1..=(trials as i64) {
                let got = binomial_cdf(k, trials as usize, num as f64 / 1000.0).unwrap();
                let want = exact_cdf(k, trials, num, 1000);
                assert!((got - want).abs() < 1e-12, "B={trials} p={num}/1000 k={k}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn b_alpha_floor() {
    assert_eq!(b_alpha(99, 0.05), 4);
    assert_eq!(b_alpha(19, 0.05), 0);
    assert_eq!(b_alpha(9, 0.05), -1);
    assert_eq!(b_alpha(199, 0.1), 19);
}

#[test]
fn bound_is_monotone_in_separation() {
    for (b, alpha) in [(19usize, 0.1), (99, 0.05), (199, 0.05), (999, 0.01)] {
        let mut prev = 0.0;
        for k in 0..400 {
            let delta = 0.02 * k as f64;
            let bound = power_lower_bound(&PowerBoundInputs { b, alpha, ..inputs(delta) }).unwrap();
            assert!(bound >= prev - 1e-15, "B={b} alpha={alpha} delta={delta}");
            assert!((0.0..=1.0).contains(&bound));
            prev = bound;
        }
    }
}

#[test]
fn report_fields() {
    let r = power_bound_report(&inputs(0.05)).unwrap();
    assert!(r.below_threshold);
    assert!((r.delta_min - 2.0 * (2.0f64 / 200.0).sqrt()).abs() < 1e-15);
    assert_eq!(r.b_alpha, 4);
    let r = power_bound_report(&inputs(2.0)).unwrap();
    assert!(!r.below_threshold);
    assert_eq!(r.p_eta, success_prob(2.0, 200, 1.0, 1.0).unwrap());
    let adaptive = power_bound_report(&PowerBoundInputs { l: Some(10), ..inputs(2.0) }).unwrap();
    assert!(adaptive.p_eta >= r.p_eta && adaptive.bound <= r.bound);
    assert!(power_lower_bound(&PowerBoundInputs { alpha: 1.0, ..inputs(1.0) }).is_err());
    assert!(power_lower_bound(&PowerBoundInputs { b: 0, ..inputs(1.0) }).is_err());
    assert!(power_lower_bound(&PowerBoundInputs { l: Some(0), ..inputs(1.0) }).is_err());
    let json = serde_json::to_string(&r).unwrap();
    let back: PowerBoundReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, r);
}

#[test]
fn threshold_limits_and_errors() {
    let r = r_n_eta(500, 1.0, 1.0).unwrap();
    let limit = (2.0 / 3.0) * (r - (4.0f64 / 99.0).ln());
    let t = delta_threshold(1e-12, 99, 0.05, 500, 1.0, 1.0).unwrap();
    assert!((t - limit).abs() < 1e-5);
    let mut prev = f64::NEG_INFINITY;
    for k in 1..60 {
        let t = delta_threshold(0.01 * k as f64, 99, 0.05, 500, 1.0, 1.0).unwrap();
        assert!(t > prev);
        prev = t;
    }
    assert!(matches!(delta_threshold(0.5, 19, 0.05, 500, 1.0, 1.0), Err(Error::Domain(_))));
    assert!(matches!(delta_threshold(0.99, 99, 0.05, 500, 1.0, 1.0), Err(Error::Domain(_))));
    assert!(delta_threshold(0.0, 99, 0.05, 500, 1.0, 1.0).is_err());
    assert!(delta_threshold(0.5, 99, 1.5, 500, 1.0, 1.0).is_err());
}

#[test]
fn threshold_round_trip() {
    for (b, alpha) in [(99usize, 0.05), (199, 0.05), (499, 0.05), (999, 0.01), (199, 0.1)] {
        let ba = b_alpha(b, alpha) as f64;
        for beta in [0.05, 0.2, 0.5, 0.8] {
            if -2.0 * (1.0f64 - beta).ln() / ba >= 1.0 {
                continue;
            }
            for n in [50usize, 500] {
                let t = delta_threshold(beta, b, alpha, n, 1.0, 1.0).unwrap();
                let p = success_prob(t, n, 1.0, 1.0).unwrap();
                // the success probability sits at the Chernoff-side target
                let eps = (-2.0 * (1.0f64 - beta).ln() / ba).sqrt();
                assert!((b as f64 * p - ba * (1.0 - eps)).abs() < 1e-9 * ba);
                // Chernoff: P(Bin > B_α) ≤ exp(-ε² B_α / 2) = 1 - β
                let chernoff = 1.0 - (-eps * eps * ba / 2.0).exp();
                assert!((chernoff - beta).abs() < 1e-12);
                let bound = power_lower_bound(&PowerBoundInputs { n, b, alpha, nu: 1.0, eta: 1.0, delta: t, l: None }).unwrap();
                assert!(bound >= beta, "B={b} alpha={alpha} beta={beta} n={n}: bound {bound}");
            }
        }
    }
}

proptest! {
    #[test]
    fn cdf_is_monotone(trials in 1usize..300, k in 0i64..300, p in 0.0f64..1.0) {
        let a = binomial_cdf(k, trials, p).unwrap();
        let b = binomial_cdf(k + 1, trials, p).unwrap();
        prop_assert!(a <= b + 1e-15);
        let c = binomial_cdf(k, trials, (p + 0.05).min(1.0)).unwrap();
        prop_assert!(c <= a + 1e-12);
    }

    #[test]
    fn remainder_vanishes_with_n(nu in 0.1f64..5.0, eta in 0.1f64..5.0, n in 1usize..10_000) {
        let a = r_n_eta(n, nu, eta).unwrap();
        let b = r_n_eta(4 * n, nu, eta).unwrap();
        prop_assert!(b < a);
    }
}
