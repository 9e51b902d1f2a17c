mod common;

use std::thread;
use std::time::Duration;

use common::{float_value, real};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use periodalg::approx::{
    continued_fraction, dirichlet_find, dirichlet_find_with, kronecker_find, kronecker_find_with, orbit_discrepancy,
    ApproxError, CancelToken, KroneckerResult, SearchOptions,
};
use periodalg::exactreal::{ExactReal, Sign};

fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| x.into()).collect()
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap()
}

#[test]
fn continued_fraction_quotients_and_bounds() {
    let cases: [(&str, fn(usize) -> i64); 4] = [
        ("sqrt(2)", |i| if i == 0 { 1 } else { 2 }),
        ("sqrt(3)", |i| if i == 0 || i % 2 == 1 { 1 } else { 2 }),
        ("1 + sqrt(5)", |i| if i == 0 { 3 } else { 4 }),
        ("1/2 + 1/2*sqrt(5)", |_| 1),
    ];
    for (src, quotient) in cases {
        let x = real(src);
        let cf = continued_fraction(&x, 16).unwrap();
        assert!(!cf.terminated);
        let expect: Vec<i64> = (0..16).map(quotient).collect();
        assert_eq!(cf.quotients, ints(&expect), "{src}");
        for n in 0..15 {
            assert!(cf.error_bound_holds(n).unwrap(), "{src} at {n}");
            let (p, qn) = &cf.convergents[n];
            // independent check: recurrence and p_n q_{n-1} - p_{n-1} q_n = ±1
            if n > 0 {
                let (pp, qp) = &cf.convergents[n - 1];
                assert_eq!((p * qp - pp * qn).abs(), BigInt::from(1));
            }
            let err = (float_value(&x) - to_f64(&cf.convergent(n))).abs();
            let bound = 1.0 / (qn.to_f64().unwrap() * cf.convergents[n + 1].1.to_f64().unwrap());
            assert!(err <= bound * (1.0 + 1e-9) + 4e-15, "{src} at {n}");
        }
    }
    // Pell: p_n^2 - 2 q_n^2 = ±1 for sqrt(2)
    let cf = continued_fraction(&real("sqrt(2)"), 15).unwrap();
    for (p, qn) in &cf.convergents {
        assert_eq!((p * p - BigInt::from(2) * qn * qn).abs(), BigInt::from(1));
    }
    let r = continued_fraction(&real("415/93"), 10).unwrap();
    assert!(r.terminated);
    assert_eq!(r.quotients, ints(&[4, 2, 6, 7]));
}

/// Smallest `|n|` (then `n ≥ 0` first) with `|m + n√2 − √3| < eps`, using
/// f64 arithmetic that stays far from the threshold at these sizes.
fn brute_dirichlet(eps: f64, limit: i64) -> Option<(i64, i64)> {
    let (a, b) = (2f64.sqrt(), 3f64.sqrt());
    for k in 0..=limit {
        for n in [k, -k] {
            let y = b - n as f64 * a;
            let m = y.round();
            if (m - y).abs() < eps * 0.999 {
                return Some((m as i64, n));
            }
        }
    }
    None
}

#[test]
fn dirichlet_against_brute_force() {
    let (t1, t2, target) = (real("1"), real("sqrt(2)"), real("sqrt(3)"));
    for e in 2..=6u32 {
        let eps = ExactReal::from_rational(BigRational::new(1.into(), BigInt::from(10).pow(e)));
        let w = dirichlet_find(&t1, &t2, &target, &eps).unwrap();
        let recomputed = &(&(&ExactReal::from_integer(w.m.clone()) * &t1) + &(&ExactReal::from_integer(w.n.clone()) * &t2)) - &target;
        assert_eq!(recomputed, w.error);
        assert_eq!((&eps - &w.error.abs().unwrap()).sign().unwrap(), Sign::Positive, "eps 1e-{e}");
        let eps_f = 10f64.powi(-(e as i32));
        let (m, n) = brute_dirichlet(eps_f, 2_000_000).expect("brute force witness");
        // the brute-force witness is also exactly valid
        let bf = &(&ExactReal::from_integer(m) + &(&ExactReal::from_integer(n) * &t2)) - &target;
        assert_eq!((&eps - &bf.abs().unwrap()).sign().unwrap(), Sign::Positive);
        assert!((float_value(&w.error)).abs() < eps_f);
    }
}

#[test]
fn dirichlet_rejects_commensurable_pairs() {
    let err = dirichlet_find(&real("sqrt(2)"), &real("3*sqrt(2)"), &real("1"), &real("1/100")).unwrap_err();
    assert!(matches!(err, ApproxError::CommensurableInput));
}

/// Least `q ≥ 1` with `|q·√2 − p_i·T_i − 1/2| < eps` for `T = (1, √3)`.
fn brute_kronecker(eps: f64, limit: u64) -> Option<u64> {
    let t = 2f64.sqrt();
    let ts = [1.0, 3f64.sqrt()];
    (1..=limit).find(|&qq| {
        ts.iter().all(|ti| {
            let y = (qq as f64 * t - 0.5) / ti;
            ((y - y.round()) * ti).abs() < eps
        })
    })
}

#[test]
fn kronecker_against_brute_force() {
    let t = real("sqrt(2)");
    let ts = [real("1"), real("sqrt(3)")];
    let delta = real("1/2");
    for den in [10i64, 20, 50] {
        let eps = ExactReal::from_ratio(1, den);
        let expect = brute_kronecker(1.0 / den as f64, 10_000);
        match kronecker_find(&t, &ts, &delta, &eps).unwrap() {
            KroneckerResult::Found { q: qq, ps, errors } => {
                assert_eq!(Some(qq.to_u64().unwrap()), expect, "eps 1/{den}");
                for ((ti, p), e) in ts.iter().zip(&ps).zip(&errors) {
                    let direct = &(&(&ExactReal::from_integer(qq.clone()) * &t) - &(&ExactReal::from_integer(p.clone()) * ti)) - &delta;
                    assert_eq!(&direct, e);
                    assert_eq!((&eps - &e.abs().unwrap()).sign().unwrap(), Sign::Positive);
                }
            }
            KroneckerResult::NotFound { .. } => panic!("no witness at eps 1/{den}"),
        }
    }
}

#[test]
fn kronecker_on_incommensurable_periods() {
    // periods 1 and √2 of the sign example, with shifts taken from its domain
    let eps = real("1/1000");
    for delta in ["0", "1/2", "sqrt(3)", "sqrt(3) - 1"] {
        let delta = real(delta);
        let res = kronecker_find_with(&real("sqrt(2)"), &[real("1")], &delta, &eps, &SearchOptions::with_bound(100_000)).unwrap();
        let KroneckerResult::Found { q: qq, ps, errors } = res else { panic!("no witness below 10^5 for {delta}") };
        assert!(qq <= BigInt::from(100_000));
        let direct = &(&(&ExactReal::from_integer(qq) * &real("sqrt(2)")) - &ExactReal::from_integer(ps[0].clone())) - &delta;
        assert_eq!(direct, errors[0]);
        assert_eq!((&eps - &direct.abs().unwrap()).sign().unwrap(), Sign::Positive);
    }
    let tiny = kronecker_find_with(
        &real("sqrt(2)"),
        &[real("1"), real("sqrt(3)")],
        &real("1/2"),
        &real("1/1000000"),
        &SearchOptions::with_bound(1000),
    )
    .unwrap();
    assert_eq!(tiny, KroneckerResult::NotFound { bound: 1000 });
}

/// Star discrepancy from sorted f64 points.
fn float_discrepancy(alpha: f64, n: u64) -> f64 {
    let mut xs: Vec<f64> = (0..n).map(|i| (i as f64 * alpha).rem_euclid(1.0)).collect();
    xs.sort_by(f64::total_cmp);
    let nf = n as f64;
    xs.iter().enumerate().map(|(k, x)| ((k as f64 + 1.0) / nf - x).max(x - k as f64 / nf)).fold(0.0, f64::max)
}

#[test]
fn discrepancy_against_float_oracle() {
    for (src, n) in [("sqrt(2) - 1", 50u64), ("1/2*sqrt(5) - 1/2", 300), ("sqrt(3) - 1", 777), ("1/7", 20)] {
        let a = real(src);
        let d = to_f64(&orbit_discrepancy(&a, n).unwrap());
        let oracle = float_discrepancy(float_value(&a), n);
        assert!(d >= oracle - 1e-9 && d <= oracle + 1e-9, "{src}, N = {n}: {d} vs {oracle}");
    }
}

#[test]
fn discrepancy_by_hand() {
    // sorted points of i(√2 − 1): the gap after 5√2 − 7 sets D* = 1/5 − (5√2 − 7)
    let d = orbit_discrepancy(&real("sqrt(2) - 1"), 10).unwrap();
    let exact = real("36/5 - 5*sqrt(2)");
    let slack = &ExactReal::from_rational(d) - &exact;
    assert_ne!(slack.sign().unwrap(), Sign::Negative);
    assert_eq!((&real("1/1000000000000") - &slack).sign().unwrap(), Sign::Positive);
}

#[test]
fn golden_discrepancy_is_logarithmic() {
    let a = real("1/2*sqrt(5) - 1/2");
    for n in [100u64, 1000, 10000] {
        let d = to_f64(&orbit_discrepancy(&a, n).unwrap());
        let c = n as f64 * d / (n as f64).ln();
        assert!(c <= 3.0, "N = {n}: N*D/log N = {c}");
        assert!(d > 0.0);
    }
}

#[test]
fn cancellation_stops_searches() {
    let token = CancelToken::new();
    token.cancel();
    let opts = SearchOptions { bound: u64::MAX, cancel: Some(token) };
    let err = kronecker_find_with(&real("sqrt(2)"), &[real("1"), real("sqrt(3)")], &real("1/2"), &q_real(1, 10i64.pow(9)), &opts)
        .unwrap_err();
    assert!(matches!(err, ApproxError::Cancelled));

    let token = CancelToken::new();
    let remote = token.clone();
    let worker = thread::spawn(move || {
        let opts = SearchOptions { bound: u64::MAX, cancel: Some(token) };
        kronecker_find_with(&real("sqrt(2)"), &[real("1"), real("sqrt(3)"), real("sqrt(5)")], &real("1/2"), &q_real(1, 10i64.pow(12)), &opts)
    });
    thread::sleep(Duration::from_millis(50));
    remote.cancel();
    assert!(matches!(worker.join().unwrap(), Err(ApproxError::Cancelled)));

    let token = CancelToken::new();
    token.cancel();
    let opts = SearchOptions { bound: u64::MAX, cancel: Some(token) };
    let err = dirichlet_find_with(&real("1"), &real("sqrt(2)"), &real("sqrt(3)"), &q_real(1, 10i64.pow(15)), &opts);
    assert!(matches!(err, Err(ApproxError::Cancelled)));
}

fn q_real(n: i64, d: i64) -> ExactReal {
    ExactReal::from_ratio(n, d)
}
