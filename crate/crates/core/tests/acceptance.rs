mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{big, float_value, q, random_form, random_lattice, random_pattern, real, rng, span};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use periodalg::approx::{continued_fraction, dirichlet_find, kronecker_find, orbit_discrepancy, KroneckerResult};
use periodalg::exactreal::{ExactReal, RadicalBasis, Sign};
use periodalg::funcalg::{parse, Counterexample};
use periodalg::lattice::{classify_group, CoeffLattice, GroupKind};
use rand::Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn below(eps: &ExactReal, err: &ExactReal) -> bool {
    (eps - &err.abs().unwrap()).sign().unwrap() == Sign::Positive
}

fn sign_function() -> Check {
    let d = span(&[2, 3]);
    let f = parse("sgn(sqrt(3))", &d).map_err(|e| e.to_string())?;
    let gens = f.period_module().map_err(|e| e.to_string())?.generators_real();
    ensure(gens == vec![real("1"), real("sqrt(2)"), real("2*sqrt(3)")], format!("generators {gens:?}"))?;
    let c = real("1").commensurable(&real("sqrt(2)")).map_err(|e| e.to_string())?;
    ensure(c.is_none(), "1 and sqrt(2) reported commensurable")?;
    Ok("generators [1, sqrt(2), 2*sqrt(3)]; 1, sqrt(2) incommensurable".into())
}

fn cancelling_sum() -> Check {
    let d = span(&[2, 3]);
    let f1 = parse("recip(sqrt(2)) - recip(sqrt(3))", &d).unwrap();
    let f2 = parse("recip(one) + recip(sqrt(3))", &d).unwrap();
    let s = f1.add(&f2);
    ensure(s == parse("recip(one) + recip(sqrt(2))", &d).unwrap(), format!("canonical sum {s}"))?;
    let g1 = f1.period_module().unwrap().generators_real();
    let g2 = f2.period_module().unwrap().generators_real();
    ensure(g1 == vec![real("1")] && g2 == vec![real("sqrt(2)")], format!("summand periods {g1:?}, {g2:?}"))?;
    ensure(g1[0].commensurable(&g2[0]).unwrap().is_none(), "summand periods commensurable")?;
    ensure(s.period_module().unwrap().contains(&real("sqrt(3)")), "sqrt(3) not a period of the sum")?;
    Ok(format!("sum = {s}; periods 1 | sqrt(2) | sqrt(3)"))
}

fn intersected_product() -> Check {
    let d1 = span(&[2, 3, 5]);
    let d2 = span(&[2, 3, 7]);
    ensure(d1.intersect(&d2) == span(&[2, 3]), "domain intersection")?;
    let g1 = parse("abs1(one)*abs1(sqrt(3))", &d1).unwrap();
    let g2 = parse("abs1(sqrt(2))/abs1(sqrt(3))", &d2).unwrap();
    let p1 = g1.period_module().unwrap().generators_real();
    let p2 = g2.period_module().unwrap().generators_real();
    let p = g1.mul(&g2).period_module().unwrap().generators_real();
    ensure(p1 == vec![real("sqrt(2)"), real("sqrt(5)")], format!("first factor {p1:?}"))?;
    ensure(p2 == vec![real("1"), real("sqrt(7)")], format!("second factor {p2:?}"))?;
    ensure(p == vec![real("sqrt(3)")], format!("product {p:?}"))?;
    Ok("periods [sqrt(2), sqrt(5)] | [1, sqrt(7)] | [sqrt(3)]".into())
}

fn discrete_or_dense() -> Check {
    ensure(classify_group(&[real("1"), real("sqrt(2)")]).unwrap() == GroupKind::Dense, "1, sqrt(2) not dense")?;
    let mut r = rng(101);
    for _ in 0..200 {
        let ts: Vec<ExactReal> = (0..r.gen_range(1..=5))
            .map(|_| {
                let mut n = 0;
                while n == 0 {
                    n = r.gen_range(-30..=30);
                }
                ExactReal::from_ratio(n, r.gen_range(1..=12))
            })
            .collect();
        let GroupKind::Discrete(t0) = classify_group(&ts).unwrap() else {
            return Err(format!("rational list {ts:?} classified dense"));
        };
        for t in &ts {
            let ratio = t.checked_div(&t0).unwrap().to_rational().unwrap();
            ensure(ratio.is_integer(), format!("{t0} does not divide {t}"))?;
        }
    }
    let mut shifts = 0;
    for _ in 0..100 {
        let den = [6i64, 8, 12][r.gen_range(0..3)];
        let p = random_pattern(&mut r, den);
        let t0 = p.fundamental_period().unwrap().to_rational().unwrap();
        for k in 0..(2 * den) {
            let t = q(k, 2 * den);
            if p.is_invariant(&ExactReal::from_rational(t.clone())).unwrap() {
                ensure((&t / &t0).is_integer(), format!("{p}: invariant shift {t} not a multiple of {t0}"))?;
                shifts += 1;
            }
        }
    }
    Ok(format!("200 rational lists discrete; {shifts} invariant shifts over 100 patterns"))
}

fn irrational_rotation() -> Check {
    let mut r = rng(102);
    let alphas = [real("sqrt(2) - 1"), real("1/2*sqrt(5) - 1/2")];
    for _ in 0..50 {
        let den = r.gen_range(3..=12);
        let p = random_pattern(&mut r, den);
        for a in &alphas {
            let d = p.symdiff_measure(&p.rotate(a).unwrap()).unwrap();
            ensure(d.sign().unwrap() == Sign::Positive, format!("{p} invariant under {a}"))?;
        }
    }
    let golden = real("1/2*sqrt(5) - 1/2");
    let mut worst: f64 = 0.0;
    for n in [100u64, 1000, 10000] {
        let d = orbit_discrepancy(&golden, n).unwrap().to_f64().unwrap();
        let c = n as f64 * d / (n as f64).ln();
        ensure(c <= 3.0, format!("N = {n}: N*D/log N = {c}"))?;
        worst = worst.max(c);
    }
    Ok(format!("100 rotations move their pattern; max N*D/log N = {worst:.3}"))
}

fn approximation_witnesses() -> Check {
    let eps = real("1/10000");
    let w = dirichlet_find(&real("1"), &real("sqrt(2)"), &real("sqrt(3)"), &eps).map_err(|e| e.to_string())?;
    let direct = &(&ExactReal::from_integer(w.m.clone()) + &(&ExactReal::from_integer(w.n.clone()) * &real("sqrt(2)"))) - &real("sqrt(3)");
    ensure(direct == w.error && below(&eps, &direct), "dirichlet witness fails exact check")?;
    // brute force: smallest |n| with ||n*sqrt(2) - sqrt(3)|| < eps
    let (a, b) = (2f64.sqrt(), 3f64.sqrt());
    let bf = (0..2_000_000i64)
        .flat_map(|k| [k, -k])
        .find(|&n| {
            let y = b - n as f64 * a;
            (y - y.round()).abs() < 0.999e-4
        })
        .ok_or("brute-force dirichlet found nothing")?;
    let m = (b - bf as f64 * a).round() as i64;
    let bf_err = &(&ExactReal::from_integer(m) + &(&ExactReal::from_integer(bf) * &real("sqrt(2)"))) - &real("sqrt(3)");
    ensure(below(&eps, &bf_err), "brute-force dirichlet witness fails exact check")?;

    let eps = real("1/100");
    let ts = [real("1"), real("sqrt(3)")];
    let KroneckerResult::Found { q: qq, ps, errors } = kronecker_find(&real("sqrt(2)"), &ts, &real("1/2"), &eps).unwrap() else {
        return Err("no kronecker witness".into());
    };
    for ((t, p), e) in ts.iter().zip(&ps).zip(&errors) {
        let direct = &(&(&ExactReal::from_integer(qq.clone()) * &real("sqrt(2)")) - &(&ExactReal::from_integer(p.clone()) * t)) - &real("1/2");
        ensure(&direct == e && below(&eps, e), "kronecker witness fails exact check")?;
    }
    let tf = [1.0, 3f64.sqrt()];
    let bq = (1..=100_000u64)
        .find(|&k| {
            tf.iter().all(|t| {
                let y = (k as f64 * a - 0.5) / t;
                ((y - y.round()) * t).abs() < 0.01
            })
        })
        .ok_or("brute-force kronecker found nothing")?;
    ensure(BigInt::from(bq) == qq, format!("kronecker q = {qq}, brute force q = {bq}"))?;
    Ok(format!("dirichlet (m, n) = ({}, {}), brute force n = {bf}; kronecker q = {qq}", w.m, w.n))
}

fn oracle_suites() -> Check {
    let mut r = rng(103);
    let b = RadicalBasis::new([1, 2, 3]).unwrap();
    let d = CoeffLattice::full(b.clone());
    let (mut sound, mut complete) = (0, 0);
    while sound < 200 {
        let f = random_form(&mut r, &d, 3);
        for t in f.period_module().unwrap().generators_real() {
            ensure(!f.find_counterexample(&t, 25).unwrap().is_witness(), format!("{f}: period {t} refuted"))?;
        }
        sound += 1;
    }
    while complete < 500 {
        let f = random_form(&mut r, &d, 3);
        let pm = f.period_module().unwrap();
        let s: Vec<BigInt> = (0..3).map(|_| BigInt::from(r.gen_range(-5..=5))).collect();
        if pm.lattice.member(&s).unwrap() {
            continue;
        }
        let t = ExactReal::from_integer_coords(&b, &s);
        let Counterexample::Witness { point, before, after } = f.find_counterexample(&t, 25).unwrap() else {
            return Err(format!("{f}: non-period {t} has no witness in the box"));
        };
        let moved: Vec<BigInt> = point.iter().zip(&s).map(|(x, y)| x + y).collect();
        ensure(before != after && f.evaluate(&moved).unwrap() == after, "witness does not check")?;
        complete += 1;
    }

    let mut lattices = 0;
    for k in [2usize, 3] {
        let lb = RadicalBasis::new([1, 2, 3][..k].iter().copied()).unwrap();
        let radius: i64 = if k == 2 { 8 } else { 4 };
        for _ in 0..60 {
            let l1 = random_lattice(&mut r, &lb, k, 3);
            let l2 = random_lattice(&mut r, &lb, k, 3);
            let both = l1.intersect(&l2);
            let mut pts = vec![vec![]];
            for _ in 0..k {
                pts = pts.into_iter().flat_map(|v: Vec<i64>| (-radius..=radius).map(move |x| [v.clone(), vec![x]].concat())).collect();
            }
            for v in pts {
                let expect = l1.member(&big(&v)).unwrap() && l2.member(&big(&v)).unwrap();
                ensure(both.member(&big(&v)).unwrap() == expect, format!("{v:?}: {l1} and {l2}"))?;
            }
            lattices += 1;
        }
    }

    for src in ["sqrt(2)", "sqrt(3)", "1 + sqrt(5)", "1/2 + 1/2*sqrt(5)"] {
        let x = real(src);
        let cf = continued_fraction(&x, 16).unwrap();
        for n in 0..15 {
            ensure(cf.error_bound_holds(n).unwrap(), format!("{src}: convergent {n}"))?;
            let err = (float_value(&x) - cf.convergent(n).to_f64().unwrap()).abs();
            let bound = 1.0 / (cf.convergents[n].1.to_f64().unwrap() * cf.convergents[n + 1].1.to_f64().unwrap());
            ensure(err <= bound * (1.0 + 1e-9) + 4e-15, format!("{src}: float check at {n}"))?;
        }
    }
    Ok(format!(
        "{} function instances ({sound} sound, {complete} complete); {lattices} intersections; 4 expansions to depth 15",
        sound + complete
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check, u64); 7] = [
        ("sign function periods", sign_function, 1),
        ("sum with cancelling terms", cancelling_sum, 1),
        ("product over intersected domains", intersected_product, 1),
        ("discrete or dense period groups", discrete_or_dense, 10),
        ("irrational rotation of interval sets", irrational_rotation, 30),
        ("approximation witnesses", approximation_witnesses, 60),
        ("oracle suites", oracle_suites, 120),
    ];
    let mut failed = 0;
    for (name, check, limit) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let on_time = elapsed <= Duration::from_secs(limit);
        let (status, detail) = match (&result, on_time) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("too slow; {d}")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{status} {name} [{:.3} s / {limit} s] {detail}", elapsed.as_secs_f64());
    }
    println!("acceptance: {} of 7 criteria passed", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
