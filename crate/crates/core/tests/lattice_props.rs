mod common;

use std::collections::{HashSet, VecDeque};

use common::{basis, big, random_lattice, real, rng, span};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use periodalg::exactreal::ExactReal;
use periodalg::lattice::{classify_group, CoeffLattice, GroupKind};
use rand::seq::SliceRandom;
use rand::Rng;

fn rows_i64(l: &CoeffLattice) -> Vec<Vec<i64>> {
    l.generators().iter().map(|r| r.iter().map(|x| i64::try_from(x).unwrap()).collect()).collect()
}

fn det(m: &[Vec<i64>]) -> i64 {
    match m.len() {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => (0..m.len())
            .map(|j| {
                let minor: Vec<Vec<i64>> =
                    m[1..].iter().map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect()).collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * m[0][j] * det(&minor)
            })
            .sum(),
    }
}

/// Index of the lattice in Z^k: gcd of the k×k minors of the generator
/// matrix (0 when rank < k).
fn index_by_minors(gens: &[Vec<i64>], k: usize) -> i64 {
    fn choose(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            choose(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut subsets = Vec::new();
    choose(gens.len(), k, 0, &mut Vec::new(), &mut subsets);
    subsets.iter().fold(0i64, |g, s| g.gcd(&det(&s.iter().map(|&i| gens[i].clone()).collect::<Vec<_>>())))
}

/// Residues of the lattice modulo `d`, for a full-rank lattice of index `d`.
fn residues(gens: &[Vec<i64>], d: i64) -> HashSet<Vec<i64>> {
    let k = gens[0].len();
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([vec![0i64; k]]);
    seen.insert(vec![0i64; k]);
    while let Some(v) = queue.pop_front() {
        for g in gens {
            let w: Vec<i64> = v.iter().zip(g).map(|(a, b)| (a + b).rem_euclid(d)).collect();
            if seen.insert(w.clone()) {
                queue.push_back(w);
            }
        }
    }
    seen
}

fn boxed(k: usize, r: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out.into_iter().flat_map(|v| (-r..=r).map(move |x| [v.clone(), vec![x]].concat())).collect();
    }
    out
}

#[test]
fn member_agrees_with_coefficient_enumeration() {
    let mut r = rng(21);
    let b = basis(&[1, 2, 3]);
    for _ in 0..60 {
        let l = random_lattice(&mut r, &b, 3, 2);
        let gens = rows_i64(&l);
        let mut reached = HashSet::new();
        for c in boxed(gens.len(), 10) {
            let v: Vec<i64> = (0..3).map(|j| gens.iter().zip(&c).map(|(g, ci)| g[j] * ci).sum()).collect();
            reached.insert(v);
        }
        for v in &reached {
            assert!(l.member_i64(v).unwrap(), "{v:?} in {l}");
        }
        for v in boxed(3, 3) {
            let vb = big(&v);
            match l.solve(&vb).unwrap() {
                Some(coeffs) => {
                    let back: Vec<BigInt> = (0..3)
                        .map(|j| l.hnf_rows().iter().zip(&coeffs).map(|(h, c)| &h[j] * c).sum())
                        .collect();
                    assert_eq!(back, vb);
                }
                None => assert!(!reached.contains(&v)),
            }
        }
    }
}

#[test]
fn member_agrees_with_modular_oracle() {
    let mut r = rng(22);
    for k in [2usize, 3] {
        let b = basis(&[1, 2, 3][..k]);
        let mut tested = 0;
        while tested < 40 {
            let l = random_lattice(&mut r, &b, k + 1, 3);
            let gens = rows_i64(&l);
            let d = index_by_minors(&gens, k).abs();
            if d == 0 || d > 60 {
                continue;
            }
            assert_eq!(l.determinant(), Some(BigInt::from(d)));
            let res = residues(&gens, d);
            for v in boxed(k, 6) {
                let m: Vec<i64> = v.iter().map(|x| x.rem_euclid(d)).collect();
                assert_eq!(l.member_i64(&v).unwrap(), res.contains(&m), "{v:?} in {l}");
            }
            tested += 1;
        }
    }
}

#[test]
fn intersection_agrees_with_membership() {
    let mut r = rng(23);
    let mut instances = 0;
    for k in [2usize, 3] {
        let b = basis(&[1, 2, 3][..k]);
        let radius = if k == 2 { 8 } else { 5 };
        for _ in 0..60 {
            let l1 = random_lattice(&mut r, &b, k, 3);
            let l2 = random_lattice(&mut r, &b, k, 3);
            let both = l1.intersect(&l2);
            for v in boxed(k, radius) {
                let expect = l1.member_i64(&v).unwrap() && l2.member_i64(&v).unwrap();
                assert_eq!(both.member_i64(&v).unwrap(), expect, "{v:?}: {l1} ∩ {l2} = {both}");
            }
            instances += 1;
        }
    }
    assert!(instances >= 100);
}

#[test]
fn intersection_examples() {
    let d1 = span(&[2, 3, 5]);
    let d2 = span(&[2, 3, 7]);
    assert_eq!(d1.intersect(&d2), span(&[2, 3]));
    assert_eq!(d1.intersect(&d1), d1);
    let b = basis(&[1, 2]);
    let a = CoeffLattice::from_rows(b.clone(), &[vec![2, 0], vec![0, 1]]).unwrap();
    let c = CoeffLattice::from_rows(b.clone(), &[vec![3, 0], vec![0, 1]]).unwrap();
    assert_eq!(a.intersect(&c), CoeffLattice::from_rows(b, &[vec![6, 0], vec![0, 1]]).unwrap());
}

#[test]
fn hnf_is_canonical() {
    let mut r = rng(24);
    let b = basis(&[1, 2, 3]);
    for _ in 0..200 {
        let l = random_lattice(&mut r, &b, 4, 4);
        let mut gens = rows_i64(&l);
        // duplicate, add a combination, negate, shuffle
        let i = r.gen_range(0..gens.len());
        gens.push(gens[i].clone());
        let j = r.gen_range(0..gens.len());
        let c = r.gen_range(-3..=3);
        let combo: Vec<i64> = gens[i].iter().zip(&gens[j]).map(|(x, y)| x + c * y).collect();
        gens.push(combo);
        gens[0] = gens[0].iter().map(|x| -x).collect();
        gens.shuffle(&mut r);
        let m = CoeffLattice::from_rows(b.clone(), &gens).unwrap();
        assert_eq!(m.hnf_rows(), l.hnf_rows());
        assert_eq!(m, l);
    }
}

#[test]
fn classify_group_properties() {
    let mut r = rng(25);
    for _ in 0..200 {
        let unit = match r.gen_range(0..3) {
            0 => ExactReal::one(),
            1 => real("sqrt(3)"),
            _ => real("2 + sqrt(5)"),
        };
        let ts: Vec<ExactReal> = (0..r.gen_range(1..=4))
            .map(|_| {
                let mut n = 0;
                while n == 0 {
                    n = r.gen_range(-12..=12);
                }
                unit.scale(&common::q(n, r.gen_range(1..=8)))
            })
            .collect();
        let GroupKind::Discrete(t0) = classify_group(&ts).unwrap() else { panic!("commensurable inputs") };
        assert!(t0.sign().unwrap() == periodalg::exactreal::Sign::Positive);
        let mut g = BigInt::zero();
        for t in &ts {
            let n = t.checked_div(&t0).unwrap().to_integer().expect("integer multiple of T0");
            g = g.gcd(&n);
        }
        assert!(g.is_one(), "T0 is an integer combination of the inputs");
    }
    assert_eq!(classify_group(&[real("1"), real("sqrt(2)")]).unwrap(), GroupKind::Dense);
    assert_eq!(
        classify_group(&[real("sqrt(3)"), real("2*sqrt(3)"), real("5/2*sqrt(3)")]).unwrap(),
        GroupKind::Discrete(real("1/2*sqrt(3)"))
    );
}
