#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use periodalg::exactreal::{ExactReal, RadicalBasis};
use periodalg::funcalg::{Atom, CanonicalForm, Monomial};
use periodalg::lattice::CoeffLattice;
use periodalg::pointsets::IntervalPattern;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn real(s: &str) -> ExactReal {
    s.parse().unwrap()
}

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| x.into()).collect()
}

pub fn basis(ds: &[u64]) -> RadicalBasis {
    RadicalBasis::new(ds.iter().copied()).unwrap()
}

pub fn span(ds: &[u64]) -> CoeffLattice {
    CoeffLattice::full(basis(ds))
}

/// Element of Q(√2, √3, √5) with small coefficients.
pub fn random_real(rng: &mut impl Rng) -> ExactReal {
    let mut x = ExactReal::zero();
    for d in [1u64, 2, 3, 5, 6, 10, 15] {
        if rng.gen_bool(0.5) {
            let c = ExactReal::from_ratio(rng.gen_range(-9..=9), rng.gen_range(1..=6));
            x = &x + &(&c * &ExactReal::sqrt(d));
        }
    }
    x
}

pub fn random_lattice(rng: &mut impl Rng, basis: &RadicalBasis, max_rows: usize, entry: i64) -> CoeffLattice {
    let k = basis.len();
    let rows: Vec<Vec<i64>> =
        (0..rng.gen_range(1..=max_rows)).map(|_| (0..k).map(|_| rng.gen_range(-entry..=entry)).collect()).collect();
    CoeffLattice::from_rows(basis.clone(), &rows).unwrap()
}

pub fn random_atom(rng: &mut impl Rng, radicands: &[u64]) -> (Atom, i64) {
    let d = *radicands.choose(rng).unwrap();
    if rng.gen_bool(0.4) {
        (Atom::sgn(d), 1)
    } else {
        let e = *[-1i64, 1, 1, 2].choose(rng).unwrap();
        (Atom::abs1(d, rng.gen_range(-2..=2)), e)
    }
}

/// Random form with 1 to `max_terms` terms over `domain`.
pub fn random_form(rng: &mut impl Rng, domain: &CoeffLattice, max_terms: usize) -> CanonicalForm {
    let radicands = domain.basis().radicands().to_vec();
    let terms: Vec<(Monomial, BigRational)> = (0..rng.gen_range(1..=max_terms))
        .map(|_| {
            let mut m = Monomial::one();
            for _ in 0..rng.gen_range(1..=2) {
                let (a, e) = random_atom(rng, &radicands);
                m = m.mul(&Monomial::atom(a, e));
            }
            let mut c = 0;
            while c == 0 {
                c = rng.gen_range(-4..=4);
            }
            (m, q(c, rng.gen_range(1..=3)))
        })
        .collect();
    CanonicalForm::from_terms(domain.clone(), terms)
}

/// Form whose atoms only read `abs1` on `abs_coords` and `sgn` on pairs of
/// coordinates from `sgn_pairs`, so a shift vector with zero on
/// `abs_coords` and even sums over each pair is a period.
pub fn form_with_shared_period(
    rng: &mut impl Rng,
    domain: &CoeffLattice,
    abs_coords: &[u64],
    sgn_pairs: &[(u64, u64)],
) -> CanonicalForm {
    let terms: Vec<(Monomial, BigRational)> = (0..rng.gen_range(1..=3))
        .map(|_| {
            let mut m = Monomial::one();
            if !abs_coords.is_empty() && rng.gen_bool(0.7) {
                let d = *abs_coords.choose(rng).unwrap();
                m = m.mul(&Monomial::atom(Atom::abs1(d, rng.gen_range(-2..=2)), *[-1i64, 1].choose(rng).unwrap()));
            }
            if !sgn_pairs.is_empty() && rng.gen_bool(0.7) {
                let (a, b) = *sgn_pairs.choose(rng).unwrap();
                m = m.mul(&Monomial::atom(Atom::sgn(a), 1)).mul(&Monomial::atom(Atom::sgn(b), 1));
            }
            (m, q(rng.gen_range(1..=5), rng.gen_range(1..=3)))
        })
        .collect();
    CanonicalForm::from_terms(domain.clone(), terms)
}

/// Random nonempty proper pattern mod 1 with up to 3 components and
/// endpoints in `(1/den)Z`.
pub fn random_pattern(rng: &mut impl Rng, den: i64) -> IntervalPattern {
    loop {
        let mut cuts: Vec<i64> = (0..rng.gen_range(1..=3) * 2).map(|_| rng.gen_range(0..den)).collect();
        cuts.sort();
        cuts.dedup();
        if cuts.len() % 2 == 1 {
            cuts.pop();
        }
        if cuts.len() < 2 {
            continue;
        }
        let shift = rng.gen_range(0..den);
        let intervals: Vec<_> = cuts
            .chunks(2)
            .map(|c| (ExactReal::from_ratio(c[0] + shift, den), ExactReal::from_ratio(c[1] + shift, den)))
            .collect();
        if let Ok(p) = IntervalPattern::new(ExactReal::one(), intervals) {
            if p.is_nontrivial() {
                return p;
            }
        }
    }
}

/// Pattern invariant under rotation by `1/reps`, built by repeating a random
/// motif.
pub fn random_periodic_pattern(rng: &mut impl Rng, reps: i64) -> IntervalPattern {
    let den = 12i64;
    let a = rng.gen_range(0..den - 1);
    let b = rng.gen_range(a + 1..den);
    let intervals: Vec<_> = (0..reps)
        .map(|j| (ExactReal::from_ratio(a + j * den, den * reps), ExactReal::from_ratio(b + j * den, den * reps)))
        .collect();
    IntervalPattern::new(ExactReal::one(), intervals).unwrap()
}

/// f64 value with an independent error estimate small next to typical
/// magnitudes of the test elements.
pub fn float_value(x: &ExactReal) -> f64 {
    x.coords()
        .iter()
        .map(|(&d, c)| {
            let (n, m): (f64, f64) = (c.numer().to_string().parse().unwrap(), c.denom().to_string().parse().unwrap());
            n / m * (d as f64).sqrt()
        })
        .sum()
}
