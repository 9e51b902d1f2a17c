//! Exact arithmetic in multiquadratic fields `Q(√p₁, …, √p_r)`.
//!
//! An [`ExactReal`] is a finite rational combination `Σ c_d·√d` over distinct
//! squarefree radicands `d`. Square roots of distinct squarefree integers are
//! linearly independent over `Q`, so an element is zero exactly when every
//! coordinate is zero; order comparisons go through dyadic interval
//! enclosures that are refined until they exclude zero.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign as BigSign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::syntax::{Cursor, SyntaxError, Tok};

/// Starting precision of sign determination, in bits.
pub const INITIAL_PRECISION: u32 = 64;
/// Precision beyond which sign determination gives up.
pub const MAX_PRECISION: u32 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("radicand {0} is not a squarefree positive integer")]
    InvalidRadicand(u64),
    #[error("incompatible bases: {0}")]
    IncompatibleBasis(String),
    #[error("basis is not closed under multiplication: missing sqrt({radicand})")]
    BasisNotClosed { radicand: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("sign undecided at {bits} bits of precision")]
    PrecisionExhausted { bits: u32 },
    #[error("radicand product overflows 64 bits")]
    Overflow,
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

/// Sign of an exact real.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Negative = -1,
    Zero = 0,
    Positive = 1,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        self as i8
    }
}

pub fn is_squarefree(n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut m = n;
    let mut p = 2u64;
    while p.saturating_mul(p) <= m {
        if m.is_multiple_of(p) {
            m /= p;
            if m.is_multiple_of(p) {
                return false;
            }
        }
        p += 1;
    }
    true
}

/// Splits `n` as `outer² · inner` with `inner` squarefree.
pub fn squarefree_split(n: u64) -> (u64, u64) {
    let (mut outer, mut inner) = (1u64, 1u64);
    let mut m = n;
    let mut p = 2u64;
    while p.saturating_mul(p) <= m {
        let mut e = 0;
        while m.is_multiple_of(p) {
            m /= p;
            e += 1;
        }
        for _ in 0..e / 2 {
            outer *= p;
        }
        if e % 2 == 1 {
            inner *= p;
        }
        p += 1;
    }
    (outer, inner * m)
}

fn largest_prime_factor(n: u64) -> Option<u64> {
    if n < 2 {
        return None;
    }
    let mut m = n;
    let mut largest = 1;
    let mut p = 2u64;
    while p.saturating_mul(p) <= m {
        while m.is_multiple_of(p) {
            m /= p;
            largest = p;
        }
        p += 1;
    }
    Some(if m > 1 { m } else { largest })
}

/// `√a·√b = g·√r` with `g = gcd(a, b)` and `r = (a/g)(b/g)`.
pub fn reduce_product(a: u64, b: u64) -> Result<(u64, u64), ExactError> {
    let g = a.gcd(&b);
    let r = (a / g).checked_mul(b / g).ok_or(ExactError::Overflow)?;
    Ok((g, r))
}

/// Ordered set of squarefree radicands, always starting with 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RadicalBasis {
    radicands: Vec<u64>,
}

impl RadicalBasis {
    /// Builds a basis from any collection of squarefree radicands; 1 is
    /// always included and duplicates are dropped.
    pub fn new(radicands: impl IntoIterator<Item = u64>) -> Result<Self, ExactError> {
        let mut v: Vec<u64> = radicands.into_iter().collect();
        for &d in &v {
            if !is_squarefree(d) {
                return Err(ExactError::InvalidRadicand(d));
            }
        }
        v.push(1);
        v.sort_unstable();
        v.dedup();
        Ok(RadicalBasis { radicands: v })
    }

    /// The basis `{1}` of the rationals.
    pub fn rational() -> Self {
        RadicalBasis { radicands: vec![1] }
    }

    pub fn radicands(&self) -> &[u64] {
        &self.radicands
    }

    pub fn len(&self) -> usize {
        self.radicands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radicands.is_empty()
    }

    pub fn index_of(&self, d: u64) -> Option<usize> {
        self.radicands.binary_search(&d).ok()
    }

    pub fn contains(&self, d: u64) -> bool {
        self.index_of(d).is_some()
    }

    pub fn merge(&self, other: &RadicalBasis) -> RadicalBasis {
        let mut v = self.radicands.clone();
        v.extend_from_slice(&other.radicands);
        v.sort_unstable();
        v.dedup();
        RadicalBasis { radicands: v }
    }

    pub fn is_subset_of(&self, other: &RadicalBasis) -> bool {
        self.radicands.iter().all(|&d| other.contains(d))
    }

    /// Smallest basis containing this one and closed under pairwise
    /// product reduction.
    pub fn closure(&self) -> Result<RadicalBasis, ExactError> {
        let mut set: Vec<u64> = self.radicands.clone();
        let mut frontier = set.clone();
        while !frontier.is_empty() {
            let mut fresh = Vec::new();
            for &a in &frontier {
                for &b in &set.clone() {
                    let (_, r) = reduce_product(a, b)?;
                    if !set.contains(&r) && !fresh.contains(&r) {
                        fresh.push(r);
                    }
                }
            }
            set.extend_from_slice(&fresh);
            frontier = fresh;
        }
        set.sort_unstable();
        Ok(RadicalBasis { radicands: set })
    }

    pub fn is_closed(&self) -> bool {
        self.radicands.iter().all(|&a| {
            self.radicands
                .iter()
                .all(|&b| reduce_product(a, b).is_ok_and(|(_, r)| self.contains(r)))
        })
    }

    /// The basis element `√d` as an exact real.
    pub fn element(&self, index: usize) -> ExactReal {
        let d = self.radicands[index];
        ExactReal::from_coords(self.clone(), [(d, BigRational::one())])
    }
}

impl fmt::Display for RadicalBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("basis(")?;
        for (i, d) in self.radicands.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            if *d == 1 {
                f.write_str("1")?;
            } else {
                write!(f, "sqrt({d})")?;
            }
        }
        f.write_str(")")
    }
}

/// Element of a multiquadratic field, `Σ coords[d]·√d`.
///
/// Equality compares values: two elements with different bases but the same
/// nonzero coordinates are equal.
#[derive(Debug, Clone)]
pub struct ExactReal {
    basis: RadicalBasis,
    coords: BTreeMap<u64, BigRational>,
}

impl PartialEq for ExactReal {
    fn eq(&self, other: &Self) -> bool {
        self.coords == other.coords
    }
}

impl Eq for ExactReal {}

impl std::hash::Hash for ExactReal {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.coords.hash(state);
    }
}

impl ExactReal {
    pub fn zero() -> Self {
        ExactReal { basis: RadicalBasis::rational(), coords: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Self::from_rational(BigRational::from_integer(n.into()))
    }

    pub fn from_rational(q: BigRational) -> Self {
        Self::from_coords(RadicalBasis::rational(), [(1, q)])
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::from_rational(BigRational::new(numer.into(), denom.into()))
    }

    /// `√n` for any non-negative integer, with square factors pulled out.
    pub fn sqrt(n: u64) -> Self {
        if n == 0 {
            return Self::zero();
        }
        let (outer, inner) = squarefree_split(n);
        let basis = RadicalBasis::new([inner]).expect("squarefree part");
        Self::from_coords(basis, [(inner, BigRational::from_integer(outer.into()))])
    }

    /// Builds an element from `(radicand, coefficient)` pairs. Radicands
    /// missing from `basis` are added to it. Panics on a radicand that is not
    /// squarefree; use [`ExactReal::try_from_coords`] for untrusted input.
    pub fn from_coords(
        basis: RadicalBasis,
        coords: impl IntoIterator<Item = (u64, BigRational)>,
    ) -> Self {
        Self::try_from_coords(basis, coords).expect("valid radicands")
    }

    pub fn try_from_coords(
        basis: RadicalBasis,
        coords: impl IntoIterator<Item = (u64, BigRational)>,
    ) -> Result<Self, ExactError> {
        let mut map: BTreeMap<u64, BigRational> = BTreeMap::new();
        for (d, c) in coords {
            if !is_squarefree(d) {
                return Err(ExactError::InvalidRadicand(d));
            }
            *map.entry(d).or_insert_with(BigRational::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        let basis = if map.keys().all(|&d| basis.contains(d)) {
            basis
        } else {
            basis.merge(&RadicalBasis::new(map.keys().copied())?)
        };
        Ok(ExactReal { basis, coords: map })
    }

    /// Integer combination `Σ v_i·√d_i` of the basis elements.
    pub fn from_integer_coords(basis: &RadicalBasis, v: &[BigInt]) -> Self {
        assert_eq!(v.len(), basis.len(), "coordinate vector length");
        let pairs = basis
            .radicands()
            .iter()
            .zip(v)
            .map(|(&d, c)| (d, BigRational::from_integer(c.clone())));
        Self::from_coords(basis.clone(), pairs)
    }

    pub fn basis(&self) -> &RadicalBasis {
        &self.basis
    }

    /// Nonzero coordinates, keyed by radicand.
    pub fn coords(&self) -> &BTreeMap<u64, BigRational> {
        &self.coords
    }

    pub fn coord(&self, d: u64) -> BigRational {
        self.coords.get(&d).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Radicands with a nonzero coefficient.
    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.coords.keys().copied()
    }

    /// Same value, expressed over `basis` merged with the current one.
    pub fn with_basis(&self, basis: &RadicalBasis) -> Self {
        ExactReal { basis: self.basis.merge(basis), coords: self.coords.clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_rational(&self) -> bool {
        self.coords.keys().all(|&d| d == 1)
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_rational().then(|| self.coord(1))
    }

    pub fn to_integer(&self) -> Option<BigInt> {
        self.to_rational().filter(|q| q.is_integer()).map(|q| q.to_integer())
    }

    /// Coordinates over `basis` when all of them are integers; `None` if some
    /// coefficient is fractional or lies outside `basis`.
    pub fn integer_coords(&self, basis: &RadicalBasis) -> Option<Vec<BigInt>> {
        if !self.coords.keys().all(|&d| basis.contains(d)) {
            return None;
        }
        basis
            .radicands()
            .iter()
            .map(|&d| {
                let c = self.coord(d);
                c.is_integer().then(|| c.to_integer())
            })
            .collect()
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return ExactReal { basis: self.basis.clone(), coords: BTreeMap::new() };
        }
        ExactReal {
            basis: self.basis.clone(),
            coords: self.coords.iter().map(|(&d, c)| (d, c * q)).collect(),
        }
    }

    /// Product over the multiplicative closure of both bases.
    pub fn checked_mul(&self, other: &Self) -> Result<Self, ExactError> {
        let target = self.basis.merge(&other.basis).closure()?;
        mul_in(&target, self, other)
    }

    pub fn invert(&self) -> Result<Self, ExactError> {
        if self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        if let Some(q) = self.to_rational() {
            return Ok(ExactReal::from_rational(q.recip()).with_basis(&self.basis));
        }
        let p = self
            .coords
            .keys()
            .filter_map(|&d| largest_prime_factor(d))
            .max()
            .expect("irrational element has a prime radicand");
        // x = a + b·√p with a, b free of √p; x·(a − b√p) = a² − p·b².
        let conj = ExactReal {
            basis: self.basis.clone(),
            coords: self
                .coords
                .iter()
                .map(|(&d, c)| (d, if d % p == 0 { -c.clone() } else { c.clone() }))
                .collect(),
        };
        let norm = self.checked_mul(&conj)?;
        debug_assert!(norm.coords.keys().all(|d| d % p != 0));
        let inv = conj.checked_mul(&norm.invert()?)?;
        Ok(inv)
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, ExactError> {
        self.checked_mul(&other.invert()?)
    }

    /// Integer dyadic enclosure `lo ≤ x·2^bits ≤ hi`.
    pub fn enclose(&self, bits: u32) -> (BigInt, BigInt) {
        let mut lo = BigInt::zero();
        let mut hi = BigInt::zero();
        for (&d, c) in &self.coords {
            let (tl, th) = enclose_term(c, d, bits);
            lo += tl;
            hi += th;
        }
        (lo, hi)
    }

    pub fn sign(&self) -> Result<Sign, ExactError> {
        if self.is_zero() {
            return Ok(Sign::Zero);
        }
        if let Some(q) = self.to_rational() {
            return Ok(if q.is_positive() { Sign::Positive } else { Sign::Negative });
        }
        let mut bits = INITIAL_PRECISION;
        loop {
            let (lo, hi) = self.enclose(bits);
            if lo.is_positive() {
                return Ok(Sign::Positive);
            }
            if hi.is_negative() {
                return Ok(Sign::Negative);
            }
            if bits >= MAX_PRECISION {
                return Err(ExactError::PrecisionExhausted { bits });
            }
            bits *= 2;
        }
    }

    pub fn cmp_exact(&self, other: &Self) -> Result<Ordering, ExactError> {
        Ok(match (self - other).sign()? {
            Sign::Negative => Ordering::Less,
            Sign::Zero => Ordering::Equal,
            Sign::Positive => Ordering::Greater,
        })
    }

    pub fn abs(&self) -> Result<Self, ExactError> {
        Ok(if self.sign()? == Sign::Negative { -self } else { self.clone() })
    }

    /// The unique integer `n` with `n ≤ x < n + 1`.
    pub fn floor(&self) -> Result<BigInt, ExactError> {
        if let Some(q) = self.to_rational() {
            return Ok(q.floor().to_integer());
        }
        let (lo, _) = self.enclose(INITIAL_PRECISION);
        let mut n = lo >> INITIAL_PRECISION as usize;
        loop {
            let below = self - &ExactReal::from_integer(n.clone());
            if below.sign()? == Sign::Negative {
                n -= 1;
                continue;
            }
            let above = &below - &ExactReal::one();
            if above.sign()? != Sign::Negative {
                n += 1;
                continue;
            }
            return Ok(n);
        }
    }

    /// Nearest integer, ties rounded up.
    pub fn round(&self) -> Result<BigInt, ExactError> {
        (self + &ExactReal::from_ratio(1, 2)).floor()
    }

    /// `x − L·⌊x/L⌋`, the representative in `[0, L)` for `L > 0`.
    pub fn rem_euclid(&self, modulus: &Self) -> Result<Self, ExactError> {
        let k = self.checked_div(modulus)?.floor()?;
        Ok(self - &modulus.scale(&BigRational::from_integer(k)))
    }

    /// `x / y` when it is rational, i.e. when the two are commensurable.
    pub fn commensurable(&self, other: &Self) -> Result<Option<BigRational>, ExactError> {
        if self.is_zero() || other.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        if self.coords.len() != other.coords.len() {
            return Ok(None);
        }
        let (&d0, y0) = other.coords.iter().next().expect("nonzero");
        let ratio = match self.coords.get(&d0) {
            Some(x0) => x0 / y0,
            None => return Ok(None),
        };
        let parallel = other
            .coords
            .iter()
            .all(|(d, y)| self.coords.get(d).is_some_and(|x| *x == y * &ratio));
        Ok(parallel.then_some(ratio))
    }

    /// Floating-point approximation; never used for decisions.
    pub fn to_f64(&self) -> f64 {
        const BITS: u32 = 96;
        let (lo, hi) = self.enclose(BITS);
        let mid: BigInt = (lo + hi) / 2;
        let m = mid.to_f64().unwrap_or(f64::NAN);
        m / 2f64.powi(BITS as i32)
    }

    /// Decimal rendering with 12 significant digits.
    pub fn to_decimal(&self) -> String {
        format_decimal(self.to_f64())
    }
}

pub fn format_decimal(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    let decimals = 11 - exp;
    if (0..=20).contains(&decimals) {
        let s = format!("{v:.prec$}", prec = decimals as usize);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else if decimals < 0 && exp < 15 {
        format!("{v:.0}")
    } else {
        format!("{v:.11e}")
    }
}

fn enclose_term(c: &BigRational, d: u64, bits: u32) -> (BigInt, BigInt) {
    let n = c.numer();
    let m = c.denom();
    let scaled = (n * n * BigInt::from(d)) << (2 * bits as usize);
    let s = scaled.sqrt();
    let s_hi = if &s * &s == scaled { s.clone() } else { &s + 1 };
    if n.sign() == BigSign::Minus {
        (-s_hi.div_ceil(m), -s.div_floor(m))
    } else {
        (s.div_floor(m), s_hi.div_ceil(m))
    }
}

/// Product with the result constrained to `basis`.
pub fn mul_in(basis: &RadicalBasis, x: &ExactReal, y: &ExactReal) -> Result<ExactReal, ExactError> {
    let mut coords: BTreeMap<u64, BigRational> = BTreeMap::new();
    for (&a, ca) in &x.coords {
        for (&b, cb) in &y.coords {
            let (g, r) = reduce_product(a, b)?;
            if !basis.contains(r) {
                return Err(ExactError::BasisNotClosed { radicand: r });
            }
            *coords.entry(r).or_insert_with(BigRational::zero) +=
                ca * cb * BigRational::from_integer(g.into());
        }
    }
    coords.retain(|_, c| !c.is_zero());
    Ok(ExactReal { basis: basis.clone(), coords })
}

impl Add<&ExactReal> for &ExactReal {
    type Output = ExactReal;

    fn add(self, rhs: &ExactReal) -> ExactReal {
        let mut coords = self.coords.clone();
        for (&d, c) in &rhs.coords {
            let e = coords.entry(d).or_insert_with(BigRational::zero);
            *e += c;
            if e.is_zero() {
                coords.remove(&d);
            }
        }
        ExactReal { basis: self.basis.merge(&rhs.basis), coords }
    }
}

impl Sub<&ExactReal> for &ExactReal {
    type Output = ExactReal;

    fn sub(self, rhs: &ExactReal) -> ExactReal {
        self + &(-rhs)
    }
}

impl Neg for &ExactReal {
    type Output = ExactReal;

    fn neg(self) -> ExactReal {
        ExactReal {
            basis: self.basis.clone(),
            coords: self.coords.iter().map(|(&d, c)| (d, -c)).collect(),
        }
    }
}

impl Mul<&ExactReal> for &ExactReal {
    type Output = ExactReal;

    /// Panics only if a radicand product overflows `u64`.
    fn mul(self, rhs: &ExactReal) -> ExactReal {
        self.checked_mul(rhs).expect("radicand product overflow")
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<ExactReal> for ExactReal {
            type Output = ExactReal;
            fn $m(self, rhs: ExactReal) -> ExactReal { (&self).$m(&rhs) }
        }
        impl $tr<&ExactReal> for ExactReal {
            type Output = ExactReal;
            fn $m(self, rhs: &ExactReal) -> ExactReal { (&self).$m(rhs) }
        }
        impl $tr<ExactReal> for &ExactReal {
            type Output = ExactReal;
            fn $m(self, rhs: ExactReal) -> ExactReal { self.$m(&rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for ExactReal {
    type Output = ExactReal;

    fn neg(self) -> ExactReal {
        -&self
    }
}

impl From<i64> for ExactReal {
    fn from(n: i64) -> Self {
        ExactReal::from_integer(n)
    }
}

impl From<BigRational> for ExactReal {
    fn from(q: BigRational) -> Self {
        ExactReal::from_rational(q)
    }
}

pub(crate) fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Canonical text: rational part first, then radicals in increasing order,
/// e.g. `1 + 2*sqrt(3) - 1/2*sqrt(5)`. Re-parses to an equal value.
impl fmt::Display for ExactReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.is_empty() {
            return f.write_str("0");
        }
        for (i, (&d, c)) in self.coords.iter().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            match (d, mag.is_one()) {
                (1, _) => f.write_str(&fmt_rational(&mag))?,
                (_, true) => write!(f, "sqrt({d})")?,
                (_, false) => write!(f, "{}*sqrt({d})", fmt_rational(&mag))?,
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for ExactReal {
    type Err = ExactError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_real(s)
    }
}

/// Parses text such as `1 + 2*sqrt(3) - (1/2)*sqrt(5)`.
pub fn parse_real(src: &str) -> Result<ExactReal, ExactError> {
    let mut cur = Cursor::new(src)?;
    let x = parse_real_expr(&mut cur, &|_| None)?;
    cur.expect_eof()?;
    Ok(x)
}

/// Real-number expression at the cursor. `lookup` resolves bare names.
pub fn parse_real_expr(
    cur: &mut Cursor,
    lookup: &dyn Fn(&str) -> Option<ExactReal>,
) -> Result<ExactReal, ExactError> {
    let mut acc = parse_real_term(cur, lookup)?;
    loop {
        if cur.eat_sym('+') {
            acc = &acc + &parse_real_term(cur, lookup)?;
        } else if cur.eat_sym('-') {
            acc = &acc - &parse_real_term(cur, lookup)?;
        } else {
            return Ok(acc);
        }
    }
}

fn parse_real_term(
    cur: &mut Cursor,
    lookup: &dyn Fn(&str) -> Option<ExactReal>,
) -> Result<ExactReal, ExactError> {
    let mut acc = parse_real_unary(cur, lookup)?;
    loop {
        if cur.eat_sym('*') {
            acc = acc.checked_mul(&parse_real_unary(cur, lookup)?)?;
        } else if cur.is_sym('/') {
            let err = cur.error("division by zero");
            cur.next();
            let rhs = parse_real_unary(cur, lookup)?;
            acc = match acc.checked_div(&rhs) {
                Err(ExactError::DivisionByZero) => return Err(err.into()),
                r => r?,
            };
        } else {
            return Ok(acc);
        }
    }
}

fn parse_real_unary(
    cur: &mut Cursor,
    lookup: &dyn Fn(&str) -> Option<ExactReal>,
) -> Result<ExactReal, ExactError> {
    if cur.eat_sym('-') {
        return Ok(-parse_real_unary(cur, lookup)?);
    }
    if cur.eat_sym('+') {
        return parse_real_unary(cur, lookup);
    }
    let base = parse_real_primary(cur, lookup)?;
    if cur.eat_sym('^') {
        let e = cur.expect_signed_int()?;
        let e = e.to_i32().filter(|e| e.abs() <= 64).ok_or_else(|| cur.error("exponent too large"))?;
        let mut acc = ExactReal::one();
        for _ in 0..e.abs() {
            acc = acc.checked_mul(&base)?;
        }
        if e < 0 {
            acc = acc.invert().map_err(|_| cur.error("division by zero"))?;
        }
        return Ok(acc);
    }
    Ok(base)
}

fn parse_real_primary(
    cur: &mut Cursor,
    lookup: &dyn Fn(&str) -> Option<ExactReal>,
) -> Result<ExactReal, ExactError> {
    match cur.peek().clone() {
        Tok::Int(n) => {
            cur.next();
            Ok(ExactReal::from_integer(n))
        }
        Tok::Sym('(') => {
            cur.next();
            let x = parse_real_expr(cur, lookup)?;
            cur.expect_sym(')')?;
            Ok(x)
        }
        Tok::Ident(name) if name == "sqrt" => {
            cur.next();
            cur.expect_sym('(')?;
            let n = cur.expect_int()?;
            let n = n.to_u64().ok_or_else(|| cur.error("radicand out of range"))?;
            cur.expect_sym(')')?;
            Ok(ExactReal::sqrt(n))
        }
        Tok::Ident(name) => match lookup(&name) {
            Some(x) => {
                cur.next();
                Ok(x)
            }
            None => Err(cur.error(format!("unknown name `{name}`")).into()),
        },
        other => Err(cur.error(format!("expected a number, found {other}")).into()),
    }
}
