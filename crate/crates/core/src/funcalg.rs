//! Formula functions on lattice domains and their exact period modules.
//!
//! A point `x = Σ x_d·√d` of a domain is read through its integer
//! coordinates. Two atom families are available:
//!
//! * `abs1(sqrt(d), t)`: `x ↦ |x_d + t| + 1`, raised to any nonzero integer
//!   power (`recip` is the power −1);
//! * `sgn(sqrt(d))`: `x ↦ (−1)^{x_d}`.
//!
//! A [`CanonicalForm`] is a rational combination of monomials in these atoms.
//! Shifting by a domain vector maps atoms to atoms, so the set of formal
//! periods is an integer lattice computed exactly by [`CanonicalForm::period_module`].
//! Formal invariance always implies pointwise invariance; the converse rests
//! on the independence of distinct shifted-atom monomials, and
//! [`CanonicalForm::find_counterexample`] provides bounded refutation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::exactreal::{fmt_rational, ExactError, ExactReal};
use crate::lattice::{CoeffLattice, LatticeError};
use crate::syntax::{Cursor, SyntaxError, Tok};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FuncError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("divisor at {line}:{column} is not a single monomial")]
    NonMonomialDivisor { line: usize, column: usize },
    #[error("sqrt({radicand}) at {line}:{column} is not a coordinate of the domain basis")]
    UnknownRadicand { radicand: u64, line: usize, column: usize },
    #[error("shift is not a vector of the domain lattice")]
    ShiftNotInDomain,
    #[error("shift has non-integral coordinates")]
    NonIntegralShift,
    #[error("point is not in the domain lattice")]
    NotInDomain,
    #[error("vector has length {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("shift offset out of range")]
    ShiftOverflow,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomKind {
    /// `|x_d + shift| + 1`
    Abs1,
    /// `(−1)^{x_d}`
    Sgn,
}

/// A coordinate reader. `Sgn` atoms always carry shift 0: their shifts are
/// folded into the sign of the term coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub radicand: u64,
    pub kind: AtomKind,
    pub shift: i64,
}

impl Atom {
    pub fn abs1(radicand: u64, shift: i64) -> Self {
        Atom { radicand, kind: AtomKind::Abs1, shift }
    }

    pub fn sgn(radicand: u64) -> Self {
        Atom { radicand, kind: AtomKind::Sgn, shift: 0 }
    }

    fn selector(&self) -> String {
        if self.radicand == 1 {
            "one".into()
        } else {
            format!("sqrt({})", self.radicand)
        }
    }

    /// `atom^exp` at coordinate value `x` as `(numerator, denominator)`.
    fn power_at(&self, x: &BigInt, exp: i64) -> (BigInt, BigInt) {
        match self.kind {
            AtomKind::Abs1 => {
                let base: BigInt = (x + self.shift).abs() + 1;
                let p = base.pow(exp.unsigned_abs() as u32);
                if exp >= 0 {
                    (p, BigInt::one())
                } else {
                    (BigInt::one(), p)
                }
            }
            AtomKind::Sgn => {
                let odd = x.is_odd() && exp % 2 != 0;
                (if odd { -BigInt::one() } else { BigInt::one() }, BigInt::one())
            }
        }
    }
}

/// Product of atom powers. The empty monomial is the constant 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    factors: BTreeMap<Atom, i64>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn atom(atom: Atom, exp: i64) -> Self {
        let mut m = Monomial::one();
        m.push(atom, exp);
        m
    }

    pub fn factors(&self) -> &BTreeMap<Atom, i64> {
        &self.factors
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    fn push(&mut self, atom: Atom, exp: i64) {
        let e = self.factors.entry(atom).or_insert(0);
        *e += exp;
        if atom.kind == AtomKind::Sgn {
            *e = e.rem_euclid(2);
        }
        if *e == 0 {
            self.factors.remove(&atom);
        }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut m = self.clone();
        for (&a, &e) in &other.factors {
            m.push(a, e);
        }
        m
    }

    pub fn inverse(&self) -> Monomial {
        let mut m = Monomial::one();
        for (&a, &e) in &self.factors {
            m.push(a, -e);
        }
        m
    }

    pub fn radicands(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.keys().map(|a| a.radicand)
    }

    /// Shifted monomial and whether the shift flipped its sign.
    fn shifted(&self, offset: impl Fn(u64) -> i64) -> Result<(bool, Monomial), FuncError> {
        let mut flip = false;
        let mut m = Monomial::one();
        for (&a, &e) in &self.factors {
            let s = offset(a.radicand);
            match a.kind {
                AtomKind::Abs1 => {
                    let t = a.shift.checked_add(s).ok_or(FuncError::ShiftOverflow)?;
                    m.push(Atom::abs1(a.radicand, t), e);
                }
                AtomKind::Sgn => {
                    flip ^= s.rem_euclid(2) == 1;
                    m.push(a, e);
                }
            }
        }
        Ok((flip, m))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        for (i, (a, &e)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            let shift = if a.shift != 0 { format!(", {}", a.shift) } else { String::new() };
            match a.kind {
                AtomKind::Sgn => write!(f, "sgn({})", a.selector())?,
                AtomKind::Abs1 => {
                    let name = if e > 0 { "abs1" } else { "recip" };
                    write!(f, "{name}({}{shift})", a.selector())?;
                    if e.abs() > 1 {
                        write!(f, "^{}", e.abs())?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Rational combination of monomials on a lattice domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    domain: CoeffLattice,
    terms: BTreeMap<Monomial, BigRational>,
}

impl CanonicalForm {
    /// Canonicalizes `terms` on `domain`: atoms reading a coordinate that
    /// vanishes on the whole domain become constants, equal monomials merge
    /// and zero coefficients drop.
    pub fn from_terms(
        domain: CoeffLattice,
        terms: impl IntoIterator<Item = (Monomial, BigRational)>,
    ) -> Self {
        let dead: BTreeSet<u64> = domain.zero_radicands().into_iter().collect();
        let mut map: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (m, c) in terms {
            let mut coef = c;
            let mut live = Monomial::one();
            for (&a, &e) in &m.factors {
                if dead.contains(&a.radicand) || !domain.basis().contains(a.radicand) {
                    let (n, d) = a.power_at(&BigInt::zero(), e);
                    coef *= BigRational::new(n, d);
                } else {
                    live.push(a, e);
                }
            }
            *map.entry(live).or_insert_with(BigRational::zero) += coef;
        }
        map.retain(|_, c| !c.is_zero());
        CanonicalForm { domain, terms: map }
    }

    pub fn zero(domain: CoeffLattice) -> Self {
        CanonicalForm { domain, terms: BTreeMap::new() }
    }

    pub fn constant(domain: CoeffLattice, q: BigRational) -> Self {
        Self::from_terms(domain, [(Monomial::one(), q)])
    }

    pub fn monomial(domain: CoeffLattice, m: Monomial, q: BigRational) -> Self {
        Self::from_terms(domain, [(m, q)])
    }

    pub fn domain(&self) -> &CoeffLattice {
        &self.domain
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// Radicands read by some atom.
    pub fn active_radicands(&self) -> BTreeSet<u64> {
        self.terms.keys().flat_map(|m| m.radicands().collect::<Vec<_>>()).collect()
    }

    /// Same formula on `self.domain ∩ domain`.
    pub fn restrict(&self, domain: &CoeffLattice) -> Self {
        let d = self.domain.intersect(domain);
        Self::from_terms(d, self.terms.clone())
    }

    pub fn add(&self, other: &CanonicalForm) -> CanonicalForm {
        let domain = self.domain.intersect(&other.domain);
        let terms = self.terms.iter().chain(&other.terms).map(|(m, c)| (m.clone(), c.clone()));
        Self::from_terms(domain, terms)
    }

    pub fn neg(&self) -> CanonicalForm {
        self.scale(&-BigRational::one())
    }

    pub fn sub(&self, other: &CanonicalForm) -> CanonicalForm {
        self.add(&other.neg())
    }

    pub fn scale(&self, q: &BigRational) -> CanonicalForm {
        Self::from_terms(self.domain.clone(), self.terms.iter().map(|(m, c)| (m.clone(), c * q)))
    }

    pub fn mul(&self, other: &CanonicalForm) -> CanonicalForm {
        let domain = self.domain.intersect(&other.domain);
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                terms.push((m1.mul(m2), c1 * c2));
            }
        }
        Self::from_terms(domain, terms)
    }

    /// The single term `(monomial, coefficient)` if the form has exactly one.
    pub fn as_monomial(&self) -> Option<(&Monomial, &BigRational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    /// Inverse of a one-term form.
    pub fn invert_monomial(&self) -> Result<CanonicalForm, FuncError> {
        if self.is_zero() {
            return Err(FuncError::DivisionByZero);
        }
        let (m, c) = self.as_monomial().ok_or(FuncError::NonMonomialDivisor { line: 0, column: 0 })?;
        Ok(Self::monomial(self.domain.clone(), m.inverse(), c.recip()))
    }

    pub fn div(&self, other: &CanonicalForm) -> Result<CanonicalForm, FuncError> {
        Ok(self.mul(&other.invert_monomial()?))
    }

    fn check_dim(&self, v: &[BigInt]) -> Result<(), FuncError> {
        if v.len() != self.domain.dim() {
            return Err(FuncError::DimensionMismatch { expected: self.domain.dim(), found: v.len() });
        }
        Ok(())
    }

    /// `x ↦ f(x + s)` for a domain vector `s`.
    pub fn shift(&self, s: &[BigInt]) -> Result<CanonicalForm, FuncError> {
        self.check_dim(s)?;
        if !self.domain.member(s)? {
            return Err(FuncError::ShiftNotInDomain);
        }
        let basis = self.domain.basis();
        let offsets: Vec<i64> =
            s.iter().map(|x| x.to_i64().ok_or(FuncError::ShiftOverflow)).collect::<Result<_, _>>()?;
        let offset = |d: u64| basis.index_of(d).map_or(0, |i| offsets[i]);
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let (flip, m2) = m.shifted(offset)?;
            terms.push((m2, if flip { -c } else { c.clone() }));
        }
        Ok(Self::from_terms(self.domain.clone(), terms))
    }

    /// Domain coordinates of a real shift.
    pub fn shift_vector(&self, t: &ExactReal) -> Result<Vec<BigInt>, FuncError> {
        if t.coords().values().any(|c| !c.is_integer()) {
            return Err(FuncError::NonIntegralShift);
        }
        t.integer_coords(self.domain.basis()).ok_or(FuncError::ShiftNotInDomain)
    }

    /// `x ↦ f(x + T) − f(x)`; zero exactly when `T` is a formal period.
    pub fn shift_difference(&self, t: &ExactReal) -> Result<CanonicalForm, FuncError> {
        let s = self.shift_vector(t)?;
        Ok(self.shift(&s)?.sub(self))
    }

    /// Exact value at a domain point given by its coordinates.
    pub fn evaluate(&self, v: &[BigInt]) -> Result<BigRational, FuncError> {
        self.check_dim(v)?;
        if !self.domain.member(v)? {
            return Err(FuncError::NotInDomain);
        }
        let basis = self.domain.basis();
        let mut sum = BigRational::zero();
        for (m, c) in &self.terms {
            let (mut num, mut den) = (c.numer().clone(), c.denom().clone());
            for (a, &e) in m.factors() {
                let x = &v[basis.index_of(a.radicand).expect("atom radicand in basis")];
                let (n, d) = a.power_at(x, e);
                num *= n;
                den *= d;
            }
            sum += BigRational::new(num, den);
        }
        Ok(sum)
    }

    pub fn evaluate_i64(&self, v: &[i64]) -> Result<BigRational, FuncError> {
        self.evaluate(&v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>())
    }

    /// Lattice of formal periods.
    pub fn period_module(&self) -> Result<PeriodModule, FuncError> {
        let basis = self.domain.basis().clone();
        let k = basis.len();
        let mut zero_radicands = BTreeSet::new();
        let mut parity_constraints: Vec<BTreeSet<u64>> = Vec::new();
        for m in self.terms.keys() {
            let mut parity = BTreeSet::new();
            for a in m.factors().keys() {
                match a.kind {
                    AtomKind::Abs1 => {
                        zero_radicands.insert(a.radicand);
                    }
                    AtomKind::Sgn => {
                        parity.insert(a.radicand);
                    }
                }
            }
            if !parity.is_empty() && !parity_constraints.contains(&parity) {
                parity_constraints.push(parity);
            }
        }

        let free: Vec<usize> =
            (0..k).filter(|&j| !zero_radicands.contains(&basis.radicands()[j])).collect();
        // Parity system restricted to the free columns, over GF(2).
        let rows: Vec<Vec<bool>> = parity_constraints
            .iter()
            .map(|s| free.iter().map(|&j| s.contains(&basis.radicands()[j])).collect())
            .collect();
        let mut gens: Vec<Vec<BigInt>> = Vec::new();
        for kv in gf2_kernel(&rows, free.len()) {
            let mut v = vec![BigInt::zero(); k];
            for (bit, &j) in kv.iter().zip(&free) {
                if *bit {
                    v[j] = BigInt::one();
                }
            }
            gens.push(v);
        }
        for &j in &free {
            let mut v = vec![BigInt::zero(); k];
            v[j] = BigInt::from(2);
            gens.push(v);
        }
        let constraints = CoeffLattice::new(basis.clone(), gens)?;
        let lattice = self.domain.intersect(&constraints);

        let unconstrained: Vec<Vec<BigInt>> = free
            .iter()
            .map(|&j| (0..k).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        let sublattice = self.domain.intersect(&CoeffLattice::new(basis, unconstrained)?);
        Ok(PeriodModule { zero_radicands, parity_constraints, lattice, sublattice })
    }

    /// Searches the box `[−bound, bound]` on the coordinates read by the
    /// form for a domain point `x` with `f(x + T) ≠ f(x)`.
    ///
    /// Points are ordered lexicographically with each coordinate ranked
    /// center-out (`0, 1, −1, 2, −2, …`), so the origin comes first.
    pub fn find_counterexample(&self, t: &ExactReal, bound: u32) -> Result<Counterexample, FuncError> {
        let s = self.shift_vector(t)?;
        if !self.domain.member(&s)? {
            return Err(FuncError::ShiftNotInDomain);
        }
        let basis = self.domain.basis();
        let active: Vec<usize> = self
            .active_radicands()
            .iter()
            .map(|&d| basis.index_of(d).expect("atom radicand in basis"))
            .collect();
        if active.is_empty() {
            return Ok(Counterexample::NotFound { bound });
        }
        let shift: Vec<i64> = active
            .iter()
            .map(|&j| s[j].to_i64().ok_or(FuncError::ShiftOverflow))
            .collect::<Result<_, _>>()?;
        let eval = CompiledForm::new(self, &active);
        let order: Vec<i64> = center_out(bound);
        let mut cache: HashMap<Vec<i64>, BigRational> = HashMap::new();
        let mut idx = vec![0usize; active.len()];
        loop {
            let point: Vec<i64> = idx.iter().map(|&i| order[i]).collect();
            let before = cache.entry(point.clone()).or_insert_with(|| eval.value(&point)).clone();
            let moved: Vec<i64> = point.iter().zip(&shift).map(|(x, s)| x + s).collect();
            let after = match cache.get(&moved) {
                Some(v) => v.clone(),
                None => eval.value(&moved),
            };
            if before != after {
                if let Some(x) = self.complete(&active, &point, bound)? {
                    return Ok(Counterexample::Witness { point: x, before, after });
                }
            }
            // advance the odometer, last coordinate fastest
            let mut pos = idx.len();
            loop {
                if pos == 0 {
                    return Ok(Counterexample::NotFound { bound });
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < order.len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }

    /// Smallest domain point (center-out order on the remaining coordinates)
    /// whose active coordinates equal `values`.
    fn complete(&self, active: &[usize], values: &[i64], bound: u32) -> Result<Option<Vec<BigInt>>, FuncError> {
        const MAX_COMPLETIONS: usize = 1 << 20;
        let k = self.domain.dim();
        let inactive: Vec<usize> = (0..k).filter(|j| !active.contains(j)).collect();
        let order = center_out(bound);
        let total = order.len().checked_pow(inactive.len() as u32).unwrap_or(usize::MAX);
        let mut idx = vec![0usize; inactive.len()];
        for _ in 0..total.min(MAX_COMPLETIONS) {
            let mut x = vec![BigInt::zero(); k];
            for (&j, &v) in active.iter().zip(values) {
                x[j] = v.into();
            }
            for (&j, &i) in inactive.iter().zip(&idx) {
                x[j] = order[i].into();
            }
            if self.domain.member(&x)? {
                return Ok(Some(x));
            }
            for pos in (0..idx.len()).rev() {
                idx[pos] += 1;
                if idx[pos] < order.len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
        Ok(None)
    }
}

/// Parse-friendly canonical text with deterministic term order.
impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            if m.is_one() {
                f.write_str(&fmt_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", fmt_rational(&mag))?;
            }
        }
        Ok(())
    }
}

fn center_out(bound: u32) -> Vec<i64> {
    let mut v = vec![0i64];
    for i in 1..=bound as i64 {
        v.push(i);
        v.push(-i);
    }
    v
}

/// Form specialized to a fixed list of active coordinates for fast repeated
/// evaluation.
struct CompiledForm {
    terms: Vec<(BigRational, Vec<(usize, Atom, i64)>)>,
}

impl CompiledForm {
    fn new(f: &CanonicalForm, active: &[usize]) -> Self {
        let basis = f.domain.basis();
        let terms = f
            .terms
            .iter()
            .map(|(m, c)| {
                let factors = m
                    .factors()
                    .iter()
                    .map(|(a, &e)| {
                        let j = basis.index_of(a.radicand).expect("radicand in basis");
                        (active.iter().position(|&x| x == j).expect("active"), *a, e)
                    })
                    .collect();
                (c.clone(), factors)
            })
            .collect();
        CompiledForm { terms }
    }

    fn value(&self, point: &[i64]) -> BigRational {
        let mut sum = BigRational::zero();
        for (c, factors) in &self.terms {
            let (mut num, mut den) = (c.numer().clone(), c.denom().clone());
            for (pos, a, e) in factors {
                let (n, d) = a.power_at(&BigInt::from(point[*pos]), *e);
                num *= n;
                den *= d;
            }
            sum += BigRational::new(num, den);
        }
        sum
    }
}

/// Null space of a GF(2) matrix with `ncols` columns.
fn gf2_kernel(rows: &[Vec<bool>], ncols: usize) -> Vec<Vec<bool>> {
    let mut m: Vec<Vec<bool>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| m[i][c]) else { continue };
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r && m[i][c] {
                let pr = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(&pr) {
                    *x ^= *y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let mut kernel = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![false; ncols];
        v[free] = true;
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = m[i][free];
        }
        kernel.push(v);
    }
    kernel
}

/// Lattice of formal periods of a [`CanonicalForm`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodModule {
    /// Radicands read by an `abs1` atom; periods have coordinate 0 there.
    pub zero_radicands: BTreeSet<u64>,
    /// One radicand set per distinct `sgn` pattern; the coordinates of a
    /// period summed over each set are even.
    pub parity_constraints: Vec<BTreeSet<u64>>,
    /// Admissible shift vectors.
    pub lattice: CoeffLattice,
    /// Domain vectors vanishing on `zero_radicands`; contains `lattice` with
    /// index a power of two.
    pub sublattice: CoeffLattice,
}

impl PeriodModule {
    pub fn generators_real(&self) -> Vec<ExactReal> {
        self.lattice.generators_real()
    }

    pub fn contains(&self, t: &ExactReal) -> bool {
        self.lattice.contains_real(t)
    }

    /// `[sublattice : lattice]`.
    pub fn parity_index(&self) -> BigInt {
        self.lattice.index_in(&self.sublattice).expect("same rank")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Counterexample {
    Witness { point: Vec<BigInt>, before: BigRational, after: BigRational },
    NotFound { bound: u32 },
}

impl Counterexample {
    pub fn is_witness(&self) -> bool {
        matches!(self, Counterexample::Witness { .. })
    }
}

/// Whether `f(x) = slope·x + b` satisfies `f(x + L) − f(x) = n·T` for an
/// integer `n`, which makes `F∘f` `L`-periodic for every `T`-periodic `F`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositionCheck {
    pub holds: bool,
    pub n: Option<BigInt>,
    /// `slope·L/T`
    pub ratio: ExactReal,
}

pub fn composition_check(slope: &ExactReal, period: &ExactReal, shift: &ExactReal) -> Result<CompositionCheck, FuncError> {
    if period.is_zero() || shift.is_zero() {
        return Err(FuncError::DivisionByZero);
    }
    let ratio = slope.checked_mul(shift)?.checked_div(period)?;
    let n = ratio.to_integer();
    Ok(CompositionCheck { holds: n.is_some(), n, ratio })
}

/// Parses a formula over the coordinates of `domain`.
pub fn parse(src: &str, domain: &CoeffLattice) -> Result<CanonicalForm, FuncError> {
    let mut cur = Cursor::new(src)?;
    let f = parse_expr(&mut cur, &FormEnv { domain: domain.clone(), lookup: &|_| None })?;
    cur.expect_eof()?;
    Ok(f)
}

/// Context for parsing formulas: the domain plus named forms.
pub struct FormEnv<'a> {
    pub domain: CoeffLattice,
    pub lookup: &'a dyn Fn(&str) -> Option<CanonicalForm>,
}

pub fn parse_expr(cur: &mut Cursor, env: &FormEnv<'_>) -> Result<CanonicalForm, FuncError> {
    let mut acc = parse_term(cur, env)?;
    loop {
        if cur.eat_sym('+') {
            acc = acc.add(&parse_term(cur, env)?);
        } else if cur.eat_sym('-') {
            acc = acc.sub(&parse_term(cur, env)?);
        } else {
            return Ok(acc);
        }
    }
}

fn parse_term(cur: &mut Cursor, env: &FormEnv<'_>) -> Result<CanonicalForm, FuncError> {
    let mut acc = parse_unary(cur, env)?;
    loop {
        if cur.eat_sym('*') {
            acc = acc.mul(&parse_unary(cur, env)?);
        } else if cur.is_sym('/') {
            cur.next();
            let (line, column) = cur.location();
            let rhs = parse_unary(cur, env)?;
            if rhs.is_zero() {
                return Err(cur.error("division by zero").into());
            }
            acc = acc.div(&rhs).map_err(|e| match e {
                FuncError::NonMonomialDivisor { .. } => FuncError::NonMonomialDivisor { line, column },
                e => e,
            })?;
        } else {
            return Ok(acc);
        }
    }
}

fn parse_unary(cur: &mut Cursor, env: &FormEnv<'_>) -> Result<CanonicalForm, FuncError> {
    if cur.eat_sym('-') {
        return Ok(parse_unary(cur, env)?.neg());
    }
    if cur.eat_sym('+') {
        return parse_unary(cur, env);
    }
    let (line, column) = cur.location();
    let base = parse_primary(cur, env)?;
    if cur.eat_sym('^') {
        let e = cur.expect_signed_int()?;
        let e = e.to_i64().filter(|e| e.abs() <= 64).ok_or_else(|| cur.error("exponent too large"))?;
        let mut acc = CanonicalForm::constant(base.domain.clone(), BigRational::one());
        for _ in 0..e.abs() {
            acc = acc.mul(&base);
        }
        if e < 0 {
            acc = acc.invert_monomial().map_err(|err| match err {
                FuncError::NonMonomialDivisor { .. } => FuncError::NonMonomialDivisor { line, column },
                err => err,
            })?;
        }
        return Ok(acc);
    }
    Ok(base)
}

fn parse_primary(cur: &mut Cursor, env: &FormEnv<'_>) -> Result<CanonicalForm, FuncError> {
    let domain = &env.domain;
    match cur.peek().clone() {
        Tok::Int(n) => {
            cur.next();
            Ok(CanonicalForm::constant(domain.clone(), BigRational::from_integer(n)))
        }
        Tok::Sym('(') => {
            cur.next();
            let f = parse_expr(cur, env)?;
            cur.expect_sym(')')?;
            Ok(f)
        }
        Tok::Ident(name) if matches!(name.as_str(), "abs1" | "recip" | "sgn") => {
            cur.next();
            cur.expect_sym('(')?;
            let radicand = parse_selector(cur, domain)?;
            let shift = if cur.eat_sym(',') {
                cur.expect_signed_int()?.to_i64().ok_or_else(|| cur.error("shift out of range"))?
            } else {
                0
            };
            cur.expect_sym(')')?;
            let m = match name.as_str() {
                "abs1" => Monomial::atom(Atom::abs1(radicand, shift), 1),
                "recip" => Monomial::atom(Atom::abs1(radicand, shift), -1),
                _ => Monomial::atom(Atom::sgn(radicand), 1),
            };
            let sign = if name == "sgn" && shift.rem_euclid(2) == 1 { -1 } else { 1 };
            Ok(CanonicalForm::monomial(domain.clone(), m, BigRational::from_integer(sign.into())))
        }
        Tok::Ident(name) => match (env.lookup)(&name) {
            Some(f) => {
                cur.next();
                Ok(f)
            }
            None => Err(cur.error(format!("unknown name `{name}`")).into()),
        },
        other => Err(cur.error(format!("expected a term, found {other}")).into()),
    }
}

fn parse_selector(cur: &mut Cursor, domain: &CoeffLattice) -> Result<u64, FuncError> {
    let (line, column) = cur.location();
    let radicand = if cur.eat_ident("one") {
        1
    } else {
        cur.expect_keyword("sqrt")?;
        cur.expect_sym('(')?;
        let n = cur.expect_int()?;
        cur.expect_sym(')')?;
        n.to_u64().ok_or_else(|| cur.error("radicand out of range"))?
    };
    if !domain.basis().contains(radicand) {
        return Err(FuncError::UnknownRadicand { radicand, line, column });
    }
    Ok(radicand)
}
