//! Integer lattices in the coordinate space of a radical basis.
//!
//! A point `v ∈ Z^k` of a [`CoeffLattice`] stands for the real number
//! `Σ v_i·√d_i`; by independence of the radicals this map is injective, so
//! domains such as `Z + √2·Z + √3·Z` and groups of periods are handled as
//! plain integer lattices.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exactreal::{ExactError, ExactReal, RadicalBasis, Sign};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("vector has length {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("period must be nonzero")]
    ZeroPeriod,
    #[error("incompatible bases: {0}")]
    IncompatibleBasis(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Row-style Hermite normal form: nonzero rows in echelon order, positive
/// pivots, entries above each pivot reduced into `[0, pivot)`.
pub fn hermite_normal_form(rows: &[Vec<BigInt>], ncols: usize) -> Vec<Vec<BigInt>> {
    let mut m: Vec<Vec<BigInt>> =
        rows.iter().filter(|r| r.iter().any(|x| !x.is_zero())).cloned().collect();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for i in r..m.len() {
                if !m[i][c].is_zero() && best.is_none_or(|b| m[i][c].abs() < m[b][c].abs()) {
                    best = Some(i);
                }
            }
            let Some(p) = best else { break };
            m.swap(r, p);
            let mut done = true;
            for i in r + 1..m.len() {
                if m[i][c].is_zero() {
                    continue;
                }
                let q = m[i][c].div_floor(&m[r][c]);
                let pivot_row = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    *x -= &q * y;
                }
                if !m[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r < m.len() && !m[r][c].is_zero() {
            if m[r][c].is_negative() {
                for x in m[r].iter_mut() {
                    *x = -&*x;
                }
            }
            let pivot_row = m[r].clone();
            for row in m.iter_mut().take(r) {
                let q = row[c].div_floor(&pivot_row[c]);
                if !q.is_zero() {
                    for (x, y) in row.iter_mut().zip(&pivot_row) {
                        *x -= &q * y;
                    }
                }
            }
            r += 1;
        }
    }
    m.truncate(r);
    m
}

/// Fraction-free determinant of a square integer matrix.
pub fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

fn pivot_col(row: &[BigInt]) -> Option<usize> {
    row.iter().position(|x| !x.is_zero())
}

/// Integer lattice over the coordinates of a [`RadicalBasis`].
#[derive(Debug, Clone)]
pub struct CoeffLattice {
    basis: RadicalBasis,
    generators: Vec<Vec<BigInt>>,
    hnf: Vec<Vec<BigInt>>,
}

impl CoeffLattice {
    pub fn new(basis: RadicalBasis, generators: Vec<Vec<BigInt>>) -> Result<Self, LatticeError> {
        let k = basis.len();
        if let Some(g) = generators.iter().find(|g| g.len() != k) {
            return Err(LatticeError::DimensionMismatch { expected: k, found: g.len() });
        }
        let hnf = hermite_normal_form(&generators, k);
        Ok(CoeffLattice { basis, generators, hnf })
    }

    pub fn from_rows(basis: RadicalBasis, rows: &[Vec<i64>]) -> Result<Self, LatticeError> {
        Self::new(basis, rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
    }

    /// All of `Z^k`, i.e. `Z + √d₂·Z + …`.
    pub fn full(basis: RadicalBasis) -> Self {
        let k = basis.len();
        let rows = (0..k)
            .map(|i| (0..k).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        Self::new(basis, rows).expect("square identity")
    }

    pub fn zero(basis: RadicalBasis) -> Self {
        CoeffLattice { basis, generators: Vec::new(), hnf: Vec::new() }
    }

    pub fn basis(&self) -> &RadicalBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn rank(&self) -> usize {
        self.hnf.len()
    }

    pub fn generators(&self) -> &[Vec<BigInt>] {
        &self.generators
    }

    pub fn hnf_rows(&self) -> &[Vec<BigInt>] {
        &self.hnf
    }

    pub fn is_zero(&self) -> bool {
        self.hnf.is_empty()
    }

    /// Product of the pivots when the lattice has full rank.
    pub fn determinant(&self) -> Option<BigInt> {
        (self.rank() == self.dim()).then(|| self.hnf.iter().enumerate().map(|(i, r)| r[i].clone()).product())
    }

    /// HNF rows as reals `Σ v_i·√d_i`.
    pub fn generators_real(&self) -> Vec<ExactReal> {
        self.hnf.iter().map(|r| ExactReal::from_integer_coords(&self.basis, r)).collect()
    }

    /// Coefficients of `v` with respect to the HNF rows, if `v` lies in the
    /// lattice.
    pub fn solve(&self, v: &[BigInt]) -> Result<Option<Vec<BigInt>>, LatticeError> {
        if v.len() != self.dim() {
            return Err(LatticeError::DimensionMismatch { expected: self.dim(), found: v.len() });
        }
        let mut rest = v.to_vec();
        let mut coeffs = Vec::with_capacity(self.hnf.len());
        for row in &self.hnf {
            let c = pivot_col(row).expect("nonzero HNF row");
            if rest[..c].iter().any(|x| !x.is_zero()) {
                return Ok(None);
            }
            let (q, rem) = rest[c].div_rem(&row[c]);
            if !rem.is_zero() {
                return Ok(None);
            }
            for (x, y) in rest.iter_mut().zip(row) {
                *x -= &q * y;
            }
            coeffs.push(q);
        }
        Ok(rest.iter().all(|x| x.is_zero()).then_some(coeffs))
    }

    pub fn member(&self, v: &[BigInt]) -> Result<bool, LatticeError> {
        Ok(self.solve(v)?.is_some())
    }

    pub fn member_i64(&self, v: &[i64]) -> Result<bool, LatticeError> {
        self.member(&v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>())
    }

    /// Membership of a real number: its coordinates must be integers over
    /// this basis and form a lattice vector.
    pub fn contains_real(&self, x: &ExactReal) -> bool {
        match x.integer_coords(&self.basis) {
            Some(v) => self.member(&v).unwrap_or(false),
            None => false,
        }
    }

    /// The same lattice written over a larger basis; new coordinates are 0.
    pub fn embed(&self, basis: &RadicalBasis) -> Result<CoeffLattice, LatticeError> {
        if !self.basis.is_subset_of(basis) {
            return Err(LatticeError::IncompatibleBasis(format!("{} is not contained in {}", self.basis, basis)));
        }
        let map: Vec<usize> =
            self.basis.radicands().iter().map(|&d| basis.index_of(d).expect("subset")).collect();
        let lift = |row: &Vec<BigInt>| {
            let mut out = vec![BigInt::zero(); basis.len()];
            for (x, &j) in row.iter().zip(&map) {
                out[j] = x.clone();
            }
            out
        };
        let generators = self.generators.iter().map(lift).collect();
        let hnf = self.hnf.iter().map(lift).collect();
        Ok(CoeffLattice { basis: basis.clone(), generators, hnf })
    }

    /// Exact intersection, over the union of both bases.
    pub fn intersect(&self, other: &CoeffLattice) -> CoeffLattice {
        let basis = self.basis.merge(&other.basis);
        let a = self.embed(&basis).expect("merged basis");
        let b = other.embed(&basis).expect("merged basis");
        let k = basis.len();
        // Rows (u, u) for u in A and (w, 0) for w in B; vectors with zero
        // first half have second half in A ∩ B.
        let mut rows = Vec::with_capacity(a.rank() + b.rank());
        for u in &a.hnf {
            let mut row = u.clone();
            row.extend(u.iter().cloned());
            rows.push(row);
        }
        for w in &b.hnf {
            let mut row = w.clone();
            row.extend(std::iter::repeat_n(BigInt::zero(), k));
            rows.push(row);
        }
        let h = hermite_normal_form(&rows, 2 * k);
        let kernel: Vec<Vec<BigInt>> = h
            .into_iter()
            .filter(|r| pivot_col(r).is_some_and(|c| c >= k))
            .map(|r| r[k..].to_vec())
            .collect();
        CoeffLattice::new(basis, kernel).expect("dimensions agree")
    }

    /// Index `[sup : self]` when `self` is a sublattice of `sup` of the same
    /// rank.
    pub fn index_in(&self, sup: &CoeffLattice) -> Option<BigInt> {
        if self.rank() != sup.rank() {
            return None;
        }
        let basis = self.basis.merge(&sup.basis);
        let (sub, sup) = (self.embed(&basis).ok()?, sup.embed(&basis).ok()?);
        let mut m = Vec::with_capacity(sub.rank());
        for row in &sub.hnf {
            m.push(sup.solve(row).ok()??);
        }
        Some(bareiss_det(m).abs())
    }

    /// Radicands whose coordinate vanishes on every lattice point.
    pub fn zero_radicands(&self) -> Vec<u64> {
        (0..self.dim())
            .filter(|&j| self.hnf.iter().all(|r| r[j].is_zero()))
            .map(|j| self.basis.radicands()[j])
            .collect()
    }

    /// `[1, sqrt(2), 2*sqrt(3)]`-style listing of the HNF generators.
    pub fn span_text(&self) -> String {
        let items: Vec<String> = self.generators_real().iter().map(|g| g.to_string()).collect();
        format!("[{}]", items.join(", "))
    }
}

impl PartialEq for CoeffLattice {
    fn eq(&self, other: &Self) -> bool {
        if self.basis == other.basis {
            return self.hnf == other.hnf;
        }
        let basis = self.basis.merge(&other.basis);
        self.embed(&basis).expect("merged").hnf == other.embed(&basis).expect("merged").hnf
    }
}

impl Eq for CoeffLattice {}

/// Scenario syntax: `lattice[(1,0),(0,2)] over basis(1, sqrt(2))`.
impl fmt::Display for CoeffLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("lattice[")?;
        for (i, row) in self.hnf.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            write!(f, "({})", cells.join(","))?;
        }
        write!(f, "] over {}", self.basis)
    }
}

/// Structure of the additive group generated by a list of periods.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupKind {
    /// `T₀·Z` with `T₀ > 0`.
    Discrete(ExactReal),
    Dense,
}

pub fn gcd_rationals(values: &[BigRational]) -> BigRational {
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for v in values {
        num = num.gcd(v.numer());
        den = den.lcm(v.denom());
    }
    BigRational::new(num, den)
}

/// Decides whether `Σ T_i·Z` is discrete, returning its positive generator,
/// or dense in the line.
pub fn classify_group(periods: &[ExactReal]) -> Result<GroupKind, LatticeError> {
    let first = periods.first().ok_or(LatticeError::EmptyInput)?;
    if periods.iter().any(|t| t.is_zero()) {
        return Err(LatticeError::ZeroPeriod);
    }
    let mut ratios = Vec::with_capacity(periods.len());
    for t in periods {
        match t.commensurable(first)? {
            Some(r) => ratios.push(r),
            None => return Ok(GroupKind::Dense),
        }
    }
    let g = gcd_rationals(&ratios);
    let t0 = first.scale(&g);
    Ok(GroupKind::Discrete(if t0.sign()? == Sign::Negative { -t0 } else { t0 }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactreal::parse_real;

    fn b(ds: &[u64]) -> RadicalBasis {
        RadicalBasis::new(ds.iter().copied()).unwrap()
    }

    fn lat(ds: &[u64], rows: &[&[i64]]) -> CoeffLattice {
        CoeffLattice::from_rows(b(ds), &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn big(v: &[i64]) -> Vec<Vec<BigInt>> {
        v.chunks(2).map(|c| c.iter().map(|&x| x.into()).collect()).collect()
    }

    #[test]
    fn hnf_examples() {
        let l = lat(&[1, 2], &[&[2, 0], &[0, 3], &[2, 3]]);
        assert_eq!(l.hnf_rows(), big(&[2, 0, 0, 3]).as_slice());
        let z3 = lat(&[1, 2, 3], &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert_eq!(z3, CoeffLattice::full(b(&[2, 3])));
        let l = lat(&[1, 2], &[&[2, 1], &[0, 2]]);
        assert_eq!(l.determinant(), Some(4.into()));
    }

    #[test]
    fn hnf_reduces_above_pivots() {
        let l = lat(&[1, 2], &[&[1, 7], &[0, 3]]);
        assert_eq!(l.hnf_rows(), big(&[1, 1, 0, 3]).as_slice());
        let neg = lat(&[1, 2], &[&[-4, 0], &[6, 0]]);
        assert_eq!(neg.hnf_rows(), big(&[2, 0]).as_slice());
    }

    #[test]
    fn zero_generators_give_zero_lattice() {
        let l = lat(&[1, 2], &[&[0, 0]]);
        assert!(l.is_zero());
        assert!(l.member_i64(&[0, 0]).unwrap());
        assert!(!l.member_i64(&[1, 0]).unwrap());
    }

    #[test]
    fn membership_examples() {
        let z3 = CoeffLattice::full(b(&[2, 3]));
        assert!(z3.member_i64(&[5, -2, 7]).unwrap());
        assert!(!lat(&[1, 2], &[&[2, 0], &[0, 2]]).member_i64(&[1, 1]).unwrap());
        let l = lat(&[1, 2], &[&[2, 1], &[0, 2]]);
        assert!(l.member_i64(&[2, 3]).unwrap());
        assert_eq!(
            l.member_i64(&[1]),
            Err(LatticeError::DimensionMismatch { expected: 2, found: 1 })
        );
    }

    #[test]
    fn intersection_examples() {
        let d1 = CoeffLattice::full(b(&[2, 3, 5]));
        let d2 = CoeffLattice::full(b(&[2, 3, 7]));
        assert_eq!(d1.intersect(&d2), CoeffLattice::full(b(&[2, 3])));
        assert_eq!(d1.intersect(&d1), d1);
        let a = lat(&[1, 2], &[&[2, 0], &[0, 1]]);
        let c = lat(&[1, 2], &[&[3, 0], &[0, 1]]);
        assert_eq!(a.intersect(&c), lat(&[1, 2], &[&[6, 0], &[0, 1]]));
    }

    #[test]
    fn display_and_span() {
        let l = lat(&[1, 2, 3], &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 2]]);
        assert_eq!(l.to_string(), "lattice[(1,0,0),(0,1,0),(0,0,2)] over basis(1, sqrt(2), sqrt(3))");
        assert_eq!(l.span_text(), "[1, sqrt(2), 2*sqrt(3)]");
        assert!(l.contains_real(&parse_real("4 - 2*sqrt(3)").unwrap()));
        assert!(!l.contains_real(&parse_real("sqrt(3)").unwrap()));
        assert!(!l.contains_real(&parse_real("1/2").unwrap()));
    }

    #[test]
    fn classify_examples() {
        let r = |s: &str| parse_real(s).unwrap();
        assert_eq!(classify_group(&[r("1/2"), r("3/4")]).unwrap(), GroupKind::Discrete(r("1/4")));
        assert_eq!(classify_group(&[r("1"), r("sqrt(2)")]).unwrap(), GroupKind::Dense);
        assert_eq!(
            classify_group(&[r("sqrt(3)"), r("2*sqrt(3)"), r("5/2*sqrt(3)")]).unwrap(),
            GroupKind::Discrete(r("1/2*sqrt(3)"))
        );
        assert_eq!(classify_group(&[r("-2"), r("3")]).unwrap(), GroupKind::Discrete(r("1")));
        assert_eq!(classify_group(&[]), Err(LatticeError::EmptyInput));
        assert_eq!(classify_group(&[r("0")]), Err(LatticeError::ZeroPeriod));
    }
}
