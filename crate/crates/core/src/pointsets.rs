//! Periodic unions of open intervals with exact endpoints.
//!
//! A pattern with modulus `L` is the set `⋃_n ⋃_i (a_i + nL, b_i + nL)`,
//! stored as sorted disjoint intervals inside `[0, L]`. A component that
//! crosses the seam `0 ≡ L` is stored split as `(a, L)` and `(0, b)` with
//! `wrap = true`, which puts the seam point itself in the set. Touching
//! intervals are never merged: their shared endpoint is not in the set.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::exactreal::{ExactError, ExactReal, Sign};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("pattern is the whole line")]
    FullLine,
    #[error("pattern is empty")]
    EmptyPattern,
    #[error("patterns have different moduli")]
    ModulusMismatch,
    #[error("modulus must be positive")]
    InvalidModulus,
    #[error("interval {index} is empty or longer than the modulus")]
    InvalidInterval { index: usize },
    #[error("intervals overlap")]
    Overlap,
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Sorts with exact comparisons, reporting the first undecidable one.
pub fn sort_exact(v: &mut [ExactReal]) -> Result<(), ExactError> {
    let mut err = None;
    v.sort_by(|a, b| match a.cmp_exact(b) {
        Ok(o) => o,
        Err(e) => {
            err.get_or_insert(e);
            Ordering::Equal
        }
    });
    err.map_or(Ok(()), Err)
}

fn lt(a: &ExactReal, b: &ExactReal) -> Result<bool, ExactError> {
    Ok(a.cmp_exact(b)? == Ordering::Less)
}

/// Open arc `(start, start + len)` of the circle `R / LZ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub start: ExactReal,
    pub len: ExactReal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalPattern {
    modulus: ExactReal,
    intervals: Vec<(ExactReal, ExactReal)>,
    wrap: bool,
}

impl IntervalPattern {
    pub fn empty(modulus: ExactReal) -> Result<Self, PatternError> {
        check_modulus(&modulus)?;
        Ok(IntervalPattern { modulus, intervals: Vec::new(), wrap: false })
    }

    /// The whole line.
    pub fn full(modulus: ExactReal) -> Result<Self, PatternError> {
        check_modulus(&modulus)?;
        let iv = (ExactReal::zero(), modulus.clone());
        Ok(IntervalPattern { modulus, intervals: vec![iv], wrap: true })
    }

    /// Pattern from open intervals `(a, b)` with `a < b ≤ a + L`; endpoints
    /// may lie anywhere and are reduced modulo `L`.
    pub fn new(modulus: ExactReal, intervals: Vec<(ExactReal, ExactReal)>) -> Result<Self, PatternError> {
        check_modulus(&modulus)?;
        let mut arcs = Vec::with_capacity(intervals.len());
        for (index, (a, b)) in intervals.into_iter().enumerate() {
            let len = &b - &a;
            if len.sign()? != Sign::Positive || lt(&modulus, &len)? {
                return Err(PatternError::InvalidInterval { index });
            }
            arcs.push(Arc { start: a.rem_euclid(&modulus)?, len });
        }
        Self::from_arcs(modulus, arcs)
    }

    fn from_arcs(modulus: ExactReal, mut arcs: Vec<Arc>) -> Result<Self, PatternError> {
        let mut starts: Vec<ExactReal> = arcs.iter().map(|a| a.start.clone()).collect();
        sort_exact(&mut starts)?;
        let mut sorted = Vec::with_capacity(arcs.len());
        for s in starts {
            let i = arcs.iter().position(|a| a.start == s).expect("start present");
            sorted.push(arcs.swap_remove(i));
        }
        // consecutive arcs (cyclically) must not overlap
        let n = sorted.len();
        let total = sorted.iter().fold(ExactReal::zero(), |acc, a| &acc + &a.len);
        if lt(&modulus, &total)? {
            return Err(PatternError::Overlap);
        }
        for i in 0..n {
            let a = &sorted[i];
            let end = &a.start + &a.len;
            let next_start = if i + 1 < n {
                sorted[i + 1].start.clone()
            } else {
                &sorted[0].start + &modulus
            };
            if n > 1 && lt(&next_start, &end)? {
                return Err(PatternError::Overlap);
            }
        }

        let mut intervals = Vec::with_capacity(n + 1);
        let mut wrap = false;
        let mut head = None;
        for a in sorted {
            let end = &a.start + &a.len;
            if lt(&modulus, &end)? {
                intervals.push((a.start.clone(), modulus.clone()));
                head = Some((ExactReal::zero(), &end - &modulus));
                wrap = true;
            } else {
                intervals.push((a.start, end));
            }
        }
        if let Some(h) = head {
            intervals.insert(0, h);
        }
        Ok(IntervalPattern { modulus, intervals, wrap })
    }

    pub fn modulus(&self) -> &ExactReal {
        &self.modulus
    }

    pub fn intervals(&self) -> &[(ExactReal, ExactReal)] {
        &self.intervals
    }

    /// Whether the seam point `0 ≡ L` belongs to the set.
    pub fn wraps(&self) -> bool {
        self.wrap
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.wrap && self.intervals.len() == 1
    }

    /// Neither empty nor the whole line.
    pub fn is_nontrivial(&self) -> bool {
        !self.is_empty() && !self.is_full()
    }

    /// Maximal open arcs, in order of start point. Empty for the full line.
    pub fn arcs(&self) -> Vec<Arc> {
        if self.is_full() {
            return Vec::new();
        }
        let mut ivs: &[(ExactReal, ExactReal)] = &self.intervals;
        let mut arcs = Vec::with_capacity(ivs.len());
        let mut seam = None;
        if self.wrap {
            let (first, last) = (&ivs[0], &ivs[ivs.len() - 1]);
            seam = Some(Arc { start: last.0.clone(), len: &(&self.modulus - &last.0) + &first.1 });
            ivs = &ivs[1..ivs.len() - 1];
        }
        arcs.extend(ivs.iter().map(|(a, b)| Arc { start: a.clone(), len: b - a }));
        arcs.extend(seam);
        arcs
    }

    /// Endpoints of the arcs reduced into `[0, L)`.
    pub fn boundary(&self) -> Result<Vec<ExactReal>, PatternError> {
        let mut pts = Vec::new();
        for a in self.arcs() {
            let end = (&a.start + &a.len).rem_euclid(&self.modulus)?;
            for p in [a.start, end] {
                if !pts.contains(&p) {
                    pts.push(p);
                }
            }
        }
        sort_exact(&mut pts)?;
        Ok(pts)
    }

    /// Measure of one period.
    pub fn measure(&self) -> ExactReal {
        self.intervals.iter().fold(ExactReal::zero(), |acc, (a, b)| &acc + &(b - a))
    }

    pub fn contains(&self, x: &ExactReal) -> Result<bool, PatternError> {
        let y = x.rem_euclid(&self.modulus)?;
        if y.is_zero() {
            return Ok(self.wrap);
        }
        for (a, b) in &self.intervals {
            if lt(a, &y)? && lt(&y, b)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Image under `x ↦ x + alpha`.
    pub fn rotate(&self, alpha: &ExactReal) -> Result<IntervalPattern, PatternError> {
        if self.is_full() || self.is_empty() {
            return Ok(self.clone());
        }
        let mut arcs = Vec::new();
        for a in self.arcs() {
            arcs.push(Arc { start: (&a.start + alpha).rem_euclid(&self.modulus)?, len: a.len });
        }
        Self::from_arcs(self.modulus.clone(), arcs)
    }

    pub fn is_invariant(&self, t: &ExactReal) -> Result<bool, PatternError> {
        Ok(self.rotate(t)? == *self)
    }

    /// Least `t > 0` with `P + t = P`.
    ///
    /// A period permutes the finite boundary set, so it is congruent mod `L`
    /// to a difference of boundary points; those candidates plus `L` are
    /// tested in increasing order.
    pub fn fundamental_period(&self) -> Result<ExactReal, PatternError> {
        if self.is_full() {
            return Err(PatternError::FullLine);
        }
        if self.is_empty() {
            return Err(PatternError::EmptyPattern);
        }
        let mut candidates = self.period_candidates()?;
        sort_exact(&mut candidates)?;
        for t in candidates {
            if self.is_invariant(&t)? {
                return Ok(t);
            }
        }
        unreachable!("the modulus is always a period")
    }

    /// Candidate shifts in `(0, L]`: boundary differences and `L`.
    pub fn period_candidates(&self) -> Result<Vec<ExactReal>, PatternError> {
        let pts = self.boundary()?;
        let mut out = vec![self.modulus.clone()];
        if let Some(p0) = pts.first() {
            for p in &pts[1..] {
                let t = (p - p0).rem_euclid(&self.modulus)?;
                if !t.is_zero() && !out.contains(&t) {
                    out.push(t);
                }
            }
        }
        Ok(out)
    }

    /// Measure of `(P ∖ Q) ∪ (Q ∖ P)` over one period.
    pub fn symdiff_measure(&self, other: &IntervalPattern) -> Result<ExactReal, PatternError> {
        if self.modulus != other.modulus {
            return Err(PatternError::ModulusMismatch);
        }
        let mut cuts = vec![ExactReal::zero(), self.modulus.clone()];
        for (a, b) in self.intervals.iter().chain(&other.intervals) {
            for p in [a, b] {
                if !cuts.contains(p) {
                    cuts.push(p.clone());
                }
            }
        }
        sort_exact(&mut cuts)?;
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let mut total = ExactReal::zero();
        for w in cuts.windows(2) {
            let mid = (&w[0] + &w[1]).scale(&half);
            if self.contains(&mid)? != other.contains(&mid)? {
                total = &total + &(&w[1] - &w[0]);
            }
        }
        Ok(total)
    }
}

fn check_modulus(l: &ExactReal) -> Result<(), PatternError> {
    if l.sign()? != Sign::Positive {
        return Err(PatternError::InvalidModulus);
    }
    Ok(())
}

/// Scenario syntax, e.g. `(0, 1/4) u (1/2, 3/4) mod 1`; a component across
/// the seam prints as `(3/4, 5/4)`.
impl fmt::Display for IntervalPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_full() {
            f.write_str("full")?;
        } else if self.is_empty() {
            f.write_str("empty")?;
        } else {
            for (i, a) in self.arcs().iter().enumerate() {
                if i > 0 {
                    f.write_str(" u ")?;
                }
                write!(f, "({}, {})", a.start, &a.start + &a.len)?;
            }
        }
        write!(f, " mod {}", self.modulus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactreal::parse_real;

    fn r(s: &str) -> ExactReal {
        parse_real(s).unwrap()
    }

    fn pat(l: &str, ivs: &[(&str, &str)]) -> IntervalPattern {
        IntervalPattern::new(r(l), ivs.iter().map(|(a, b)| (r(a), r(b))).collect()).unwrap()
    }

    #[test]
    fn invariance_examples() {
        let p = pat("1", &[("0", "1/4"), ("1/2", "3/4")]);
        assert!(p.is_invariant(&r("1/2")).unwrap());
        assert!(!p.is_invariant(&r("1/4")).unwrap());
        let third = pat("1", &[("0", "1/3")]);
        assert!(!third.is_invariant(&r("sqrt(2) - 1")).unwrap());
    }

    #[test]
    fn fundamental_period_examples() {
        assert_eq!(pat("1", &[("0", "1/4"), ("1/2", "3/4")]).fundamental_period().unwrap(), r("1/2"));
        assert_eq!(pat("1", &[("0", "1/3")]).fundamental_period().unwrap(), r("1"));
        let eighths = pat("1", &[("0", "1/8"), ("1/4", "3/8"), ("1/2", "5/8"), ("3/4", "7/8")]);
        assert_eq!(eighths.fundamental_period().unwrap(), r("1/4"));
        assert_eq!(IntervalPattern::full(r("1")).unwrap().fundamental_period(), Err(PatternError::FullLine));
        assert_eq!(IntervalPattern::empty(r("1")).unwrap().fundamental_period(), Err(PatternError::EmptyPattern));
    }

    #[test]
    fn rotation_examples() {
        let half = pat("1", &[("0", "1/2")]);
        assert_eq!(half.rotate(&r("1/2")).unwrap(), pat("1", &[("1/2", "1")]));
        assert_eq!(half.rotate(&r("0")).unwrap(), half);
        let third = pat("1", &[("0", "1/3")]);
        let moved = third.rotate(&r("sqrt(2) - 1")).unwrap();
        assert_eq!(moved.intervals(), &[(r("sqrt(2) - 1"), r("sqrt(2) - 2/3"))]);
    }

    #[test]
    fn rotation_across_the_seam_splits() {
        let p = pat("1", &[("1/2", "3/4")]);
        let q = p.rotate(&r("3/8")).unwrap();
        assert!(q.wraps());
        assert_eq!(q.intervals(), &[(r("0"), r("1/8")), (r("7/8"), r("1"))]);
        assert!(q.contains(&r("0")).unwrap());
        assert_eq!(q.to_string(), "(7/8, 9/8) mod 1");
        assert_eq!(q.rotate(&r("-3/8")).unwrap(), p);
    }

    #[test]
    fn touching_intervals_keep_their_gap_point() {
        let p = pat("1", &[("0", "1/2"), ("1/2", "1")]);
        assert!(!p.is_full());
        assert!(!p.contains(&r("1/2")).unwrap());
        assert!(!p.contains(&r("0")).unwrap());
        assert_eq!(p.fundamental_period().unwrap(), r("1/2"));
        assert_eq!(p.measure(), r("1"));
    }

    #[test]
    fn circle_minus_a_point() {
        let p = pat("1", &[("1/3", "4/3")]);
        assert!(p.wraps());
        assert!(!p.is_full());
        assert!(!p.contains(&r("1/3")).unwrap());
        assert_eq!(p.fundamental_period().unwrap(), r("1"));
    }

    #[test]
    fn symdiff_examples() {
        let p = pat("1", &[("0", "1/3")]);
        assert_eq!(p.symdiff_measure(&p).unwrap(), r("0"));
        let a = pat("1", &[("0", "1/2")]);
        let b = pat("1", &[("1/2", "1")]);
        assert_eq!(a.symdiff_measure(&b).unwrap(), r("1"));
        // (0, 1/3) and (√2−1, √2−2/3) are disjoint
        let moved = p.rotate(&r("sqrt(2) - 1")).unwrap();
        assert_eq!(p.symdiff_measure(&moved).unwrap(), r("2/3"));
        let other = pat("2", &[("0", "1")]);
        assert_eq!(p.symdiff_measure(&other), Err(PatternError::ModulusMismatch));
    }

    #[test]
    fn construction_errors() {
        assert_eq!(IntervalPattern::new(r("0"), vec![]), Err(PatternError::InvalidModulus));
        assert_eq!(
            IntervalPattern::new(r("1"), vec![(r("1/2"), r("1/4"))]),
            Err(PatternError::InvalidInterval { index: 0 })
        );
        assert_eq!(
            IntervalPattern::new(r("1"), vec![(r("0"), r("1/2")), (r("1/4"), r("3/4"))]),
            Err(PatternError::Overlap)
        );
        assert_eq!(
            IntervalPattern::new(r("1"), vec![(r("3/4"), r("5/4")), (r("0"), r("1/2"))]),
            Err(PatternError::Overlap)
        );
    }

    #[test]
    fn irrational_modulus() {
        let p = pat("sqrt(2)", &[("0", "1/2")]);
        let q = p.rotate(&r("sqrt(2)")).unwrap();
        assert_eq!(p, q);
        assert_eq!(p.fundamental_period().unwrap(), r("sqrt(2)"));
        assert!(p.contains(&r("sqrt(2) + 1/4")).unwrap());
    }
}
