//! Constructive Diophantine approximation on exact reals.
//!
//! Searches screen candidates with dyadic fixed-point enclosures and confirm
//! every returned witness with an exact sign test, so a result never rests on
//! floating point.

use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::exactreal::{ExactError, ExactReal, Sign};

/// Default search bound for `kronecker_find` and the `dirichlet_find`
/// fallback.
pub const DEFAULT_SEARCH_BOUND: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApproxError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("periods are commensurable, so their group is discrete")]
    CommensurableInput,
    #[error("no witness within search bound {bound}")]
    SearchExhausted { bound: u64 },
    #[error("search cancelled")]
    Cancelled,
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Cooperative cancellation flag shared between a caller and a search.
#[derive(Debug, Clone, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, AtomicOrdering::Relaxed);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(AtomicOrdering::Relaxed)
    }
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub bound: u64,
    pub cancel: Option<CancelToken>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { bound: DEFAULT_SEARCH_BOUND, cancel: None }
    }
}

impl SearchOptions {
    pub fn with_bound(bound: u64) -> Self {
        SearchOptions { bound, cancel: None }
    }

    fn check(&self, step: u64) -> Result<(), ApproxError> {
        if step.is_multiple_of(4096) && self.cancel.as_ref().is_some_and(CancelToken::is_cancelled) {
            return Err(ApproxError::Cancelled);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuedFraction {
    pub x: ExactReal,
    /// `a₀; a₁, a₂, …`
    pub quotients: Vec<BigInt>,
    /// `(p_n, q_n)`, one per quotient.
    pub convergents: Vec<(BigInt, BigInt)>,
    /// The expansion ended because `x` is rational.
    pub terminated: bool,
}

impl ContinuedFraction {
    pub fn convergent(&self, n: usize) -> BigRational {
        let (p, q) = &self.convergents[n];
        BigRational::new(p.clone(), q.clone())
    }

    /// Exact check of `|x − p_n/q_n| < 1/(q_n·q_{n+1})`.
    pub fn error_bound_holds(&self, n: usize) -> Result<bool, ExactError> {
        let (_, q) = &self.convergents[n];
        let (_, q_next) = &self.convergents[n + 1];
        let err = (&self.x - &ExactReal::from_rational(self.convergent(n))).abs()?;
        let bound = ExactReal::from_rational(BigRational::new(BigInt::one(), q * q_next));
        Ok((&bound - &err).sign()? == Sign::Positive)
    }
}

/// Expansion of `x` into at most `depth` partial quotients.
pub fn continued_fraction(x: &ExactReal, depth: usize) -> Result<ContinuedFraction, ApproxError> {
    if depth == 0 {
        return Err(ApproxError::InvalidInput("depth must be at least 1".into()));
    }
    let mut quotients = Vec::new();
    let mut convergents: Vec<(BigInt, BigInt)> = Vec::new();
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    let (mut p_prev2, mut q_prev2) = (BigInt::zero(), BigInt::one());
    let mut rest = x.clone();
    let mut terminated = false;
    while quotients.len() < depth {
        let a = rest.floor()?;
        let p = &a * &p_prev + &p_prev2;
        let q = &a * &q_prev + &q_prev2;
        quotients.push(a.clone());
        convergents.push((p.clone(), q.clone()));
        (p_prev2, q_prev2, p_prev, q_prev) = (p_prev, q_prev, p, q);
        let frac = &rest - &ExactReal::from_integer(a);
        if frac.is_zero() {
            terminated = true;
            break;
        }
        rest = frac.invert()?;
    }
    Ok(ContinuedFraction { x: x.clone(), quotients, convergents, terminated })
}

/// Integers `(m, n)` with `|m·T₁ + n·T₂ − target| < eps`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirichletWitness {
    pub m: BigInt,
    pub n: BigInt,
    /// `m·T₁ + n·T₂ − target`
    pub error: ExactReal,
}

pub fn dirichlet_find(
    t1: &ExactReal,
    t2: &ExactReal,
    target: &ExactReal,
    eps: &ExactReal,
) -> Result<DirichletWitness, ApproxError> {
    dirichlet_find_with(t1, t2, target, eps, &SearchOptions::default())
}

/// Writes `m·T₁ + n·T₂ − target = T₁·(m + nα − β)` with `α = T₂/T₁` and
/// scans `n = 0, 1, …` for `‖nα − β‖ < eps/|T₁|`. If `q_k ≥ |T₁|/eps` is a
/// convergent denominator of `α`, the first `q_k + q_{k−1}` multiples of `α`
/// leave gaps shorter than `2/q_k` on the circle, which bounds the scan.
/// Past that bound (or when the expansion is too long to compute) a
/// symmetric brute-force scan up to `opts.bound` takes over.
pub fn dirichlet_find_with(
    t1: &ExactReal,
    t2: &ExactReal,
    target: &ExactReal,
    eps: &ExactReal,
    opts: &SearchOptions,
) -> Result<DirichletWitness, ApproxError> {
    if eps.sign()? != Sign::Positive {
        return Err(ApproxError::InvalidInput("eps must be positive".into()));
    }
    if t1.commensurable(t2)?.is_some() {
        return Err(ApproxError::CommensurableInput);
    }
    let alpha = t2.checked_div(t1)?;
    let beta = target.checked_div(t1)?;
    let delta = eps.checked_div(&t1.abs()?)?;

    let verify = |n: &BigInt| -> Result<Option<DirichletWitness>, ApproxError> {
        let nb = ExactReal::from_integer(n.clone());
        let r = &(&nb * &alpha) - &beta;
        let m = -r.round()?;
        let err = &(&ExactReal::from_integer(m.clone()) * t1) + &(&(&nb * t2) - target);
        Ok(((eps - &err.abs()?).sign()? == Sign::Positive).then(|| DirichletWitness { m, n: n.clone(), error: err }))
    };

    let scan_len = three_distance_bound(&alpha, &delta, opts.bound)?;
    let screen = Screen::new(&[(&alpha, &beta, &delta)], scan_len.unwrap_or(0).max(opts.bound))?;
    let limit = scan_len.unwrap_or(0);
    for step in 0..limit {
        opts.check(step)?;
        let n = BigInt::from(step);
        if screen.may_hit(&n) {
            if let Some(w) = verify(&n)? {
                return Ok(w);
            }
        }
    }
    for step in 0..=opts.bound {
        opts.check(step)?;
        for n in [BigInt::from(step), -BigInt::from(step)] {
            if screen.may_hit(&n) {
                if let Some(w) = verify(&n)? {
                    return Ok(w);
                }
            }
        }
    }
    Err(ApproxError::SearchExhausted { bound: opts.bound })
}

/// `q_k + q_{k−1}` for the first convergent of `alpha` with
/// `q_k ≥ 1/delta`, or `None` when that exceeds `cap`.
fn three_distance_bound(alpha: &ExactReal, delta: &ExactReal, cap: u64) -> Result<Option<u64>, ApproxError> {
    const MAX_TERMS: usize = 200;
    let need = delta.invert()?;
    let mut rest = alpha.clone();
    let (mut q_prev, mut q) = (BigInt::zero(), BigInt::one());
    for _ in 0..MAX_TERMS {
        if ExactReal::from_integer(q.clone()).cmp_exact(&need)? != std::cmp::Ordering::Less {
            return Ok((&q + &q_prev).to_u64().filter(|&n| n <= cap));
        }
        let a = rest.floor()?;
        let frac = &rest - &ExactReal::from_integer(a);
        if frac.is_zero() {
            return Ok(None);
        }
        rest = frac.invert()?;
        let a_next = rest.floor()?;
        (q_prev, q) = (q.clone(), &a_next * &q + &q_prev);
    }
    Ok(None)
}

/// Conservative fixed-point filter for `‖n·ratio − offset‖ < tol` over
/// several `(ratio, offset, tol)` triples at once.
struct Screen {
    bits: u32,
    one: BigInt,
    rows: Vec<ScreenRow>,
}

struct ScreenRow {
    ratio: (BigInt, BigInt),
    offset: (BigInt, BigInt),
    tol_hi: BigInt,
}

impl Screen {
    fn new(rows: &[(&ExactReal, &ExactReal, &ExactReal)], max_n: u64) -> Result<Self, ExactError> {
        let mut tol_bits = 0u64;
        for (_, _, tol) in rows {
            let inv = tol.invert()?.floor()?;
            tol_bits = tol_bits.max(inv.bits());
        }
        let bits = (48 + tol_bits + 64 - max_n.max(1).leading_zeros() as u64) as u32;
        let rows = rows
            .iter()
            .map(|(ratio, offset, tol)| ScreenRow {
                ratio: ratio.enclose(bits),
                offset: offset.enclose(bits),
                tol_hi: tol.enclose(bits).1,
            })
            .collect();
        Ok(Screen { bits, one: BigInt::one() << bits as usize, rows })
    }

    /// `false` only when every value in the enclosure of `n·ratio − offset`
    /// is at least `tol` away from all integers.
    fn may_hit(&self, n: &BigInt) -> bool {
        self.rows.iter().all(|row| {
            let (a, b) = if n.is_negative() {
                (n * &row.ratio.1, n * &row.ratio.0)
            } else {
                (n * &row.ratio.0, n * &row.ratio.1)
            };
            let lo = a - &row.offset.1 - &row.tol_hi;
            let hi = b - &row.offset.0 + &row.tol_hi;
            // does [lo, hi] contain a multiple of 2^bits?
            let k = lo.div_ceil(&self.one);
            k * &self.one <= hi
        })
    }

    #[allow(dead_code)]
    fn precision(&self) -> u32 {
        self.bits
    }
}

/// Simultaneous witness `|q·T − p_i·T_i − delta| < eps` for every `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KroneckerResult {
    Found { q: BigInt, ps: Vec<BigInt>, errors: Vec<ExactReal> },
    NotFound { bound: u64 },
}

pub fn kronecker_find(
    t: &ExactReal,
    ts: &[ExactReal],
    delta: &ExactReal,
    eps: &ExactReal,
) -> Result<KroneckerResult, ApproxError> {
    kronecker_find_with(t, ts, delta, eps, &SearchOptions::default())
}

/// Least `q` in `1..=bound` with `p_i` the nearest integer to
/// `(q·T − delta)/T_i`.
pub fn kronecker_find_with(
    t: &ExactReal,
    ts: &[ExactReal],
    delta: &ExactReal,
    eps: &ExactReal,
    opts: &SearchOptions,
) -> Result<KroneckerResult, ApproxError> {
    if eps.sign()? != Sign::Positive {
        return Err(ApproxError::InvalidInput("eps must be positive".into()));
    }
    if ts.is_empty() {
        return Err(ApproxError::InvalidInput("need at least one period".into()));
    }
    if t.is_zero() || ts.iter().any(ExactReal::is_zero) {
        return Err(ApproxError::Exact(ExactError::DivisionByZero));
    }
    let mut ratios = Vec::with_capacity(ts.len());
    for ti in ts {
        let ti_abs = ti.abs()?;
        ratios.push((t.checked_div(ti)?, delta.checked_div(ti)?, eps.checked_div(&ti_abs)?));
    }
    let rows: Vec<_> = ratios.iter().map(|(r, c, d)| (r, c, d)).collect();
    let screen = Screen::new(&rows, opts.bound)?;

    for step in 1..=opts.bound {
        opts.check(step)?;
        let q = BigInt::from(step);
        if !screen.may_hit(&q) {
            continue;
        }
        let qt = &ExactReal::from_integer(q.clone()) * t;
        let mut ps = Vec::with_capacity(ts.len());
        let mut errors = Vec::with_capacity(ts.len());
        let mut ok = true;
        for (ti, (ratio, offset, _)) in ts.iter().zip(&ratios) {
            let p = (&(&ExactReal::from_integer(q.clone()) * ratio) - offset).round()?;
            let err = &(&qt - &(&ExactReal::from_integer(p.clone()) * ti)) - delta;
            if (eps - &err.abs()?).sign()? != Sign::Positive {
                ok = false;
                break;
            }
            ps.push(p);
            errors.push(err);
        }
        if ok {
            return Ok(KroneckerResult::Found { q, ps, errors });
        }
    }
    Ok(KroneckerResult::NotFound { bound: opts.bound })
}

/// Rigorous upper bound on the star discrepancy of
/// `{i·alpha mod 1 : 0 ≤ i < n}`.
///
/// Each point gets a dyadic enclosure `[lo_i, hi_i]`; the k-th smallest
/// point then lies between the k-th smallest `lo` and the k-th smallest
/// `hi`, and the usual sorted-point formula is evaluated on those bounds.
/// The result is rounded up to a multiple of `10^-12`.
pub fn orbit_discrepancy(alpha: &ExactReal, n: u64) -> Result<BigRational, ApproxError> {
    if n == 0 {
        return Err(ApproxError::InvalidInput("N must be at least 1".into()));
    }
    if alpha.sign()? != Sign::Positive || alpha.cmp_exact(&ExactReal::one())? != std::cmp::Ordering::Less {
        return Err(ApproxError::InvalidInput("alpha must lie in (0, 1)".into()));
    }
    let bits = 64 + (64 - n.leading_zeros());
    let one = BigInt::one() << bits as usize;
    let (a_lo, a_hi) = alpha.enclose(bits);
    let mut los = Vec::with_capacity(n as usize);
    let mut his = Vec::with_capacity(n as usize);
    for i in 0..n {
        let (lo, hi) = (&a_lo * i, &a_hi * i);
        let (k_lo, k_hi) = (lo.div_floor(&one), hi.div_floor(&one));
        if k_lo == k_hi {
            los.push(lo - &k_lo * &one);
            his.push(hi - &k_lo * &one);
        } else {
            let x = (&ExactReal::from_integer(i) * alpha).rem_euclid(&ExactReal::one())?;
            let (lo, hi) = x.enclose(bits);
            los.push(lo);
            his.push(hi);
        }
    }
    los.sort();
    his.sort();
    let nn = BigInt::from(n);
    let mut worst = BigInt::zero();
    for (k, (lo, hi)) in los.iter().zip(&his).enumerate() {
        let k = BigInt::from(k);
        let above = (&k + 1) * &one - &nn * lo;
        let below = &nn * hi - &k * &one;
        worst = worst.max(above).max(below);
    }
    // round up to a denominator of 10^12 so reports stay readable
    let scale = BigInt::from(10u64).pow(12);
    let num = (worst * &scale).div_ceil(&(nn * one));
    Ok(BigRational::new(num, scale))
}
