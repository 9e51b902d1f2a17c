//! Executes scenarios and renders reports.

use std::path::Path;
use std::time::Instant;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

use crate::approx::{
    continued_fraction, dirichlet_find_with, kronecker_find_with, orbit_discrepancy, CancelToken, KroneckerResult,
    SearchOptions, DEFAULT_SEARCH_BOUND,
};
use crate::exactreal::{fmt_rational, ExactReal, RadicalBasis};
use crate::funcalg::{composition_check, parse, CanonicalForm, Counterexample, FuncError};
use crate::lattice::{classify_group, CoeffLattice, GroupKind};
use crate::pointsets::{IntervalPattern, PatternError};
use crate::scenario::{join, parse_scenario, AnalysisKind, Arg, Expectation, Request, Scenario, ScenarioError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_COUNTEREXAMPLE_BOUND: u32 = 25;
pub const DEFAULT_CF_DEPTH: usize = 10;

const APPROX_NOTE: &str = "approx fields are 12-significant-digit decimals for reading only; exact fields are authoritative";

/// Command-line overrides applied to every analysis.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Box bound for counterexamples and search bound for Dirichlet and
    /// Kronecker witnesses.
    pub bound: Option<u64>,
    /// Continued-fraction depth when the scenario gives none.
    pub depth: Option<usize>,
    /// Tolerance for `dirichlet`/`kronecker` requests that omit one.
    pub eps: Option<ExactReal>,
    pub timing: bool,
    pub cancel: Option<CancelToken>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub expected: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diff: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub index: usize,
    pub kind: String,
    pub inputs: Vec<String>,
    pub exact: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approx: Option<String>,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub total_ms: f64,
    pub analyses_ms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub scenario: String,
    pub version: String,
    pub note: String,
    pub results: Vec<AnalysisReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl Report {
    /// `(passed, total)` over the `expect` clauses.
    pub fn expectations(&self) -> (usize, usize) {
        let checks: Vec<_> = self.results.iter().filter_map(|r| r.check.as_ref()).collect();
        (checks.iter().filter(|c| c.passed).count(), checks.len())
    }

    pub fn all_passed(&self) -> bool {
        let (p, t) = self.expectations();
        p == t
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("scenario {} (periodalg {})\n", self.scenario, self.version);
        for r in &self.results {
            out += &format!("[{}] {}\n", r.index, r.kind);
            for input in &r.inputs {
                out += &format!("    input:   {input}\n");
            }
            out += &format!("    exact:   {}\n", r.exact);
            if let Some(a) = &r.approx {
                out += &format!("    approx:  {a} (approximate)\n");
            }
            out += &format!("    verdict: {}\n", r.verdict);
            if let Some(w) = &r.witness {
                out += &format!("    witness: {w}\n");
            }
            if let Some(c) = &r.check {
                match &c.diff {
                    None => out += &format!("    check:   ok (expect {})\n", c.expected),
                    Some(d) => out += &format!("    check:   FAILED: {d}\n"),
                }
            }
        }
        let (p, t) = self.expectations();
        out += &format!("{} analyses, expectations {p}/{t} passed\n", self.results.len());
        if let Some(tm) = &self.timing {
            out += &format!("timing: {:.3} ms total\n", tm.total_ms);
        }
        out
    }
}

pub fn run_file(path: &Path, opts: &RunOptions) -> Result<Report, ScenarioError> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| ScenarioError::Io { path: path.display().to_string(), message: e.to_string() })?;
    run_source(&src, opts)
}

pub fn run_source(src: &str, opts: &RunOptions) -> Result<Report, ScenarioError> {
    run(&parse_scenario(src)?, opts)
}

/// Runs every analysis in order; the first failing analysis aborts the run.
pub fn run(scenario: &Scenario, opts: &RunOptions) -> Result<Report, ScenarioError> {
    let start = Instant::now();
    let mut results = Vec::with_capacity(scenario.analyses.len());
    let mut times = Vec::with_capacity(scenario.analyses.len());
    for req in &scenario.analyses {
        let t0 = Instant::now();
        let outcome = execute(req, opts).map_err(|message| ScenarioError::Analysis {
            index: req.index,
            kind: req.kind.name().to_string(),
            message,
        })?;
        times.push(t0.elapsed().as_secs_f64() * 1e3);
        let check = req.expect.as_ref().map(|e| check(e, &outcome));
        results.push(AnalysisReport {
            index: req.index,
            kind: req.kind.name().to_string(),
            inputs: req.args.iter().map(ToString::to_string).collect(),
            exact: outcome.exact,
            approx: outcome.approx,
            verdict: outcome.verdict,
            witness: outcome.witness,
            check,
        });
    }
    let timing = opts.timing.then(|| Timing { total_ms: start.elapsed().as_secs_f64() * 1e3, analyses_ms: times });
    Ok(Report {
        scenario: scenario.name.clone(),
        version: VERSION.to_string(),
        note: APPROX_NOTE.to_string(),
        results,
        timing,
    })
}

#[derive(Default)]
struct Outcome {
    exact: String,
    approx: Option<String>,
    verdict: String,
    witness: Option<Value>,
    value: Option<ExactReal>,
    lattice: Option<CoeffLattice>,
    seq: Option<Vec<ExactReal>>,
    form: Option<CanonicalForm>,
}

impl Outcome {
    fn real(x: ExactReal, verdict: impl Into<String>) -> Self {
        Outcome {
            exact: x.to_string(),
            approx: (!x.is_rational() || x.to_integer().is_none()).then(|| x.to_decimal()),
            verdict: verdict.into(),
            value: Some(x),
            ..Outcome::default()
        }
    }
}

fn decimals(xs: &[ExactReal]) -> String {
    format!("[{}]", xs.iter().map(ExactReal::to_decimal).collect::<Vec<_>>().join(", "))
}

fn strings<T: ToString>(xs: &[T]) -> Vec<String> {
    xs.iter().map(ToString::to_string).collect()
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn execute(req: &Request, opts: &RunOptions) -> Result<Outcome, String> {
    let a = &req.args;
    let real = |i: usize| match &a[i] {
        Arg::Real(x) => x.clone(),
        _ => unreachable!("checked by the parser"),
    };
    let opt_real = |i: usize| a.get(i).map(|_| real(i));
    let function = |i: usize| match &a[i] {
        Arg::Function(_, f) => f,
        _ => unreachable!("checked by the parser"),
    };
    let pattern = |i: usize| match &a[i] {
        Arg::Pattern(_, p) => p,
        _ => unreachable!("checked by the parser"),
    };
    let int = |i: usize| match a.get(i) {
        Some(Arg::Int(n)) => Some(n.clone()),
        _ => None,
    };
    let search = SearchOptions { bound: opts.bound.unwrap_or(DEFAULT_SEARCH_BOUND), cancel: opts.cancel.clone() };
    let eps = |i: usize| {
        opt_real(i).or_else(|| opts.eps.clone()).unwrap_or_else(|| ExactReal::from_ratio(1, 1000))
    };

    Ok(match req.kind {
        AnalysisKind::PeriodModule => {
            let f = function(0);
            let pm = f.period_module().map_err(err)?;
            let gens = pm.generators_real();
            let verdict = if f.is_constant() {
                "constant"
            } else if pm.lattice.is_zero() {
                "aperiodic"
            } else {
                "periodic"
            };
            let parity: Vec<Vec<u64>> = pm.parity_constraints.iter().map(|s| s.iter().copied().collect()).collect();
            Outcome {
                exact: pm.lattice.span_text(),
                approx: Some(decimals(&gens)),
                verdict: verdict.into(),
                witness: Some(json!({
                    "lattice": pm.lattice.to_string(),
                    "zero_radicands": pm.zero_radicands.iter().collect::<Vec<_>>(),
                    "parity_constraints": parity,
                    "parity_index": pm.parity_index().to_string(),
                })),
                lattice: Some(pm.lattice),
                ..Outcome::default()
            }
        }
        AnalysisKind::Canonical => {
            let f = function(0);
            Outcome {
                exact: f.to_string(),
                verdict: if f.is_constant() { "constant" } else { "nonconstant" }.into(),
                witness: Some(json!({ "terms": f.terms().len(), "domain": f.domain().to_string() })),
                form: Some(f.clone()),
                ..Outcome::default()
            }
        }
        AnalysisKind::IsPeriod => {
            let (f, t) = (function(0), real(1));
            match f.shift_difference(&t) {
                Ok(d) => Outcome {
                    exact: d.to_string(),
                    verdict: if d.is_zero() { "true" } else { "false" }.into(),
                    form: Some(d),
                    ..Outcome::default()
                },
                Err(e @ (FuncError::NonIntegralShift | FuncError::ShiftNotInDomain)) => Outcome {
                    exact: format!("{e}"),
                    verdict: "false".into(),
                    ..Outcome::default()
                },
                Err(e) => return Err(err(e)),
            }
        }
        AnalysisKind::Evaluate => {
            let Arg::Vector(v) = &a[1] else { unreachable!() };
            let q = function(0).evaluate(v).map_err(err)?;
            Outcome::real(ExactReal::from_rational(q), "value")
        }
        AnalysisKind::Counterexample => {
            let (f, t) = (function(0), real(1));
            let bound = int(2)
                .and_then(|n| n.to_u32())
                .or_else(|| opts.bound.map(|b| b.min(u32::MAX as u64) as u32))
                .unwrap_or(DEFAULT_COUNTEREXAMPLE_BOUND);
            match f.find_counterexample(&t, bound).map_err(err)? {
                Counterexample::Witness { point, before, after } => Outcome {
                    exact: format!("({})", join(&point)),
                    verdict: "witness".into(),
                    witness: Some(json!({
                        "point": strings(&point),
                        "before": fmt_rational(&before),
                        "after": fmt_rational(&after),
                    })),
                    ..Outcome::default()
                },
                Counterexample::NotFound { bound } => Outcome {
                    exact: format!("none in [-{bound}, {bound}]^k"),
                    verdict: "not_found".into(),
                    ..Outcome::default()
                },
            }
        }
        AnalysisKind::Commensurable => {
            let (x, y) = (real(0), real(1));
            match x.commensurable(&y).map_err(err)? {
                Some(r) => Outcome::real(ExactReal::from_rational(r), "true"),
                None => Outcome {
                    exact: "none".into(),
                    approx: x.checked_div(&y).ok().map(|r| r.to_decimal()),
                    verdict: "false".into(),
                    ..Outcome::default()
                },
            }
        }
        AnalysisKind::Classify => {
            let xs: Vec<ExactReal> = (0..a.len()).map(real).collect();
            match classify_group(&xs).map_err(err)? {
                GroupKind::Discrete(t0) => Outcome::real(t0, "discrete"),
                GroupKind::Dense => Outcome { exact: "dense".into(), verdict: "dense".into(), ..Outcome::default() },
            }
        }
        AnalysisKind::Intersect => {
            let (Arg::Domain(_, d1), Arg::Domain(_, d2)) = (&a[0], &a[1]) else { unreachable!() };
            let d = d1.intersect(d2);
            Outcome {
                exact: d.span_text(),
                verdict: format!("rank {}", d.rank()),
                witness: Some(json!({ "lattice": d.to_string() })),
                lattice: Some(d),
                ..Outcome::default()
            }
        }
        AnalysisKind::FundamentalPeriod => match pattern(0).fundamental_period() {
            Ok(t) => Outcome::real(t, "periodic"),
            Err(PatternError::FullLine | PatternError::EmptyPattern) => Outcome {
                exact: "none".into(),
                verdict: "constant".into(),
                ..Outcome::default()
            },
            Err(e) => return Err(err(e)),
        },
        AnalysisKind::Invariant => {
            let inv = pattern(0).is_invariant(&real(1)).map_err(err)?;
            Outcome { exact: inv.to_string(), verdict: inv.to_string(), ..Outcome::default() }
        }
        AnalysisKind::Symdiff => {
            let p: &IntervalPattern = pattern(0);
            let moved = p.rotate(&real(1)).map_err(err)?;
            let m = p.symdiff_measure(&moved).map_err(err)?;
            let verdict = if m.is_zero() { "invariant" } else { "moved" };
            Outcome::real(m, verdict)
        }
        AnalysisKind::Dirichlet => {
            let w = dirichlet_find_with(&real(0), &real(1), &real(2), &eps(3), &search).map_err(err)?;
            Outcome {
                witness: Some(json!({ "m": w.m.to_string(), "n": w.n.to_string(), "error": w.error.to_string() })),
                ..Outcome::real(w.error, "found")
            }
        }
        AnalysisKind::Kronecker => {
            let Arg::Reals(ts) = &a[1] else { unreachable!() };
            match kronecker_find_with(&real(0), ts, &real(2), &eps(3), &search).map_err(err)? {
                KroneckerResult::Found { q, ps, errors } => Outcome {
                    exact: format!("q = {q}, p = [{}]", join(&ps)),
                    verdict: "found".into(),
                    witness: Some(json!({ "q": q.to_string(), "ps": strings(&ps), "errors": strings(&errors) })),
                    value: Some(ExactReal::from_integer(q)),
                    ..Outcome::default()
                },
                KroneckerResult::NotFound { bound } => Outcome {
                    exact: format!("none with q <= {bound}"),
                    verdict: "not_found".into(),
                    ..Outcome::default()
                },
            }
        }
        AnalysisKind::Cfrac => {
            let depth = int(1).and_then(|n| n.to_usize()).or(opts.depth).unwrap_or(DEFAULT_CF_DEPTH);
            let cf = continued_fraction(&real(0), depth).map_err(err)?;
            let head = cf.quotients[0].to_string();
            let tail = join(&cf.quotients[1..]);
            let convergents: Vec<String> = (0..cf.convergents.len()).map(|n| fmt_rational(&cf.convergent(n))).collect();
            Outcome {
                exact: if tail.is_empty() { format!("[{head}]") } else { format!("[{head}; {tail}]") },
                approx: cf.convergents.last().map(|(p, q)| ExactReal::from_rational(BigRational::new(p.clone(), q.clone())).to_decimal()),
                verdict: if cf.terminated { "terminated" } else { "truncated" }.into(),
                witness: Some(json!({ "convergents": convergents })),
                seq: Some(cf.quotients.iter().cloned().map(ExactReal::from_integer).collect()),
                ..Outcome::default()
            }
        }
        AnalysisKind::Discrepancy => {
            let n = int(1).and_then(|n| n.to_u64()).ok_or("N must be a positive integer")?;
            let d = orbit_discrepancy(&real(0), n).map_err(err)?;
            Outcome::real(ExactReal::from_rational(d), "upper_bound")
        }
        AnalysisKind::CompositionCheck => {
            let c = composition_check(&real(0), &real(1), &real(2)).map_err(err)?;
            let verdict = if c.holds { "holds" } else { "fails" };
            Outcome {
                witness: c.n.as_ref().map(|n| json!({ "n": n.to_string() })),
                ..Outcome::real(c.ratio, verdict)
            }
        }
    })
}

fn check(expect: &Expectation, out: &Outcome) -> CheckOutcome {
    let expected = expect.to_string();
    let diff = match expect {
        Expectation::Verdict(v) => (v != &out.verdict).then(|| format!("expected {v}, got {}", out.verdict)),
        Expectation::List(xs) => {
            if let Some(l) = &out.lattice {
                (lattice_of(xs, l.basis()).as_ref() != Some(l))
                    .then(|| format!("expected span [{}], got {}", join(xs), out.exact))
            } else if let Some(seq) = &out.seq {
                (seq != xs).then(|| format!("expected [{}], got {}", join(xs), out.exact))
            } else {
                Some(format!("result {} is not a list", out.exact))
            }
        }
        Expectation::Value(x) => match &out.value {
            Some(v) if v == x => None,
            _ => Some(format!("expected {x}, got {}", out.exact)),
        },
        Expectation::AtMost(x) => match &out.value {
            Some(v) if v.cmp_exact(x).is_ok_and(|o| o.is_le()) => None,
            _ => Some(format!("expected at most {x}, got {}", out.exact)),
        },
        Expectation::Form(g) => match &out.form {
            Some(f) if f.terms() == g.terms() => None,
            _ => Some(format!("expected {g}, got {}", out.exact)),
        },
    };
    CheckOutcome { expected, passed: diff.is_none(), diff }
}

/// Lattice spanned by `xs`, which must have integral coordinates.
fn lattice_of(xs: &[ExactReal], basis: &RadicalBasis) -> Option<CoeffLattice> {
    let basis = xs.iter().fold(basis.clone(), |b, x| b.merge(x.basis()));
    let rows = xs.iter().map(|x| x.integer_coords(&basis)).collect::<Option<Vec<_>>>()?;
    CoeffLattice::new(basis, rows).ok()
}

pub const BUNDLED_SCENARIOS: [(&str, &str); 4] = [
    ("example1", include_str!("../scenarios/example1.scn")),
    ("example2", include_str!("../scenarios/example2.scn")),
    ("example3", include_str!("../scenarios/example3.scn")),
    ("mechanisms", include_str!("../scenarios/mechanisms.scn")),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelfcheckEntry {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelfcheckReport {
    pub version: String,
    pub passed: bool,
    pub checks: Vec<SelfcheckEntry>,
}

impl SelfcheckReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            out += &format!("{mark} {}: {}\n", c.name, c.detail);
        }
        let n = self.checks.iter().filter(|c| c.passed).count();
        out += &format!("selfcheck: {n}/{} passed\n", self.checks.len());
        out
    }
}

/// One entry per `expect` clause of the scenario, or a single failing entry
/// when the scenario does not run.
pub fn check_scenario(name: &str, src: &str) -> Vec<SelfcheckEntry> {
    match run_source(src, &RunOptions::default()) {
        Err(e) => vec![SelfcheckEntry { name: name.to_string(), passed: false, detail: e.to_string() }],
        Ok(report) => report
            .results
            .iter()
            .filter_map(|r| {
                let c = r.check.as_ref()?;
                Some(SelfcheckEntry {
                    name: format!("{name}#{} {}", r.index, r.kind),
                    passed: c.passed,
                    detail: c.diff.clone().unwrap_or_else(|| format!("{} = {}", r.exact, c.expected)),
                })
            })
            .collect(),
    }
}

/// Bundled scenarios plus the quick invariant suite.
pub fn selfcheck() -> SelfcheckReport {
    selfcheck_with(&BUNDLED_SCENARIOS)
}

pub fn selfcheck_with(scenarios: &[(&str, &str)]) -> SelfcheckReport {
    let mut checks: Vec<SelfcheckEntry> = scenarios.iter().flat_map(|(n, s)| check_scenario(n, s)).collect();
    for (name, f) in QUICK_SUITE {
        let (passed, detail) = match f() {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        checks.push(SelfcheckEntry { name: format!("invariant {name}"), passed, detail });
    }
    SelfcheckReport { version: VERSION.to_string(), passed: checks.iter().all(|c| c.passed), checks }
}

type QuickCheck = fn() -> Result<String, String>;

const QUICK_SUITE: [(&str, QuickCheck); 6] = [
    ("field inverse", quick_inverse),
    ("convergent bound", quick_convergents),
    ("lattice intersection", quick_intersection),
    ("sum homomorphism", quick_homomorphism),
    ("pattern period", quick_pattern),
    ("golden discrepancy", quick_discrepancy),
];

fn real(s: &str) -> ExactReal {
    s.parse().expect("valid literal")
}

fn quick_inverse() -> Result<String, String> {
    let x = real("1 + sqrt(2) + sqrt(3) - 2*sqrt(5)");
    let prod = x.checked_mul(&x.invert().map_err(err)?).map_err(err)?;
    (prod == ExactReal::one()).then(|| format!("({x})^-1 verified")).ok_or(format!("x * x^-1 = {prod}"))
}

fn quick_convergents() -> Result<String, String> {
    let cf = continued_fraction(&real("sqrt(3)"), 12).map_err(err)?;
    for n in 0..cf.convergents.len() - 1 {
        if !cf.error_bound_holds(n).map_err(err)? {
            return Err(format!("bound fails at n = {n}"));
        }
    }
    Ok(format!("{} convergents of sqrt(3)", cf.convergents.len()))
}

fn quick_intersection() -> Result<String, String> {
    let basis = RadicalBasis::new([1, 2]).map_err(err)?;
    let a = CoeffLattice::from_rows(basis.clone(), &[vec![2, 1], vec![0, 3]]).map_err(err)?;
    let b = CoeffLattice::from_rows(basis, &[vec![3, 0], vec![1, 2]]).map_err(err)?;
    let c = a.intersect(&b);
    for x in -12..=12i64 {
        for y in -12..=12i64 {
            let v = [x, y];
            let both = a.member_i64(&v).map_err(err)? && b.member_i64(&v).map_err(err)?;
            if both != c.member_i64(&v).map_err(err)? {
                return Err(format!("membership of ({x}, {y}) disagrees"));
            }
        }
    }
    Ok(format!("index {}", c.determinant().unwrap_or_default()))
}

fn quick_homomorphism() -> Result<String, String> {
    let d = CoeffLattice::full(RadicalBasis::new([1, 2, 3]).map_err(err)?);
    let f = parse("recip(sqrt(2)) - recip(sqrt(3))", &d).map_err(err)?;
    let g = parse("recip(one) + recip(sqrt(3))*sgn(sqrt(2))", &d).map_err(err)?;
    let (s, p) = (f.add(&g), f.mul(&g));
    for k in -3..=3i64 {
        for l in -3..=3i64 {
            for m in -3..=3i64 {
                let v = [k, l, m];
                let (fv, gv) = (f.evaluate_i64(&v).map_err(err)?, g.evaluate_i64(&v).map_err(err)?);
                if s.evaluate_i64(&v).map_err(err)? != &fv + &gv || p.evaluate_i64(&v).map_err(err)? != &fv * &gv {
                    return Err(format!("disagreement at ({k}, {l}, {m})"));
                }
            }
        }
    }
    Ok("sum and product agree on [-3, 3]^3".into())
}

fn quick_pattern() -> Result<String, String> {
    let p = IntervalPattern::new(
        ExactReal::one(),
        vec![(ExactReal::zero(), real("1/4")), (real("1/2"), real("3/4"))],
    )
    .map_err(err)?;
    let t = p.fundamental_period().map_err(err)?;
    (t == real("1/2")).then(|| format!("fundamental period {t}")).ok_or(format!("got {t}"))
}

fn quick_discrepancy() -> Result<String, String> {
    let golden = real("(sqrt(5) - 1)/2");
    let d = orbit_discrepancy(&golden, 100).map_err(err)?;
    let scaled = d.to_f64().unwrap_or(f64::INFINITY) * 100.0 / 100f64.ln();
    (scaled <= 3.0)
        .then(|| format!("D*_100 <= {} (N D*/log N = {scaled:.3})", fmt_rational(&d)))
        .ok_or(format!("N D*/log N = {scaled:.3}"))
}
