//! Scenario files: declarations of bases, domains, reals, functions and
//! patterns followed by analysis requests.
//!
//! Names are bound while parsing, so every expression is resolved against
//! the declarations above it.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::exactreal::{parse_real_expr, ExactError, ExactReal, RadicalBasis};
use crate::funcalg::{parse_expr, CanonicalForm, FormEnv, FuncError};
use crate::lattice::{CoeffLattice, LatticeError};
use crate::pointsets::{IntervalPattern, PatternError};
use crate::syntax::{Cursor, SyntaxError, Tok};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("name error at {line}:{column}: {message}")]
    Name { line: usize, column: usize, message: String },
    #[error("invalid declaration at {line}:{column}: {message}")]
    Declaration { line: usize, column: usize, message: String },
    #[error("analysis #{index} ({kind}) failed: {message}")]
    Analysis { index: usize, kind: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

impl ScenarioError {
    /// Process exit code: 2 for problems with the scenario itself, 3 for a
    /// failing analysis.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Analysis { .. } => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    Basis(RadicalBasis),
    Domain(CoeffLattice),
    Real(ExactReal),
    Function(CanonicalForm),
    Pattern(IntervalPattern),
}

impl Binding {
    fn sort(&self) -> &'static str {
        match self {
            Binding::Basis(_) => "basis",
            Binding::Domain(_) => "domain",
            Binding::Real(_) => "real",
            Binding::Function(_) => "function",
            Binding::Pattern(_) => "pattern",
        }
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Binding::Basis(b) => write!(f, "{b}"),
            Binding::Domain(d) => write!(f, "{d}"),
            Binding::Real(x) => write!(f, "{x}"),
            Binding::Function(g) => write!(f, "{g}"),
            Binding::Pattern(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Declaration {
    pub name: String,
    pub value: Binding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnalysisKind {
    PeriodModule,
    Canonical,
    IsPeriod,
    Evaluate,
    Counterexample,
    Commensurable,
    Classify,
    Intersect,
    FundamentalPeriod,
    Invariant,
    Symdiff,
    Dirichlet,
    Kronecker,
    Cfrac,
    Discrepancy,
    CompositionCheck,
}

#[derive(Clone, Copy)]
enum Param {
    Function,
    Domain,
    Pattern,
    Real,
    Reals,
    Int,
    Vector,
}

impl AnalysisKind {
    pub const ALL: [AnalysisKind; 16] = [
        AnalysisKind::PeriodModule,
        AnalysisKind::Canonical,
        AnalysisKind::IsPeriod,
        AnalysisKind::Evaluate,
        AnalysisKind::Counterexample,
        AnalysisKind::Commensurable,
        AnalysisKind::Classify,
        AnalysisKind::Intersect,
        AnalysisKind::FundamentalPeriod,
        AnalysisKind::Invariant,
        AnalysisKind::Symdiff,
        AnalysisKind::Dirichlet,
        AnalysisKind::Kronecker,
        AnalysisKind::Cfrac,
        AnalysisKind::Discrepancy,
        AnalysisKind::CompositionCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AnalysisKind::PeriodModule => "period_module",
            AnalysisKind::Canonical => "canonical",
            AnalysisKind::IsPeriod => "is_period",
            AnalysisKind::Evaluate => "evaluate",
            AnalysisKind::Counterexample => "counterexample",
            AnalysisKind::Commensurable => "commensurable",
            AnalysisKind::Classify => "classify",
            AnalysisKind::Intersect => "intersect",
            AnalysisKind::FundamentalPeriod => "fundamental_period",
            AnalysisKind::Invariant => "invariant",
            AnalysisKind::Symdiff => "symdiff",
            AnalysisKind::Dirichlet => "dirichlet",
            AnalysisKind::Kronecker => "kronecker",
            AnalysisKind::Cfrac => "cfrac",
            AnalysisKind::Discrepancy => "discrepancy",
            AnalysisKind::CompositionCheck => "composition_check",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Required parameters, then optional ones.
    fn params(self) -> (&'static [Param], &'static [Param]) {
        use Param::*;
        match self {
            AnalysisKind::PeriodModule | AnalysisKind::Canonical => (&[Function], &[]),
            AnalysisKind::IsPeriod => (&[Function, Real], &[]),
            AnalysisKind::Evaluate => (&[Function, Vector], &[]),
            AnalysisKind::Counterexample => (&[Function, Real], &[Int]),
            AnalysisKind::Commensurable => (&[Real, Real], &[]),
            AnalysisKind::Classify => (&[Real], &[]),
            AnalysisKind::Intersect => (&[Domain, Domain], &[]),
            AnalysisKind::FundamentalPeriod => (&[Pattern], &[]),
            AnalysisKind::Invariant | AnalysisKind::Symdiff => (&[Pattern, Real], &[]),
            AnalysisKind::Dirichlet => (&[Real, Real, Real], &[Real]),
            AnalysisKind::Kronecker => (&[Real, Reals, Real], &[Real]),
            AnalysisKind::Cfrac => (&[Real], &[Int]),
            AnalysisKind::Discrepancy => (&[Real, Int], &[]),
            AnalysisKind::CompositionCheck => (&[Real, Real, Real], &[]),
        }
    }

    fn variadic(self) -> bool {
        self == AnalysisKind::Classify
    }
}

impl fmt::Display for AnalysisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arg {
    Function(String, CanonicalForm),
    Domain(String, CoeffLattice),
    Pattern(String, IntervalPattern),
    Real(ExactReal),
    Reals(Vec<ExactReal>),
    Int(BigInt),
    Vector(Vec<BigInt>),
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Function(name, g) => write!(f, "{name} = {g}"),
            Arg::Domain(name, d) => write!(f, "{name} = {d}"),
            Arg::Pattern(name, p) => write!(f, "{name} = {p}"),
            Arg::Real(x) => write!(f, "{x}"),
            Arg::Reals(xs) => write!(f, "[{}]", join(xs)),
            Arg::Int(n) => write!(f, "{n}"),
            Arg::Vector(v) => write!(f, "({})", join(v)),
        }
    }
}

pub(crate) fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

/// What an `expect` clause asserts about a result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expectation {
    /// `expect dense`, `expect true`, …
    Verdict(String),
    /// `expect [1, sqrt(2)]`: the same lattice for lattice-valued results,
    /// the same sequence otherwise.
    List(Vec<ExactReal>),
    /// `expect 3/2`
    Value(ExactReal),
    /// `expect at_most 21/1000`
    AtMost(ExactReal),
    /// `expect recip(one) + recip(sqrt(2))` for `canonical`.
    Form(CanonicalForm),
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::Verdict(v) => f.write_str(v),
            Expectation::List(xs) => write!(f, "[{}]", join(xs)),
            Expectation::Value(x) => write!(f, "{x}"),
            Expectation::AtMost(x) => write!(f, "at_most {x}"),
            Expectation::Form(g) => write!(f, "{g}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Request {
    /// 1-based position among the analyses.
    pub index: usize,
    pub kind: AnalysisKind,
    pub args: Vec<Arg>,
    pub expect: Option<Expectation>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Scenario {
    pub name: String,
    pub declarations: Vec<Declaration>,
    pub analyses: Vec<Request>,
}

impl Scenario {
    pub fn lookup(&self, name: &str) -> Option<&Binding> {
        self.declarations.iter().find(|d| d.name == name).map(|d| &d.value)
    }
}

const KEYWORDS: &[&str] = &[
    "scenario", "basis", "domain", "real", "function", "pattern", "analyze", "expect", "on", "mod", "over",
    "lattice", "span", "intersect", "sqrt", "one", "abs1", "recip", "sgn", "u", "empty", "full", "at_most",
];

const VERDICTS: &[&str] = &[
    "true", "false", "dense", "discrete", "found", "not_found", "witness", "holds", "fails", "periodic",
    "aperiodic", "constant", "nonconstant", "moved", "invariant", "terminated", "truncated", "upper_bound",
];

struct Parser {
    cur: Cursor,
    scenario: Scenario,
    index: BTreeMap<String, usize>,
}

/// Parses and binds a scenario.
pub fn parse_scenario(src: &str) -> Result<Scenario, ScenarioError> {
    let mut p = Parser { cur: Cursor::new(src)?, scenario: Scenario::default(), index: BTreeMap::new() };
    while !p.cur.at_eof() {
        p.statement()?;
    }
    Ok(p.scenario)
}

impl Parser {
    fn statement(&mut self) -> Result<(), ScenarioError> {
        let (line, column) = self.cur.location();
        let word = self.cur.expect_ident()?;
        match word.as_str() {
            "scenario" => {
                let name = match self.cur.next() {
                    Tok::Str(s) | Tok::Ident(s) => s,
                    other => return Err(self.cur.error(format!("expected a scenario name, found {other}")).into()),
                };
                self.scenario.name = name;
            }
            "basis" => {
                let name = self.new_name()?;
                self.cur.expect_sym('=')?;
                let b = self.basis_literal()?;
                self.bind(name, Binding::Basis(b));
            }
            "domain" => {
                let name = self.new_name()?;
                self.cur.expect_sym('=')?;
                let d = self.domain_literal()?;
                self.bind(name, Binding::Domain(d));
            }
            "real" => {
                let name = self.new_name()?;
                self.cur.expect_sym('=')?;
                let x = self.real()?;
                self.bind(name, Binding::Real(x));
            }
            "function" => {
                let name = self.new_name()?;
                let domain = if self.cur.eat_ident("on") { Some(self.domain_ref()?) } else { None };
                self.cur.expect_sym('=')?;
                let domain = match domain {
                    Some(d) => d,
                    None => self.implied_domain()?,
                };
                let f = self.form(&domain)?;
                self.bind(name, Binding::Function(f));
            }
            "pattern" => {
                let name = self.new_name()?;
                self.cur.expect_keyword("mod")?;
                let modulus = self.real()?;
                self.cur.expect_sym('=')?;
                let p = self.pattern_literal(modulus)?;
                self.bind(name, Binding::Pattern(p));
            }
            "analyze" => self.analysis(line)?,
            other => {
                return Err(SyntaxError { line, column, message: format!("unknown statement `{other}`") }.into());
            }
        }
        self.cur.expect_sym(';')?;
        Ok(())
    }

    fn new_name(&mut self) -> Result<String, ScenarioError> {
        let (line, column) = self.cur.location();
        let name = self.cur.expect_ident()?;
        if KEYWORDS.contains(&name.as_str()) || VERDICTS.contains(&name.as_str()) {
            return Err(ScenarioError::Name { line, column, message: format!("`{name}` is reserved") });
        }
        if self.index.contains_key(&name) {
            return Err(ScenarioError::Name { line, column, message: format!("`{name}` is already bound") });
        }
        Ok(name)
    }

    fn bind(&mut self, name: String, value: Binding) {
        self.index.insert(name.clone(), self.scenario.declarations.len());
        self.scenario.declarations.push(Declaration { name, value });
    }

    fn get(&self, name: &str) -> Option<&Binding> {
        self.index.get(name).map(|&i| &self.scenario.declarations[i].value)
    }

    fn name_of_sort(&mut self, sort: &str) -> Result<(String, Binding), ScenarioError> {
        let (line, column) = self.cur.location();
        let name = self.cur.expect_ident()?;
        match self.get(&name) {
            Some(b) if b.sort() == sort => Ok((name, b.clone())),
            Some(b) => Err(ScenarioError::Name {
                line,
                column,
                message: format!("`{name}` is a {}, expected a {sort}", b.sort()),
            }),
            None => Err(ScenarioError::Name { line, column, message: format!("unknown {sort} `{name}`") }),
        }
    }

    fn decl_error(&self, line: usize, column: usize, e: impl fmt::Display) -> ScenarioError {
        ScenarioError::Declaration { line, column, message: e.to_string() }
    }

    fn real(&mut self) -> Result<ExactReal, ScenarioError> {
        let (line, column) = self.cur.location();
        let index = &self.index;
        let decls = &self.scenario.declarations;
        let lookup = |name: &str| match index.get(name).map(|&i| &decls[i].value) {
            Some(Binding::Real(x)) => Some(x.clone()),
            _ => None,
        };
        match parse_real_expr(&mut self.cur, &lookup) {
            Ok(x) => Ok(x),
            Err(ExactError::Syntax(e)) => Err(self.unknown_name_or(e)),
            Err(e) => Err(self.decl_error(line, column, e)),
        }
    }

    /// Turns "unknown name" syntax errors into name errors.
    fn unknown_name_or(&self, e: SyntaxError) -> ScenarioError {
        if e.message.starts_with("unknown name") {
            ScenarioError::Name { line: e.line, column: e.column, message: e.message }
        } else {
            e.into()
        }
    }

    fn form(&mut self, domain: &CoeffLattice) -> Result<CanonicalForm, ScenarioError> {
        let (line, column) = self.cur.location();
        let index = &self.index;
        let decls = &self.scenario.declarations;
        let lookup = |name: &str| match index.get(name).map(|&i| &decls[i].value) {
            Some(Binding::Function(g)) => Some(g.clone()),
            _ => None,
        };
        let env = FormEnv { domain: domain.clone(), lookup: &lookup };
        match parse_expr(&mut self.cur, &env) {
            Ok(f) => Ok(f),
            Err(FuncError::Syntax(e)) => Err(self.unknown_name_or(e)),
            Err(e @ (FuncError::NonMonomialDivisor { line, column } | FuncError::UnknownRadicand { line, column, .. })) => {
                Err(self.decl_error(line, column, e))
            }
            Err(e) => Err(self.decl_error(line, column, e)),
        }
    }

    /// Intersection of the domains of the functions named in the expression
    /// ahead of the cursor.
    fn implied_domain(&mut self) -> Result<CoeffLattice, ScenarioError> {
        let mut look = self.cur.clone();
        let mut domain: Option<CoeffLattice> = None;
        while !look.at_eof() && !look.is_sym(';') {
            if let Tok::Ident(name) = look.next() {
                if let Some(Binding::Function(g)) = self.get(&name) {
                    domain = Some(match domain {
                        Some(d) => d.intersect(g.domain()),
                        None => g.domain().clone(),
                    });
                }
            }
        }
        domain.ok_or_else(|| self.cur.error("function needs `on DOMAIN` when it names no other function").into())
    }

    fn selector(&mut self) -> Result<u64, ScenarioError> {
        if self.cur.eat_ident("one") {
            return Ok(1);
        }
        if self.cur.eat_ident("sqrt") {
            self.cur.expect_sym('(')?;
            let n = self.small_int()?;
            self.cur.expect_sym(')')?;
            return Ok(n);
        }
        let n = self.small_int()?;
        if n != 1 {
            return Err(self.cur.error("a bare integer selector must be 1").into());
        }
        Ok(1)
    }

    fn small_int(&mut self) -> Result<u64, ScenarioError> {
        let n = self.cur.expect_int()?;
        n.to_u64().ok_or_else(|| self.cur.error("integer out of range").into())
    }

    fn selector_list(&mut self) -> Result<RadicalBasis, ScenarioError> {
        let (line, column) = self.cur.location();
        self.cur.expect_sym('(')?;
        let mut ds = vec![self.selector()?];
        while self.cur.eat_sym(',') {
            ds.push(self.selector()?);
        }
        self.cur.expect_sym(')')?;
        RadicalBasis::new(ds).map_err(|e| self.decl_error(line, column, e))
    }

    fn basis_literal(&mut self) -> Result<RadicalBasis, ScenarioError> {
        self.cur.expect_keyword("basis")?;
        self.selector_list()
    }

    fn basis_ref(&mut self) -> Result<RadicalBasis, ScenarioError> {
        if self.cur.is_ident("basis") {
            return self.basis_literal();
        }
        match self.name_of_sort("basis")? {
            (_, Binding::Basis(b)) => Ok(b),
            _ => unreachable!(),
        }
    }

    fn domain_ref(&mut self) -> Result<CoeffLattice, ScenarioError> {
        if self.cur.is_ident("span") || self.cur.is_ident("lattice") || self.cur.is_ident("intersect") {
            return self.domain_literal();
        }
        match self.name_of_sort("domain")? {
            (_, Binding::Domain(d)) => Ok(d),
            _ => unreachable!(),
        }
    }

    fn domain_literal(&mut self) -> Result<CoeffLattice, ScenarioError> {
        let (line, column) = self.cur.location();
        if self.cur.eat_ident("span") {
            if self.cur.is_sym('(') {
                return Ok(CoeffLattice::full(self.selector_list()?));
            }
            return Ok(CoeffLattice::full(self.basis_ref()?));
        }
        if self.cur.eat_ident("intersect") {
            self.cur.expect_sym('(')?;
            let a = self.domain_ref()?;
            self.cur.expect_sym(',')?;
            let b = self.domain_ref()?;
            self.cur.expect_sym(')')?;
            return Ok(a.intersect(&b));
        }
        self.cur.expect_keyword("lattice")?;
        self.cur.expect_sym('[')?;
        let mut rows = Vec::new();
        if !self.cur.is_sym(']') {
            rows.push(self.int_vector()?);
            while self.cur.eat_sym(',') {
                rows.push(self.int_vector()?);
            }
        }
        self.cur.expect_sym(']')?;
        self.cur.expect_keyword("over")?;
        let basis = self.basis_ref()?;
        CoeffLattice::new(basis, rows).map_err(|e: LatticeError| self.decl_error(line, column, e))
    }

    fn int_vector(&mut self) -> Result<Vec<BigInt>, ScenarioError> {
        self.cur.expect_sym('(')?;
        let mut v = vec![self.cur.expect_signed_int()?];
        while self.cur.eat_sym(',') {
            v.push(self.cur.expect_signed_int()?);
        }
        self.cur.expect_sym(')')?;
        Ok(v)
    }

    fn pattern_literal(&mut self, modulus: ExactReal) -> Result<IntervalPattern, ScenarioError> {
        let (line, column) = self.cur.location();
        let res: Result<IntervalPattern, PatternError> = if self.cur.eat_ident("empty") {
            IntervalPattern::empty(modulus)
        } else if self.cur.eat_ident("full") {
            IntervalPattern::full(modulus)
        } else {
            let mut intervals = vec![self.interval()?];
            while self.cur.eat_ident("u") {
                intervals.push(self.interval()?);
            }
            IntervalPattern::new(modulus, intervals)
        };
        res.map_err(|e| self.decl_error(line, column, e))
    }

    fn interval(&mut self) -> Result<(ExactReal, ExactReal), ScenarioError> {
        self.cur.expect_sym('(')?;
        let a = self.real()?;
        self.cur.expect_sym(',')?;
        let b = self.real()?;
        self.cur.expect_sym(')')?;
        Ok((a, b))
    }

    fn reals(&mut self) -> Result<Vec<ExactReal>, ScenarioError> {
        self.cur.expect_sym('[')?;
        let mut xs = Vec::new();
        if !self.cur.is_sym(']') {
            xs.push(self.real()?);
            while self.cur.eat_sym(',') {
                xs.push(self.real()?);
            }
        }
        self.cur.expect_sym(']')?;
        Ok(xs)
    }

    fn arg(&mut self, param: Param) -> Result<Arg, ScenarioError> {
        Ok(match param {
            Param::Function => match self.name_of_sort("function")? {
                (n, Binding::Function(g)) => Arg::Function(n, g),
                _ => unreachable!(),
            },
            Param::Domain => match self.name_of_sort("domain")? {
                (n, Binding::Domain(d)) => Arg::Domain(n, d),
                _ => unreachable!(),
            },
            Param::Pattern => match self.name_of_sort("pattern")? {
                (n, Binding::Pattern(p)) => Arg::Pattern(n, p),
                _ => unreachable!(),
            },
            Param::Real => Arg::Real(self.real()?),
            Param::Reals => Arg::Reals(self.reals()?),
            Param::Int => Arg::Int(self.cur.expect_signed_int()?),
            Param::Vector => Arg::Vector(self.int_vector()?),
        })
    }

    fn analysis(&mut self, line: usize) -> Result<(), ScenarioError> {
        let (kline, kcolumn) = self.cur.location();
        let word = self.cur.expect_ident()?;
        let kind = AnalysisKind::from_name(&word).ok_or_else(|| SyntaxError {
            line: kline,
            column: kcolumn,
            message: format!("unknown analysis `{word}`"),
        })?;
        let (required, optional) = kind.params();
        self.cur.expect_sym('(')?;
        let mut args = Vec::new();
        for (i, &p) in required.iter().enumerate() {
            if i > 0 {
                self.cur.expect_sym(',')?;
            }
            args.push(self.arg(p)?);
        }
        for &p in optional {
            if !self.cur.eat_sym(',') {
                break;
            }
            args.push(self.arg(p)?);
        }
        if kind.variadic() {
            while self.cur.eat_sym(',') {
                args.push(self.arg(required[0])?);
            }
        }
        self.cur.expect_sym(')')?;
        let expect = if self.cur.eat_ident("expect") { Some(self.expectation(kind, &args)?) } else { None };
        let index = self.scenario.analyses.len() + 1;
        self.scenario.analyses.push(Request { index, kind, args, expect, line });
        Ok(())
    }

    fn expectation(&mut self, kind: AnalysisKind, args: &[Arg]) -> Result<Expectation, ScenarioError> {
        if let Tok::Ident(word) = self.cur.peek().clone() {
            if VERDICTS.contains(&word.as_str()) {
                self.cur.next();
                return Ok(Expectation::Verdict(word));
            }
        }
        if self.cur.eat_ident("at_most") {
            return Ok(Expectation::AtMost(self.real()?));
        }
        if self.cur.is_sym('[') {
            return Ok(Expectation::List(self.reals()?));
        }
        if kind == AnalysisKind::Canonical {
            let Some(Arg::Function(_, g)) = args.first() else { unreachable!() };
            return Ok(Expectation::Form(self.form(&g.domain().clone())?));
        }
        Ok(Expectation::Value(self.real()?))
    }
}
