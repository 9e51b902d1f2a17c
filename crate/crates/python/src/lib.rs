//! Python bindings: `import periodalg`.

use num_bigint::BigInt;
use num_rational::BigRational;
use pyo3::basic::CompareOp;
use pyo3::exceptions::{PyRuntimeError, PyValueError, PyZeroDivisionError};
use pyo3::prelude::*;

use periodalg::approx::{self, KroneckerResult, SearchOptions};
use periodalg::exactreal::{parse_real, ExactError, ExactReal, RadicalBasis, Sign};
use periodalg::funcalg::{self, CanonicalForm, Counterexample, PeriodModule};
use periodalg::lattice::{classify_group as classify, CoeffLattice, GroupKind};
use periodalg::pointsets::IntervalPattern;
use periodalg::runner::{self, RunOptions};

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn exact_error(e: ExactError) -> PyErr {
    match e {
        ExactError::DivisionByZero => PyZeroDivisionError::new_err("division by zero"),
        e => value_error(e),
    }
}

/// Accepts an `ExactReal`, a string such as `"1 + sqrt(2)"`, or an int.
fn real_arg(obj: &Bound<'_, PyAny>) -> PyResult<ExactReal> {
    if let Ok(r) = obj.extract::<PyRef<'_, PyExactReal>>() {
        return Ok(r.0.clone());
    }
    if let Ok(s) = obj.extract::<String>() {
        return parse_real(&s).map_err(exact_error);
    }
    if let Ok(n) = obj.extract::<BigInt>() {
        return Ok(ExactReal::from_integer(n));
    }
    if let Ok(q) = obj.extract::<BigRational>() {
        return Ok(ExactReal::from_rational(q));
    }
    Err(value_error("expected ExactReal, str, int or Fraction"))
}

fn reals_arg(objs: &[Bound<'_, PyAny>]) -> PyResult<Vec<ExactReal>> {
    objs.iter().map(real_arg).collect()
}

fn basis_arg(radicands: Vec<u64>) -> PyResult<RadicalBasis> {
    RadicalBasis::new(radicands).map_err(exact_error)
}

/// Element of a multiquadratic field, stored exactly.
#[pyclass(name = "ExactReal", module = "periodalg", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyExactReal(ExactReal);

#[pymethods]
impl PyExactReal {
    #[new]
    fn new(value: &Bound<'_, PyAny>) -> PyResult<Self> {
        real_arg(value).map(PyExactReal)
    }

    #[staticmethod]
    fn sqrt(n: u64) -> PyResult<Self> {
        if n == 0 {
            return Ok(PyExactReal(ExactReal::zero()));
        }
        parse_real(&format!("sqrt({n})")).map(PyExactReal).map_err(exact_error)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("ExactReal('{}')", self.0)
    }

    fn __float__(&self) -> f64 {
        self.0.to_f64()
    }

    fn __add__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(PyExactReal(&self.0 + &real_arg(other)?))
    }

    fn __radd__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        self.__add__(other)
    }

    fn __sub__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(PyExactReal(&self.0 - &real_arg(other)?))
    }

    fn __rsub__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(PyExactReal(&real_arg(other)? - &self.0))
    }

    fn __mul__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        self.0.checked_mul(&real_arg(other)?).map(PyExactReal).map_err(exact_error)
    }

    fn __rmul__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        self.__mul__(other)
    }

    fn __truediv__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        self.0.checked_div(&real_arg(other)?).map(PyExactReal).map_err(exact_error)
    }

    fn __rtruediv__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        real_arg(other)?.checked_div(&self.0).map(PyExactReal).map_err(exact_error)
    }

    fn __neg__(&self) -> Self {
        PyExactReal(-&self.0)
    }

    fn __abs__(&self) -> PyResult<Self> {
        self.0.abs().map(PyExactReal).map_err(exact_error)
    }

    fn __richcmp__(&self, other: &Bound<'_, PyAny>, op: CompareOp) -> PyResult<bool> {
        let Ok(other) = real_arg(other) else {
            return match op {
                CompareOp::Eq => Ok(false),
                CompareOp::Ne => Ok(true),
                _ => Err(value_error("cannot compare")),
            };
        };
        let ord = self.0.cmp_exact(&other).map_err(exact_error)?;
        Ok(op.matches(ord))
    }

    fn __hash__(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.0.to_string().hash(&mut h);
        h.finish()
    }

    /// -1, 0 or 1, decided exactly.
    fn sign(&self) -> PyResult<i8> {
        self.0.sign().map(Sign::as_i8).map_err(exact_error)
    }

    fn floor(&self) -> PyResult<BigInt> {
        self.0.floor().map_err(exact_error)
    }

    fn is_rational(&self) -> bool {
        self.0.is_rational()
    }

    fn to_fraction(&self) -> Option<BigRational> {
        self.0.to_rational()
    }

    /// `{radicand: Fraction}` coordinates.
    fn coords(&self) -> Vec<(u64, BigRational)> {
        self.0.coords().iter().map(|(d, c)| (*d, c.clone())).collect()
    }

    /// Rational `self / other` when the two are commensurable, else None.
    fn commensurable(&self, other: &Bound<'_, PyAny>) -> PyResult<Option<BigRational>> {
        self.0.commensurable(&real_arg(other)?).map_err(exact_error)
    }

    /// Integers `(lo, hi)` with `lo / 2^bits <= self <= hi / 2^bits`.
    fn enclose(&self, bits: u32) -> (BigInt, BigInt) {
        self.0.enclose(bits)
    }
}

/// Subgroup `{sum c_i sqrt(d_i) : c in L}` of the reals for an integer lattice `L`.
#[pyclass(name = "Lattice", module = "periodalg", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyLattice(CoeffLattice);

#[pymethods]
impl PyLattice {
    #[new]
    fn new(radicands: Vec<u64>, rows: Vec<Vec<BigInt>>) -> PyResult<Self> {
        CoeffLattice::new(basis_arg(radicands)?, rows).map(PyLattice).map_err(value_error)
    }

    /// `span(sqrt(d) for d in radicands)` with full integer coefficients.
    #[staticmethod]
    fn span(radicands: Vec<u64>) -> PyResult<Self> {
        Ok(PyLattice(CoeffLattice::full(basis_arg(radicands)?)))
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Lattice('{}')", self.0)
    }

    fn __eq__(&self, other: PyRef<'_, PyLattice>) -> bool {
        self.0 == other.0
    }

    #[getter]
    fn radicands(&self) -> Vec<u64> {
        self.0.basis().radicands().to_vec()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.0.rank()
    }

    fn hnf(&self) -> Vec<Vec<BigInt>> {
        self.0.hnf_rows().to_vec()
    }

    fn generators(&self) -> Vec<PyExactReal> {
        self.0.generators_real().into_iter().map(PyExactReal).collect()
    }

    fn determinant(&self) -> Option<BigInt> {
        self.0.determinant()
    }

    fn intersect(&self, other: PyRef<'_, PyLattice>) -> Self {
        PyLattice(self.0.intersect(&other.0))
    }

    fn member(&self, v: Vec<BigInt>) -> PyResult<bool> {
        self.0.member(&v).map_err(value_error)
    }

    fn __contains__(&self, x: &Bound<'_, PyAny>) -> PyResult<bool> {
        Ok(self.0.contains_real(&real_arg(x)?))
    }
}

/// Returns `("dense", None)` or `("discrete", T0)` for the group generated by `periods`.
#[pyfunction]
fn classify_group(periods: Vec<Bound<'_, PyAny>>) -> PyResult<(&'static str, Option<PyExactReal>)> {
    match classify(&reals_arg(&periods)?).map_err(value_error)? {
        GroupKind::Dense => Ok(("dense", None)),
        GroupKind::Discrete(t) => Ok(("discrete", Some(PyExactReal(t)))),
    }
}

#[pyclass(name = "PeriodModule", module = "periodalg", frozen)]
struct PyPeriodModule(PeriodModule);

#[pymethods]
impl PyPeriodModule {
    fn generators(&self) -> Vec<PyExactReal> {
        self.0.generators_real().into_iter().map(PyExactReal).collect()
    }

    #[getter]
    fn lattice(&self) -> PyLattice {
        PyLattice(self.0.lattice.clone())
    }

    #[getter]
    fn zero_radicands(&self) -> Vec<u64> {
        self.0.zero_radicands.iter().copied().collect()
    }

    #[getter]
    fn parity_index(&self) -> BigInt {
        self.0.parity_index()
    }

    fn __contains__(&self, t: &Bound<'_, PyAny>) -> PyResult<bool> {
        Ok(self.0.contains(&real_arg(t)?))
    }

    fn __repr__(&self) -> String {
        let gens: Vec<String> = self.0.generators_real().iter().map(ToString::to_string).collect();
        format!("PeriodModule([{}])", gens.join(", "))
    }
}

/// Canonical form of a function built from `abs1`, `sgn` and `recip` atoms.
#[pyclass(name = "Form", module = "periodalg", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyForm(CanonicalForm);

#[pymethods]
impl PyForm {
    #[new]
    fn new(src: &str, domain: PyRef<'_, PyLattice>) -> PyResult<Self> {
        funcalg::parse(src, &domain.0).map(PyForm).map_err(value_error)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Form('{}')", self.0)
    }

    fn __eq__(&self, other: PyRef<'_, PyForm>) -> bool {
        self.0 == other.0
    }

    #[getter]
    fn domain(&self) -> PyLattice {
        PyLattice(self.0.domain().clone())
    }

    fn __add__(&self, other: PyRef<'_, PyForm>) -> Self {
        PyForm(self.0.add(&other.0))
    }

    fn __sub__(&self, other: PyRef<'_, PyForm>) -> Self {
        PyForm(self.0.sub(&other.0))
    }

    fn __mul__(&self, other: PyRef<'_, PyForm>) -> Self {
        PyForm(self.0.mul(&other.0))
    }

    fn __truediv__(&self, other: PyRef<'_, PyForm>) -> PyResult<Self> {
        self.0.div(&other.0).map(PyForm).map_err(value_error)
    }

    fn is_constant(&self) -> bool {
        self.0.is_constant()
    }

    /// Value at the domain point with the given basis coordinates.
    fn evaluate(&self, point: Vec<BigInt>) -> PyResult<BigRational> {
        self.0.evaluate(&point).map_err(value_error)
    }

    /// `f(x + t) - f(x)` as a form.
    fn shift_difference(&self, t: &Bound<'_, PyAny>) -> PyResult<Self> {
        self.0.shift_difference(&real_arg(t)?).map(PyForm).map_err(value_error)
    }

    fn period_module(&self) -> PyResult<PyPeriodModule> {
        self.0.period_module().map(PyPeriodModule).map_err(value_error)
    }

    /// `(point, f(point), f(point + t))` with different values, or None if
    /// the box `[-bound, bound]^k` holds no witness.
    #[pyo3(signature = (t, bound = 25))]
    fn find_counterexample(
        &self,
        t: &Bound<'_, PyAny>,
        bound: u32,
    ) -> PyResult<Option<(Vec<BigInt>, BigRational, BigRational)>> {
        match self.0.find_counterexample(&real_arg(t)?, bound).map_err(value_error)? {
            Counterexample::Witness { point, before, after } => Ok(Some((point, before, after))),
            Counterexample::NotFound { .. } => Ok(None),
        }
    }
}

/// Finite union of open intervals repeated with period `modulus`.
#[pyclass(name = "Pattern", module = "periodalg", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPattern(IntervalPattern);

#[pymethods]
impl PyPattern {
    #[new]
    #[pyo3(signature = (intervals, modulus = None))]
    fn new(intervals: Vec<(Bound<'_, PyAny>, Bound<'_, PyAny>)>, modulus: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        let modulus = modulus.map(real_arg).transpose()?.unwrap_or_else(ExactReal::one);
        let ivs = intervals.iter().map(|(a, b)| Ok((real_arg(a)?, real_arg(b)?))).collect::<PyResult<Vec<_>>>()?;
        IntervalPattern::new(modulus, ivs).map(PyPattern).map_err(value_error)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Pattern('{}')", self.0)
    }

    fn __eq__(&self, other: PyRef<'_, PyPattern>) -> bool {
        self.0 == other.0
    }

    fn measure(&self) -> PyExactReal {
        PyExactReal(self.0.measure())
    }

    fn rotate(&self, alpha: &Bound<'_, PyAny>) -> PyResult<Self> {
        self.0.rotate(&real_arg(alpha)?).map(PyPattern).map_err(value_error)
    }

    fn is_invariant(&self, t: &Bound<'_, PyAny>) -> PyResult<bool> {
        self.0.is_invariant(&real_arg(t)?).map_err(value_error)
    }

    fn fundamental_period(&self) -> PyResult<PyExactReal> {
        self.0.fundamental_period().map(PyExactReal).map_err(value_error)
    }

    fn symdiff_measure(&self, other: PyRef<'_, PyPattern>) -> PyResult<PyExactReal> {
        self.0.symdiff_measure(&other.0).map(PyExactReal).map_err(value_error)
    }

    fn __contains__(&self, x: &Bound<'_, PyAny>) -> PyResult<bool> {
        self.0.contains(&real_arg(x)?).map_err(value_error)
    }
}

fn approx_error(e: approx::ApproxError) -> PyErr {
    match e {
        approx::ApproxError::Cancelled => PyRuntimeError::new_err("search cancelled"),
        e => value_error(e),
    }
}

/// `(quotients, convergents, terminated)`.
#[pyfunction]
#[pyo3(signature = (x, depth = 10))]
fn continued_fraction(x: &Bound<'_, PyAny>, depth: usize) -> PyResult<(Vec<BigInt>, Vec<(BigInt, BigInt)>, bool)> {
    let cf = approx::continued_fraction(&real_arg(x)?, depth).map_err(approx_error)?;
    Ok((cf.quotients, cf.convergents, cf.terminated))
}

/// `(m, n, error)` with `|m*t1 + n*t2 - target| < eps`.
#[pyfunction]
fn dirichlet_find(
    py: Python<'_>,
    t1: &Bound<'_, PyAny>,
    t2: &Bound<'_, PyAny>,
    target: &Bound<'_, PyAny>,
    eps: &Bound<'_, PyAny>,
) -> PyResult<(BigInt, BigInt, PyExactReal)> {
    let (t1, t2, target, eps) = (real_arg(t1)?, real_arg(t2)?, real_arg(target)?, real_arg(eps)?);
    let w = py.detach(|| approx::dirichlet_find(&t1, &t2, &target, &eps)).map_err(approx_error)?;
    Ok((w.m, w.n, PyExactReal(w.error)))
}

/// `(q, ps)` with `|q*t - p_i*t_i - delta| < eps` for every `i`, or None
/// when no `q <= bound` works.
#[pyfunction]
#[pyo3(signature = (t, ts, delta, eps, bound = approx::DEFAULT_SEARCH_BOUND))]
fn kronecker_find(
    py: Python<'_>,
    t: &Bound<'_, PyAny>,
    ts: Vec<Bound<'_, PyAny>>,
    delta: &Bound<'_, PyAny>,
    eps: &Bound<'_, PyAny>,
    bound: u64,
) -> PyResult<Option<(BigInt, Vec<BigInt>)>> {
    let (t, ts, delta, eps) = (real_arg(t)?, reals_arg(&ts)?, real_arg(delta)?, real_arg(eps)?);
    let opts = SearchOptions::with_bound(bound);
    match py.detach(|| approx::kronecker_find_with(&t, &ts, &delta, &eps, &opts)).map_err(approx_error)? {
        KroneckerResult::Found { q, ps, .. } => Ok(Some((q, ps))),
        KroneckerResult::NotFound { .. } => Ok(None),
    }
}

/// Upper bound on the star discrepancy of `{i*alpha mod 1 : i < n}`.
#[pyfunction]
fn orbit_discrepancy(py: Python<'_>, alpha: &Bound<'_, PyAny>, n: u64) -> PyResult<BigRational> {
    let alpha = real_arg(alpha)?;
    py.detach(|| approx::orbit_discrepancy(&alpha, n)).map_err(approx_error)
}

/// Runs scenario source text and returns the JSON report.
#[pyfunction]
fn run_scenario(py: Python<'_>, src: &str) -> PyResult<String> {
    py.detach(|| runner::run_source(src, &RunOptions::default())).map(|r| r.to_json()).map_err(value_error)
}

/// Runs the bundled scenarios and quick checks; returns `(passed, json)`.
#[pyfunction]
fn selfcheck(py: Python<'_>) -> (bool, String) {
    let report = py.detach(runner::selfcheck);
    (report.passed, report.to_json())
}

#[pymodule(name = "periodalg")]
fn periodalg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", runner::VERSION)?;
    m.add_class::<PyExactReal>()?;
    m.add_class::<PyLattice>()?;
    m.add_class::<PyPeriodModule>()?;
    m.add_class::<PyForm>()?;
    m.add_class::<PyPattern>()?;
    m.add_function(wrap_pyfunction!(classify_group, m)?)?;
    m.add_function(wrap_pyfunction!(continued_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(dirichlet_find, m)?)?;
    m.add_function(wrap_pyfunction!(kronecker_find, m)?)?;
    m.add_function(wrap_pyfunction!(orbit_discrepancy, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(selfcheck, m)?)?;
    Ok(())
}
