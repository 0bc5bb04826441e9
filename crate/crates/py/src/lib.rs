//! Python bindings: finite abelian groups, Smith normal form, presentations
//! read from JSON/TOML documents, the symbol-algebra bridge and the seeded
//! verification suites.

use num_bigint::BigInt;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;

use gradsk_core::algebra::{classify as classify_presentation, AlgebraPresentation};
use gradsk_core::cli::{self, CliError};
use gradsk_core::fgab::{smith_normal_form as snf, FGAbGroup, Int, IntMatrix};
use gradsk_core::involution::{armature_decomposition, InvolutionDescriptor};
use gradsk_core::sk1::{self, ProductOptions, SKResult};
use gradsk_core::valued::{self, ValuedSymbolInput};
use gradsk_core::verify;

create_exception!(gradsk, GradskError, PyValueError);
create_exception!(gradsk, SchemaError, GradskError);
create_exception!(gradsk, PreconditionError, GradskError);
create_exception!(gradsk, InternalError, GradskError);

fn raise(e: impl Into<CliError>) -> PyErr {
    match e.into() {
        CliError::Schema(m) => SchemaError::new_err(m),
        CliError::Precondition(m) => PreconditionError::new_err(m),
        CliError::Internal(m) => InternalError::new_err(m),
    }
}

fn json_value<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// Finite or finitely generated abelian group `Z^n / R`.
#[pyclass(name = "Group", module = "gradsk", frozen)]
struct PyGroup {
    inner: FGAbGroup,
}

#[pymethods]
impl PyGroup {
    /// `Z/o_1 + ... + Z/o_k`; an order of 0 is a free factor.
    #[new]
    fn new(orders: Vec<i64>) -> Self {
        PyGroup {
            inner: FGAbGroup::from_orders(&orders),
        }
    }

    /// `Z^n` modulo the row span of `relations`.
    #[staticmethod]
    fn from_relations(ngens: usize, relations: Vec<Vec<BigInt>>) -> PyResult<Self> {
        let m = IntMatrix::from_rows(ngens, &relations).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let inner = FGAbGroup::new(ngens, m).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyGroup { inner })
    }

    fn invariant_factors(&self) -> Vec<BigInt> {
        self.inner.invariant_factors()
    }

    fn is_finite(&self) -> bool {
        self.inner.is_finite()
    }

    /// Group order; raises for infinite groups.
    fn order(&self) -> PyResult<BigInt> {
        self.inner.order().map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn exponent(&self) -> BigInt {
        self.inner.exponent()
    }

    /// Quotient by the subgroup generated by `elements`.
    fn quotient(&self, elements: Vec<Vec<BigInt>>) -> PyResult<PyGroup> {
        let h = self
            .inner
            .subgroup_generated(&elements)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        let inner = self
            .inner
            .quotient(&h)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyGroup { inner })
    }

    fn __eq__(&self, other: &PyGroup) -> bool {
        self.inner.invariant_factors() == other.inner.invariant_factors()
    }

    fn __repr__(&self) -> String {
        format!("Group({})", self.inner)
    }
}

/// `(U, S, V)` with `U A V = S` in Smith normal form.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn smith_normal_form(rows: Vec<Vec<BigInt>>) -> PyResult<(Vec<Vec<Int>>, Vec<Vec<Int>>, Vec<Vec<Int>>)> {
    let cols = rows.first().map_or(0, Vec::len);
    let a = IntMatrix::from_rows(cols, &rows).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let f = snf(&a);
    Ok((f.u.row_vecs(), f.s.row_vecs(), f.v.row_vecs()))
}

/// Output of an SK1 calculator.
#[pyclass(name = "SKResult", module = "gradsk", frozen)]
struct PySKResult {
    inner: SKResult,
}

#[pymethods]
impl PySKResult {
    #[getter]
    fn group(&self) -> PyGroup {
        PyGroup {
            inner: self.inner.group.clone(),
        }
    }

    #[getter]
    fn invariant_factors(&self) -> Vec<BigInt> {
        self.inner.invariant_factors()
    }

    #[getter]
    fn order(&self) -> BigInt {
        self.inner.order()
    }

    #[getter]
    fn theorem(&self) -> &'static str {
        self.inner.theorem_tag.name()
    }

    #[getter]
    fn checks(&self) -> Vec<String> {
        self.inner.checks.clone()
    }

    /// Digest of the inputs as a dict.
    fn digest<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let text = serde_json::to_string(&self.inner.digest).map_err(|e| InternalError::new_err(e.to_string()))?;
        json_value(py, &text)
    }

    fn __str__(&self) -> String {
        self.inner.rendered()
    }

    fn __repr__(&self) -> String {
        format!("SKResult({}, {})", self.inner.rendered(), self.inner.theorem_tag.name())
    }
}

/// Graded division algebra presentation with an optional involution.
#[pyclass(name = "Presentation", module = "gradsk", frozen)]
struct PyPresentation {
    p: AlgebraPresentation,
    tau: Option<InvolutionDescriptor>,
}

impl PyPresentation {
    fn from_document(doc: &cli::Document) -> PyResult<Self> {
        let p = cli::presentation(doc).map_err(raise)?;
        let tau = match doc.involution {
            Some(_) => Some(cli::involution(doc, &p).map_err(raise)?),
            None => None,
        };
        Ok(PyPresentation { p, tau })
    }

    fn involution(&self) -> PyResult<&InvolutionDescriptor> {
        self.tau
            .as_ref()
            .ok_or_else(|| SchemaError::new_err("involution: missing field"))
    }
}

#[pymethods]
impl PyPresentation {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Self::from_document(&cli::parse_document(text, false).map_err(raise)?)
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Self::from_document(&cli::parse_document(text, true).map_err(raise)?)
    }

    /// Case, `n`, `e`, `partial` and index as a dict.
    fn classify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let c = classify_presentation(&self.p).map_err(raise)?;
        let d = pyo3::types::PyDict::new(py);
        d.set_item("case", c.tag.name())?;
        d.set_item("n", c.n)?;
        d.set_item("e", c.e)?;
        d.set_item("partial", c.partial)?;
        d.set_item("index", c.index)?;
        d.set_item("ind_e0", c.ind_e0)?;
        d.set_item("center_degree", c.center_degree)?;
        Ok(d.into_any())
    }

    fn sk1(&self) -> PyResult<PySKResult> {
        Ok(PySKResult {
            inner: sk1::sk1(&self.p).map_err(raise)?,
        })
    }

    #[pyo3(signature = (check_lembe = false, representative_doubling = false))]
    fn sk1u(&self, check_lembe: bool, representative_doubling: bool) -> PyResult<PySKResult> {
        let opts = ProductOptions {
            check_lembe,
            representative_doubling,
        };
        Ok(PySKResult {
            inner: sk1::sk1u(&self.p, self.involution()?, opts).map_err(raise)?,
        })
    }

    /// Quaternion factors `(i, j)` as exponent vectors over the generators.
    fn armature(&self) -> PyResult<Vec<(Vec<i64>, Vec<i64>)>> {
        let f = armature_decomposition(&self.p, self.involution()?).map_err(raise)?;
        Ok(f.into_iter().map(|a| (a.i.exps, a.j.exps)).collect())
    }

    /// The presentation as an input document (JSON text).
    fn to_json(&self) -> PyResult<String> {
        let doc = cli::document_of(&self.p, self.tau.as_ref()).map_err(raise)?;
        serde_json::to_string_pretty(&doc).map_err(|e| InternalError::new_err(e.to_string()))
    }
}

/// Symbol algebra `(x_1, x_2)_(omega_1) x ... ` over iterated Laurent series.
#[pyclass(name = "SymbolAlgebra", module = "gradsk", frozen)]
struct PySymbolAlgebra {
    inner: ValuedSymbolInput,
}

#[pymethods]
impl PySymbolAlgebra {
    #[new]
    #[pyo3(signature = (r, mu = None, theta = None, residue_char = 0, root_choices = None))]
    fn new(
        r: Vec<i64>,
        mu: Option<i64>,
        theta: Option<i64>,
        residue_char: i64,
        root_choices: Option<Vec<i64>>,
    ) -> PyResult<Self> {
        let m = mu.unwrap_or_else(|| r.iter().fold(1, |a, &b| num_integer::lcm(a, b)));
        let mut inner = ValuedSymbolInput::new(m, theta, &r).map_err(raise)?;
        inner.residue_char = residue_char;
        inner.root_choices = root_choices;
        Ok(PySymbolAlgebra { inner })
    }

    /// Associated graded algebra with its induced involution.
    fn associated_graded(&self) -> PyResult<PyPresentation> {
        let (p, tau, _) = valued::associated_graded(&self.inner).map_err(raise)?;
        let tau = self.inner.residue.tau_multiplier.map(|_| tau);
        Ok(PyPresentation { p, tau })
    }

    fn sk1(&self) -> PyResult<PySKResult> {
        Ok(PySKResult {
            inner: valued::sk1_valued(&self.inner).map_err(raise)?.result,
        })
    }

    fn sk1u(&self) -> PyResult<PySKResult> {
        if self.inner.residue.tau_multiplier.is_none() {
            return Err(SchemaError::new_err("theta: required for a unitary involution"));
        }
        Ok(PySKResult {
            inner: valued::sk1u_valued(&self.inner).map_err(raise)?.result,
        })
    }
}

/// Seeded self-check suites as a list of dicts.
#[pyfunction]
#[pyo3(signature = (suite = "all", seed = 0))]
fn run_verify<'py>(py: Python<'py>, suite: &str, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let reps =
        verify::run_suite(suite, seed).ok_or_else(|| SchemaError::new_err(format!("unknown suite `{suite}`")))?;
    let text = serde_json::to_string(&reps).map_err(|e| InternalError::new_err(e.to_string()))?;
    json_value(py, &text)
}

/// Runs the command line tool in-process: `(exit_code, stdout, stderr)`.
#[pyfunction]
fn run_cli(args: Vec<String>) -> (i32, String, String) {
    use clap::Parser;
    let argv = std::iter::once("gradsk".to_string()).chain(args);
    match cli::Cli::try_parse_from(argv) {
        Ok(c) => {
            let out = cli::run(&c.command, false);
            (out.code, out.stdout, out.stderr)
        }
        Err(e) => (if e.use_stderr() { 1 } else { 0 }, String::new(), e.to_string()),
    }
}

#[pymodule]
fn gradsk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add_class::<PyGroup>()?;
    m.add_class::<PySKResult>()?;
    m.add_class::<PyPresentation>()?;
    m.add_class::<PySymbolAlgebra>()?;
    m.add_function(wrap_pyfunction!(smith_normal_form, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    m.add("GradskError", py.get_type::<GradskError>())?;
    m.add("SchemaError", py.get_type::<SchemaError>())?;
    m.add("PreconditionError", py.get_type::<PreconditionError>())?;
    m.add("InternalError", py.get_type::<InternalError>())?;
    Ok(())
}
