//! Python bindings: grids, structures, forms, and the spectral verdicts.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ajar_core::catalog::ExampleForms;
use ajar_core::exterior::{self, KForm};
use ajar_core::grid::{make_grid, GridSpec};
use ajar_core::hermitian::{self as herm, AcsField, MetricField, Sign, StructureSpec, SymplecticForm};
use ajar_core::lab::{self, Command, ExperimentConfig, Overrides};
use ajar_core::spectral::{self, SpectralParams};

fn err(e: ajar_core::Error) -> PyErr {
    match e {
        ajar_core::Error::Config(_)
        | ajar_core::Error::InvalidGrid(_)
        | ajar_core::Error::InvalidStructure(_)
        | ajar_core::Error::Degree(_)
        | ajar_core::Error::GridMismatch(..) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py_json<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn structure_spec(
    name: &str,
    k: Option<f64>,
    r_inner: Option<f64>,
    r_outer: Option<f64>,
    center: Option<[f64; 4]>,
) -> PyResult<StructureSpec> {
    let spec = match name {
        "standard" => StructureSpec::Standard,
        "example" => StructureSpec::Example,
        "limit" => StructureSpec::Limit,
        "tk" => StructureSpec::Tk { k: k.ok_or_else(|| PyValueError::new_err("tk needs k"))? },
        "localized" => StructureSpec::Localized {
            r_inner: r_inner.unwrap_or(lab::DEFAULT_R_INNER),
            r_outer: r_outer.unwrap_or(lab::DEFAULT_R_OUTER),
            center: center.unwrap_or(lab::DEFAULT_CENTER),
        },
        other => return Err(PyValueError::new_err(format!("unknown structure '{other}'"))),
    };
    spec.validate().map_err(err)?;
    Ok(spec)
}

/// A differential form sampled on the n⁴ lattice.
#[pyclass(name = "Form", module = "ajar", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyForm {
    inner: KForm,
}

#[pymethods]
impl PyForm {
    /// Constant form from its coefficients in basis order.
    #[staticmethod]
    fn constant(n: usize, degree: usize, coeffs: Vec<f64>) -> PyResult<Self> {
        let grid = make_grid(n).map_err(err)?;
        Ok(Self { inner: exterior::constant_form(grid, degree, &coeffs).map_err(err)? })
    }

    /// Form from component-major flat values.
    #[staticmethod]
    fn from_values(n: usize, degree: usize, values: Vec<f64>) -> PyResult<Self> {
        let grid = make_grid(n).map_err(err)?;
        if degree > 4 || values.len() != exterior::binomial4(degree) * grid.len() {
            return Err(PyValueError::new_err("value count does not match degree and grid"));
        }
        Ok(Self { inner: KForm::from_flat(grid, degree, &values) })
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.grid().n()
    }

    /// Basis labels in storage order, e.g. `["e12", "e13", ...]`.
    fn labels(&self) -> Vec<String> {
        exterior::basis(self.inner.degree()).iter().map(|&m| exterior::basis_label(m)).collect()
    }

    /// Component-major flat values.
    fn values(&self) -> Vec<f64> {
        self.inner.to_flat()
    }

    fn max_abs(&self) -> f64 {
        self.inner.max_abs()
    }

    fn d(&self) -> PyResult<Self> {
        Ok(Self { inner: exterior::ext_deriv(&self.inner).map_err(err)? })
    }

    fn wedge(&self, other: &PyForm) -> PyResult<Self> {
        Ok(Self { inner: exterior::wedge(&self.inner, &other.inner).map_err(err)? })
    }

    fn integrate(&self) -> PyResult<f64> {
        exterior::integrate_top(&self.inner).map_err(err)
    }

    fn __add__(&self, other: &PyForm) -> PyResult<Self> {
        Ok(Self { inner: self.inner.add(&other.inner).map_err(err)? })
    }

    fn __sub__(&self, other: &PyForm) -> PyResult<Self> {
        Ok(Self { inner: self.inner.sub(&other.inner).map_err(err)? })
    }

    fn __mul__(&self, c: f64) -> Self {
        Self { inner: self.inner.scale(c) }
    }

    fn __rmul__(&self, c: f64) -> Self {
        self.__mul__(c)
    }

    fn __repr__(&self) -> String {
        format!("Form(degree={}, n={})", self.inner.degree(), self.inner.grid().n())
    }
}

/// An ω₀-compatible almost complex structure with its metric.
#[pyclass(name = "Structure", module = "ajar", frozen)]
struct PyStructure {
    spec: StructureSpec,
    grid: GridSpec,
    j: AcsField,
    g: MetricField,
}

#[pymethods]
impl PyStructure {
    #[new]
    #[pyo3(signature = (name, n, k=None, r_inner=None, r_outer=None, center=None))]
    fn new(
        name: &str,
        n: usize,
        k: Option<f64>,
        r_inner: Option<f64>,
        r_outer: Option<f64>,
        center: Option<[f64; 4]>,
    ) -> PyResult<Self> {
        let spec = structure_spec(name, k, r_inner, r_outer, center)?;
        let grid = make_grid(n).map_err(err)?;
        let j = herm::build_named_family(grid, &spec).map_err(err)?;
        let g = herm::compatible_metric(&SymplecticForm::standard(), &j).map_err(err)?;
        Ok(Self { spec, grid, j, g })
    }

    #[getter]
    fn n(&self) -> usize {
        self.grid.n()
    }

    #[getter]
    fn label(&self) -> String {
        self.spec.label()
    }

    /// `J²+Id`, compatibility and tameness diagnostics.
    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py_json(py, &herm::validate_compatible(&SymplecticForm::standard(), &self.j))
    }

    /// `α ↦ α(J·, J·)`.
    fn j_act(&self, form: &PyForm) -> PyResult<PyForm> {
        Ok(PyForm { inner: herm::j_act(&self.j, &form.inner).map_err(err)? })
    }

    fn star(&self, form: &PyForm) -> PyResult<PyForm> {
        Ok(PyForm { inner: herm::hodge_star(&form.inner, &self.g).map_err(err)? })
    }

    fn codifferential(&self, form: &PyForm) -> PyResult<PyForm> {
        Ok(PyForm { inner: herm::codifferential(&form.inner, &self.g).map_err(err)? })
    }

    /// `P_J^±` for `sign = +1` or `-1`.
    fn project_j(&self, form: &PyForm, sign: i32) -> PyResult<PyForm> {
        Ok(PyForm { inner: herm::project_j(&self.j, &form.inner, parse_sign(sign)?).map_err(err)? })
    }

    /// `P_g^±` for `sign = +1` or `-1`.
    fn project_g(&self, form: &PyForm, sign: i32) -> PyResult<PyForm> {
        Ok(PyForm { inner: herm::project_g(&form.inner, &self.g, parse_sign(sign)?).map_err(err)? })
    }

    fn l2_inner(&self, a: &PyForm, b: &PyForm) -> PyResult<f64> {
        exterior::l2_inner(&a.inner, &b.inner, &self.g).map_err(err)
    }

    /// Kernel dimension of Lejmi's operator with its spectrum and flags.
    #[pyo3(signature = (count=8, seed=spectral::DEFAULT_SEED, tol=1e-8))]
    fn h_j_minus<'py>(&self, py: Python<'py>, count: usize, seed: u64, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        let params = SpectralParams { count, seed, tol, ..SpectralParams::default() };
        let hj = py
            .detach(|| spectral::h_j_minus(&SymplecticForm::standard(), &self.j, self.grid, &params))
            .map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("h_minus", hj.h_minus)?;
        out.set_item("verdict", to_py_json(py, &hj.verdict)?)?;
        out.set_item("report", to_py_json(py, &hj.report)?)?;
        Ok(out.into_any())
    }

    /// `b^±`, `h^±` and both spectra.
    #[pyo3(signature = (count=8, seed=spectral::DEFAULT_SEED, tol=1e-8))]
    fn cohomology_report<'py>(&self, py: Python<'py>, count: usize, seed: u64, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        let params = SpectralParams { count, seed, tol, ..SpectralParams::default() };
        let r = py
            .detach(|| spectral::cohomology_report(&SymplecticForm::standard(), &self.j, self.grid, &params))
            .map_err(err)?;
        to_py_json(py, &r)
    }

    fn __repr__(&self) -> String {
        format!("Structure({}, n={})", self.spec.label(), self.grid.n())
    }
}

fn parse_sign(sign: i32) -> PyResult<Sign> {
    match sign {
        1 => Ok(Sign::Plus),
        -1 => Ok(Sign::Minus),
        _ => Err(PyValueError::new_err("sign must be +1 or -1")),
    }
}

/// The named forms of the deformed example: `omega0..2`, `alpha0..2`, plus
/// the constants `c_A`, `c_B`, `a`, `b`.
#[pyfunction]
fn example_forms<'py>(py: Python<'py>, n: usize) -> PyResult<Bound<'py, PyDict>> {
    let grid = make_grid(n).map_err(err)?;
    let ex = ExampleForms::new(grid).map_err(err)?;
    let out = PyDict::new(py);
    for (name, f) in [
        ("omega0", &ex.omega0),
        ("omega1", &ex.omega1),
        ("omega2", &ex.omega2),
        ("alpha0", &ex.alpha0),
        ("alpha1", &ex.alpha1),
        ("alpha2", &ex.alpha2),
    ] {
        out.set_item(name, PyForm { inner: f.clone() })?;
    }
    out.set_item("c_A", ex.c_a)?;
    out.set_item("c_B", ex.c_b)?;
    out.set_item("a", ex.a_value())?;
    out.set_item("b", ex.b_value())?;
    Ok(out)
}

/// Run a lab command; returns `(exit_code, document)` where `document` is the
/// JSON result document as a dict.
#[pyfunction]
#[pyo3(signature = (command, structure=None, n=None, k=None, eigs=None, seed=None))]
fn run<'py>(
    py: Python<'py>,
    command: &str,
    structure: Option<String>,
    n: Option<Vec<usize>>,
    k: Option<Vec<f64>>,
    eigs: Option<usize>,
    seed: Option<u64>,
) -> PyResult<(i32, Bound<'py, PyAny>)> {
    let command: Command = command.parse().map_err(err)?;
    let overrides = Overrides { command: Some(command), structure, n, k, eigs, seed, ..Overrides::default() };
    let config = ExperimentConfig::resolve(overrides).map_err(err)?;
    let outcome = py.detach(|| lab::run(&config)).map_err(err)?;
    Ok((outcome.status.code(), to_py_json(py, &outcome.document)?))
}

#[pymodule]
pub fn ajar(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyForm>()?;
    m.add_class::<PyStructure>()?;
    m.add_function(wrap_pyfunction!(example_forms, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
