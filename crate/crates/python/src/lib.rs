//! Python bindings: complexes, polyhedral and PL chains, and the filling,
//! deformation and nerve reports. Rationals are accepted as anything whose
//! `str()` parses (`int`, `"p/q"`, `fractions.Fraction`, decimal strings) and
//! returned as `"p/q"` strings; reports are plain dicts in the CLI's JSON layout.

use gmtkit::chain::{canonicalize, chains_equal, EqualityMode, PLChain, PolyChain};
use gmtkit::cli::{self, CliError, Report};
use gmtkit::complex::{builders, SimplicialComplex};
use gmtkit::deform::DeformConfig;
use gmtkit::fill::FillMode;
use gmtkit::io::{self, ChainFile, ComplexFile, PolyChainFile};
use gmtkit::linalg::Point;
use gmtkit::nerve::MetricPointCloud;
use gmtkit::rational::{format_q, parse_q, Q};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde_json::Value;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn cli_err(e: CliError) -> PyErr {
    match e {
        CliError::Budget(_) => PyRuntimeError::new_err(e.to_string()),
        other => value_err(other),
    }
}

fn rational(obj: &Bound<'_, PyAny>) -> PyResult<Q> {
    let text = obj.str()?.to_string();
    parse_q(&text).map_err(|e| value_err(format!("{text:?}: {e}")))
}

fn point(coords: &[Bound<'_, PyAny>]) -> PyResult<Point> {
    coords.iter().map(rational).collect()
}

fn points(rows: &[Vec<Bound<'_, PyAny>>]) -> PyResult<Vec<Point>> {
    rows.iter().map(|r| point(r)).collect()
}

fn to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    Ok(py.import("json")?.call_method1("loads", (v.to_string(),))?.unbind())
}

fn report(py: Python<'_>, r: Result<Report, CliError>) -> PyResult<Py<PyAny>> {
    to_py(py, &r.map_err(cli_err)?.json)
}

fn fill_mode(mode: &str) -> PyResult<FillMode> {
    match mode {
        "lp" => Ok(FillMode::Lp),
        "ilp" => Ok(FillMode::Ilp),
        other => Err(value_err(format!("mode must be \"lp\" or \"ilp\", got {other:?}"))),
    }
}

fn equality_mode(name: &str, samples: usize, seed: u64) -> PyResult<EqualityMode> {
    match name {
        "exact" => Ok(EqualityMode::Exact),
        "fast" => Ok(EqualityMode::Fast { max_degree: 2, random_forms: samples, seed }),
        other => Err(value_err(format!("equality must be \"exact\" or \"fast\", got {other:?}"))),
    }
}

/// A finite simplicial complex, embedded with rational coordinates or abstract.
#[pyclass(name = "Complex", module = "gmtkit_py", frozen)]
pub struct PyComplex {
    inner: SimplicialComplex,
}

#[pymethods]
impl PyComplex {
    /// Embedded complex from vertex coordinates, maximal simplices and a scale.
    #[new]
    fn new(vertices: Vec<Vec<Bound<'_, PyAny>>>, simplices: Vec<Vec<usize>>, epsilon: Bound<'_, PyAny>) -> PyResult<Self> {
        let inner = SimplicialComplex::new_embedded(points(&vertices)?, &simplices, rational(&epsilon)?).map_err(value_err)?;
        Ok(PyComplex { inner })
    }

    #[staticmethod]
    fn grid_2d(nx: usize, ny: usize, h: Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(PyComplex { inner: builders::grid_2d(nx, ny, &rational(&h)?) })
    }

    #[staticmethod]
    fn grid_3d(n0: usize, n1: usize, n2: usize, h: Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(PyComplex { inner: builders::grid_3d([n0, n1, n2], &rational(&h)?) })
    }

    #[staticmethod]
    fn single_triangle() -> Self {
        PyComplex { inner: builders::single_triangle() }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file: ComplexFile = io::from_json_str(text, "<string>").map_err(value_err)?;
        Ok(PyComplex { inner: file.to_complex().map_err(value_err)? })
    }

    fn to_json(&self) -> String {
        io::to_json_string(&ComplexFile::from_complex(&self.inner))
    }

    /// The subcomplex generated by the given simplices.
    fn subcomplex(&self, simplices: Vec<Vec<usize>>) -> PyResult<Self> {
        Ok(PyComplex { inner: self.inner.subcomplex(&simplices).map_err(value_err)? })
    }

    #[getter]
    fn n_vertices(&self) -> usize {
        self.inner.n_vertices()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Sorted vertex tuples of the `k`-simplices.
    fn simplices(&self, k: usize) -> Vec<Vec<usize>> {
        self.inner.simplices(k).to_vec()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Complex(n_vertices={}, dim={})", self.inner.n_vertices(), self.inner.dim())
    }
}

/// A rational combination of oriented simplices of a complex.
#[pyclass(name = "PolyChain", module = "gmtkit_py", frozen)]
pub struct PyPolyChain {
    inner: PolyChain,
}

#[pymethods]
impl PyPolyChain {
    /// `terms` is a list of `(vertex indices, coefficient)`.
    #[new]
    fn new(k: usize, terms: Vec<(Vec<usize>, Bound<'_, PyAny>)>) -> PyResult<Self> {
        let mut inner = PolyChain::zero(k);
        for (s, c) in terms {
            if s.len() != k + 1 {
                return Err(value_err(format!("simplex {s:?} does not have dimension {k}")));
            }
            inner.add(&s, &rational(&c)?);
        }
        Ok(PyPolyChain { inner })
    }

    /// `∂` of the characteristic chain of the listed simplices, oriented by
    /// their embedding.
    #[staticmethod]
    fn region_boundary(complex: &PyComplex, simplices: Vec<Vec<usize>>) -> Self {
        PyPolyChain { inner: gmtkit::fill::region_boundary(&complex.inner, &simplices) }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file: PolyChainFile = io::from_json_str(text, "<string>").map_err(value_err)?;
        Ok(PyPolyChain { inner: file.to_chain().map_err(value_err)? })
    }

    fn to_json(&self) -> String {
        io::to_json_string(&PolyChainFile::from_chain(&self.inner))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn terms(&self) -> Vec<(Vec<usize>, String)> {
        self.inner.terms().map(|(s, c)| (s.clone(), format_q(c))).collect()
    }

    fn boundary(&self) -> Self {
        PyPolyChain { inner: self.inner.boundary() }
    }

    fn is_cycle(&self) -> bool {
        self.inner.is_cycle()
    }

    fn mass(&self, complex: &PyComplex) -> f64 {
        self.inner.mass(&complex.inner)
    }

    /// The chain as a PL chain in the complex's coordinates (integral chains only).
    fn to_pl(&self, complex: &PyComplex) -> PyResult<PyPLChain> {
        Ok(PyPLChain { inner: self.inner.to_pl(&complex.inner).map_err(value_err)? })
    }

    fn __add__(&self, other: &Self) -> Self {
        PyPolyChain { inner: self.inner.plus(&other.inner) }
    }

    fn __sub__(&self, other: &Self) -> Self {
        PyPolyChain { inner: self.inner.minus(&other.inner) }
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("PolyChain(k={}, terms={})", self.inner.dim(), self.inner.len())
    }
}

/// An integer combination of oriented affine simplices in `R^ambient`.
#[pyclass(name = "PLChain", module = "gmtkit_py", frozen)]
pub struct PyPLChain {
    inner: PLChain,
}

#[pymethods]
impl PyPLChain {
    /// `terms` is a list of `(vertex coordinate lists, integer coefficient)`.
    #[new]
    fn new(k: usize, ambient: usize, terms: Vec<(Vec<Vec<Bound<'_, PyAny>>>, i64)>) -> PyResult<Self> {
        let terms = terms.into_iter().map(|(vs, c)| Ok((points(&vs)?, c))).collect::<PyResult<Vec<_>>>()?;
        Ok(PyPLChain { inner: PLChain::from_terms(k, ambient, terms).map_err(value_err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file: ChainFile = io::from_json_str(text, "<string>").map_err(value_err)?;
        Ok(PyPLChain { inner: file.to_chain().map_err(value_err)? })
    }

    fn to_json(&self) -> String {
        io::to_json_string(&ChainFile::from_chain(&self.inner))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn ambient(&self) -> usize {
        self.inner.ambient()
    }

    fn terms(&self) -> Vec<(Vec<Vec<String>>, i64)> {
        self.inner
            .terms()
            .map(|(vs, c)| (vs.iter().map(|p| p.iter().map(format_q).collect()).collect(), c))
            .collect()
    }

    fn boundary(&self) -> Self {
        PyPLChain { inner: self.inner.boundary() }
    }

    /// Formal mass `Σ |θ_i| vol(σ_i)`; equals the current's mass after `canonicalize`.
    fn mass(&self) -> f64 {
        self.inner.mass()
    }

    fn canonicalize(&self) -> Self {
        PyPLChain { inner: canonicalize(&self.inner) }
    }

    fn cone(&self, apex: Vec<Bound<'_, PyAny>>) -> PyResult<Self> {
        let a = point(&apex)?;
        if a.len() != self.inner.ambient() {
            return Err(value_err(format!("apex has {} coordinates, expected {}", a.len(), self.inner.ambient())));
        }
        Ok(PyPLChain { inner: self.inner.cone(&a) })
    }

    /// Equality as currents, decided exactly or by seeded test forms.
    #[pyo3(signature = (other, equality = "exact", samples = 8, seed = 0))]
    fn equals(&self, other: &Self, equality: &str, samples: usize, seed: u64) -> PyResult<bool> {
        Ok(chains_equal(&self.inner, &other.inner, &equality_mode(equality, samples, seed)?).equal)
    }

    fn __add__(&self, other: &Self) -> PyResult<Self> {
        Ok(PyPLChain { inner: self.inner.try_add(&other.inner).map_err(value_err)? })
    }

    fn __sub__(&self, other: &Self) -> PyResult<Self> {
        Ok(PyPLChain { inner: self.inner.try_sub(&other.inner).map_err(value_err)? })
    }

    /// Formal (term-by-term) equality; use `equals` for equality as currents.
    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("PLChain(k={}, ambient={}, terms={})", self.inner.dim(), self.inner.ambient(), self.inner.len())
    }
}

/// Minimal filling of a cycle; `verdict` is `"not_a_boundary"` with a
/// certificate when the cycle bounds nothing in the complex.
#[pyfunction]
#[pyo3(signature = (complex, cycle, mode = "lp"))]
fn fillvol(py: Python<'_>, complex: &PyComplex, cycle: &PyPolyChain, mode: &str) -> PyResult<Py<PyAny>> {
    report(py, cli::fillvol_report(&complex.inner, &cycle.inner, fill_mode(mode)?))
}

#[pyfunction]
#[pyo3(signature = (complex, chain, mode = "lp"))]
fn flat_norm(py: Python<'_>, complex: &PyComplex, chain: &PyPolyChain, mode: &str) -> PyResult<Py<PyAny>> {
    report(py, cli::flatnorm_report(&complex.inner, &chain.inner, fill_mode(mode)?))
}

#[pyfunction]
fn cone_fill(py: Python<'_>, chain: &PyPLChain, apex: Vec<Bound<'_, PyAny>>) -> PyResult<Py<PyAny>> {
    report(py, cli::cone_report(&chain.inner, &point(&apex)?))
}

/// `T = P + R + ∂S` with the local mass ledger and exactness certificate.
#[pyfunction]
#[pyo3(signature = (complex, chain, seed = 0, samples = 8, retries = 32, equality = "exact"))]
fn deform(
    py: Python<'_>,
    complex: &PyComplex,
    chain: &PyPLChain,
    seed: u64,
    samples: usize,
    retries: usize,
    equality: &str,
) -> PyResult<Py<PyAny>> {
    let cfg = DeformConfig { seed, samples, retries, equality: equality_mode(equality, samples, seed)? };
    report(py, cli::deform_report(complex.inner.clone(), &chain.inner, &cfg))
}

/// Greedy-net cover of a Euclidean point cloud at scale `scale`, its nerve and
/// the structure diagnostics.
#[pyfunction]
#[pyo3(signature = (points, scale, subdiv_depth = 0))]
fn build_nerve(
    py: Python<'_>,
    points: Vec<Vec<Bound<'_, PyAny>>>,
    scale: Bound<'_, PyAny>,
    subdiv_depth: usize,
) -> PyResult<Py<PyAny>> {
    let cloud = MetricPointCloud::from_coordinates(self::points(&points)?).map_err(value_err)?;
    report(py, cli::nerve_report(&cloud, &rational(&scale)?, subdiv_depth))
}

#[pyfunction]
#[pyo3(signature = (ambient, sub, cycles, mode = "lp"))]
fn undistortion(
    py: Python<'_>,
    ambient: &PyComplex,
    sub: &PyComplex,
    cycles: Vec<PyRef<'_, PyPolyChain>>,
    mode: &str,
) -> PyResult<Py<PyAny>> {
    let family: Vec<PolyChain> = cycles.iter().map(|c| c.inner.clone()).collect();
    report(py, cli::undistortion_report(&ambient.inner, &sub.inner, &family, fill_mode(mode)?))
}

#[pymodule]
pub fn gmtkit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyComplex>()?;
    m.add_class::<PyPolyChain>()?;
    m.add_class::<PyPLChain>()?;
    m.add_function(wrap_pyfunction!(fillvol, m)?)?;
    m.add_function(wrap_pyfunction!(flat_norm, m)?)?;
    m.add_function(wrap_pyfunction!(cone_fill, m)?)?;
    m.add_function(wrap_pyfunction!(deform, m)?)?;
    m.add_function(wrap_pyfunction!(build_nerve, m)?)?;
    m.add_function(wrap_pyfunction!(undistortion, m)?)?;
    Ok(())
}
