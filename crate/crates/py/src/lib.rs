//! Python bindings for `gframe_lab`.
//!
//! Operators are exchanged as nested lists of complex numbers, vectors as flat
//! lists, configurations as JSON strings. Library errors surface as `ValueError`.

use gframe_lab::generate::{self, ExperimentConfig};
use gframe_lab::{cli, controlled, multiplier, recon};
use gframe_lab::{CVec, Complex64};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

trait IntoPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for gframe_lab::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(|e| PyValueError::new_err(e.to_string()))
    }
}

fn to_vec(v: &CVec) -> Vec<Complex64> {
    v.iter().copied().collect()
}

fn from_vec(v: Vec<Complex64>) -> CVec {
    CVec::from_vec(v)
}

fn config(json: &str) -> PyResult<ExperimentConfig> {
    let cfg: ExperimentConfig = serde_json::from_str(json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    cfg.validate().py_err()?;
    Ok(cfg)
}

/// Dense complex operator.
#[pyclass(name = "LinOp", frozen, skip_from_py_object, module = "pygframe")]
#[derive(Clone)]
pub struct PyLinOp {
    pub inner: gframe_lab::LinOp,
}

impl From<gframe_lab::LinOp> for PyLinOp {
    fn from(inner: gframe_lab::LinOp) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PyLinOp {
    /// Builds an operator from a list of rows.
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
            return Err(PyValueError::new_err("expected a non-empty rectangular list of rows"));
        }
        let flat: Vec<Complex64> = rows.into_iter().flatten().collect();
        Ok(gframe_lab::LinOp::from_row_slice(r, c, &flat).py_err()?.into())
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        gframe_lab::LinOp::identity(n).into()
    }

    #[staticmethod]
    fn diag(values: Vec<f64>) -> Self {
        gframe_lab::LinOp::diag_real(&values).into()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.rows(), self.inner.cols())
    }

    fn to_list(&self) -> Vec<Vec<Complex64>> {
        (0..self.inner.rows())
            .map(|i| (0..self.inner.cols()).map(|j| self.inner.get(i, j)).collect())
            .collect()
    }

    fn apply(&self, f: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        Ok(to_vec(&self.inner.apply(&from_vec(f)).py_err()?))
    }

    fn adjoint(&self) -> Self {
        self.inner.adjoint().into()
    }

    fn __matmul__(&self, other: PyRef<'_, PyLinOp>) -> PyResult<Self> {
        Ok(self.inner.compose(&other.inner).py_err()?.into())
    }

    fn __add__(&self, other: PyRef<'_, PyLinOp>) -> PyResult<Self> {
        Ok(self.inner.try_add(&other.inner).py_err()?.into())
    }

    fn __sub__(&self, other: PyRef<'_, PyLinOp>) -> PyResult<Self> {
        Ok(self.inner.try_sub(&other.inner).py_err()?.into())
    }

    fn scale(&self, s: Complex64) -> Self {
        self.inner.scale(s).into()
    }

    fn op_norm(&self) -> f64 {
        self.inner.op_norm()
    }

    fn frobenius_norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }

    fn schatten_norm(&self, p: f64) -> PyResult<f64> {
        self.inner.schatten_norm(p).py_err()
    }

    fn singular_values(&self) -> Vec<f64> {
        self.inner.singular_values()
    }

    fn hermitian_eigenvalues(&self) -> PyResult<Vec<f64>> {
        self.inner.hermitian_eigenvalues().py_err()
    }

    #[pyo3(signature = (tol = None))]
    fn is_self_adjoint(&self, tol: Option<f64>) -> PyResult<bool> {
        let tol = tol.unwrap_or_else(|| self.inner.default_tol());
        self.inner.is_self_adjoint(tol).py_err()
    }

    fn sqrt(&self) -> PyResult<Self> {
        Ok(self.inner.sqrt().py_err()?.into())
    }

    #[pyo3(signature = (other, tol = None))]
    fn commutes(&self, other: PyRef<'_, PyLinOp>, tol: Option<f64>) -> PyResult<bool> {
        self.inner.commutes(&other.inner, tol.unwrap_or(1e-10)).py_err()
    }

    fn __repr__(&self) -> String {
        format!("LinOp({}x{})", self.inner.rows(), self.inner.cols())
    }
}

/// Finite g-frame on `C^n`.
#[pyclass(name = "GFrame", frozen, skip_from_py_object, module = "pygframe")]
#[derive(Clone)]
pub struct PyGFrame {
    pub inner: gframe_lab::GFrame,
}

impl From<gframe_lab::GFrame> for PyGFrame {
    fn from(inner: gframe_lab::GFrame) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PyGFrame {
    #[new]
    fn new(dim_h: usize, blocks: Vec<PyRef<'_, PyLinOp>>) -> PyResult<Self> {
        let blocks = blocks.iter().map(|b| b.inner.clone()).collect();
        Ok(gframe_lab::GFrame::new(dim_h, blocks).py_err()?.into())
    }

    /// One rank-one block per vector.
    #[staticmethod]
    fn from_vectors(vectors: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let vs: Vec<CVec> = vectors.into_iter().map(from_vec).collect();
        Ok(gframe_lab::GFrame::from_vector_frame(&vs).py_err()?.into())
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(gframe_lab::GFrame::from_json(s).py_err()?.into())
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn dim_h(&self) -> usize {
        self.inner.dim_h()
    }

    #[getter]
    fn block_dims(&self) -> Vec<usize> {
        self.inner.block_dims()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn blocks(&self) -> Vec<PyLinOp> {
        self.inner.blocks().iter().cloned().map(PyLinOp::from).collect()
    }

    /// Optimal bounds `(A, B)`.
    fn frame_bounds(&self) -> (f64, f64) {
        let b = self.inner.frame_bounds();
        (b.lower, b.upper)
    }

    fn frame_operator(&self) -> PyLinOp {
        self.inner.frame_operator().into()
    }

    fn synthesis_matrix(&self) -> PyLinOp {
        self.inner.synthesis_matrix().into()
    }

    fn analysis(&self, f: Vec<Complex64>) -> PyResult<Vec<Vec<Complex64>>> {
        let coeffs = self.inner.analysis(&from_vec(f)).py_err()?;
        Ok(coeffs.parts().iter().map(to_vec).collect())
    }

    fn synthesis(&self, coeffs: Vec<Vec<Complex64>>) -> PyResult<Vec<Complex64>> {
        let bv = gframe_lab::BlockVector::new(coeffs.into_iter().map(from_vec).collect());
        Ok(to_vec(&self.inner.synthesis(&bv).py_err()?))
    }

    fn canonical_dual(&self) -> PyResult<Self> {
        Ok(self.inner.canonical_dual().py_err()?.into())
    }

    /// `f` from its coefficients `{Lambda_i f}` through the canonical dual.
    fn reconstruct(&self, coeffs: Vec<Vec<Complex64>>) -> PyResult<Vec<Complex64>> {
        let bv = gframe_lab::BlockVector::new(coeffs.into_iter().map(from_vec).collect());
        Ok(to_vec(&self.inner.reconstruct(&bv).py_err()?))
    }

    #[pyo3(signature = (tol = None))]
    fn is_g_frame(&self, tol: Option<f64>) -> bool {
        self.inner.is_g_frame(tol.unwrap_or_else(|| self.inner.default_tol()))
    }

    #[pyo3(signature = (tol = None))]
    fn is_tight(&self, tol: Option<f64>) -> bool {
        self.inner.is_tight(tol.unwrap_or_else(|| self.inner.default_tol()))
    }

    #[pyo3(signature = (tol = None))]
    fn is_parseval(&self, tol: Option<f64>) -> bool {
        self.inner.is_parseval(tol.unwrap_or_else(|| self.inner.default_tol()))
    }

    fn __repr__(&self) -> String {
        format!("GFrame(dim_h={}, block_dims={:?})", self.inner.dim_h(), self.inner.block_dims())
    }
}

/// Self-adjoint positive-definite controller with its certificate `(m, M)`.
#[pyclass(name = "Controller", frozen, skip_from_py_object, module = "pygframe")]
#[derive(Clone)]
pub struct PyController {
    pub inner: gframe_lab::Controller,
}

impl From<gframe_lab::Controller> for PyController {
    fn from(inner: gframe_lab::Controller) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PyController {
    #[new]
    fn new(op: PyRef<'_, PyLinOp>) -> PyResult<Self> {
        Ok(gframe_lab::Controller::new(op.inner.clone()).py_err()?.into())
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        gframe_lab::Controller::identity(n).into()
    }

    #[staticmethod]
    fn scalar(n: usize, c: f64) -> PyResult<Self> {
        Ok(gframe_lab::Controller::scalar(n, c).py_err()?.into())
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(gframe_lab::Controller::from_json(s).py_err()?.into())
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn op(&self) -> PyLinOp {
        self.inner.op().clone().into()
    }

    #[getter]
    fn cert(&self) -> (f64, f64) {
        let c = self.inner.cert();
        (c.lower, c.upper)
    }

    fn condition(&self) -> f64 {
        self.inner.condition()
    }

    fn inverse(&self) -> PyResult<Self> {
        Ok(self.inner.inverse().py_err()?.into())
    }

    fn __repr__(&self) -> String {
        let c = self.inner.cert();
        format!("Controller(dim={}, m={}, M={})", self.inner.dim(), c.lower, c.upper)
    }
}

/// Multiplier symbol: one complex weight per block.
#[pyclass(name = "Symbol", frozen, skip_from_py_object, module = "pygframe")]
#[derive(Clone)]
pub struct PySymbol {
    pub inner: multiplier::Symbol,
}

impl From<multiplier::Symbol> for PySymbol {
    fn from(inner: multiplier::Symbol) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PySymbol {
    #[new]
    fn new(weights: Vec<Complex64>) -> Self {
        multiplier::Symbol::new(weights).into()
    }

    #[staticmethod]
    fn ones(n: usize) -> Self {
        multiplier::Symbol::ones(n).into()
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(multiplier::Symbol::from_json(s).py_err()?.into())
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn weights(&self) -> Vec<Complex64> {
        self.inner.weights().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn sup_norm(&self) -> f64 {
        self.inner.sup_norm()
    }

    fn lp_norm(&self, p: f64) -> PyResult<f64> {
        self.inner.lp_norm(p).py_err()
    }

    fn conj(&self) -> Self {
        self.inner.conj().into()
    }
}

/// `L = C' S C`.
#[pyfunction]
fn controlled_frame_operator(
    frame: PyRef<'_, PyGFrame>,
    c: PyRef<'_, PyController>,
    c2: PyRef<'_, PyController>,
) -> PyResult<PyLinOp> {
    Ok(controlled::controlled_frame_operator(&frame.inner, &c.inner, &c2.inner).py_err()?.into())
}

/// `(lower, upper, hermitian_defect)` of the controlled frame operator.
#[pyfunction]
fn controlled_bounds(
    frame: PyRef<'_, PyGFrame>,
    c: PyRef<'_, PyController>,
    c2: PyRef<'_, PyController>,
) -> PyResult<(f64, f64, f64)> {
    let b = controlled::controlled_bounds(&frame.inner, &c.inner, &c2.inner).py_err()?;
    Ok((b.lower, b.upper, b.hermitian_defect))
}

#[pyfunction]
#[pyo3(signature = (frame, c, c2, tol = 1e-10))]
fn commuting_controlled_bounds(
    frame: PyRef<'_, PyGFrame>,
    c: PyRef<'_, PyController>,
    c2: PyRef<'_, PyController>,
    tol: f64,
) -> PyResult<(f64, f64)> {
    let b = controlled::commuting_controlled_bounds(&frame.inner, &c.inner, &c2.inner, tol).py_err()?;
    Ok((b.lower, b.upper))
}

/// `sum_i m_i Lambda_i^* Theta_i` with `Lambda = synth`, `Theta = anal`.
#[pyfunction]
fn multiplier_op(m: PyRef<'_, PySymbol>, synth: PyRef<'_, PyGFrame>, anal: PyRef<'_, PyGFrame>) -> PyResult<PyLinOp> {
    Ok(multiplier::multiplier(&m.inner, &synth.inner, &anal.inner).py_err()?.into())
}

/// `sum_i m_i C Theta_i^* Lambda_i C'`.
#[pyfunction]
fn controlled_multiplier(
    m: PyRef<'_, PySymbol>,
    c: PyRef<'_, PyController>,
    theta: PyRef<'_, PyGFrame>,
    lambda: PyRef<'_, PyGFrame>,
    c2: PyRef<'_, PyController>,
) -> PyResult<PyLinOp> {
    Ok(multiplier::controlled_multiplier(&m.inner, &c.inner, &theta.inner, &lambda.inner, &c2.inner)
        .py_err()?
        .into())
}

/// `(norm, bound)` with `bound = ||m||_inf sqrt(B B')`.
#[pyfunction]
fn controlled_multiplier_norm_bound(
    m: PyRef<'_, PySymbol>,
    c: PyRef<'_, PyController>,
    theta: PyRef<'_, PyGFrame>,
    lambda: PyRef<'_, PyGFrame>,
    c2: PyRef<'_, PyController>,
) -> PyResult<(f64, f64)> {
    let nb = multiplier::controlled_multiplier_norm_bound(&m.inner, &c.inner, &theta.inner, &lambda.inner, &c2.inner)
        .py_err()?;
    Ok((nb.norm, nb.bound))
}

/// Frame algorithm on `S f = g`; returns `(f, iterations, residual_history)`.
#[pyfunction]
#[pyo3(signature = (frame, g, tol = 1e-10, max_iter = 2_000_000))]
fn plain_solve(
    frame: PyRef<'_, PyGFrame>,
    g: Vec<Complex64>,
    tol: f64,
    max_iter: usize,
) -> PyResult<(Vec<Complex64>, usize, Vec<f64>)> {
    let (f, rep) = recon::plain_solve(&frame.inner, &from_vec(g), tol, max_iter).py_err()?;
    Ok((to_vec(&f), rep.iterations, rep.residual_history))
}

/// Frame algorithm on `C S C h = C g`; returns `(f, iterations, condition_of_L)`.
#[pyfunction]
#[pyo3(signature = (frame, c, g, tol = 1e-10, max_iter = 2_000_000))]
fn preconditioned_solve(
    frame: PyRef<'_, PyGFrame>,
    c: PyRef<'_, PyController>,
    g: Vec<Complex64>,
    tol: f64,
    max_iter: usize,
) -> PyResult<(Vec<Complex64>, usize, f64)> {
    let (f, rep) = recon::preconditioned_solve(&frame.inner, &c.inner, &c.inner, &from_vec(g), tol, max_iter).py_err()?;
    Ok((to_vec(&f), rep.iterations, rep.condition_estimate))
}

/// `(frame, partner, controller, symbol)` from a JSON experiment config.
#[pyfunction]
fn generate_instance(config_json: &str) -> PyResult<(PyGFrame, PyGFrame, PyController, PySymbol)> {
    let inst = generate::generate_instance(&config(config_json)?).py_err()?;
    Ok((inst.frame.into(), inst.partner.into(), inst.controller.into(), inst.symbol.into()))
}

/// Benchmark CSV for a JSON experiment config.
#[pyfunction]
fn bench_csv(py: Python<'_>, config_json: &str) -> PyResult<String> {
    let cfg = config(config_json)?;
    let rows = py.detach(|| cli::bench(&cfg)).py_err()?;
    Ok(cli::bench_csv(&rows))
}

/// `(passed, report_json)` of the invariant suite over generated instances.
#[pyfunction]
#[pyo3(signature = (config_json, instances = 1))]
fn verify(py: Python<'_>, config_json: &str, instances: usize) -> PyResult<(bool, String)> {
    let cfg = config(config_json)?;
    let report = py.detach(|| cli::verify_generated(&cfg, instances)).py_err()?;
    let json = serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok((report.passed, json))
}

#[pymodule]
pub fn pygframe(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLinOp>()?;
    m.add_class::<PyGFrame>()?;
    m.add_class::<PyController>()?;
    m.add_class::<PySymbol>()?;
    m.add_function(wrap_pyfunction!(controlled_frame_operator, m)?)?;
    m.add_function(wrap_pyfunction!(controlled_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(commuting_controlled_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(multiplier_op, m)?)?;
    m.add_function(wrap_pyfunction!(controlled_multiplier, m)?)?;
    m.add_function(wrap_pyfunction!(controlled_multiplier_norm_bound, m)?)?;
    m.add_function(wrap_pyfunction!(plain_solve, m)?)?;
    m.add_function(wrap_pyfunction!(preconditioned_solve, m)?)?;
    m.add_function(wrap_pyfunction!(generate_instance, m)?)?;
    m.add_function(wrap_pyfunction!(bench_csv, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
