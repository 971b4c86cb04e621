//! Python module `sobflow`. Matrices cross the boundary as lists of rows.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sobflow_core::flow::{self, IntegrateConfig, StepMode, StopReason};
use sobflow_core::{eigh, oracle, presets, saddle, symmetrizer, DenseMatrix};

create_exception!(sobflow, SobflowError, PyValueError);

type Rows = Vec<Vec<f64>>;

fn err(e: sobflow_core::Error) -> PyErr {
    SobflowError::new_err(e.to_string())
}

fn to_matrix(rows: &Rows) -> PyResult<DenseMatrix> {
    if rows.is_empty() {
        return Err(SobflowError::new_err("matrix must have at least one row"));
    }
    DenseMatrix::from_rows(rows).map_err(err)
}

fn to_rows(m: &DenseMatrix) -> Rows {
    m.to_rows()
}

#[pyclass(name = "FlowProblem", module = "sobflow", frozen)]
struct PyFlowProblem {
    inner: flow::FlowProblem,
}

#[pymethods]
impl PyFlowProblem {
    #[new]
    fn new(a: Rows, b: Vec<f64>, s: Rows) -> PyResult<Self> {
        let inner = flow::FlowProblem::new(to_matrix(&a)?, b, to_matrix(&s)?).map_err(err)?;
        Ok(Self { inner })
    }

    fn vector_field(&self, x: Rows) -> PyResult<Rows> {
        Ok(to_rows(&flow::vector_field(&self.inner, &to_matrix(&x)?).map_err(err)?))
    }

    fn potential(&self, x: Rows) -> PyResult<f64> {
        flow::potential(&self.inner, &to_matrix(&x)?).map_err(err)
    }

    fn metric_inner(&self, w1: Rows, w2: Rows) -> PyResult<f64> {
        flow::metric_inner(&self.inner, &to_matrix(&w1)?, &to_matrix(&w2)?).map_err(err)
    }

    /// Returns `(gamma, [c0, c1, c2, c3])`.
    fn optimal_gamma(&self, x: Rows) -> PyResult<(f64, Vec<f64>)> {
        let ls = flow::optimal_gamma(&self.inner, &to_matrix(&x)?, 0.0).map_err(err)?;
        Ok((ls.gamma, ls.coeffs.0.to_vec()))
    }

    #[pyo3(signature = (x0, mode = "variable", gamma = None, max_iters = 100_000, tol = 1e-10, stride = 100))]
    fn integrate(
        &self,
        py: Python<'_>,
        x0: Rows,
        mode: &str,
        gamma: Option<f64>,
        max_iters: usize,
        tol: f64,
        stride: usize,
    ) -> PyResult<PyTrajectory> {
        let mode = match (mode, gamma) {
            ("variable", _) => StepMode::Variable,
            ("fixed", Some(g)) => StepMode::Fixed(g),
            ("fixed", None) => return Err(SobflowError::new_err("fixed mode needs gamma")),
            (other, _) => return Err(SobflowError::new_err(format!("unknown mode '{other}'"))),
        };
        let config = IntegrateConfig {
            mode,
            max_iters,
            tol_abs: tol,
            tol_rel: tol,
            stride,
            audit: false,
        };
        let x0 = to_matrix(&x0)?;
        let inner = py
            .detach(|| flow::integrate(&self.inner, &x0, &config))
            .map_err(err)?;
        let pairs = flow::eigenpairs_at(&self.inner, &inner.final_state.x);
        Ok(PyTrajectory { inner, pairs })
    }
}

#[pyclass(name = "Trajectory", module = "sobflow", frozen)]
struct PyTrajectory {
    inner: flow::Trajectory,
    pairs: Vec<flow::Eigenpair>,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations()
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn stop_reason(&self) -> &'static str {
        match self.inner.stop_reason {
            StopReason::ResidualSmall => "residual-small",
            StopReason::MaxIterations => "max-iterations",
            StopReason::Diverged => "diverged",
        }
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues()
    }

    #[getter]
    fn x(&self) -> Rows {
        to_rows(&self.inner.final_state.x)
    }

    #[getter]
    fn l(&self) -> Rows {
        to_rows(&self.inner.final_state.l)
    }

    #[getter]
    fn potentials(&self) -> Vec<f64> {
        self.inner.snapshots.iter().map(|s| s.potential).collect()
    }

    /// `(lambda, unit eigenvector, residual)` per column.
    fn eigenpairs(&self) -> Vec<(f64, Vec<f64>, f64)> {
        self.pairs
            .iter()
            .map(|p| (p.lambda, p.vector.clone(), p.residual))
            .collect()
    }

    fn to_csv(&self) -> String {
        flow::trajectory_csv(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Trajectory(iterations={}, converged={}, eigenvalues={:?})",
            self.inner.iterations(),
            self.inner.converged,
            self.inner.eigenvalues()
        )
    }
}

/// `(eigenvalues descending, eigenvector rows)` of a symmetric matrix.
#[pyfunction]
fn jacobi_eigh(m: Rows) -> PyResult<(Vec<f64>, Rows)> {
    let r = eigh::jacobi_eigh(&to_matrix(&m)?).map_err(err)?;
    Ok((r.eigenvalues, to_rows(&r.eigenvectors)))
}

#[pyfunction]
fn spd_sqrt(s: Rows) -> PyResult<Rows> {
    Ok(to_rows(&eigh::spd_sqrt(&to_matrix(&s)?).map_err(err)?))
}

#[pyfunction]
fn sylvester_residual(a: Rows, s: Rows) -> PyResult<f64> {
    sobflow_core::certify::sylvester_residual(&to_matrix(&a)?, &to_matrix(&s)?).map_err(err)
}

#[pyfunction]
fn lagrangian_frame_check(x: Rows, y: Rows) -> PyResult<f64> {
    sobflow_core::certify::lagrangian_frame_check(&to_matrix(&x)?, &to_matrix(&y)?).map_err(err)
}

/// Diagonal of the symmetrizer of a dense axisymmetric structure matrix.
#[pyfunction]
#[pyo3(signature = (a, tol = symmetrizer::DEFAULT_CONNECTION_TOL))]
fn axisymmetric_symmetrizer(a: Rows, tol: f64) -> PyResult<Vec<f64>> {
    let axi = symmetrizer::AxisymmetricMatrix::from_dense(&to_matrix(&a)?).map_err(err)?;
    Ok(symmetrizer::solve_diagonal_symmetrizer(&axi, tol).map_err(err)?.s)
}

#[pyfunction]
fn rank_one_symmetrizer(d: Vec<f64>, a: Vec<f64>, b: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(symmetrizer::rank_one_symmetrizer(&d, &a, &b).map_err(err)?.s)
}

/// Eigenvalues of `diag(d) + a b^T`, descending.
#[pyfunction]
fn rank_one_roots(d: Vec<f64>, a: Vec<f64>, b: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(oracle::rank_one_roots(&d, &a, &b).map_err(err)?.eigenvalues)
}

/// `(eigenvalues descending, eigenvector rows)` of `A` given its symmetrizer.
#[pyfunction]
fn reference_eigenpairs(a: Rows, s: Rows) -> PyResult<(Vec<f64>, Rows)> {
    let r = oracle::reference_eigenpairs(&to_matrix(&a)?, &to_matrix(&s)?).map_err(err)?;
    Ok((r.eigenvalues, to_rows(&r.eigenvectors_a)))
}

fn blocks(p: Rows, q: Rows, r: Rows) -> PyResult<saddle::SaddlePointBlocks> {
    saddle::SaddlePointBlocks::new(to_matrix(&p)?, to_matrix(&q)?, to_matrix(&r)?).map_err(err)
}

/// `(exists, eps_minus, eps_plus)`.
#[pyfunction]
fn epsilon_window(p: Rows, q: Rows, r: Rows) -> PyResult<(bool, f64, f64)> {
    let w = saddle::epsilon_window(&blocks(p, q, r)?);
    Ok((w.exists, w.eps_minus, w.eps_plus))
}

/// `(A, S_eps)` for the saddle-point blocks.
#[pyfunction]
fn saddle_matrices(p: Rows, q: Rows, r: Rows, epsilon: f64) -> PyResult<(Rows, Rows)> {
    let b = blocks(p, q, r)?;
    Ok((
        to_rows(&saddle::assemble_saddle(&b)),
        to_rows(&saddle::assemble_s_epsilon(&b, epsilon)),
    ))
}

#[pyfunction]
fn is_s_epsilon_positive_definite(p: Rows, q: Rows, r: Rows, epsilon: f64) -> PyResult<bool> {
    let report = saddle::check_pd_conditions(&blocks(p, q, r)?, epsilon).map_err(err)?;
    Ok(report.is_positive_definite())
}

#[pyfunction]
fn preset_names() -> Vec<&'static str> {
    presets::SOLVE_PRESETS.to_vec()
}

/// Dictionary with `a`, `s`, `b`, `x0`, `mode`, `gamma` and `expected`.
#[pyfunction]
fn preset<'py>(py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyDict>> {
    let p = presets::solve_preset(name)
        .ok_or_else(|| SobflowError::new_err(format!("no flow preset named '{name}'")))?;
    let d = PyDict::new(py);
    d.set_item("a", to_rows(&p.a))?;
    d.set_item("s", to_rows(&p.s))?;
    d.set_item("b", p.b)?;
    d.set_item("x0", to_rows(&p.x0))?;
    match p.config.mode {
        StepMode::Fixed(g) => {
            d.set_item("mode", "fixed")?;
            d.set_item("gamma", g)?;
        }
        StepMode::Variable => {
            d.set_item("mode", "variable")?;
            d.set_item("gamma", py.None())?;
        }
    }
    d.set_item("max_iters", p.config.max_iters)?;
    d.set_item("expected", p.expected)?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "sobflow")]
fn sobflow_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SobflowError", m.py().get_type::<SobflowError>())?;
    m.add_class::<PyFlowProblem>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(jacobi_eigh, m)?)?;
    m.add_function(wrap_pyfunction!(spd_sqrt, m)?)?;
    m.add_function(wrap_pyfunction!(sylvester_residual, m)?)?;
    m.add_function(wrap_pyfunction!(lagrangian_frame_check, m)?)?;
    m.add_function(wrap_pyfunction!(axisymmetric_symmetrizer, m)?)?;
    m.add_function(wrap_pyfunction!(rank_one_symmetrizer, m)?)?;
    m.add_function(wrap_pyfunction!(rank_one_roots, m)?)?;
    m.add_function(wrap_pyfunction!(reference_eigenpairs, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_window, m)?)?;
    m.add_function(wrap_pyfunction!(saddle_matrices, m)?)?;
    m.add_function(wrap_pyfunction!(is_s_epsilon_positive_definite, m)?)?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add_function(wrap_pyfunction!(preset, m)?)?;
    Ok(())
}
