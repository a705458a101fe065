//! Python module `pam_moments`.

use pam_core::contour::{bc_contour_moment, ContourConfig};
use pam_core::front;
use pam_core::lambda::{self, LambdaArgs, LambdaMode};
use pam_core::moments;
use pam_core::sim::{self, SimGrid};
use pam_core::{specfun, LogValue, PamError};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: PamError) -> PyErr {
    match e {
        PamError::Convergence { .. } | PamError::Accuracy(_) | PamError::Overflow { .. } => {
            PyArithmeticError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for pam_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// Diffusion `nu`, noise intensity `lambda_` and time `t`.
#[pyclass(name = "ModelParams", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyModelParams {
    inner: moments::ModelParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    fn new(nu: f64, lambda_: f64, t: f64) -> PyResult<Self> {
        Ok(PyModelParams {
            inner: moments::ModelParams::new(nu, lambda_, t).py()?,
        })
    }

    #[getter]
    fn nu(&self) -> f64 {
        self.inner.nu
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn t(&self) -> f64 {
        self.inner.t
    }

    fn at_time(&self, t: f64) -> PyResult<Self> {
        Ok(PyModelParams {
            inner: self.inner.at_time(t).py()?,
        })
    }

    fn __repr__(&self) -> String {
        let p = self.inner;
        format!("ModelParams(nu={}, lambda_={}, t={})", p.nu, p.lambda, p.t)
    }
}

#[pyclass(name = "QuadratureConfig", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyQuadratureConfig {
    inner: pam_core::QuadratureConfig,
}

#[pymethods]
impl PyQuadratureConfig {
    #[new]
    #[pyo3(signature = (rel_tol=1e-10, abs_tol=0.0, max_evals=200_000, truncation_margin=8.0))]
    fn new(rel_tol: f64, abs_tol: f64, max_evals: usize, truncation_margin: f64) -> PyResult<Self> {
        let inner = pam_core::QuadratureConfig {
            rel_tol,
            abs_tol,
            max_evals,
            truncation_margin,
        };
        inner.validate().py()?;
        Ok(PyQuadratureConfig { inner })
    }

    #[getter]
    fn rel_tol(&self) -> f64 {
        self.inner.rel_tol
    }

    #[getter]
    fn max_evals(&self) -> usize {
        self.inner.max_evals
    }
}

/// A moment as sign and log-magnitude, with the quadrature error estimate.
#[pyclass(name = "MomentValue", frozen, skip_from_py_object)]
struct PyMomentValue {
    #[pyo3(get)]
    sign: i8,
    #[pyo3(get)]
    log_value: f64,
    #[pyo3(get)]
    rel_err: f64,
    #[pyo3(get)]
    evals: usize,
}

#[pymethods]
impl PyMomentValue {
    #[getter]
    fn value(&self) -> f64 {
        LogValue::from_parts(self.sign, self.log_value).to_f64()
    }

    fn __repr__(&self) -> String {
        format!(
            "MomentValue(value={:e}, log_value={}, rel_err={:e})",
            self.value(),
            self.log_value,
            self.rel_err
        )
    }
}

impl From<moments::MomentValue> for PyMomentValue {
    fn from(m: moments::MomentValue) -> Self {
        PyMomentValue {
            sign: m.value.sign(),
            log_value: m.value.log_abs(),
            rel_err: m.rel_err,
            evals: m.evals,
        }
    }
}

fn quad(cfg: Option<PyQuadratureConfig>) -> pam_core::QuadratureConfig {
    cfg.map_or_else(Default::default, |c| c.inner)
}

#[pyfunction]
fn heat_kernel(nu: f64, t: f64, x: f64) -> PyResult<f64> {
    specfun::heat_kernel(nu, t, x).py()
}

#[pyfunction]
fn erfcx(x: f64) -> PyResult<f64> {
    specfun::erfcx(x).py()
}

#[pyfunction]
#[pyo3(signature = (n, beta, t, recursion=false))]
fn lambda_n(n: usize, beta: f64, t: f64, recursion: bool) -> PyResult<f64> {
    let mode = if recursion {
        LambdaMode::Recursion
    } else {
        LambdaMode::ClosedForm
    };
    lambda::lambda_n(LambdaArgs::new(n, beta, t).py()?, mode).py()
}

#[pyfunction]
fn second_moment_two_point(p: PyModelParams, x1: f64, x2: f64) -> PyResult<f64> {
    moments::second_moment_two_point(&p.inner, x1, x2).py()
}

#[pyfunction]
fn second_moment(p: PyModelParams, x: f64) -> PyResult<f64> {
    moments::second_moment(&p.inner, x).py()
}

#[pyfunction]
#[pyo3(signature = (p, x, cfg=None))]
fn third_moment(
    p: PyModelParams,
    x: f64,
    cfg: Option<PyQuadratureConfig>,
) -> PyResult<PyMomentValue> {
    Ok(moments::third_moment_log(&p.inner, x, &quad(cfg))
        .py()?
        .into())
}

#[pyfunction]
#[pyo3(signature = (p, x1, x2, x3, cfg=None))]
fn third_moment_three_point(
    p: PyModelParams,
    x1: f64,
    x2: f64,
    x3: f64,
    cfg: Option<PyQuadratureConfig>,
) -> PyResult<PyMomentValue> {
    let xs = moments::TriplePoint::new(x1, x2, x3).py()?;
    Ok(
        moments::third_moment_three_point_log(&p.inner, &xs, &quad(cfg))
            .py()?
            .into(),
    )
}

/// `(log_lower, log_upper)` bounds on the third moment.
#[pyfunction]
fn third_moment_bounds(p: PyModelParams, x: f64) -> PyResult<(f64, f64)> {
    let b = moments::third_moment_bounds(&p.inner, x).py()?;
    Ok((b.lower.log_abs(), b.upper.log_abs()))
}

/// `(value, imag_residual)` of the k-fold contour integral at sorted points.
#[pyfunction]
#[pyo3(signature = (p, xs, rel_tol=1e-8))]
fn contour_moment(p: PyModelParams, xs: Vec<f64>, rel_tol: f64) -> PyResult<(f64, f64)> {
    let cc = ContourConfig::auto(xs.len(), &p.inner, &xs, rel_tol).py()?;
    let r = bc_contour_moment(xs.len(), &p.inner, &xs, &cc).py()?;
    Ok((r.value, r.imag_residual))
}

#[pyfunction]
fn growth_index(p: u32, lambda_: f64) -> PyResult<f64> {
    front::growth_index(p, lambda_).py()
}

#[pyfunction]
fn rate_function(p: PyModelParams, alpha: f64) -> PyResult<f64> {
    front::rate_function(&p.inner, alpha).py()
}

/// `(lambda_p, alphas, rates)`; the time in `p` is ignored.
#[pyfunction]
#[pyo3(signature = (p, times, alpha_max, alpha_step=0.01))]
fn empirical_front(
    py: Python<'_>,
    p: PyModelParams,
    times: Vec<f64>,
    alpha_max: f64,
    alpha_step: f64,
) -> PyResult<(f64, Vec<f64>, Vec<f64>)> {
    let grid = front::uniform_grid(0.0, alpha_max, alpha_step).py()?;
    let cfg = pam_core::QuadratureConfig::default();
    let f = py
        .detach(|| front::empirical_front(&p.inner, &times, &grid, &cfg))
        .py()?;
    Ok((f.lambda_p, f.alpha_grid, f.rate_values))
}

/// `(mean, stderr)` of `u(t, x)^order` over simulated replicas, with `dt` at
/// half the stability limit.
#[pyfunction]
#[pyo3(signature = (p, x, order, half_width, nx, replicas, seed=0, delta_width=0.0))]
#[allow(clippy::too_many_arguments)]
fn simulate_moment(
    py: Python<'_>,
    p: PyModelParams,
    x: f64,
    order: u32,
    half_width: f64,
    nx: usize,
    replicas: usize,
    seed: u64,
    delta_width: f64,
) -> PyResult<(f64, f64)> {
    let mut g = SimGrid::with_stable_dt(&p.inner, half_width, nx, p.inner.t, 0.5, replicas, seed);
    g.delta_width = delta_width;
    let set = py.detach(|| sim::simulate_field(&p.inner, &g)).py()?;
    let e = sim::estimate_moment(&set, x, order).py()?;
    Ok((e.mean, e.stderr))
}

#[pymodule]
fn pam_moments(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyQuadratureConfig>()?;
    m.add_class::<PyMomentValue>()?;
    m.add_function(wrap_pyfunction!(heat_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(erfcx, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_n, m)?)?;
    m.add_function(wrap_pyfunction!(second_moment_two_point, m)?)?;
    m.add_function(wrap_pyfunction!(second_moment, m)?)?;
    m.add_function(wrap_pyfunction!(third_moment, m)?)?;
    m.add_function(wrap_pyfunction!(third_moment_three_point, m)?)?;
    m.add_function(wrap_pyfunction!(third_moment_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(contour_moment, m)?)?;
    m.add_function(wrap_pyfunction!(growth_index, m)?)?;
    m.add_function(wrap_pyfunction!(rate_function, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_front, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_moment, m)?)?;
    Ok(())
}
