//! Python bindings. Reports cross the boundary as plain dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use critwave::harness::{verify_chain as run_verify_chain, CheckToggles};
use critwave::ode_blowup::{self, OdeProblem};
use critwave::radon::{self, RadonKind};
use critwave::sharp_transform::{self, LineField};
use critwave::wave_solver::{self, InitialDataKind, InitialDataSpec};

fn err(e: critwave::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "ExponentSet", frozen, get_all)]
struct PyExponentSet {
    n: usize,
    p: f64,
    p_c: f64,
    a: f64,
    q: f64,
    #[pyo3(name = "K1")]
    k1: f64,
    p_prime: f64,
}

#[pymethods]
impl PyExponentSet {
    fn __repr__(&self) -> String {
        format!("ExponentSet(n={}, p={}, a={}, q={}, K1={})", self.n, self.p, self.a, self.q, self.k1)
    }
}

#[pyfunction]
fn critical_exponent(n: usize) -> PyResult<f64> {
    critwave::critical_exponent(n).map_err(err)
}

/// Exponents at p, or at p_c(n) when p is omitted.
#[pyfunction]
#[pyo3(signature = (n, p=None))]
fn exponent_set(n: usize, p: Option<f64>) -> PyResult<PyExponentSet> {
    let p = match p {
        Some(p) => p,
        None => critwave::critical_exponent(n).map_err(err)?,
    };
    let e = critwave::exponent_set(n, p).map_err(err)?;
    Ok(PyExponentSet { n: e.n, p: e.p, p_c: e.p_c, a: e.a, q: e.q, k1: e.k1, p_prime: e.p_prime })
}

#[pyclass(name = "SimulationConfig", frozen)]
struct PySimulationConfig {
    inner: wave_solver::SimulationConfig,
}

#[pymethods]
impl PySimulationConfig {
    #[new]
    #[pyo3(signature = (n=4, p=None, amplitude=5.0, h=0.0025, t_max=12.0, support_radius=1.0, radius=None, velocity=false, nonlinear=true, cfl=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        n: usize,
        p: Option<f64>,
        amplitude: f64,
        h: f64,
        t_max: f64,
        support_radius: f64,
        radius: Option<f64>,
        velocity: bool,
        nonlinear: bool,
        cfl: Option<f64>,
    ) -> PyResult<Self> {
        let p = match p {
            Some(p) => p,
            None => critwave::critical_exponent(n).map_err(err)?,
        };
        let mut data = InitialDataSpec::bump(amplitude, radius.unwrap_or(support_radius));
        if velocity {
            data.kind = InitialDataKind::ZeroDisplacementBumpVelocity;
        }
        let mut inner = wave_solver::SimulationConfig::new(n, p, support_radius, h, t_max, data);
        inner.nonlinear = nonlinear;
        if let Some(c) = cfl {
            inner.cfl = c;
        }
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.p
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt()
    }

    #[getter]
    fn t_max(&self) -> f64 {
        self.inner.t_max
    }

    #[getter]
    fn r_max(&self) -> f64 {
        self.inner.r_max
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "SimulationConfig(n={}, p={}, amplitude={}, h={}, t_max={})",
            self.inner.n, self.inner.p, self.inner.initial_data.amplitude, self.inner.h, self.inner.t_max
        )
    }
}

#[pyclass(name = "RadialState", frozen)]
struct PyRadialState {
    inner: wave_solver::RadialState,
}

#[pymethods]
impl PyRadialState {
    #[getter]
    fn t(&self) -> f64 {
        self.inner.t
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h
    }

    #[getter]
    fn r(&self) -> Vec<f64> {
        (0..self.inner.len()).map(|i| self.inner.r(i)).collect()
    }

    #[getter]
    fn u(&self) -> Vec<f64> {
        self.inner.u.clone()
    }

    #[getter]
    fn v(&self) -> Vec<f64> {
        self.inner.v.clone()
    }

    fn max_abs_u(&self) -> f64 {
        self.inner.max_abs_u()
    }

    /// ∫u dx.
    fn f0(&self) -> f64 {
        critwave::diagnostics::F0(&self.inner)
    }

    fn lp_integral(&self, p: f64) -> f64 {
        critwave::diagnostics::lp_integral(&self.inner, p)
    }

    /// Radon transform on the ρ-grid; kind is "u", "abs_u" or "abs_u_pow_p".
    #[pyo3(signature = (kind="u", p=2.0))]
    fn radon(&self, kind: &str, p: f64) -> PyResult<Vec<f64>> {
        let kind = match kind {
            "u" => RadonKind::OfU,
            "abs_u" => RadonKind::OfAbsU,
            "abs_u_pow_p" => RadonKind::OfAbsUPowP,
            other => return Err(PyValueError::new_err(format!("unknown Radon kind {other:?}"))),
        };
        Ok(radon::radon_section(&self.inner, kind, p).values)
    }
}

/// Runs the solver; returns (report dict, final state, snapshots).
#[pyfunction]
#[pyo3(signature = (config, snapshot_times=vec![], observer_stride=10))]
fn simulate<'py>(
    py: Python<'py>,
    config: &PySimulationConfig,
    snapshot_times: Vec<f64>,
    observer_stride: usize,
) -> PyResult<(Bound<'py, PyAny>, PyRadialState, Vec<PyRadialState>)> {
    let options = wave_solver::SimulationOptions { observer_stride, snapshot_times };
    let cfg = config.inner.clone();
    let out = py.detach(|| wave_solver::simulate(&cfg, &options, &mut [])).map_err(err)?;
    Ok((
        to_py(py, &out.report)?,
        PyRadialState { inner: out.final_state },
        out.snapshots.into_iter().map(|inner| PyRadialState { inner }).collect(),
    ))
}

/// Full verification chain; returns the run report as a dict.
#[pyfunction]
#[pyo3(signature = (config, out_dir=None))]
fn verify_chain<'py>(py: Python<'py>, config: &PySimulationConfig, out_dir: Option<std::path::PathBuf>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config.inner.clone();
    let report = py
        .detach(|| run_verify_chain(&cfg, &CheckToggles::default(), 10, out_dir.as_deref()))
        .map_err(err)?;
    to_py(py, &report)
}

/// (T f)(ρ) at every node of a field sampled on [0, t + R].
#[pyfunction]
#[pyo3(signature = (values, n, t, support_radius=1.0))]
fn transform_t(values: Vec<f64>, n: usize, t: f64, support_radius: f64) -> PyResult<Vec<f64>> {
    let f = LineField::new(n, t, support_radius, values).map_err(err)?;
    Ok(sharp_transform::transform_t_nodes(&f))
}

#[pyfunction]
#[pyo3(signature = (values, n, t, support_radius=1.0))]
fn maximal_function(values: Vec<f64>, n: usize, t: f64, support_radius: f64) -> PyResult<Vec<f64>> {
    let f = LineField::new(n, t, support_radius, values).map_err(err)?;
    Ok(sharp_transform::maximal_function_nodes(&f))
}

/// Blow-up threshold of the normalized comparison ODE.
#[pyfunction]
#[pyo3(signature = (p, a, q, k1, horizon=ode_blowup::DEFAULT_HORIZON))]
fn threshold_c0<'py>(py: Python<'py>, p: f64, a: f64, q: f64, k1: f64, horizon: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &ode_blowup::threshold_c0(p, a, q, k1, horizon).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (p, a, q, k0, k1, support_radius=1.0, t0=0.0, horizon=ode_blowup::DEFAULT_HORIZON))]
#[allow(clippy::too_many_arguments)]
fn integrate_comparison<'py>(
    py: Python<'py>,
    p: f64,
    a: f64,
    q: f64,
    k0: f64,
    k1: f64,
    support_radius: f64,
    t0: f64,
    horizon: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let prob = OdeProblem { p, a, q, k0, k1, support_radius, t0, horizon };
    to_py(py, &ode_blowup::integrate_comparison(&prob).map_err(err)?)
}

#[pymodule]
#[pyo3(name = "critwave")]
fn critwave_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyExponentSet>()?;
    m.add_class::<PySimulationConfig>()?;
    m.add_class::<PyRadialState>()?;
    m.add_function(wrap_pyfunction!(critical_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(exponent_set, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(verify_chain, m)?)?;
    m.add_function(wrap_pyfunction!(transform_t, m)?)?;
    m.add_function(wrap_pyfunction!(maximal_function, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_c0, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_comparison, m)?)?;
    Ok(())
}
