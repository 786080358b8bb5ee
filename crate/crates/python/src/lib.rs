//! Python bindings: fields, runs and diagnostics as plain Python values.
//! Arrays cross the boundary as nested lists; no numpy dependency.

use std::collections::BTreeMap;

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyIOError, PyValueError};
use pyo3::prelude::*;

use emhd_core::diagnostics::{self as diag, TestFunction};
use emhd_core::field::init;
use emhd_core::field::mollifier::{mollify, MollifierSpec};
use emhd_core::field::ops;
use emhd_core::littlewood_paley as lp;
use emhd_core::solver::{self, InitCondition, Integrator};
use emhd_core::{BesovSpec, Error, Grid, Shape, Snapshot, SpectralField};

create_exception!(emhd, EmhdError, PyException);
create_exception!(emhd, InstabilityError, EmhdError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Unstable(_) => InstabilityError::new_err(e.to_string()),
        Error::Io { .. } | Error::BadSnapshotHeader(_) | Error::TruncatedSnapshot { .. } => {
            PyIOError::new_err(e.to_string())
        }
        Error::Parameter { .. } | Error::Config { .. } | Error::Classification { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => EmhdError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for emhd_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn grid(n: usize) -> PyResult<Grid> {
    Grid::new(n).py()
}

fn same_grid(a: &SpectralField, b: &SpectralField) -> PyResult<()> {
    if a.grid() == b.grid() && a.ncomp() == b.ncomp() {
        Ok(())
    } else {
        Err(PyValueError::new_err(format!(
            "field mismatch: n={} ncomp={} vs n={} ncomp={}",
            a.grid().n(),
            a.ncomp(),
            b.grid().n(),
            b.ncomp()
        )))
    }
}

/// Real scalar or vector field on the periodic `n³` grid, held by its
/// Fourier coefficients. Immutable; operations return new fields.
#[pyclass(name = "Field", module = "emhd", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyField {
    inner: SpectralField,
}

impl From<SpectralField> for PyField {
    fn from(inner: SpectralField) -> Self {
        PyField { inner }
    }
}

#[pymethods]
impl PyField {
    #[staticmethod]
    fn zeros(n: usize, vector: bool) -> PyResult<Self> {
        let shape = if vector { Shape::Vector } else { Shape::Scalar };
        Ok(SpectralField::zeros(grid(n)?, shape).into())
    }

    /// `(sin z + cos y, sin x + cos z, sin y + cos x)`
    #[staticmethod]
    fn abc(n: usize) -> PyResult<Self> {
        Ok(init::abc_field(grid(n)?).into())
    }

    /// Divergence-free `a cos(k·x)` with a fixed unit polarization `a ⊥ k`.
    #[staticmethod]
    fn single_mode(n: usize, k: [i64; 3]) -> PyResult<Self> {
        Ok(init::single_mode(grid(n)?, k).py()?.into())
    }

    /// Unit-energy divergence-free Gaussian field in shells `q_lo..=q_hi`.
    #[staticmethod]
    fn random_shells(n: usize, q_lo: i32, q_hi: i32, seed: u64) -> PyResult<Self> {
        Ok(init::random_shells(grid(n)?, q_lo, q_hi, seed).py()?.into())
    }

    /// From one flat list of `n³` samples per component, in `(x, y, z)`
    /// row-major order with `z` fastest.
    #[staticmethod]
    fn from_physical(n: usize, values: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(SpectralField::from_physical(grid(n)?, &values).py()?.into())
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Snapshot::read(path).py()?.field.into())
    }

    #[pyo3(signature = (path, mu = 0.0, d_i = 1.0))]
    fn save(&self, path: &str, mu: f64, d_i: f64) -> PyResult<()> {
        Snapshot::new(self.inner.clone(), mu, d_i).write(path).py()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.grid().n()
    }

    #[getter]
    fn ncomp(&self) -> usize {
        self.inner.ncomp()
    }

    #[getter]
    fn time(&self) -> f64 {
        self.inner.time()
    }

    fn to_physical(&self) -> Vec<Vec<f64>> {
        self.inner.to_physical()
    }

    fn coeff(&self, c: usize, k: [i64; 3]) -> PyResult<Complex64> {
        if c >= self.inner.ncomp() {
            return Err(PyValueError::new_err(format!("component {c} out of range")));
        }
        if self.inner.grid().index_of(k).is_none() {
            return Err(PyValueError::new_err(format!("wavenumber {k:?} not on the grid")));
        }
        Ok(self.inner.coeff(c, k))
    }

    fn evaluate_at(&self, x: [f64; 3]) -> Vec<f64> {
        self.inner.evaluate_at(x)
    }

    /// `½‖B‖₂²`
    fn energy(&self) -> f64 {
        self.inner.energy()
    }

    /// `∫A·B` with `A` the Coulomb-gauge potential.
    fn helicity(&self) -> PyResult<f64> {
        Ok(ops::biot_savart(&self.inner).py()?.inner(&self.inner))
    }

    fn inner(&self, other: &PyField) -> PyResult<f64> {
        same_grid(&self.inner, &other.inner)?;
        Ok(self.inner.inner(&other.inner))
    }

    fn lp_norm(&self, p: f64) -> PyResult<f64> {
        emhd_core::lp_norm(&self.inner, p).py()
    }

    fn max_abs_coeff(&self) -> f64 {
        self.inner.max_abs_coeff()
    }

    fn divergence_defect(&self) -> f64 {
        self.inner.divergence_defect()
    }

    fn curl(&self) -> PyResult<Self> {
        Ok(ops::curl(&self.inner).py()?.into())
    }

    fn divergence(&self) -> PyResult<Self> {
        Ok(ops::divergence(&self.inner).py()?.into())
    }

    fn laplacian(&self) -> Self {
        ops::laplacian(&self.inner).into()
    }

    /// Coulomb-gauge `A` with `∇×A = B`.
    fn biot_savart(&self) -> PyResult<Self> {
        Ok(ops::biot_savart(&self.inner).py()?.into())
    }

    fn leray_project(&self) -> PyResult<Self> {
        Ok(ops::leray_project(&self.inner).py()?.into())
    }

    /// `∇×((∇×B)×B)`
    fn hall_term(&self) -> PyResult<Self> {
        Ok(ops::hall_nonlinearity(&self.inner).py()?.1.into())
    }

    /// Relative gap between the two forms of the Hall term.
    fn identity_residual(&self) -> PyResult<f64> {
        ops::identity_residual(&self.inner).py()
    }

    #[pyo3(signature = (delta, epsilon = 1.0))]
    fn mollify(&self, delta: f64, epsilon: f64) -> PyResult<Self> {
        let spec = MollifierSpec::new(delta, epsilon).py()?;
        Ok(mollify(&self.inner, &spec).py()?.into())
    }

    /// `Δ_q F`
    fn shell(&self, q: i32) -> PyResult<Self> {
        Ok(lp::project_shell(&self.inner, q).py()?.into())
    }

    /// `S_Q F`
    fn low_pass(&self, big_q: i32) -> Self {
        lp::low_pass(&self.inner, big_q).into()
    }

    /// `‖F‖_{B^s_{p,q}}`; `p` and `q` may be `inf`.
    fn besov_norm(&self, s: f64, p: f64, q: f64) -> PyResult<f64> {
        lp::besov_norm(&self.inner, &BesovSpec::new(s, p, q).py()?).py()
    }

    /// Columns of the shell spectrum, keyed by CSV header.
    fn shell_amplitudes(&self) -> PyResult<BTreeMap<&'static str, Vec<f64>>> {
        let a = lp::shell_amplitudes(&self.inner).py()?;
        let q = (0..a.b.len()).map(|i| lp::ShellAmplitudes::q_of(i) as f64).collect::<Vec<_>>();
        let lambda = q.iter().map(|&q| lp::lambda(q as i32)).collect();
        Ok(BTreeMap::from([
            ("q", q),
            ("lambda_q", lambda),
            ("shell_l2", a.shell_l2),
            ("shell_l3", a.shell_l3),
            ("b_q", a.b),
            ("beta_q", a.beta),
        ]))
    }

    fn shell_amplitudes_csv(&self) -> PyResult<String> {
        Ok(lp::shell_amplitudes(&self.inner).py()?.to_table().render())
    }

    fn __add__(&self, other: &PyField) -> PyResult<Self> {
        same_grid(&self.inner, &other.inner)?;
        Ok((&self.inner + &other.inner).into())
    }

    fn __sub__(&self, other: &PyField) -> PyResult<Self> {
        same_grid(&self.inner, &other.inner)?;
        Ok((&self.inner - &other.inner).into())
    }

    fn __mul__(&self, a: f64) -> Self {
        (&self.inner * a).into()
    }

    fn __rmul__(&self, a: f64) -> Self {
        (&self.inner * a).into()
    }

    fn __repr__(&self) -> String {
        format!(
            "Field(n={}, ncomp={}, t={}, energy={:.6e})",
            self.inner.grid().n(),
            self.inner.ncomp(),
            self.inner.time(),
            self.inner.energy()
        )
    }
}

/// Run parameters. Construct with keywords or parse `key = value` text.
#[pyclass(name = "SolverConfig", module = "emhd", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyConfig {
    inner: solver::SolverConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (
        n, mu, d_i, dt, t_end, *, integrator = "if_rk4", init = "abc", seed = 0,
        q_lo = 1, q_hi = 3, snapshot_every = 1, cfl_safety = 0.5
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        n: usize,
        mu: f64,
        d_i: f64,
        dt: f64,
        t_end: f64,
        integrator: &str,
        init: &str,
        seed: u64,
        q_lo: i32,
        q_hi: i32,
        snapshot_every: usize,
        cfl_safety: f64,
    ) -> PyResult<Self> {
        // `with_shells` also selects the random init, so `init` goes last.
        let mut cfg = solver::SolverConfig::new(n, mu, d_i, dt, t_end)
            .with_shells(q_lo, q_hi, seed)
            .with_init(InitCondition::parse(init).py()?)
            .with_snapshot_every(snapshot_every);
        cfg.integrator = match integrator {
            "if_rk4" => Integrator::IfRk4,
            "imex_cn" => Integrator::ImexCn,
            other => {
                return Err(PyValueError::new_err(format!(
                    "integrator must be if_rk4 or imex_cn, got `{other}`"
                )))
            }
        };
        cfg.cfl_safety = cfl_safety;
        cfg.validate().py()?;
        Ok(PyConfig { inner: cfg })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyConfig {
            inner: solver::SolverConfig::parse(text).py()?,
        })
    }

    /// Canonical text with defaults applied; what manifests hash.
    fn resolved_text(&self) -> String {
        self.inner.resolved_text()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu
    }

    #[getter]
    fn d_i(&self) -> f64 {
        self.inner.d_i
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt
    }

    #[getter]
    fn t_end(&self) -> f64 {
        self.inner.t_end
    }

    fn initial_field(&self) -> PyResult<PyField> {
        Ok(solver::initial_field(&self.inner).py()?.into())
    }

    fn __repr__(&self) -> String {
        format!("SolverConfig({})", self.inner.resolved_text().trim_end().replace('\n', ", "))
    }
}

/// Snapshots and step log of one run.
#[pyclass(name = "Trajectory", module = "emhd", frozen, skip_from_py_object)]
pub struct PyTrajectory {
    inner: solver::Trajectory,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times()
    }

    #[getter]
    fn snapshots(&self) -> Vec<PyField> {
        self.inner.snapshots.iter().cloned().map(PyField::from).collect()
    }

    /// Vector potentials, when the potential form ran.
    #[getter]
    fn potentials(&self) -> Option<Vec<PyField>> {
        self.inner
            .potentials
            .as_ref()
            .map(|p| p.iter().cloned().map(PyField::from).collect())
    }

    fn last(&self) -> PyField {
        self.inner.last().clone().into()
    }

    /// Per-step log columns `t, E, H, l2, linf, grad_l2`.
    fn log(&self) -> BTreeMap<&'static str, Vec<f64>> {
        let col = |f: fn(&solver::StepRecord) -> f64| self.inner.log.iter().map(f).collect::<Vec<_>>();
        BTreeMap::from([
            ("t", col(|r| r.t)),
            ("E", col(|r| r.energy)),
            ("H", col(|r| r.helicity)),
            ("l2", col(|r| r.l2)),
            ("linf", col(|r| r.linf)),
            ("grad_l2", col(|r| r.grad_l2)),
        ])
    }

    fn log_csv(&self) -> String {
        self.inner.log_table().render()
    }

    /// Energy and helicity budget, `budget.csv` schema.
    fn budget_csv(&self) -> String {
        diag::budget_table(&diag::budget(&self.inner)).render()
    }

    /// Signed energy-inequality residual of largest magnitude.
    fn energy_inequality_residual(&self) -> f64 {
        diag::energy_inequality_residual(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.snapshots.len()
    }
}

/// Integrates from `b0`, or from the configured initial condition.
/// Releases the GIL while stepping.
#[pyfunction]
#[pyo3(signature = (config, b0 = None, potential = false))]
fn evolve(py: Python<'_>, config: &PyConfig, b0: Option<&PyField>, potential: bool) -> PyResult<PyTrajectory> {
    let cfg = config.inner.clone();
    let b0 = b0.map(|b| b.inner.clone());
    let traj = py.detach(move || {
        let b0 = match b0 {
            Some(b) => b,
            None => solver::initial_field(&cfg)?,
        };
        if potential {
            solver::evolve_potential_from(&cfg, b0)
        } else {
            solver::evolve_from(&cfg, b0)
        }
    });
    Ok(PyTrajectory { inner: traj.py()? })
}

/// `1/(d_i ‖B‖_∞ k_c²)`
#[pyfunction]
fn whistler_dt_limit(b: &PyField, d_i: f64) -> f64 {
    solver::whistler_dt_limit(&b.inner, d_i)
}

/// `flux.csv` text for cutoffs `Q = -1..=q_max`.
#[pyfunction]
#[pyo3(signature = (b, q_max = None))]
fn flux_spectrum(b: &PyField, q_max: Option<i32>) -> PyResult<String> {
    let q_max = q_max.unwrap_or_else(|| lp::LpFamily::new(b.inner.grid()).q_max());
    Ok(diag::flux_spectrum(&b.inner, q_max).py()?.to_table().render())
}

/// Terms and residuals of the localized helicity balance along a run.
/// `testfn` is `standard` or `constant`.
#[pyfunction]
#[pyo3(signature = (traj, testfn = "standard"))]
fn helicity_identity(traj: &PyTrajectory, testfn: &str) -> PyResult<BTreeMap<&'static str, Vec<f64>>> {
    let g = traj.inner.config.grid().py()?;
    let phi = match testfn {
        "constant" => TestFunction::constant(g),
        "standard" => TestFunction::standard(g, traj.inner.config.t_end).py()?,
        other => {
            return Err(PyValueError::new_err(format!(
                "testfn must be standard or constant, got `{other}`"
            )))
        }
    };
    let id = diag::generalized_helicity_identity(&traj.inner, &phi).py()?;
    Ok(BTreeMap::from([
        ("t", id.times),
        ("local_helicity", id.local_helicity),
        ("transport", id.transport),
        ("dissipation", id.dissipation),
        ("hall", id.hall),
        ("residual", id.residuals),
    ]))
}

/// `(t, residual)` pairs of the cross-energy balance between two runs.
#[pyfunction]
fn cross_energy_residual(traj1: &PyTrajectory, traj2: &PyTrajectory) -> PyResult<Vec<(f64, f64)>> {
    diag::cross_energy_residual(&traj1.inner, &traj2.inner).py()
}

/// Gronwall-bound check; returns `(csv_text, fitted_c, bound_ok)`.
#[pyfunction]
#[pyo3(signature = (traj1, traj2, p = 3.0, q = 2.0, r = 1.0, c_cap = 1e3))]
fn uniqueness_bound_check(
    traj1: &PyTrajectory,
    traj2: &PyTrajectory,
    p: f64,
    q: f64,
    r: f64,
    c_cap: f64,
) -> PyResult<(String, f64, bool)> {
    let rep = diag::uniqueness_bound_check(&traj1.inner, &traj2.inner, p, q, r, c_cap).py()?;
    Ok((rep.to_table().render(), rep.fitted_c, rep.bound_ok))
}

/// Class name of an exponent triple, e.g. `uniqueness_region`.
#[pyfunction]
fn region_classify(p: f64, q: f64, r: f64) -> PyResult<&'static str> {
    Ok(diag::region_classify(p, q, r).py()?.classification.name())
}

/// `‖B_λ − (B)_λ‖/‖B_λ‖` after evolving both sides of the scaling map.
#[pyfunction]
fn scaling_residual(b0: &PyField, config: &PyConfig, lambda: usize) -> PyResult<f64> {
    diag::scaling_residual(&b0.inner, &config.inner, lambda).py()
}

#[pymodule]
fn emhd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyField>()?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(whistler_dt_limit, m)?)?;
    m.add_function(wrap_pyfunction!(flux_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(helicity_identity, m)?)?;
    m.add_function(wrap_pyfunction!(cross_energy_residual, m)?)?;
    m.add_function(wrap_pyfunction!(uniqueness_bound_check, m)?)?;
    m.add_function(wrap_pyfunction!(region_classify, m)?)?;
    m.add_function(wrap_pyfunction!(scaling_residual, m)?)?;
    m.add("EmhdError", m.py().get_type::<EmhdError>())?;
    m.add("InstabilityError", m.py().get_type::<InstabilityError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
