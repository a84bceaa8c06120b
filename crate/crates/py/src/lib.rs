//! Python bindings: kernels, vortex systems, integration, invariants,
//! cluster diagnostics, the collapse search and Monte Carlo scans.

use pyo3::exceptions::{PyLookupError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vortexlab_core::collapse_lab::{self, ScanConfig};
use vortexlab_core::conserved;
use vortexlab_core::dynamics::{self, IntegratorConfig, Termination, TrajectoryRecord};
use vortexlab_core::kernels::{self as core_kernels, KernelProfile, KernelSpec, RadialKernel};
use vortexlab_core::{Vec2, VortexError};

fn err(e: VortexError) -> PyErr {
    match e {
        VortexError::NotFound(_) => PyLookupError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

type Point = (f64, f64);

fn point(v: Vec2) -> Point {
    (v.x, v.y)
}

fn vec2(p: Point) -> Vec2 {
    Vec2::new(p.0, p.1)
}

/// An interaction kernel, exact or regularized below a cutoff.
#[pyclass(name = "Kernel", module = "vortexlab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyKernel {
    inner: core_kernels::Kernel,
    spec: KernelSpec,
}

#[pymethods]
impl PyKernel {
    /// The logarithmic Euler kernel.
    #[staticmethod]
    fn euler() -> Self {
        PyKernel {
            inner: core_kernels::Kernel::Exact(KernelProfile::euler()),
            spec: KernelSpec::euler(),
        }
    }

    /// The SQG kernel of order `s` in (0, 1); `s = 1` gives the Euler kernel.
    #[staticmethod]
    fn sqg(s: f64) -> PyResult<Self> {
        let spec = KernelSpec::order(s);
        Ok(PyKernel {
            inner: spec.build().map_err(err)?,
            spec,
        })
    }

    /// The regularization below `epsilon` in (0, 1/2].
    fn regularize(&self, epsilon: f64) -> PyResult<Self> {
        if self.spec.epsilon.is_some() {
            return Err(PyValueError::new_err("kernel is already regularized"));
        }
        let spec = self.spec.with_epsilon(epsilon);
        Ok(PyKernel {
            inner: spec.build().map_err(err)?,
            spec,
        })
    }

    #[getter]
    fn kind(&self) -> String {
        format!("{:?}", self.spec.kind).to_lowercase()
    }

    #[getter]
    fn s(&self) -> f64 {
        self.spec.s.unwrap_or(1.0)
    }

    #[getter]
    fn epsilon(&self) -> Option<f64> {
        self.spec.epsilon
    }

    fn value(&self, r: f64) -> PyResult<f64> {
        if r < 0.0 || (r == 0.0 && self.inner.singular_at_zero()) || !r.is_finite() {
            return Err(PyValueError::new_err(format!("kernel evaluated at r = {r}")));
        }
        Ok(self.inner.value(r))
    }

    fn radial_derivative(&self, r: f64) -> PyResult<f64> {
        if r < 0.0 || (r == 0.0 && self.inner.singular_at_zero()) || !r.is_finite() {
            return Err(PyValueError::new_err(format!("kernel evaluated at r = {r}")));
        }
        Ok(self.inner.radial_derivative(r))
    }

    /// `∇⊥G(|x|)` as an `(x, y)` tuple.
    fn perp_gradient(&self, x: Point) -> PyResult<Point> {
        self.inner.perp_gradient(vec2(x)).map(point).map_err(err)
    }

    fn __repr__(&self) -> String {
        match (self.spec.s, self.spec.epsilon) {
            (None, None) => "Kernel.euler()".into(),
            (Some(s), None) => format!("Kernel.sqg({s})"),
            (None, Some(e)) => format!("Kernel.euler().regularize({e})"),
            (Some(s), Some(e)) => format!("Kernel.sqg({s}).regularize({e})"),
        }
    }
}

/// Intensities and positions of `N` point vortices.
#[pyclass(name = "VortexSystem", module = "vortexlab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySystem {
    inner: dynamics::VortexSystem,
}

#[pymethods]
impl PySystem {
    #[new]
    fn new(intensities: Vec<f64>, positions: Vec<Point>) -> PyResult<Self> {
        let positions = positions.into_iter().map(vec2).collect();
        Ok(PySystem {
            inner: dynamics::VortexSystem::new(intensities, positions).map_err(err)?,
        })
    }

    #[getter]
    fn intensities(&self) -> Vec<f64> {
        self.inner.intensities().to_vec()
    }

    #[getter]
    fn positions(&self) -> Vec<Point> {
        self.inner.positions().iter().copied().map(point).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn velocity(&self, kernel: &PyKernel) -> PyResult<Vec<Point>> {
        let v = dynamics::velocity(&self.inner, &kernel.inner).map_err(err)?;
        Ok(v.into_iter().map(point).collect())
    }

    /// Velocities of the differences `y_ij = x_i − x_j` anchored at `anchor`.
    fn relative_velocity(&self, kernel: &PyKernel, anchor: usize) -> PyResult<Vec<Point>> {
        let rel = self.inner.relative(anchor).map_err(err)?;
        let v = dynamics::relative_velocity(&rel, &kernel.inner).map_err(err)?;
        Ok(v.into_iter().map(point).collect())
    }

    fn hamiltonian(&self, kernel: &PyKernel) -> PyResult<f64> {
        conserved::hamiltonian(&self.inner, &kernel.inner).map_err(err)
    }

    /// H, M, I, C, the identity residual, diameter and center of vorticity.
    fn invariants<'py>(&self, py: Python<'py>, kernel: &PyKernel) -> PyResult<Bound<'py, PyDict>> {
        if kernel.inner.singular_at_zero() {
            self.inner.check_separated().map_err(err)?;
        }
        let s = conserved::invariant_snapshot(&self.inner, &kernel.inner);
        let d = PyDict::new(py);
        d.set_item("hamiltonian", s.hamiltonian)?;
        d.set_item("vorticity_vector", point(s.vorticity_vector))?;
        d.set_item("moment_of_inertia", s.moment_of_inertia)?;
        d.set_item("collapse_constraint", s.collapse_constraint)?;
        d.set_item("identity_residual", s.identity_residual)?;
        d.set_item("diameter", s.diameter)?;
        d.set_item("center_of_vorticity", s.center_of_vorticity.map(point))?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("VortexSystem({:?}, {:?})", self.intensities(), self.positions())
    }
}

/// Termination as `(cause, time, pair)`.
fn termination(t: &Termination, final_time: f64) -> (&'static str, f64, Option<(usize, usize)>) {
    match *t {
        Termination::ReachedFinalTime => ("reached_final_time", final_time, None),
        Termination::EpsCollapse { time, pair } => ("eps_collapse", time, Some(pair)),
        Termination::StepUnderflow { time } => ("step_underflow", time, None),
    }
}

fn record_dict<'py>(py: Python<'py>, rec: &TrajectoryRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("times", rec.times.clone())?;
    let states: Vec<Vec<Point>> = rec
        .states
        .iter()
        .map(|s| s.iter().copied().map(point).collect())
        .collect();
    d.set_item("states", states)?;
    d.set_item("min_pair_distance", rec.min_pair_distance.clone())?;
    d.set_item("hamiltonian", rec.invariant_log.iter().map(|s| s.hamiltonian).collect::<Vec<_>>())?;
    d.set_item(
        "collapse_constraint",
        rec.invariant_log.iter().map(|s| s.collapse_constraint).collect::<Vec<_>>(),
    )?;
    d.set_item("termination", termination(&rec.termination, rec.final_time))?;
    d.set_item("accepted_steps", rec.stats.accepted_steps)?;
    let drift = conserved::drift_audit(rec).ok();
    d.set_item("max_drift", drift.map(|r| r.max()))?;
    Ok(d)
}

fn integrator_config(rel_tol: f64, abs_tol: f64, max_step: f64, min_step: f64, collapse_threshold: f64) -> IntegratorConfig {
    IntegratorConfig {
        rel_tol,
        abs_tol,
        max_step,
        min_step,
        collapse_threshold,
        compensated: false,
    }
}

/// Integrates a system over `[0, final_time]`. With `anchor` set, integrates
/// the relative system anchored there instead; states are then differences.
#[pyfunction]
#[pyo3(signature = (system, kernel, final_time, *, anchor=None, rel_tol=1e-10, abs_tol=1e-12, max_step=0.1, min_step=1e-12, collapse_threshold=0.0))]
#[allow(clippy::too_many_arguments)]
fn integrate<'py>(
    py: Python<'py>,
    system: &PySystem,
    kernel: &PyKernel,
    final_time: f64,
    anchor: Option<usize>,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
    min_step: f64,
    collapse_threshold: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = integrator_config(rel_tol, abs_tol, max_step, min_step, collapse_threshold);
    let rec = match anchor {
        None => dynamics::integrate(&system.inner, &kernel.inner, final_time, &cfg),
        Some(a) => system
            .inner
            .relative(a)
            .and_then(|rel| dynamics::integrate_relative(&rel, &kernel.inner, final_time, &cfg)),
    }
    .map_err(err)?;
    record_dict(py, &rec)
}

/// `a`, `A0`, `A` and the cluster classification of a list of intensities.
#[pyfunction]
fn cluster_diagnostics<'py>(py: Python<'py>, intensities: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let c = conserved::cluster_diagnostics(&intensities).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("total_abs", c.total_abs)?;
    d.set_item("min_proper_subset_sum", c.min_proper_subset_sum)?;
    d.set_item("min_subset_sum", c.min_subset_sum)?;
    d.set_item("classification", format!("{:?}", c.classification))?;
    Ok(d)
}

/// A contracting three-vortex configuration with `C = 0`; raises
/// `LookupError` when none exists within the search budget.
#[pyfunction]
fn find_collapse_candidate(intensities: Vec<f64>, seed: u64) -> PyResult<(PySystem, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = collapse_lab::find_collapse_candidate(&intensities, &mut rng).map_err(err)?;
    Ok((PySystem { inner: c.system }, c.collapse_time_estimate))
}

/// Monte Carlo ε-collapse scan; returns per-cutoff tallies and the fitted
/// log-log exponent.
#[pyfunction]
#[pyo3(signature = (s, intensities, epsilons, samples_per_epsilon, seed, *, anchor=0, rho=1.0, horizon=1.0, rel_tol=1e-6, abs_tol=1e-9))]
#[allow(clippy::too_many_arguments)]
fn scan<'py>(
    py: Python<'py>,
    s: f64,
    intensities: Vec<f64>,
    epsilons: Vec<f64>,
    samples_per_epsilon: usize,
    seed: u64,
    anchor: usize,
    rho: f64,
    horizon: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = ScanConfig {
        s,
        anchor,
        intensities,
        rho,
        horizon,
        epsilons,
        samples_per_epsilon,
        rng_seed: seed,
        integrator: integrator_config(rel_tol, abs_tol, 0.1, 1e-14, 0.0),
    };
    let result = py.detach(|| collapse_lab::scan(&cfg)).map_err(err)?;
    let d = PyDict::new(py);
    let cells = result
        .cells
        .iter()
        .map(|c| {
            let cell = PyDict::new(py);
            cell.set_item("epsilon", c.epsilon)?;
            cell.set_item("hit_count", c.hit_count)?;
            cell.set_item("initial_hits", c.initial_hits)?;
            cell.set_item("dynamical_hits", c.dynamical_hits)?;
            cell.set_item("inconclusive_count", c.inconclusive_count)?;
            cell.set_item("sample_count", c.sample_count)?;
            cell.set_item("measure_fraction", c.measure_fraction)?;
            cell.set_item("wilson_ci_95", c.wilson_ci_95)?;
            Ok(cell)
        })
        .collect::<PyResult<Vec<_>>>()?;
    d.set_item("cells", cells)?;
    d.set_item("fitted_exponent", result.fitted_exponent)?;
    d.set_item("rate_exponent", result.rate_law.exponent())?;
    d.set_item("bound_constant", result.bound_constant)?;
    Ok(d)
}

#[pymodule]
fn vortexlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyKernel>()?;
    m.add_class::<PySystem>()?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(cluster_diagnostics, m)?)?;
    m.add_function(wrap_pyfunction!(find_collapse_candidate, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    Ok(())
}
