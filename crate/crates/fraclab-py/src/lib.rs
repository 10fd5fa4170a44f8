//! Python bindings for the fractional diffusion laboratory: model
//! parameters, kernel tables, the splitting solver, and the main analysis
//! verdicts, exposed as plain Python classes and functions.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use fraclab::analysis::{
    admissibility_integral, classify_dichotomy, decay_condition_check, harnack_diagnostic,
    regime_label, rescale, trace_report, AnalysisThresholds,
};
use fraclab::barrier::find_lambda0;
use fraclab::datum::InitialDatum;
use fraclab::evolve::{saturate_dirac, solve, SolverConfig};
use fraclab::grid::GridSpec;
use fraclab::kernel::{build_profile, heat_kernel, verify_cks, KernelTable};
use fraclab::model::{critical_exponents, flat_solution_u, ModelParams};

fn to_py_err(e: fraclab::FracError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Model parameters (dimension, fractional order, time weight, absorption
/// exponent) of the equation du/dt + (-Lap)^s u + t^beta u^p = 0.
#[pyclass(name = "ModelParams", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyModelParams {
    inner: ModelParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (dim=1, s=0.5, beta=0.0, p=1.8))]
    fn new(dim: usize, s: f64, beta: f64, p: f64) -> PyResult<Self> {
        Ok(Self { inner: ModelParams::new(dim, s, beta, p).map_err(to_py_err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn s(&self) -> f64 {
        self.inner.s
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.p
    }

    /// Self-similar decay exponent gamma = (1 + beta) / (p - 1).
    fn gamma(&self) -> f64 {
        self.inner.gamma_exp()
    }

    /// Amplitude of the flat maximal solution U(t) = kappa t^{-gamma}.
    fn kappa(&self) -> f64 {
        self.inner.kappa()
    }

    /// The flat maximal solution U(t).
    fn flat_solution(&self, t: f64) -> f64 {
        flat_solution_u(&self.inner, t)
    }

    /// The two critical exponents (p*, p**).
    fn critical_exponents(&self) -> (f64, f64) {
        let c = critical_exponents(&self.inner);
        (c.p_star, c.p_double_star)
    }

    /// Human-readable regime classification of (p, p*, p**).
    fn regime(&self) -> String {
        regime_label(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "ModelParams(dim={}, s={}, beta={}, p={})",
            self.inner.dim, self.inner.s, self.inner.beta, self.inner.p
        )
    }
}

/// Uniform periodic grid on the centered box [-half_length, half_length)^dim.
#[pyclass(name = "Grid", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGrid {
    inner: GridSpec,
}

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (dim=1, half_length=256.0, n_per_dim=4096))]
    fn new(dim: usize, half_length: f64, n_per_dim: usize) -> PyResult<Self> {
        Ok(Self { inner: GridSpec::new(dim, half_length, n_per_dim).map_err(to_py_err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn half_length(&self) -> f64 {
        self.inner.half_length
    }

    #[getter]
    fn n_per_dim(&self) -> usize {
        self.inner.n_per_dim
    }

    fn spacing(&self) -> f64 {
        self.inner.spacing()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Grid points as a list of [x] / [x, y] coordinates.
    fn points(&self) -> Vec<Vec<f64>> {
        (0..self.inner.len())
            .map(|i| self.inner.point(i)[..self.inner.dim].to_vec())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid(dim={}, half_length={}, n_per_dim={})",
            self.inner.dim, self.inner.half_length, self.inner.n_per_dim
        )
    }
}

/// Tabulated radial profile of the fractional heat kernel at t = 1.
#[pyclass(name = "Kernel", frozen)]
struct PyKernel {
    inner: KernelTable,
}

#[pymethods]
impl PyKernel {
    #[new]
    #[pyo3(signature = (s=0.5, dim=1, max_radius=400.0, n_samples=4096))]
    fn new(s: f64, dim: usize, max_radius: f64, n_samples: usize) -> PyResult<Self> {
        Ok(Self { inner: build_profile(s, dim, max_radius, n_samples).map_err(to_py_err)? })
    }

    #[getter]
    fn s(&self) -> f64 {
        self.inner.s
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn mass(&self) -> f64 {
        self.inner.mass
    }

    /// Radial profile value at radius r (power-law tail beyond the table).
    fn profile(&self, r: f64) -> f64 {
        self.inner.profile(r)
    }

    /// Kernel value H(t, x).
    fn evaluate(&self, t: f64, x: Vec<f64>) -> f64 {
        heat_kernel(&self.inner, t, &x)
    }

    /// Empirical constants (c_low, c_high) of the two-sided kernel bound
    /// c_low <= H(1, x) (1 + |x|^{N+2s}) <= c_high.
    fn verify_bounds(&self) -> (f64, f64) {
        verify_cks(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Kernel(s={}, dim={}, max_radius={}, n_samples={})",
            self.inner.s,
            self.inner.dim,
            self.inner.max_radius,
            self.inner.radii.len()
        )
    }
}

/// Initial datum: a measure or density prescribed at t = 0.
#[pyclass(name = "Datum", frozen)]
struct PyDatum {
    inner: InitialDatum,
}

#[pymethods]
impl PyDatum {
    /// Point mass of the given weight at the origin.
    #[staticmethod]
    fn dirac(weight: f64) -> Self {
        Self { inner: InitialDatum::dirac(weight) }
    }

    /// Constant density at the given level.
    #[staticmethod]
    fn constant(level: f64) -> Self {
        Self { inner: InitialDatum::constant(level) }
    }

    /// Indicator of a ball, scaled to the given level.
    #[staticmethod]
    fn indicator(center: Vec<f64>, radius: f64, level: f64) -> Self {
        Self { inner: InitialDatum::indicator(center, radius, level) }
    }

    /// Density given by a Python callable mapping a coordinate list to a
    /// nonnegative value.
    #[staticmethod]
    fn density(label: &str, f: Py<PyAny>) -> Self {
        let inner = InitialDatum::density(label, move |x: &[f64]| {
            Python::attach(|py| {
                f.call1(py, (x.to_vec(),))
                    .and_then(|v| v.extract::<f64>(py))
                    .expect("datum callable must map a coordinate list to a float")
            })
        });
        Self { inner }
    }

    fn __repr__(&self) -> String {
        format!("Datum({})", self.inner.description)
    }
}

/// Solver configuration: time window, step count, snapshot count, and
/// whether the absorption substep is enabled.
#[pyclass(name = "Solver", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySolver {
    inner: SolverConfig,
}

#[pymethods]
impl PySolver {
    #[new]
    #[pyo3(signature = (grid, t_start=1e-3, t_end=1.0, n_steps=256, n_snapshots=33, absorption=true))]
    fn new(
        grid: &PyGrid,
        t_start: f64,
        t_end: f64,
        n_steps: usize,
        n_snapshots: usize,
        absorption: bool,
    ) -> Self {
        let mut inner = SolverConfig::new(grid.inner, t_start, t_end, n_steps);
        inner.n_snapshots = n_snapshots;
        inner.absorption_enabled = absorption;
        Self { inner }
    }

    fn __repr__(&self) -> String {
        format!(
            "Solver(t_start={}, t_end={}, n_steps={}, n_snapshots={}, absorption={})",
            self.inner.t_start,
            self.inner.t_end,
            self.inner.n_steps,
            self.inner.n_snapshots,
            self.inner.absorption_enabled
        )
    }
}

/// A solved trajectory: log-spaced snapshots of the field.
#[pyclass(name = "Trajectory", frozen)]
struct PyTrajectory {
    inner: fraclab::evolve::Trajectory,
}

#[pymethods]
impl PyTrajectory {
    fn __len__(&self) -> usize {
        self.inner.snapshots.len()
    }

    /// Snapshot times.
    fn times(&self) -> Vec<f64> {
        self.inner.snapshots.iter().map(|f| f.time).collect()
    }

    /// Snapshot i as (time, values); coordinates come from the grid.
    fn snapshot(&self, i: usize) -> PyResult<(f64, Vec<f64>)> {
        let snap = self
            .inner
            .snapshots
            .get(i)
            .ok_or_else(|| PyValueError::new_err(format!("snapshot index {i} out of range")))?;
        Ok((snap.time, snap.values.clone()))
    }

    /// Total mass at each snapshot time.
    fn mass_curve(&self) -> Vec<(f64, f64)> {
        self.inner.snapshots.iter().map(|f| (f.time, f.mass())).collect()
    }

    /// Value at the spatial origin at each snapshot time (dimension 1).
    fn center_curve(&self) -> Vec<(f64, f64)> {
        self.inner
            .snapshots
            .iter()
            .map(|f| (f.time, f.value_at(0.0)))
            .collect()
    }

    /// Rescaled profile v(eta) = t^gamma u(t, eta t^{1/2s}) at the snapshot
    /// nearest to t, as (eta, values).
    fn rescaled_profile(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let prof = rescale(&self.inner, t);
        (prof.eta, prof.values)
    }
}

/// Run the splitting solver: realize the datum at t_start as its linear
/// evolution (clipped at the universal ceiling) and advance to t_end.
#[pyfunction(name = "solve")]
fn py_solve(
    datum: &PyDatum,
    params: &PyModelParams,
    solver: &PySolver,
    kernel: &PyKernel,
) -> PyResult<PyTrajectory> {
    let traj =
        solve(&datum.inner, &params.inner, &solver.inner, &kernel.inner).map_err(to_py_err)?;
    Ok(PyTrajectory { inner: traj })
}

/// Saturate the Dirac family: the largest power-of-two weight whose realized
/// center stays below the universal ceiling, with its trajectory.
#[pyfunction(name = "saturate_dirac")]
#[pyo3(signature = (params, solver, kernel, k_initial=1.0))]
fn py_saturate_dirac(
    params: &PyModelParams,
    solver: &PySolver,
    kernel: &PyKernel,
    k_initial: f64,
) -> PyResult<(f64, PyTrajectory)> {
    let (k, traj) = saturate_dirac(&params.inner, &solver.inner, &kernel.inner, k_initial)
        .map_err(to_py_err)?;
    Ok((k, PyTrajectory { inner: traj }))
}

/// Large-weight dichotomy verdict for a saturated Dirac trajectory:
/// "absorption", "diffusion", or "undetermined".
#[pyfunction(name = "classify_dichotomy")]
fn py_classify_dichotomy(traj: &PyTrajectory, params: &PyModelParams) -> String {
    use fraclab::analysis::DichotomyVerdict::*;
    match classify_dichotomy(&traj.inner, &params.inner, &AnalysisThresholds::default()) {
        AbsorptionDominant => "absorption".into(),
        DiffusionDominant => "diffusion".into(),
        Undetermined => "undetermined".into(),
    }
}

/// Whether the weighted rescaled profile at time t peaks in the interior and
/// decays out to the resolved edge.
#[pyfunction(name = "decay_check")]
fn py_decay_check(traj: &PyTrajectory, params: &PyModelParams, t: f64) -> bool {
    decay_condition_check(&rescale(&traj.inner, t), &params.inner)
}

/// Initial-trace classification of balls: a list of
/// (center, radius, classification, trace_mass) tuples, where trace_mass is
/// None for singular or undetermined balls.
#[pyfunction(name = "trace_report")]
fn py_trace_report(
    traj: &PyTrajectory,
    balls: Vec<(f64, f64)>,
) -> Vec<(f64, f64, String, Option<f64>)> {
    use fraclab::analysis::BallClass::*;
    trace_report(&traj.inner, &balls)
        .balls
        .into_iter()
        .map(|b| {
            let label = match b.classification {
                Singular => "singular",
                Regular => "regular",
                Undetermined => "undetermined",
            };
            (b.center, b.radius, label.to_string(), b.trace_mass)
        })
        .collect()
}

/// Measure-admissibility of a datum: the verdict ("converges", "diverges",
/// or "inconclusive") and the sampled integral values (eps, I(eps)).
#[pyfunction(name = "admissibility")]
fn py_admissibility(
    datum: &PyDatum,
    params: &PyModelParams,
    kernel: &PyKernel,
    eps_list: Vec<f64>,
) -> (String, Vec<(f64, f64)>) {
    use fraclab::analysis::AdmissibilityVerdict::*;
    let (verdict, curve) =
        admissibility_integral(&datum.inner, &params.inner, &kernel.inner, &eps_list);
    let label = match verdict {
        Converges => "converges",
        Diverges => "diverges",
        Inconclusive => "inconclusive",
    };
    (label.to_string(), curve)
}

/// Forward-in-time Harnack diagnostic sup_t u(t/4, 0) / u(t, theta t^{1/2s}).
#[pyfunction(name = "harnack")]
#[pyo3(signature = (traj, theta=1.0))]
fn py_harnack(traj: &PyTrajectory, theta: f64) -> f64 {
    harnack_diagnostic(&traj.inner, theta)
}

/// Smallest barrier amplitude lambda0 with a sign-definite self-similar
/// residual on the scanned window.
#[pyfunction(name = "barrier_lambda0")]
#[pyo3(signature = (params, z_min=-50.0, z_max=50.0, tol=1e-6))]
fn py_barrier_lambda0(params: &PyModelParams, z_min: f64, z_max: f64, tol: f64) -> PyResult<f64> {
    find_lambda0(&params.inner, (z_min, z_max), tol).map_err(to_py_err)
}

#[pymodule]
fn fraclab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyKernel>()?;
    m.add_class::<PyDatum>()?;
    m.add_class::<PySolver>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(py_solve, m)?)?;
    m.add_function(wrap_pyfunction!(py_saturate_dirac, m)?)?;
    m.add_function(wrap_pyfunction!(py_classify_dichotomy, m)?)?;
    m.add_function(wrap_pyfunction!(py_decay_check, m)?)?;
    m.add_function(wrap_pyfunction!(py_trace_report, m)?)?;
    m.add_function(wrap_pyfunction!(py_admissibility, m)?)?;
    m.add_function(wrap_pyfunction!(py_harnack, m)?)?;
    m.add_function(wrap_pyfunction!(py_barrier_lambda0, m)?)?;
    Ok(())
}
