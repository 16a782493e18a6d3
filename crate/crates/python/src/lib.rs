//! Python bindings: the Bilinear game, single runs of the pairwise-dominance
//! algorithm and the runtime calculators.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use pdcoea_core::theory::{self, BilinearBudgetInputs, LevelBoundInputs};
use pdcoea_core::{BitVector, GenerationStats, PdcoeaConfig, Target};

fn py_err(e: pdcoea_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn bits(v: Vec<bool>) -> PyResult<BitVector> {
    BitVector::from_bits(&v).map_err(py_err)
}

#[pyclass(name = "BilinearParams", frozen, from_py_object)]
#[derive(Clone)]
struct PyBilinear {
    inner: pdcoea_core::BilinearParams,
}

#[pymethods]
impl PyBilinear {
    #[new]
    #[pyo3(signature = (n, alpha, beta, epsilon))]
    fn new(n: usize, alpha: f64, beta: f64, epsilon: f64) -> PyResult<Self> {
        Ok(Self { inner: pdcoea_core::BilinearParams::new(n, alpha, beta, epsilon).map_err(py_err)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta()
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon()
    }

    /// Payoff of one-counts `(cx, cy)`.
    fn payoff(&self, cx: usize, cy: usize) -> PyResult<f64> {
        let n = self.inner.n();
        if cx > n || cy > n {
            return Err(PyValueError::new_err(format!("counts must be at most n = {n}")));
        }
        Ok(self.inner.payoff_counts(cx, cy))
    }

    /// Payoff of bit vectors given as sequences of bools.
    fn payoff_bits(&self, x: Vec<bool>, y: Vec<bool>) -> PyResult<f64> {
        pdcoea_core::payoff(&bits(x)?, &bits(y)?, &self.inner).map_err(py_err)
    }

    /// Whether `(x1, y1)` dominates `(x2, y2)`, on one-counts.
    fn dominates(&self, cx1: usize, cy1: usize, cx2: usize, cy2: usize) -> PyResult<bool> {
        pdcoea_core::dominates_by_onecounts(cx1, cy1, cx2, cy2, &self.inner).map_err(py_err)
    }

    /// A 4-cycle of one-count pairs in which each dominates the next, if any.
    fn intransitivity_witness(&self) -> Option<Vec<(usize, usize)>> {
        pdcoea_core::intransitivity_witness(&self.inner).map(|c| c.to_vec())
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!("BilinearParams(n={}, alpha={}, beta={}, epsilon={})", p.n(), p.alpha(), p.beta(), p.epsilon())
    }
}

fn stats_dict<'py>(py: Python<'py>, g: &GenerationStats) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("generation", g.generation)?;
    d.set_item("predator_mean", g.predator_mean)?;
    d.set_item("predator_min", g.predator_min)?;
    d.set_item("predator_max", g.predator_max)?;
    d.set_item("prey_mean", g.prey_mean)?;
    d.set_item("prey_min", g.prey_min)?;
    d.set_item("prey_max", g.prey_max)?;
    d.set_item("prey_in_s0", g.prey_in_s0)?;
    d.set_item("predators_in_r0", g.predators_in_r0)?;
    d.set_item("prey_in_band", g.prey_in_band)?;
    d.set_item("p0", g.p0)?;
    d.set_item("q0", g.q0)?;
    d.set_item("current_level", g.current_level)?;
    Ok(d)
}

/// One run from uniformly random populations. Returns a dict with `hit`,
/// `T_interactions`, `generations_run`, `seed`, `stream` and `trajectory`.
#[pyfunction]
#[pyo3(signature = (game, lam, chi, seed, budget_generations, stream = 0, target = "epsilon", trajectory = false))]
#[allow(clippy::too_many_arguments)]
fn run_trial<'py>(
    py: Python<'py>,
    game: &PyBilinear,
    lam: usize,
    chi: f64,
    seed: u64,
    budget_generations: u64,
    stream: u64,
    target: &str,
    trajectory: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = PdcoeaConfig::new(game.inner, lam, chi, seed, budget_generations);
    cfg.stream = stream;
    cfg.record_trajectory = trajectory;
    cfg.target = match target {
        "epsilon" => Target::Epsilon,
        "all-ones" => Target::all_ones(game.inner.n()).map_err(py_err)?,
        other => return Err(PyValueError::new_err(format!("unknown target {other:?}"))),
    };
    let rec = py.detach(|| pdcoea_core::run_trial(&cfg)).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("hit", rec.hit)?;
    d.set_item("T_interactions", rec.t_interactions)?;
    d.set_item("generations_run", rec.generations_run)?;
    d.set_item("seed", rec.seed)?;
    d.set_item("stream", rec.stream)?;
    let rows = rec.trajectory.iter().map(|g| stats_dict(py, g)).collect::<PyResult<Vec<_>>>()?;
    d.set_item("trajectory", rows)?;
    Ok(d)
}

/// `χ = ½ ln(42/(41(1+δ)))`.
#[pyfunction]
fn mutation_rate_for_delta(delta: f64) -> PyResult<f64> {
    theory::mutation_rate_for_delta(delta).map_err(py_err)
}

/// `(42/41) e^{-2χ} - 1`.
#[pyfunction]
fn delta_for_mutation_rate(chi: f64) -> f64 {
    theory::delta_for_mutation_rate(chi)
}

/// `ln 2 / (1 - 2δ)`.
#[pyfunction]
fn error_threshold(delta: f64) -> PyResult<f64> {
    theory::error_threshold(delta).map_err(py_err)
}

/// `(c''λ/δ)(mλ² + 16 Σ 1/z_i)`.
#[pyfunction]
#[pyo3(signature = (m, lam, delta, z, c_pp = 1.000001))]
fn level_runtime_bound(m: usize, lam: usize, delta: f64, z: Vec<f64>, c_pp: f64) -> PyResult<f64> {
    theory::level_runtime_bound(&LevelBoundInputs { m, lambda: lam, delta, z, c_pp })
        .map(|b| b.value)
        .map_err(py_err)
}

/// Interaction budget for the Bilinear target, with its parts.
#[pyfunction]
#[pyo3(signature = (game, lam, chi, r = 1.0, c_pp = 1.000001, delta = None))]
fn bilinear_runtime_budget<'py>(
    py: Python<'py>,
    game: &PyBilinear,
    lam: usize,
    chi: f64,
    r: f64,
    c_pp: f64,
    delta: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let p = &game.inner;
    let b = theory::bilinear_runtime_budget(&BilinearBudgetInputs {
        n: p.n(),
        lambda: lam,
        chi,
        alpha: p.alpha(),
        beta: p.beta(),
        epsilon: p.epsilon(),
        r,
        c_pp,
        delta,
    })
    .map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("value", b.value)?;
    d.set_item("delta", b.delta)?;
    d.set_item("prefactor", b.prefactor)?;
    d.set_item("population_term", b.population_term)?;
    d.set_item("mutation_term", b.mutation_term)?;
    Ok(d)
}

#[pymodule]
fn pdcoea(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBilinear>()?;
    m.add_function(wrap_pyfunction!(run_trial, m)?)?;
    m.add_function(wrap_pyfunction!(mutation_rate_for_delta, m)?)?;
    m.add_function(wrap_pyfunction!(delta_for_mutation_rate, m)?)?;
    m.add_function(wrap_pyfunction!(error_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(level_runtime_bound, m)?)?;
    m.add_function(wrap_pyfunction!(bilinear_runtime_budget, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
