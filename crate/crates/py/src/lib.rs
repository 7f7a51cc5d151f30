//! Python bindings: crack sets, surface energy densities, scenarios and
//! evolution traces. Structured results come back as plain dicts.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use fractura::anisotropy::lsc::{lsc_experiment as run_lsc, ConvergentFamily};
use fractura::anisotropy::{surface_energy, AnisotropyConfig, AnisotropyField as Field};
use fractura::evolution::study::{default_sample_times, delta_convergence_study};
use fractura::evolution::{
    run_evolution, verify_trace, EvolutionTrace as Trace, Scenario as Engine, SearchStrategy, VerifyOptions,
};
use fractura::geometry::{connected_components, h1_measure, hausdorff_distance, CrackSet as Cracks, DomainBox};
use fractura::scenario::ScenarioConfig;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// Serializes through JSON so Python receives ordinary dicts and lists.
fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(runtime_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn strategy(name: &str) -> PyResult<SearchStrategy> {
    match name {
        "exhaustive" => Ok(SearchStrategy::Exhaustive),
        "greedy" => Ok(SearchStrategy::Greedy),
        other => Err(PyValueError::new_err(format!("unknown strategy `{other}`"))),
    }
}

/// A finite union of closed segments.
#[pyclass(frozen)]
struct CrackSet {
    inner: Cracks,
}

#[pymethods]
impl CrackSet {
    /// Builds a crack from `[x1, y1, x2, y2]` rows.
    #[new]
    #[pyo3(signature = (segments=Vec::new()))]
    fn new(segments: Vec<[f64; 4]>) -> PyResult<Self> {
        Ok(Self {
            inner: Cracks::from_coords(&segments).map_err(value_err)?,
        })
    }

    fn length(&self) -> f64 {
        h1_measure(&self.inner)
    }

    fn components(&self) -> usize {
        connected_components(&self.inner)
    }

    fn segments(&self) -> Vec<[f64; 4]> {
        self.inner.segments().iter().map(|s| [s.a.x, s.a.y, s.b.x, s.b.y]).collect()
    }

    fn union(&self, other: &CrackSet) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.union(&other.inner).map_err(value_err)?,
        })
    }

    /// Hausdorff distance inside the rectangle `[x0, y0, x1, y1]`; empty
    /// sets sit at the rectangle's diameter from everything else.
    #[pyo3(signature = (other, domain=[0.0, 0.0, 1.0, 1.0]))]
    fn hausdorff(&self, other: &CrackSet, domain: [f64; 4]) -> PyResult<f64> {
        let dom = DomainBox::rectangle(domain[0], domain[1], domain[2], domain[3]).map_err(value_err)?;
        Ok(hausdorff_distance(&self.inner, &other.inner, &dom))
    }

    fn __len__(&self) -> usize {
        self.inner.segments().len()
    }

    fn __repr__(&self) -> String {
        format!("CrackSet(segments={}, length={})", self.inner.segments().len(), self.length())
    }
}

/// A validated surface energy density.
#[pyclass(frozen)]
struct AnisotropyField {
    inner: Field,
}

#[pymethods]
impl AnisotropyField {
    /// Parses a `{kind, parameters, c1, c2}` JSON object and validates it on `region`.
    #[new]
    #[pyo3(signature = (config_json, region=[0.0, 0.0, 1.0, 1.0], seed=0))]
    fn new(config_json: &str, region: [f64; 4], seed: u64) -> PyResult<Self> {
        let cfg: AnisotropyConfig = serde_json::from_str(config_json).map_err(value_err)?;
        Ok(Self {
            inner: Field::new(cfg, region, seed).map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn euclidean() -> Self {
        Self { inner: Field::euclidean() }
    }

    #[staticmethod]
    fn crystalline(p: [f64; 2], q: [f64; 2]) -> PyResult<Self> {
        Ok(Self {
            inner: Field::crystalline(p, q).map_err(value_err)?,
        })
    }

    #[getter]
    fn c1(&self) -> f64 {
        self.inner.c1()
    }

    #[getter]
    fn c2(&self) -> f64 {
        self.inner.c2()
    }

    /// `φ(x, ν)` for a nonzero `ν`.
    fn evaluate(&self, x: [f64; 2], nu: [f64; 2]) -> PyResult<f64> {
        self.inner
            .evaluate(fractura::geometry::Point2::new(x[0], x[1]), nu)
            .map_err(value_err)
    }

    fn surface_energy(&self, crack: &CrackSet) -> f64 {
        surface_energy(&crack.inner, &self.inner)
    }
}

/// The result of `Scenario.evolve`.
#[pyclass(frozen)]
struct EvolutionTrace {
    inner: Trace,
}

#[pymethods]
impl EvolutionTrace {
    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }

    fn __len__(&self) -> usize {
        self.inner.steps.len()
    }

    /// One dict per step: time, edges, energies, work and search statistics.
    fn steps<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.steps)
    }

    fn totals(&self) -> Vec<f64> {
        self.inner.steps.iter().map(|s| s.total).collect()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(runtime_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: serde_json::from_str(text).map_err(value_err)?,
        })
    }
}

/// A loaded and validated evolution scenario.
#[pyclass(frozen)]
struct Scenario {
    inner: Engine,
}

#[pymethods]
impl Scenario {
    /// Loads a scenario JSON file; `refine` multiplies generated mesh cell counts.
    #[staticmethod]
    #[pyo3(signature = (path, refine=1, seed=None))]
    fn load(path: PathBuf, refine: usize, seed: Option<u64>) -> PyResult<Self> {
        let cfg = ScenarioConfig::load(&path).map_err(value_err)?;
        let base = path.parent().map(PathBuf::from).unwrap_or_default();
        Ok(Self {
            inner: cfg.build(&base, refine, seed).map_err(value_err)?,
        })
    }

    /// Builds a scenario from JSON text; relative mesh paths resolve against `base_dir`.
    #[staticmethod]
    #[pyo3(signature = (text, base_dir=PathBuf::from("."), refine=1, seed=None))]
    fn from_json(text: &str, base_dir: PathBuf, refine: usize, seed: Option<u64>) -> PyResult<Self> {
        let cfg = ScenarioConfig::from_json(text).map_err(value_err)?;
        Ok(Self {
            inner: cfg.build(&base_dir, refine, seed).map_err(value_err)?,
        })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn n_edges(&self) -> usize {
        self.inner.graph.n_edges()
    }

    /// The crack made of the given crack-graph edges.
    fn crack(&self, edges: Vec<usize>) -> PyResult<CrackSet> {
        let n = self.inner.graph.n_edges();
        if let Some(e) = edges.iter().find(|&&e| e >= n) {
            return Err(PyValueError::new_err(format!("edge {e} is not in the crack graph ({n} edges)")));
        }
        Ok(CrackSet {
            inner: self.inner.graph.crack_set(&edges.into_iter().collect()),
        })
    }

    /// Bulk, surface and total energy of the initial crack at load time `t`.
    #[pyo3(signature = (t=1.0))]
    fn energies<'py>(&self, py: Python<'py>, t: f64) -> PyResult<Bound<'py, PyAny>> {
        let g = self.inner.load.at(t);
        let ev = py
            .detach(|| self.inner.evaluate(&self.inner.initial_crack, &g))
            .map_err(runtime_err)?;
        to_py(py, &ev.energy)
    }

    #[pyo3(signature = (delta, strategy="exhaustive"))]
    fn evolve(&self, py: Python<'_>, delta: f64, strategy: &str) -> PyResult<EvolutionTrace> {
        let s = self::strategy(strategy)?;
        let inner = py.detach(|| run_evolution(&self.inner, delta, s)).map_err(runtime_err)?;
        Ok(EvolutionTrace { inner })
    }

    /// Checks monotonicity, feasibility, step minimality and the energy inequality.
    #[pyo3(signature = (trace, skip_minimality=false))]
    fn verify<'py>(&self, py: Python<'py>, trace: &EvolutionTrace, skip_minimality: bool) -> PyResult<Bound<'py, PyAny>> {
        let opts = VerifyOptions {
            skip_minimality,
            ..Default::default()
        };
        let report = py
            .detach(|| verify_trace(&trace.inner, &self.inner, &opts))
            .map_err(runtime_err)?;
        to_py(py, &report)
    }

    /// Energy and crack gaps to the finest step size at the default sample times.
    #[pyo3(signature = (deltas, strategy="exhaustive"))]
    fn study<'py>(&self, py: Python<'py>, deltas: Vec<f64>, strategy: &str) -> PyResult<Bound<'py, PyAny>> {
        let s = self::strategy(strategy)?;
        let report = py
            .detach(|| delta_convergence_study(&self.inner, &deltas, s, &default_sample_times()))
            .map_err(runtime_err)?;
        to_py(py, &report)
    }
}

/// Surface energy along a built-in convergent family (`staircase`, `sawtooth`).
#[pyfunction]
#[pyo3(signature = (family, phi, n_max=64))]
fn lsc_experiment<'py>(py: Python<'py>, family: &str, phi: &AnisotropyField, n_max: usize) -> PyResult<Bound<'py, PyAny>> {
    let fam = ConvergentFamily::by_name(family).ok_or_else(|| PyValueError::new_err(format!("unknown family `{family}`")))?;
    to_py(py, &run_lsc(&fam, &phi.inner, n_max))
}

/// Runs the command-line tool with `args` (without the program name) and returns its exit status.
#[pyfunction]
fn run_cli(py: Python<'_>, args: Vec<String>) -> i32 {
    py.detach(|| fractura::cli::main_with_args(std::iter::once(String::from("fractura")).chain(args)))
}

#[pymodule]
#[pyo3(name = "fractura")]
fn fractura_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<CrackSet>()?;
    m.add_class::<AnisotropyField>()?;
    m.add_class::<Scenario>()?;
    m.add_class::<EvolutionTrace>()?;
    m.add_function(wrap_pyfunction!(lsc_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
