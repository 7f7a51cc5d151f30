//! Time-discretized quasi-static crack growth: at every time step the crack
//! minimizes bulk plus surface energy among supersets of the previous crack
//! drawn from a finite crack graph.

pub mod study;
pub mod verify;

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::anisotropy::{surface_energy, AnisotropyField};
use crate::elastic::{cut_mesh, energy_inner_product, solve, Coefficients, CrackedDiscretization, ElasticError, Mesh, SolveResult, SolverOptions};
use crate::geometry::{CrackSet, GeometryError};
use crate::report::fmt_f64;
use crate::union_find::UnionFind;

pub use study::{delta_convergence_study, StudyReport};
pub use verify::{verify_trace, VerificationReport, VerifyOptions};

/// Exhaustive search is refused above this many free crack-graph edges.
pub const EXHAUSTIVE_LIMIT: usize = 20;

/// Two energies closer than this (relative to `max(1, |E|)`) count as a tie.
pub const TIE_TOL: f64 = 1e-10;

pub fn tie_tolerance(e: f64) -> f64 {
    TIE_TOL * e.abs().max(1.0)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("time step must lie in (0, 1] (got {0})")]
    BadDelta(f64),
    #[error("step sizes must be strictly decreasing and in (0, 1]: {0}")]
    BadDeltaList(String),
    #[error("exhaustive search over {free} free edges exceeds the limit of {limit}")]
    TooManyFreeEdges { free: usize, limit: usize },
    #[error("load path: {0}")]
    BadLoad(String),
    #[error("initial crack: {0}")]
    BadInitialCrack(String),
    #[error("the convergence study needs a load path with g(0) = 0")]
    NonZeroInitialLoad,
    #[error("step {step}: {source}")]
    Step { step: usize, source: ElasticError },
    #[error(transparent)]
    Elastic(#[from] ElasticError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStrategy {
    /// Every superset of the previous crack with at most `m` components.
    Exhaustive,
    /// Repeated best single-edge additions while the total energy drops.
    Greedy,
}

impl std::str::FromStr for SearchStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exhaustive" => Ok(Self::Exhaustive),
            "greedy" => Ok(Self::Greedy),
            other => Err(format!("unknown strategy `{other}` (expected exhaustive or greedy)")),
        }
    }
}

/// Candidate cracks: subsets of the mesh crack graph with at most `m` components.
#[derive(Clone, Debug)]
pub struct CrackGraph {
    mesh: Arc<Mesh>,
    edge_surface: Vec<f64>,
    edge_length: Vec<f64>,
    m: usize,
}

impl CrackGraph {
    pub fn new(mesh: Arc<Mesh>, phi: &AnisotropyField, m: usize) -> Self {
        let (edge_surface, edge_length) = (0..mesh.crack_graph_edges().len())
            .map(|i| {
                let s = mesh.crack_edge_segment(i);
                let k = CrackSet::new(vec![s]).expect("mesh edges are valid segments");
                (surface_energy(&k, phi), s.length())
            })
            .unzip();
        Self {
            mesh,
            edge_surface,
            edge_length,
            m,
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn n_edges(&self) -> usize {
        self.edge_surface.len()
    }

    pub fn max_components(&self) -> usize {
        self.m
    }

    /// Surface energy of each graph edge; the crack energy is their sum.
    pub fn edge_surface(&self) -> &[f64] {
        &self.edge_surface
    }

    pub fn surface_energy(&self, edges: &BTreeSet<usize>) -> f64 {
        edges.iter().map(|&e| self.edge_surface[e]).sum()
    }

    pub fn length(&self, edges: &BTreeSet<usize>) -> f64 {
        edges.iter().map(|&e| self.edge_length[e]).sum()
    }

    /// Connected components of the union of the edges.
    pub fn components(&self, edges: &BTreeSet<usize>) -> usize {
        let mut nodes: Vec<usize> = edges
            .iter()
            .flat_map(|&e| self.mesh.crack_graph_edges()[e])
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        let mut uf = UnionFind::new(nodes.len());
        let idx = |v: usize| nodes.binary_search(&v).expect("collected above");
        let mut n = nodes.len();
        for &e in edges {
            let [a, b] = self.mesh.crack_graph_edges()[e];
            if uf.union(idx(a), idx(b)) {
                n -= 1;
            }
        }
        n
    }

    pub fn is_admissible(&self, edges: &BTreeSet<usize>) -> bool {
        edges.iter().all(|&e| e < self.n_edges()) && self.components(edges) <= self.m
    }

    pub fn crack_set(&self, edges: &BTreeSet<usize>) -> CrackSet {
        let ids: Vec<usize> = edges.iter().copied().collect();
        self.mesh.crack_from_edges(&ids).expect("edge ids checked by the caller")
    }
}

/// Piecewise-linear load path through nodal boundary data.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoadPath {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
    components: usize,
}

impl LoadPath {
    /// `times` must start at 0, end at 1 and increase strictly; each value
    /// vector holds nodal data (`n_nodes · components` entries).
    pub fn new(times: Vec<f64>, values: Vec<Vec<f64>>, components: usize) -> Result<Self, EvolutionError> {
        let bad = |m: String| Err(EvolutionError::BadLoad(m));
        if times.len() < 2 || times.len() != values.len() {
            return bad(format!("{} knots with {} values; need at least two", times.len(), values.len()));
        }
        if times[0] != 0.0 || *times.last().unwrap() != 1.0 {
            return bad("knot times must start at 0 and end at 1".into());
        }
        if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0])) {
            return bad(format!("knot times must increase strictly ({} then {})", w[0], w[1]));
        }
        let len = values[0].len();
        if let Some(i) = values.iter().position(|v| v.len() != len || v.iter().any(|x| !x.is_finite())) {
            return bad(format!("knot {i} has a wrong length or non-finite values"));
        }
        Ok(Self {
            times,
            values,
            components,
        })
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// `g(0) = 0`, which pins the step-0 crack to the initial crack.
    pub fn starts_at_zero(&self) -> bool {
        self.values[0].iter().all(|&v| v == 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.iter().all(|&x| x == 0.0))
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        let t = t.clamp(0.0, 1.0);
        let k = match self.times.iter().position(|&s| s >= t) {
            Some(0) => return self.values[0].clone(),
            Some(k) => k,
            None => return self.values.last().unwrap().clone(),
        };
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        if t == t1 {
            return self.values[k].clone();
        }
        let s = (t - t0) / (t1 - t0);
        self.values[k - 1]
            .iter()
            .zip(&self.values[k])
            .map(|(a, b)| a + s * (b - a))
            .collect()
    }
}

/// Everything an evolution run needs, validated.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub graph: CrackGraph,
    pub coefficients: Coefficients,
    pub phi: AnisotropyField,
    pub load: LoadPath,
    pub initial_crack: BTreeSet<usize>,
    pub solver: SolverOptions,
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        graph: CrackGraph,
        coefficients: Coefficients,
        phi: AnisotropyField,
        load: LoadPath,
        initial_crack: BTreeSet<usize>,
    ) -> Result<Self, EvolutionError> {
        if coefficients.n_triangles() != graph.mesh().triangles().len() {
            return Err(ElasticError::DofMismatch {
                expected: graph.mesh().triangles().len(),
                got: coefficients.n_triangles(),
            }
            .into());
        }
        if coefficients.components() != load.components() {
            return Err(ElasticError::ComponentMismatch {
                coefficient: coefficients.components(),
                load: load.components(),
            }
            .into());
        }
        let expected = graph.mesh().nodes().len() * load.components();
        if load.values[0].len() != expected {
            return Err(EvolutionError::BadLoad(format!(
                "knot values have {} entries, the mesh needs {expected}",
                load.values[0].len()
            )));
        }
        if let Some(&e) = initial_crack.iter().find(|&&e| e >= graph.n_edges()) {
            return Err(EvolutionError::BadInitialCrack(format!("edge {e} is not in the crack graph")));
        }
        if graph.components(&initial_crack) > graph.max_components() {
            return Err(EvolutionError::BadInitialCrack(format!(
                "{} components exceed m = {}",
                graph.components(&initial_crack),
                graph.max_components()
            )));
        }
        Ok(Self {
            name: name.into(),
            graph,
            coefficients,
            phi,
            load,
            initial_crack,
            solver: SolverOptions::default(),
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.graph.mesh()
    }

    pub fn discretize(&self, edges: &BTreeSet<usize>) -> Result<CrackedDiscretization, ElasticError> {
        cut_mesh(self.mesh(), &self.graph.crack_set(edges))
    }

    /// Bulk, surface and total energy of the crack `edges` under nodal load `g`.
    pub fn evaluate(&self, edges: &BTreeSet<usize>, g: &[f64]) -> Result<Evaluation, ElasticError> {
        let disc = self.discretize(edges)?;
        let result = solve(&disc, &self.coefficients, g, &self.solver)?;
        let surface = self.graph.surface_energy(edges);
        Ok(Evaluation {
            energy: Energies {
                bulk: result.bulk_energy,
                surface,
                total: result.bulk_energy + surface,
            },
            disc,
            result,
        })
    }

    /// Free crack-graph edges given the current crack.
    pub fn free_edges(&self, edges: &BTreeSet<usize>) -> Vec<usize> {
        (0..self.graph.n_edges()).filter(|e| !edges.contains(e)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Energies {
    pub bulk: f64,
    pub surface: f64,
    pub total: f64,
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub energy: Energies,
    pub disc: CrackedDiscretization,
    pub result: SolveResult,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    /// Candidate cracks whose energy was computed.
    pub evaluated: usize,
    /// Candidates rejected by the component bound.
    pub infeasible: usize,
    /// Candidates within the tie tolerance of the minimum.
    pub ties: usize,
}

#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub edges: BTreeSet<usize>,
    pub evaluation: Evaluation,
    pub stats: SearchStats,
}

/// Orders candidates: lower energy first unless within the tie tolerance,
/// then fewer edges, then the lexicographically smaller sorted edge list.
fn pick_best(cands: Vec<(BTreeSet<usize>, f64)>) -> Option<(BTreeSet<usize>, f64, usize)> {
    let min = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return None;
    }
    let tol = tie_tolerance(min);
    let tied: Vec<_> = cands.into_iter().filter(|c| c.1 <= min + tol).collect();
    let n = tied.len();
    tied.into_iter()
        .min_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.iter().cmp(b.0.iter())))
        .map(|(k, e)| (k, e, n))
}

/// Minimizes the total energy under `g` over admissible supersets of `prev`.
pub fn incremental_step(
    scenario: &Scenario,
    prev: &BTreeSet<usize>,
    g: &[f64],
    strategy: SearchStrategy,
) -> Result<StepOutcome, EvolutionError> {
    let free = scenario.free_edges(prev);
    let mut stats = SearchStats::default();
    let edges = match strategy {
        SearchStrategy::Exhaustive => {
            if free.len() > EXHAUSTIVE_LIMIT {
                return Err(EvolutionError::TooManyFreeEdges {
                    free: free.len(),
                    limit: EXHAUSTIVE_LIMIT,
                });
            }
            let mut candidates = Vec::new();
            for mask in 0u64..(1u64 << free.len()) {
                let mut k = prev.clone();
                k.extend(free.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &e)| e));
                if scenario.graph.components(&k) <= scenario.graph.max_components() {
                    candidates.push(k);
                } else {
                    stats.infeasible += 1;
                }
            }
            stats.evaluated = candidates.len();
            let scored = candidates
                .into_par_iter()
                .map(|k| {
                    let e = scenario.evaluate(&k, g)?.energy.total;
                    Ok((k, e))
                })
                .collect::<Result<Vec<_>, ElasticError>>()?;
            let (best, _, ties) = pick_best(scored).expect("the previous crack is always a candidate");
            stats.ties = ties;
            best
        }
        SearchStrategy::Greedy => {
            let mut current = prev.clone();
            let mut current_e = scenario.evaluate(&current, g)?.energy.total;
            stats.evaluated += 1;
            loop {
                let options: Vec<BTreeSet<usize>> = scenario
                    .free_edges(&current)
                    .into_iter()
                    .map(|e| {
                        let mut k = current.clone();
                        k.insert(e);
                        k
                    })
                    .filter(|k| scenario.graph.components(k) <= scenario.graph.max_components())
                    .collect();
                stats.evaluated += options.len();
                let scored = options
                    .into_par_iter()
                    .map(|k| {
                        let e = scenario.evaluate(&k, g)?.energy.total;
                        Ok((k, e))
                    })
                    .collect::<Result<Vec<_>, ElasticError>>()?;
                match pick_best(scored) {
                    Some((k, e, ties)) if e < current_e - tie_tolerance(current_e) => {
                        stats.ties = ties;
                        current = k;
                        current_e = e;
                    }
                    _ => break,
                }
            }
            current
        }
    };
    let evaluation = scenario.evaluate(&edges, g)?;
    Ok(StepOutcome { edges, evaluation, stats })
}

/// One row of an evolution trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: usize,
    pub t: f64,
    pub edges: Vec<usize>,
    pub length: f64,
    pub components: usize,
    pub bulk: f64,
    pub surface: f64,
    pub total: f64,
    /// `2(u_i, g(t_{i+1}) − g(t_i))`; zero on the last step.
    pub work: f64,
    pub stats: SearchStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub scenario: String,
    pub delta: f64,
    pub strategy: SearchStrategy,
    pub initial_edges: Vec<usize>,
    pub steps: Vec<TraceStep>,
}

impl EvolutionTrace {
    pub fn edge_set(&self, i: usize) -> BTreeSet<usize> {
        self.steps[i].edges.iter().copied().collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,t,edges,length,bulk,surface,total,work\n");
        for s in &self.steps {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                s.step,
                fmt_f64(s.t),
                s.edges.len(),
                fmt_f64(s.length),
                fmt_f64(s.bulk),
                fmt_f64(s.surface),
                fmt_f64(s.total),
                fmt_f64(s.work)
            ));
        }
        out
    }

    /// Index of the step in force at time `t` (piecewise-constant interpolation).
    pub fn step_at(&self, t: f64) -> usize {
        let i = (t / self.delta + 1e-9).floor().max(0.0) as usize;
        i.min(self.steps.len() - 1)
    }
}

/// Largest `n` with `n·δ ≤ 1`.
pub fn step_count(delta: f64) -> Result<usize, EvolutionError> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(EvolutionError::BadDelta(delta));
    }
    let mut n = (1.0 / delta).floor() as usize;
    while (n + 1) as f64 * delta <= 1.0 {
        n += 1;
    }
    while n as f64 * delta > 1.0 {
        n -= 1;
    }
    Ok(n)
}

pub fn run_evolution(scenario: &Scenario, delta: f64, strategy: SearchStrategy) -> Result<EvolutionTrace, EvolutionError> {
    let n = step_count(delta)?;
    let mut prev = scenario.initial_crack.clone();
    let mut steps = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let started = Instant::now();
        let t = i as f64 * delta;
        let g = scenario.load.at(t);
        let out = incremental_step(scenario, &prev, &g, strategy).map_err(|e| match e {
            EvolutionError::Elastic(source) => EvolutionError::Step { step: i, source },
            other => other,
        })?;
        let work = if i < n {
            let next = scenario.load.at((i + 1) as f64 * delta);
            let dg: Vec<f64> = next.iter().zip(&g).map(|(a, b)| a - b).collect();
            let ext = crate::elastic::load::extend_to_dofs(&out.evaluation.disc, &dg, scenario.load.components())
                .map_err(|source| EvolutionError::Step { step: i, source })?;
            2.0 * energy_inner_product(&out.evaluation.disc, &scenario.coefficients, &out.evaluation.result.dofs, &ext)
                .map_err(|source| EvolutionError::Step { step: i, source })?
        } else {
            0.0
        };
        let e = out.evaluation.energy;
        log::debug!(
            "step {i} t = {t}: {} edges, total {:.6e} ({} candidates, {:?})",
            out.edges.len(),
            e.total,
            out.stats.evaluated,
            started.elapsed()
        );
        steps.push(TraceStep {
            step: i,
            t,
            edges: out.edges.iter().copied().collect(),
            length: scenario.graph.length(&out.edges),
            components: scenario.graph.components(&out.edges),
            bulk: e.bulk,
            surface: e.surface,
            total: e.total,
            work,
            stats: out.stats,
        });
        prev = out.edges;
    }
    Ok(EvolutionTrace {
        scenario: scenario.name.clone(),
        delta,
        strategy,
        initial_edges: scenario.initial_crack.iter().copied().collect(),
        steps,
    })
}
