//! Scenario files: JSON descriptions of a mesh, material, surface energy,
//! load path and initial crack, turned into a validated [`Scenario`].

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::anisotropy::{AnisotropyConfig, AnisotropyField};
use crate::elastic::{BoundaryDisplacement, Coefficients, Mesh, MeshJson, RectangleSpec, ScalarCoefficientField, TensorCoefficientField};
use crate::evolution::{CrackGraph, EvolutionError, LoadPath, Scenario, SearchStrategy};
use crate::geometry::{CrackSet, Segment};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("scenario is not valid JSON: {0}")]
    Parse(String),
    #[error("scenario field `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
}

fn invalid(field: &'static str, e: impl ToString) -> ScenarioError {
    ScenarioError::Invalid {
        field,
        message: e.to_string(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshSource {
    Rectangle(RectangleSpec),
    /// Path relative to the scenario file.
    File(PathBuf),
    Inline(MeshJson),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientConfig {
    Scalar(ScalarCoefficientField),
    Tensor(TensorCoefficientField),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadKnot {
    pub t: f64,
    pub g: BoundaryDisplacement,
}

fn default_m() -> usize {
    1
}

fn default_deltas() -> Vec<f64> {
    vec![0.25, 0.125, 0.0625, 0.03125]
}

fn default_strategy() -> SearchStrategy {
    SearchStrategy::Greedy
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub mesh: MeshSource,
    /// Crack graph: every mesh edge lying on one of these segments
    /// `[x1, y1, x2, y2]`. When absent the mesh's own crack-graph edges are
    /// used, or every interior edge if it lists none.
    #[serde(default)]
    pub crack_lines: Option<Vec<[f64; 4]>>,
    #[serde(default)]
    pub allow_boundary_cracks: bool,
    pub coefficient: CoefficientConfig,
    pub phi: AnisotropyConfig,
    pub load: Vec<LoadKnot>,
    /// Initial crack as segments; each must be a union of crack-graph edges.
    #[serde(default)]
    pub initial_crack: Vec<[f64; 4]>,
    /// Initial crack as crack-graph edge indices, joined with `initial_crack`.
    #[serde(default)]
    pub initial_edges: Vec<usize>,
    /// Maximal number of connected components of the crack.
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    #[serde(default = "default_strategy")]
    pub strategy: SearchStrategy,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    /// Builds the mesh; `refine` multiplies the cell counts of a generated rectangle.
    pub fn build_mesh(&self, base_dir: &Path, refine: usize) -> Result<Mesh, ScenarioError> {
        let mesh = match &self.mesh {
            MeshSource::Rectangle(spec) => {
                let mut spec = spec.clone();
                spec.nx *= refine.max(1);
                spec.ny *= refine.max(1);
                Mesh::rectangle(&spec).map_err(|e| invalid("mesh", e))?
            }
            MeshSource::File(p) => {
                let path = base_dir.join(p);
                let text = std::fs::read_to_string(&path).map_err(|e| ScenarioError::Io {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
                let j: MeshJson = serde_json::from_str(&text).map_err(|e| invalid("mesh", e))?;
                Mesh::from_json(j).map_err(|e| invalid("mesh", e))?
            }
            MeshSource::Inline(j) => Mesh::from_json(j.clone()).map_err(|e| invalid("mesh", e))?,
        };
        match &self.crack_lines {
            Some(lines) => {
                let segs = lines
                    .iter()
                    .map(|l| Segment::from_coords(l[0], l[1], l[2], l[3]))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| invalid("crack_lines", e))?;
                mesh.with_crack_lines(&segs, self.allow_boundary_cracks)
                    .map_err(|e| invalid("crack_lines", e))
            }
            None if mesh.crack_graph_edges().is_empty() => Ok(mesh.with_all_edges_as_crack_graph(self.allow_boundary_cracks)),
            None => Ok(mesh),
        }
    }

    pub fn build(&self, base_dir: &Path, refine: usize, seed: Option<u64>) -> Result<Scenario, ScenarioError> {
        let mesh = Arc::new(self.build_mesh(base_dir, refine)?);
        let coefficients: Coefficients = match &self.coefficient {
            CoefficientConfig::Scalar(a) => a.tabulate(&mesh),
            CoefficientConfig::Tensor(a) => a.tabulate(&mesh),
        }
        .map_err(|e| invalid("coefficient", e))?;
        let phi = AnisotropyField::new(self.phi.clone(), mesh.bounding_box(), seed.unwrap_or(self.seed))
            .map_err(|e| invalid("phi", e))?;
        if self.m == 0 {
            return Err(invalid("m", "must be at least 1"));
        }
        let graph = CrackGraph::new(Arc::clone(&mesh), &phi, self.m);

        let components = coefficients.components();
        let mut times = Vec::with_capacity(self.load.len());
        let mut values = Vec::with_capacity(self.load.len());
        for knot in &self.load {
            if knot.g.components() != components {
                return Err(invalid(
                    "load",
                    format!(
                        "knot at t = {} has {} components, the coefficient needs {components}",
                        knot.t,
                        knot.g.components()
                    ),
                ));
            }
            times.push(knot.t);
            values.push(knot.g.nodal_values(&mesh).map_err(|e| invalid("load", e))?);
        }
        let load = LoadPath::new(times, values, components).map_err(|e| invalid("load", e))?;

        let mut initial: BTreeSet<usize> = if self.initial_crack.is_empty() {
            BTreeSet::new()
        } else {
            let k = CrackSet::from_coords(&self.initial_crack).map_err(|e| invalid("initial_crack", e))?;
            mesh.crack_edge_ids(&k)
                .map_err(|e| invalid("initial_crack", e))?
                .into_iter()
                .collect()
        };
        if let Some(&e) = self.initial_edges.iter().find(|&&e| e >= graph.n_edges()) {
            return Err(invalid(
                "initial_edges",
                format!("edge {e} is not in the crack graph ({} edges)", graph.n_edges()),
            ));
        }
        if refine > 1 && !self.initial_edges.is_empty() {
            return Err(invalid("initial_edges", "edge indices cannot be used with mesh refinement"));
        }
        initial.extend(&self.initial_edges);
        if self.deltas.iter().any(|&d| !(d > 0.0 && d <= 1.0)) || self.deltas.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(invalid("deltas", "must be strictly decreasing values in (0, 1]"));
        }
        Scenario::new(self.name.clone(), graph, coefficients, phi, load, initial).map_err(|e| {
            let field = match e {
                EvolutionError::BadInitialCrack(_) => "initial_crack",
                EvolutionError::BadLoad(_) => "load",
                _ => "coefficient",
            };
            invalid(field, e)
        })
    }
}
