//! P1 finite elements on cracked triangulations for the anti-plane (scalar)
//! and planar (vector) elastic minimum problems.

pub mod coeff;
pub mod cut;
pub mod linsolve;
pub mod load;
pub mod mesh;
pub mod solve;
pub mod stability;

use thiserror::Error;

use crate::expr::ExprError;
use crate::geometry::GeometryError;

pub use coeff::{Coefficients, ScalarCoefficientField, ScalarField, TensorCoefficientField, TensorField};
pub use cut::{cut_mesh, CrackedDiscretization};
pub use linsolve::SolverOptions;
pub use load::BoundaryDisplacement;
pub use mesh::{BoundaryEdge, BoundaryTag, Mesh, MeshJson, RectangleSpec, Side};
pub use solve::{energy_inner_product, solve, solve_antiplanar, solve_planar, SolveResult};
pub use stability::{stability_experiment, StabilityReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElasticError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("crack is not contained in the crack graph: {0}")]
    NotInCrackGraph(String),
    #[error("ellipticity bound violated: {0}")]
    Ellipticity(String),
    #[error("invalid boundary displacement: {0}")]
    BadLoad(String),
    #[error("assembled stiffness is not positive definite (pivot {pivot} at row {row})")]
    NotSpd { row: usize, pivot: f64 },
    #[error("linear solve reached residual {residual:e}, above the tolerance {tolerance:e}")]
    SolveTolerance { residual: f64, tolerance: f64 },
    #[error("vector length {got} does not match {expected} degrees of freedom")]
    DofMismatch { expected: usize, got: usize },
    #[error("coefficient has {coefficient} components per node, load has {load}")]
    ComponentMismatch { coefficient: usize, load: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}
