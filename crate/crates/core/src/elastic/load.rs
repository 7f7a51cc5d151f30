//! Boundary displacements and their nodal extensions.

use serde::{Deserialize, Serialize};

use super::cut::CrackedDiscretization;
use super::mesh::Mesh;
use super::ElasticError;
use crate::expr::Expr2;

/// Prescribed displacement on the Dirichlet part of the boundary.
///
/// Expressions are interpolated at every node, which makes the nodal vector a
/// P1 extension of the datum into the whole domain. Nodal data list values on
/// (at least) the Dirichlet nodes and extend by zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BoundaryDisplacement {
    Scalar { u: Expr2 },
    Vector { ux: Expr2, uy: Expr2 },
    ScalarNodal { values: Vec<(usize, f64)> },
    VectorNodal { values: Vec<(usize, [f64; 2])> },
}

impl BoundaryDisplacement {
    pub fn scalar(u: &str) -> Result<Self, ElasticError> {
        Ok(Self::Scalar { u: Expr2::parse(u)? })
    }

    pub fn vector(ux: &str, uy: &str) -> Result<Self, ElasticError> {
        Ok(Self::Vector {
            ux: Expr2::parse(ux)?,
            uy: Expr2::parse(uy)?,
        })
    }

    pub fn components(&self) -> usize {
        match self {
            Self::Scalar { .. } | Self::ScalarNodal { .. } => 1,
            Self::Vector { .. } | Self::VectorNodal { .. } => 2,
        }
    }

    /// Values at the mesh nodes, interleaved `[ux0, uy0, ux1, ...]` for vectors.
    pub fn nodal_values(&self, mesh: &Mesh) -> Result<Vec<f64>, ElasticError> {
        let n = mesh.nodes().len();
        let c = self.components();
        let mut out = vec![0.0; n * c];
        let mut given = vec![false; n];
        match self {
            Self::Scalar { u } => {
                for (i, p) in mesh.nodes().iter().enumerate() {
                    out[i] = u.eval(p.x, p.y);
                    given[i] = true;
                }
            }
            Self::Vector { ux, uy } => {
                for (i, p) in mesh.nodes().iter().enumerate() {
                    out[2 * i] = ux.eval(p.x, p.y);
                    out[2 * i + 1] = uy.eval(p.x, p.y);
                    given[i] = true;
                }
            }
            Self::ScalarNodal { values } => {
                for &(i, v) in values {
                    let slot = out
                        .get_mut(i)
                        .ok_or_else(|| ElasticError::BadLoad(format!("node {i} does not exist")))?;
                    *slot = v;
                    given[i] = true;
                }
            }
            Self::VectorNodal { values } => {
                for &(i, v) in values {
                    if i >= n {
                        return Err(ElasticError::BadLoad(format!("node {i} does not exist")));
                    }
                    out[2 * i] = v[0];
                    out[2 * i + 1] = v[1];
                    given[i] = true;
                }
            }
        }
        let dirichlet = mesh.dirichlet_nodes();
        for i in 0..n {
            if dirichlet[i] && !given[i] {
                return Err(ElasticError::BadLoad(format!("no value for Dirichlet node {i}")));
            }
            if out[c * i..c * (i + 1)].iter().any(|v| !v.is_finite()) {
                let p = mesh.nodes()[i];
                return Err(ElasticError::BadLoad(format!(
                    "non-finite value at node {i} ({}, {})",
                    p.x, p.y
                )));
            }
        }
        Ok(out)
    }
}

/// Copies nodal values onto every sheet of a cracked discretization.
pub fn extend_to_dofs(disc: &CrackedDiscretization, nodal: &[f64], components: usize) -> Result<Vec<f64>, ElasticError> {
    let n_nodes = disc.mesh().nodes().len();
    if nodal.len() != n_nodes * components {
        return Err(ElasticError::DofMismatch {
            expected: n_nodes * components,
            got: nodal.len(),
        });
    }
    let mut out = Vec::with_capacity(disc.n_dofs() * components);
    for &v in disc.dof_node() {
        out.extend_from_slice(&nodal[components * v..components * (v + 1)]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elastic::mesh::{RectangleSpec, Side};

    fn mesh() -> Mesh {
        Mesh::rectangle(&RectangleSpec {
            x0: 0.0,
            y0: 0.0,
            x1: 1.0,
            y1: 1.0,
            nx: 2,
            ny: 2,
            dirichlet: vec![Side::Bottom],
        })
        .unwrap()
    }

    #[test]
    fn expressions_interpolate_everywhere() {
        let g = BoundaryDisplacement::vector("x", "-y").unwrap();
        let v = g.nodal_values(&mesh()).unwrap();
        assert_eq!(v.len(), 18);
        assert_eq!(v[2 * 8], 1.0);
        assert_eq!(v[2 * 8 + 1], -1.0);
    }

    #[test]
    fn nodal_values_must_cover_dirichlet() {
        let partial = BoundaryDisplacement::ScalarNodal { values: vec![(0, 1.0), (1, 1.0)] };
        assert!(partial.nodal_values(&mesh()).is_err());
        let full = BoundaryDisplacement::ScalarNodal {
            values: vec![(0, 1.0), (1, 1.0), (2, 1.0)],
        };
        assert_eq!(full.nodal_values(&mesh()).unwrap()[4], 0.0);
        let bad = BoundaryDisplacement::scalar("1/x").unwrap();
        assert!(matches!(bad.nodal_values(&mesh()), Err(ElasticError::BadLoad(_))));
    }
}
