//! Elastic coefficient fields and their ellipticity checks.
//!
//! Fields are evaluated once per triangle (at the centroid) and the table is
//! what the assembly consumes. The bounds check is exact: a matrix `S` obeys
//! `α₁ ≤ λ(S) ≤ α₂` iff `S − α₁I` and `α₂I − S` are positive semidefinite,
//! which is decided from principal minors.

use serde::{Deserialize, Serialize};

use super::mesh::Mesh;
use super::ElasticError;
use crate::expr::Expr2;
use crate::geometry::Point2;

/// Symmetric 2x2 `[a11, a12, a22]`.
pub type Sym2 = [f64; 3];
/// Symmetric 3x3 in the `{e11, e22, √2·e12}` basis: `[c11, c12, c13, c22, c23, c33]`.
pub type Sym3 = [f64; 6];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ScalarField {
    Constant { a: Sym2 },
    PerTriangle { a: Vec<Sym2> },
    Expression { a11: Expr2, a12: Expr2, a22: Expr2 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarCoefficientField {
    pub field: ScalarField,
    pub alpha1: f64,
    pub alpha2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TensorField {
    Constant { c: Sym3 },
    /// `A M : M = μ|M|² + λ (tr M)²`
    Isotropic { mu: f64, lambda: f64 },
    PerTriangle { c: Vec<Sym3> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorCoefficientField {
    pub field: TensorField,
    pub alpha1: f64,
    pub alpha2: f64,
}

/// Per-triangle coefficients ready for assembly.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficients {
    Scalar(Vec<Sym2>),
    Tensor(Vec<Sym3>),
}

impl Coefficients {
    /// Unknowns per node: 1 for the anti-plane problem, 2 for the planar one.
    pub fn components(&self) -> usize {
        match self {
            Coefficients::Scalar(_) => 1,
            Coefficients::Tensor(_) => 2,
        }
    }

    pub fn n_triangles(&self) -> usize {
        match self {
            Coefficients::Scalar(v) => v.len(),
            Coefficients::Tensor(v) => v.len(),
        }
    }
}

fn check_alphas(alpha1: f64, alpha2: f64) -> Result<(), ElasticError> {
    if !(alpha1 > 0.0) {
        return Err(ElasticError::Ellipticity(format!(
            "alpha1 must be positive (got {alpha1})"
        )));
    }
    if !(alpha2 >= alpha1) || !alpha2.is_finite() {
        return Err(ElasticError::Ellipticity(format!(
            "alpha2 must be finite and >= alpha1 (got alpha1 = {alpha1}, alpha2 = {alpha2})"
        )));
    }
    Ok(())
}

fn psd2(m: Sym2) -> bool {
    let [a, b, c] = m;
    a >= 0.0 && c >= 0.0 && a * c - b * b >= 0.0
}

fn psd3(m: Sym3) -> bool {
    let [a, b, c, d, e, f] = m;
    // [[a b c] [b d e] [c e f]]
    let det = a * (d * f - e * e) - b * (b * f - c * e) + c * (b * e - c * d);
    a >= 0.0
        && d >= 0.0
        && f >= 0.0
        && a * d - b * b >= 0.0
        && a * f - c * c >= 0.0
        && d * f - e * e >= 0.0
        && det >= 0.0
}

fn within_bounds2(m: Sym2, alpha1: f64, alpha2: f64) -> bool {
    let [a, b, c] = m;
    psd2([a - alpha1, b, c - alpha1]) && psd2([alpha2 - a, -b, alpha2 - c])
}

fn within_bounds3(m: Sym3, alpha1: f64, alpha2: f64) -> bool {
    let [a, b, c, d, e, f] = m;
    psd3([a - alpha1, b, c, d - alpha1, e, f - alpha1])
        && psd3([alpha2 - a, -b, -c, alpha2 - d, -e, alpha2 - f])
}

impl ScalarCoefficientField {
    pub fn new(field: ScalarField, alpha1: f64, alpha2: f64) -> Result<Self, ElasticError> {
        check_alphas(alpha1, alpha2)?;
        Ok(Self { field, alpha1, alpha2 })
    }

    /// `a = s·I` with the exact bounds `α₁ = α₂ = s`.
    pub fn isotropic(s: f64) -> Result<Self, ElasticError> {
        Self::new(ScalarField::Constant { a: [s, 0.0, s] }, s, s)
    }

    pub fn at(&self, t: usize, x: Point2) -> Sym2 {
        match &self.field {
            ScalarField::Constant { a } => *a,
            ScalarField::PerTriangle { a } => a[t],
            ScalarField::Expression { a11, a12, a22 } => {
                [a11.eval(x.x, x.y), a12.eval(x.x, x.y), a22.eval(x.x, x.y)]
            }
        }
    }

    /// Evaluates at every centroid, rejecting any violation of the bounds.
    pub fn tabulate(&self, mesh: &Mesh) -> Result<Coefficients, ElasticError> {
        check_alphas(self.alpha1, self.alpha2)?;
        if let ScalarField::PerTriangle { a } = &self.field {
            if a.len() != mesh.triangles().len() {
                return Err(ElasticError::Ellipticity(format!(
                    "per-triangle field has {} entries for {} triangles",
                    a.len(),
                    mesh.triangles().len()
                )));
            }
        }
        let table = (0..mesh.triangles().len())
            .map(|t| {
                let c = mesh.centroid(t);
                let a = self.at(t, c);
                if a.iter().all(|v| v.is_finite()) && within_bounds2(a, self.alpha1, self.alpha2) {
                    Ok(a)
                } else {
                    Err(ElasticError::Ellipticity(format!(
                        "a(x) = {a:?} at triangle {t} centroid ({}, {}) violates alpha1 = {}, alpha2 = {}",
                        c.x, c.y, self.alpha1, self.alpha2
                    )))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Coefficients::Scalar(table))
    }
}

impl TensorField {
    fn matrix(&self, t: usize) -> Sym3 {
        match self {
            TensorField::Constant { c } => *c,
            TensorField::Isotropic { mu, lambda } => {
                [mu + lambda, *lambda, 0.0, mu + lambda, 0.0, *mu]
            }
            TensorField::PerTriangle { c } => c[t],
        }
    }
}

impl TensorCoefficientField {
    pub fn new(field: TensorField, alpha1: f64, alpha2: f64) -> Result<Self, ElasticError> {
        check_alphas(alpha1, alpha2)?;
        Ok(Self { field, alpha1, alpha2 })
    }

    /// The identity map on symmetric matrices, `A M : M = |M|²`.
    pub fn identity() -> Self {
        Self {
            field: TensorField::Constant {
                c: [1.0, 0.0, 0.0, 1.0, 0.0, 1.0],
            },
            alpha1: 1.0,
            alpha2: 1.0,
        }
    }

    pub fn tabulate(&self, mesh: &Mesh) -> Result<Coefficients, ElasticError> {
        check_alphas(self.alpha1, self.alpha2)?;
        if let TensorField::PerTriangle { c } = &self.field {
            if c.len() != mesh.triangles().len() {
                return Err(ElasticError::Ellipticity(format!(
                    "per-triangle tensor has {} entries for {} triangles",
                    c.len(),
                    mesh.triangles().len()
                )));
            }
        }
        let table = (0..mesh.triangles().len())
            .map(|t| {
                let m = self.field.matrix(t);
                if m.iter().all(|v| v.is_finite()) && within_bounds3(m, self.alpha1, self.alpha2) {
                    Ok(m)
                } else {
                    Err(ElasticError::Ellipticity(format!(
                        "A(x) = {m:?} at triangle {t} violates alpha1 = {}, alpha2 = {}",
                        self.alpha1, self.alpha2
                    )))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Coefficients::Tensor(table))
    }
}
