//! Assembly and solution of the discrete minimum problems
//! `min ∫ a∇v·∇v` (scalar) and `min ∫ A Ev:Ev` (vector) with `v = g` on the
//! Dirichlet dofs that do not lie on the crack.

use rayon::prelude::*;
use serde::Serialize;
use sprs::CsMat;

use super::coeff::{Coefficients, ScalarCoefficientField, TensorCoefficientField};
use super::cut::CrackedDiscretization;
use super::linsolve::{solve_spd, SolverKind, SolverOptions, SymmetricAssembler};
use super::load::{extend_to_dofs, BoundaryDisplacement};
use super::ElasticError;
use crate::report::fmt_f64;

const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveResult {
    /// Dof values, interleaved `[ux, uy]` per dof in the vector case.
    pub dofs: Vec<f64>,
    /// Unknowns per dof: 1 (anti-plane) or 2 (planar).
    pub components: usize,
    pub bulk_energy: f64,
    /// One flag per connected dof component: true when the component carried
    /// too few Dirichlet dofs and was pinned to a zero-energy representative.
    pub floating: Vec<bool>,
    pub residual_norm: f64,
    pub solver: SolverKind,
    /// Size of the linear system actually solved.
    pub n_unknowns: usize,
}

/// Barycentric gradients `(b_k, c_k)` and area of triangle `t`.
fn shape_gradients(disc: &CrackedDiscretization, t: usize) -> ([[f64; 2]; 3], f64) {
    let mesh = disc.mesh();
    let [p0, p1, p2] = mesh.triangles()[t].map(|v| mesh.nodes()[v]);
    let area = mesh.triangle_area(t);
    let inv = 1.0 / (2.0 * area);
    let ps = [p0, p1, p2];
    let mut g = [[0.0; 2]; 3];
    for k in 0..3 {
        let (a, b) = (ps[(k + 1) % 3], ps[(k + 2) % 3]);
        g[k] = [(a.y - b.y) * inv, (b.x - a.x) * inv];
    }
    (g, area)
}

/// Mandel strain rows: column `2k + c` is the strain of unit displacement `c` at vertex `k`.
fn strain_matrix(g: &[[f64; 2]; 3]) -> [[f64; 6]; 3] {
    let mut b = [[0.0; 6]; 3];
    for k in 0..3 {
        let [bx, by] = g[k];
        b[0][2 * k] = bx;
        b[1][2 * k + 1] = by;
        b[2][2 * k] = by * INV_SQRT2;
        b[2][2 * k + 1] = bx * INV_SQRT2;
    }
    b
}

fn sym3_apply(c: &[f64; 6], e: [f64; 3]) -> [f64; 3] {
    let [c11, c12, c13, c22, c23, c33] = *c;
    [
        c11 * e[0] + c12 * e[1] + c13 * e[2],
        c12 * e[0] + c22 * e[1] + c23 * e[2],
        c13 * e[0] + c23 * e[1] + c33 * e[2],
    ]
}

/// Local stiffness of triangle `t`, `3·components` square (upper-left block used for scalars).
fn local_stiffness(disc: &CrackedDiscretization, coeffs: &Coefficients, t: usize) -> [[f64; 6]; 6] {
    let (g, area) = shape_gradients(disc, t);
    let mut k = [[0.0; 6]; 6];
    match coeffs {
        Coefficients::Scalar(a) => {
            let [a11, a12, a22] = a[t];
            for p in 0..3 {
                let ag = [a11 * g[p][0] + a12 * g[p][1], a12 * g[p][0] + a22 * g[p][1]];
                for q in 0..3 {
                    k[p][q] = area * (ag[0] * g[q][0] + ag[1] * g[q][1]);
                }
            }
        }
        Coefficients::Tensor(c) => {
            let b = strain_matrix(&g);
            for p in 0..6 {
                let cb = sym3_apply(&c[t], [b[0][p], b[1][p], b[2][p]]);
                for q in 0..6 {
                    k[p][q] = area * (cb[0] * b[0][q] + cb[1] * b[1][q] + cb[2] * b[2][q]);
                }
            }
        }
    }
    k
}

fn check_shapes(disc: &CrackedDiscretization, coeffs: &Coefficients) -> Result<(), ElasticError> {
    let nt = disc.mesh().triangles().len();
    if coeffs.n_triangles() != nt {
        return Err(ElasticError::DofMismatch {
            expected: nt,
            got: coeffs.n_triangles(),
        });
    }
    Ok(())
}

/// `∫ a∇u·∇w` or `∫ A Eu:Ew` for dof vectors on the same discretization.
pub fn energy_inner_product(
    disc: &CrackedDiscretization,
    coeffs: &Coefficients,
    u: &[f64],
    w: &[f64],
) -> Result<f64, ElasticError> {
    check_shapes(disc, coeffs)?;
    let c = coeffs.components();
    let expected = disc.n_dofs() * c;
    for v in [u, w] {
        if v.len() != expected {
            return Err(ElasticError::DofMismatch { expected, got: v.len() });
        }
    }
    let tri_dofs = disc.triangle_dofs();
    let total = (0..tri_dofs.len())
        .into_par_iter()
        .map(|t| {
            let (g, area) = shape_gradients(disc, t);
            let d = tri_dofs[t];
            match coeffs {
                Coefficients::Scalar(a) => {
                    let grad = |v: &[f64]| {
                        let mut s = [0.0; 2];
                        for k in 0..3 {
                            s[0] += v[d[k]] * g[k][0];
                            s[1] += v[d[k]] * g[k][1];
                        }
                        s
                    };
                    let (gu, gw) = (grad(u), grad(w));
                    let [a11, a12, a22] = a[t];
                    area * (gu[0] * (a11 * gw[0] + a12 * gw[1]) + gu[1] * (a12 * gw[0] + a22 * gw[1]))
                }
                Coefficients::Tensor(cm) => {
                    let b = strain_matrix(&g);
                    let strain = |v: &[f64]| {
                        let mut e = [0.0; 3];
                        for k in 0..3 {
                            for comp in 0..2 {
                                let val = v[2 * d[k] + comp];
                                for r in 0..3 {
                                    e[r] += b[r][2 * k + comp] * val;
                                }
                            }
                        }
                        e
                    };
                    let (eu, ew) = (strain(u), strain(w));
                    let ce = sym3_apply(&cm[t], ew);
                    area * (eu[0] * ce[0] + eu[1] * ce[1] + eu[2] * ce[2])
                }
            }
        })
        .collect::<Vec<f64>>();
    // fixed-order summation keeps results independent of the thread count
    Ok(total.iter().sum())
}

/// Full stiffness matrix over every dof, boundary conditions ignored.
pub fn stiffness_matrix(disc: &CrackedDiscretization, coeffs: &Coefficients) -> Result<CsMat<f64>, ElasticError> {
    check_shapes(disc, coeffs)?;
    let c = coeffs.components();
    let locals: Vec<[[f64; 6]; 6]> = (0..disc.mesh().triangles().len())
        .into_par_iter()
        .map(|t| local_stiffness(disc, coeffs, t))
        .collect();
    let mut asm = SymmetricAssembler::new(disc.n_dofs() * c);
    for (t, k) in locals.iter().enumerate() {
        let gl = global_indices(disc.triangle_dofs()[t], c);
        for p in 0..3 * c {
            for q in p..3 * c {
                asm.add(gl[p], gl[q], k[p][q]);
            }
        }
    }
    Ok(asm.finish())
}

fn global_indices(d: [usize; 3], c: usize) -> [usize; 6] {
    let mut gl = [0; 6];
    for k in 0..3 {
        for comp in 0..c {
            gl[c * k + comp] = c * d[k] + comp;
        }
    }
    gl
}

/// Solves on a cracked discretization given tabulated coefficients and the
/// nodal values of the boundary datum (length `n_nodes · components`).
pub fn solve(
    disc: &CrackedDiscretization,
    coeffs: &Coefficients,
    g_nodal: &[f64],
    opts: &SolverOptions,
) -> Result<SolveResult, ElasticError> {
    check_shapes(disc, coeffs)?;
    let c = coeffs.components();
    let gext = extend_to_dofs(disc, g_nodal, c)?;
    let n = disc.n_dofs();
    let comp_of = disc.component_of_dof();
    let dirichlet = disc.dirichlet_dofs();

    // Dirichlet dofs per dof component: the first one is remembered for pinning
    let mut count = vec![0usize; disc.n_components()];
    let mut first = vec![usize::MAX; disc.n_components()];
    for d in 0..n {
        if dirichlet[d] {
            let k = comp_of[d];
            count[k] += 1;
            if first[k] == usize::MAX {
                first[k] = d;
            }
        }
    }
    // scalar: a single Dirichlet dof fixes constants; vector: two are needed
    // to remove the infinitesimal rotation
    let needed = if c == 1 { 1 } else { 2 };
    let floating: Vec<bool> = count.iter().map(|&k| k < needed).collect();

    let mut x = vec![0.0; n * c];
    let mut unknown = vec![usize::MAX; n * c];
    let mut n_unknowns = 0;
    for d in 0..n {
        let k = comp_of[d];
        for comp in 0..c {
            let i = c * d + comp;
            if dirichlet[d] {
                x[i] = gext[i];
            } else if floating[k] {
                // zero-energy representative: 0, or the translation by the one prescribed value
                x[i] = if count[k] == 1 { gext[c * first[k] + comp] } else { 0.0 };
            } else {
                unknown[i] = n_unknowns;
                n_unknowns += 1;
            }
        }
    }

    let locals: Vec<[[f64; 6]; 6]> = (0..disc.mesh().triangles().len())
        .into_par_iter()
        .map(|t| local_stiffness(disc, coeffs, t))
        .collect();
    let mut asm = SymmetricAssembler::new(n_unknowns);
    let mut rhs = vec![0.0; n_unknowns];
    for (t, k) in locals.iter().enumerate() {
        let gl = global_indices(disc.triangle_dofs()[t], c);
        for p in 0..3 * c {
            let up = unknown[gl[p]];
            if up == usize::MAX {
                continue;
            }
            for q in 0..3 * c {
                let uq = unknown[gl[q]];
                if uq == usize::MAX {
                    rhs[up] -= k[p][q] * x[gl[q]];
                } else if q >= p {
                    asm.add(up, uq, k[p][q]);
                }
            }
        }
    }
    let a = asm.finish();
    let (sol, residual_norm, solver) = solve_spd(&a, &rhs, opts)?;
    for i in 0..n * c {
        if unknown[i] != usize::MAX {
            x[i] = sol[unknown[i]];
        }
    }
    let bulk_energy = energy_inner_product(disc, coeffs, &x, &x)?.max(0.0);
    Ok(SolveResult {
        dofs: x,
        components: c,
        bulk_energy,
        floating,
        residual_norm,
        solver,
        n_unknowns,
    })
}

pub fn solve_antiplanar(
    disc: &CrackedDiscretization,
    a: &ScalarCoefficientField,
    g: &BoundaryDisplacement,
) -> Result<SolveResult, ElasticError> {
    if g.components() != 1 {
        return Err(ElasticError::ComponentMismatch {
            coefficient: 1,
            load: g.components(),
        });
    }
    let coeffs = a.tabulate(disc.mesh())?;
    let nodal = g.nodal_values(disc.mesh())?;
    solve(disc, &coeffs, &nodal, &SolverOptions::default())
}

pub fn solve_planar(
    disc: &CrackedDiscretization,
    a: &TensorCoefficientField,
    g: &BoundaryDisplacement,
) -> Result<SolveResult, ElasticError> {
    if g.components() != 2 {
        return Err(ElasticError::ComponentMismatch {
            coefficient: 2,
            load: g.components(),
        });
    }
    let coeffs = a.tabulate(disc.mesh())?;
    let nodal = g.nodal_values(disc.mesh())?;
    solve(disc, &coeffs, &nodal, &SolverOptions::default())
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveSummary {
    pub bulk_energy: f64,
    pub residual_norm: f64,
    pub solver: SolverKind,
    pub n_dofs: usize,
    pub n_unknowns: usize,
    pub n_duplicated_nodes: usize,
    pub n_components: usize,
    pub floating: Vec<bool>,
}

impl SolveResult {
    pub fn summary(&self, disc: &CrackedDiscretization) -> SolveSummary {
        SolveSummary {
            bulk_energy: self.bulk_energy,
            residual_norm: self.residual_norm,
            solver: self.solver,
            n_dofs: disc.n_dofs(),
            n_unknowns: self.n_unknowns,
            n_duplicated_nodes: disc.n_duplicated(),
            n_components: disc.n_components(),
            floating: self.floating.clone(),
        }
    }

    /// One row per dof: `dof,node,x,y,u` or `dof,node,x,y,ux,uy`.
    pub fn dof_csv(&self, disc: &CrackedDiscretization) -> String {
        let mut out = String::from(if self.components == 1 {
            "dof,node,x,y,u\n"
        } else {
            "dof,node,x,y,ux,uy\n"
        });
        for (d, &v) in disc.dof_node().iter().enumerate() {
            let p = disc.mesh().nodes()[v];
            out.push_str(&format!("{d},{v},{},{}", fmt_f64(p.x), fmt_f64(p.y)));
            for comp in 0..self.components {
                out.push(',');
                out.push_str(&fmt_f64(self.dofs[self.components * d + comp]));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::elastic::cut::cut_mesh;
    use crate::elastic::mesh::{Mesh, RectangleSpec, Side};
    use crate::geometry::CrackSet;

    fn square(n: usize, dirichlet: Vec<Side>) -> Arc<Mesh> {
        Arc::new(
            Mesh::rectangle(&RectangleSpec {
                x0: 0.0,
                y0: 0.0,
                x1: 1.0,
                y1: 1.0,
                nx: n,
                ny: n,
                dirichlet,
            })
            .unwrap()
            .with_all_edges_as_crack_graph(false),
        )
    }

    fn all_sides() -> Vec<Side> {
        vec![Side::Left, Side::Right, Side::Bottom, Side::Top]
    }

    #[test]
    fn linear_datum_is_reproduced() {
        let m = square(4, all_sides());
        let d = cut_mesh(&m, &CrackSet::empty()).unwrap();
        let r = solve_antiplanar(&d, &ScalarCoefficientField::isotropic(1.0).unwrap(), &BoundaryDisplacement::scalar("x").unwrap()).unwrap();
        assert!((r.bulk_energy - 1.0).abs() < 1e-12);
        for (i, p) in m.nodes().iter().enumerate() {
            assert!((r.dofs[i] - p.x).abs() < 1e-13);
        }
        let r2 = solve_antiplanar(&d, &ScalarCoefficientField::isotropic(2.0).unwrap(), &BoundaryDisplacement::scalar("x").unwrap()).unwrap();
        assert!((r2.bulk_energy - 2.0).abs() < 1e-12);
    }

    #[test]
    fn separated_floating_half() {
        let m = square(4, vec![Side::Bottom]);
        let k = CrackSet::from_coords(&[[0.0, 0.5, 1.0, 0.5]]).unwrap();
        let d = cut_mesh(&m, &k).unwrap();
        let r = solve_antiplanar(&d, &ScalarCoefficientField::isotropic(1.0).unwrap(), &BoundaryDisplacement::scalar("1").unwrap()).unwrap();
        assert!(r.bulk_energy < 1e-24);
        assert_eq!(r.floating.iter().filter(|&&f| f).count(), 1);
        for (dof, &node) in d.dof_node().iter().enumerate() {
            let y = m.nodes()[node].y;
            let floating = r.floating[d.component_of_dof()[dof]];
            if y < 0.5 {
                assert!(!floating);
                assert!((r.dofs[dof] - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn planar_affine_and_rotation() {
        let m = square(4, all_sides());
        let d = cut_mesh(&m, &CrackSet::empty()).unwrap();
        let id = TensorCoefficientField::identity();
        let r = solve_planar(&d, &id, &BoundaryDisplacement::vector("x", "0").unwrap()).unwrap();
        assert!((r.bulk_energy - 1.0).abs() < 1e-12);
        let rot = solve_planar(&d, &id, &BoundaryDisplacement::vector("-y", "x").unwrap()).unwrap();
        assert!(rot.bulk_energy <= 1e-12);
    }

    #[test]
    fn planar_floating_component() {
        let m = square(4, vec![Side::Bottom]);
        let k = CrackSet::from_coords(&[[0.0, 0.5, 1.0, 0.5]]).unwrap();
        let d = cut_mesh(&m, &k).unwrap();
        let r = solve_planar(&d, &TensorCoefficientField::identity(), &BoundaryDisplacement::vector("0", "0").unwrap()).unwrap();
        assert_eq!(r.bulk_energy, 0.0);
        assert_eq!(r.floating, vec![false, true]);
    }

    #[test]
    fn load_kind_must_match() {
        let m = square(2, all_sides());
        let d = cut_mesh(&m, &CrackSet::empty()).unwrap();
        let err = solve_planar(&d, &TensorCoefficientField::identity(), &BoundaryDisplacement::scalar("x").unwrap());
        assert!(matches!(err, Err(ElasticError::ComponentMismatch { .. })));
    }

    #[test]
    fn csv_has_one_row_per_dof() {
        let m = square(2, all_sides());
        let d = cut_mesh(&m, &CrackSet::empty()).unwrap();
        let r = solve_antiplanar(&d, &ScalarCoefficientField::isotropic(1.0).unwrap(), &BoundaryDisplacement::scalar("y").unwrap()).unwrap();
        assert_eq!(r.dof_csv(&d).lines().count(), d.n_dofs() + 1);
    }
}
