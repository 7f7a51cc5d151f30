//! Bulk energies along a crack sequence converging to a limit crack.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::coeff::Coefficients;
use super::cut::cut_mesh;
use super::linsolve::SolverOptions;
use super::mesh::Mesh;
use super::solve::solve;
use super::ElasticError;
use crate::geometry::{hausdorff_distance, CrackSet};

#[derive(Clone, Debug, Serialize)]
pub struct StabilityRow {
    pub index: usize,
    pub hausdorff: f64,
    pub energy: f64,
    /// `|energy − limit_energy|`
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
    pub limit_energy: f64,
    pub gaps_nonincreasing: bool,
    /// Last gap divided by the limit energy (0 when both vanish).
    pub final_relative_gap: f64,
    pub relative_tolerance: f64,
    pub converged: bool,
}

pub fn stability_experiment(
    mesh: &Arc<Mesh>,
    coeffs: &Coefficients,
    g_nodal: &[f64],
    sequence: &[CrackSet],
    limit: &CrackSet,
    relative_tolerance: f64,
) -> Result<StabilityReport, ElasticError> {
    let opts = SolverOptions::default();
    let energy = |k: &CrackSet| -> Result<f64, ElasticError> {
        let disc = cut_mesh(mesh, k)?;
        Ok(solve(&disc, coeffs, g_nodal, &opts)?.bulk_energy)
    };
    let limit_energy = energy(limit)?;
    let domain = mesh.domain();
    let rows = sequence
        .par_iter()
        .enumerate()
        .map(|(index, k)| {
            let e = energy(k)?;
            Ok(StabilityRow {
                index,
                hausdorff: hausdorff_distance(k, limit, &domain),
                energy: e,
                gap: (e - limit_energy).abs(),
            })
        })
        .collect::<Result<Vec<_>, ElasticError>>()?;
    let gaps_nonincreasing = rows.windows(2).all(|w| w[1].gap <= w[0].gap);
    let last = rows.last().map_or(0.0, |r| r.gap);
    let final_relative_gap = if last == 0.0 { 0.0 } else { last / limit_energy.abs() };
    Ok(StabilityReport {
        converged: gaps_nonincreasing && final_relative_gap <= relative_tolerance,
        rows,
        limit_energy,
        gaps_nonincreasing,
        final_relative_gap,
        relative_tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elastic::coeff::ScalarCoefficientField;
    use crate::elastic::load::BoundaryDisplacement;
    use crate::elastic::mesh::{RectangleSpec, Side};

    fn setup() -> (Arc<Mesh>, Coefficients, Vec<f64>) {
        let m = Arc::new(
            Mesh::rectangle(&RectangleSpec {
                x0: 0.0,
                y0: 0.0,
                x1: 1.0,
                y1: 1.0,
                nx: 8,
                ny: 8,
                dirichlet: vec![Side::Bottom, Side::Top],
            })
            .unwrap()
            .with_all_edges_as_crack_graph(false),
        );
        let c = ScalarCoefficientField::isotropic(1.0).unwrap().tabulate(&m).unwrap();
        let g = BoundaryDisplacement::scalar("2*y - 1").unwrap().nodal_values(&m).unwrap();
        (m, c, g)
    }

    #[test]
    fn constant_and_empty_sequences_have_no_gap() {
        let (m, c, g) = setup();
        let k = CrackSet::from_coords(&[[0.25, 0.5, 0.5, 0.5]]).unwrap();
        let r = stability_experiment(&m, &c, &g, &vec![k.clone(); 3], &k, 1e-2).unwrap();
        assert!(r.rows.iter().all(|row| row.gap == 0.0));
        assert!(r.converged);
        let e = CrackSet::empty();
        let r = stability_experiment(&m, &c, &g, &vec![e.clone(); 2], &e, 1e-2).unwrap();
        assert!((r.limit_energy - 4.0).abs() < 1e-12);
        assert!(r.rows.iter().all(|row| row.gap == 0.0));
    }
}
