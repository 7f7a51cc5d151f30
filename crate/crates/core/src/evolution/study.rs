//! Convergence of the discrete evolutions as the time step shrinks, measured
//! against the finest run on a fixed grid of sample times.

use serde::Serialize;

use super::verify::energy_inequality;
use super::{run_evolution, EvolutionError, EvolutionTrace, Scenario, SearchStrategy};
use crate::elastic::solve;
use crate::geometry::hausdorff_distance;
use crate::report::fmt_f64;

#[derive(Clone, Debug, Serialize)]
pub struct StudyRow {
    pub delta: f64,
    pub t: f64,
    pub edges: usize,
    pub bulk: f64,
    pub surface: f64,
    pub hausdorff_gap: f64,
    pub bulk_gap: f64,
    pub surface_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaSummary {
    pub delta: f64,
    pub steps: usize,
    pub rho: f64,
    pub balance_defect: f64,
    pub final_edges: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapViolation {
    pub t: f64,
    pub quantity: &'static str,
    pub delta: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyReport {
    pub deltas: Vec<f64>,
    pub sample_times: Vec<f64>,
    pub rows: Vec<StudyRow>,
    pub summaries: Vec<DeltaSummary>,
    /// Every gap is nonincreasing as δ decreases, at every sample time.
    pub gaps_nonincreasing: bool,
    pub violations: Vec<GapViolation>,
    #[serde(skip)]
    pub traces: Vec<EvolutionTrace>,
}

impl StudyReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,t,edges,bulk,surface,hausdorff_gap,bulk_gap,surface_gap\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                fmt_f64(r.delta),
                fmt_f64(r.t),
                r.edges,
                fmt_f64(r.bulk),
                fmt_f64(r.surface),
                fmt_f64(r.hausdorff_gap),
                fmt_f64(r.bulk_gap),
                fmt_f64(r.surface_gap)
            ));
        }
        out
    }

    pub fn rows_for(&self, delta: f64) -> impl Iterator<Item = &StudyRow> {
        self.rows.iter().filter(move |r| r.delta == delta)
    }
}

/// `k/16` for `k = 0..=16`.
pub fn default_sample_times() -> Vec<f64> {
    (0..=16).map(|k| k as f64 / 16.0).collect()
}

pub fn delta_convergence_study(
    scenario: &Scenario,
    deltas: &[f64],
    strategy: SearchStrategy,
    sample_times: &[f64],
) -> Result<StudyReport, EvolutionError> {
    if deltas.is_empty() {
        return Err(EvolutionError::BadDeltaList("empty".into()));
    }
    if deltas.iter().any(|&d| !(d > 0.0 && d <= 1.0)) || deltas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(EvolutionError::BadDeltaList(format!("{deltas:?}")));
    }
    if !scenario.load.starts_at_zero() {
        return Err(EvolutionError::NonZeroInitialLoad);
    }
    let traces = deltas
        .iter()
        .map(|&d| run_evolution(scenario, d, strategy))
        .collect::<Result<Vec<_>, _>>()?;
    let domain = scenario.mesh().domain();

    // state of each run at each sample time: (edge set, bulk, surface)
    let mut states = Vec::with_capacity(traces.len());
    for tr in &traces {
        let mut row = Vec::with_capacity(sample_times.len());
        for &t in sample_times {
            let i = tr.step_at(t);
            let k = tr.edge_set(i);
            let disc = scenario.discretize(&k)?;
            let bulk = solve(&disc, &scenario.coefficients, &scenario.load.at(t), &scenario.solver)?.bulk_energy;
            row.push((k, bulk, scenario.graph.surface_energy(&tr.edge_set(i))));
        }
        states.push(row);
    }
    let finest = states.last().expect("at least one delta");
    let mut rows = Vec::new();
    for (di, &delta) in deltas.iter().enumerate() {
        for (ti, &t) in sample_times.iter().enumerate() {
            let (k, bulk, surface) = &states[di][ti];
            let (kf, bulk_f, surface_f) = &finest[ti];
            rows.push(StudyRow {
                delta,
                t,
                edges: k.len(),
                bulk: *bulk,
                surface: *surface,
                hausdorff_gap: hausdorff_distance(&scenario.graph.crack_set(k), &scenario.graph.crack_set(kf), &domain),
                bulk_gap: (bulk - bulk_f).abs(),
                surface_gap: (surface - surface_f).abs(),
            });
        }
    }

    let nt = sample_times.len();
    let mut violations = Vec::new();
    for ti in 0..nt {
        for di in 1..deltas.len() {
            let (prev, cur) = (&rows[(di - 1) * nt + ti], &rows[di * nt + ti]);
            let checks: [(&'static str, f64, f64); 3] = [
                ("hausdorff", prev.hausdorff_gap, cur.hausdorff_gap),
                ("bulk", prev.bulk_gap, cur.bulk_gap),
                ("surface", prev.surface_gap, cur.surface_gap),
            ];
            for (quantity, p, c) in checks {
                if c > p + 1e-12 * p.max(1.0) {
                    violations.push(GapViolation {
                        t: sample_times[ti],
                        quantity,
                        delta: deltas[di],
                    });
                }
            }
        }
    }

    let summaries = traces
        .iter()
        .map(|tr| {
            let totals: Vec<f64> = tr.steps.iter().map(|s| s.total).collect();
            let work: Vec<f64> = tr.steps.iter().map(|s| s.work).collect();
            let n = totals.len();
            let total_work: f64 = work[..n - 1].iter().sum();
            DeltaSummary {
                delta: tr.delta,
                steps: n,
                rho: energy_inequality(&totals, &work).rho,
                balance_defect: (totals[n - 1] - totals[0] - total_work).abs(),
                final_edges: tr.steps[n - 1].edges.len(),
            }
        })
        .collect();

    Ok(StudyReport {
        deltas: deltas.to_vec(),
        sample_times: sample_times.to_vec(),
        rows,
        summaries,
        gaps_nonincreasing: violations.is_empty(),
        violations,
        traces,
    })
}
