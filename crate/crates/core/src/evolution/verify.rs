//! Checks a finished trace against the properties of a quasi-static
//! evolution: irreversibility, feasibility, per-step minimality, the
//! discrete energy inequality and the energy balance.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use super::{incremental_step, tie_tolerance, EvolutionError, EvolutionTrace, Scenario, SearchStrategy, EXHAUSTIVE_LIMIT};
use crate::elastic::energy_inner_product;
use crate::elastic::load::extend_to_dofs;

/// Relative slack for identities that hold up to rounding.
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    /// Steps checked against every admissible superset; `None` checks all
    /// steps whose free-edge count allows exhaustive enumeration.
    pub minimality_steps: Option<Vec<usize>>,
    /// Skip the exhaustive minimality check entirely.
    pub skip_minimality: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimalityViolation {
    pub step: usize,
    pub better_edges: Vec<usize>,
    pub better_total: f64,
    pub step_total: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyInequality {
    /// `max_{i<j} (E_j − E_i − Σ_{k=i}^{j−1} work_k)`, clamped at zero.
    pub rho: f64,
    pub worst_pair: Option<(usize, usize)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyBalance {
    pub delta: f64,
    pub total_work: f64,
    /// `|E_N − E_0 − Σ work|`
    pub defect: f64,
    /// `defect / δ`
    pub constant: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub steps: usize,
    /// The first crack contains the initial crack.
    pub contains_initial: bool,
    /// Steps `i` with `K_i ⊄ K_{i+1}`.
    pub monotonicity_violations: Vec<usize>,
    /// Steps with unknown edge ids or more than `m` components.
    pub feasibility_violations: Vec<usize>,
    /// Steps whose stored energies disagree with a fresh solve.
    pub consistency_violations: Vec<usize>,
    pub max_decomposition_error: f64,
    pub minimality_checked: Vec<usize>,
    pub minimality_violations: Vec<MinimalityViolation>,
    /// Steps `i` with `E(g_i, K_{i+1}) < E(g_i, K_i)`.
    pub forward_minimality_violations: Vec<usize>,
    /// Steps whose bulk energy exceeds the energy of the boundary datum itself.
    pub bound_violations: Vec<usize>,
    /// With `g(0) = 0`: step 0 keeps the initial crack and `E_0 = F(K_0)`.
    pub step0_ok: Option<bool>,
    pub energy_inequality: EnergyInequality,
    pub energy_balance: EnergyBalance,
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Worst window residual of the step inequality.
pub fn energy_inequality(totals: &[f64], work: &[f64]) -> EnergyInequality {
    let mut rho = 0.0;
    let mut worst = None;
    for i in 0..totals.len() {
        let mut acc = 0.0;
        for j in i + 1..totals.len() {
            acc += work[j - 1];
            let r = totals[j] - totals[i] - acc;
            if r > rho {
                rho = r;
                worst = Some((i, j));
            }
        }
    }
    EnergyInequality { rho, worst_pair: worst }
}

pub fn verify_trace(trace: &EvolutionTrace, scenario: &Scenario, opts: &VerifyOptions) -> Result<VerificationReport, EvolutionError> {
    let n = trace.steps.len();
    let graph = &scenario.graph;
    let sets: Vec<BTreeSet<usize>> = (0..n).map(|i| trace.edge_set(i)).collect();
    let valid: Vec<bool> = sets.iter().map(|k| k.iter().all(|&e| e < graph.n_edges())).collect();

    let initial: BTreeSet<usize> = trace.initial_edges.iter().copied().collect();
    let contains_initial = n == 0 || initial.is_subset(&sets[0]);
    let monotonicity_violations: Vec<usize> = (0..n.saturating_sub(1))
        .filter(|&i| !sets[i].is_subset(&sets[i + 1]))
        .collect();
    let feasibility_violations: Vec<usize> = (0..n).filter(|&i| !valid[i] || !graph.is_admissible(&sets[i])).collect();

    let max_decomposition_error = trace
        .steps
        .iter()
        .map(|s| (s.total - s.bulk - s.surface).abs() / s.total.abs().max(1.0))
        .fold(0.0, f64::max);

    let loads: Vec<Vec<f64>> = trace.steps.iter().map(|s| scenario.load.at(s.t)).collect();

    // recompute each valid step; returns (energy consistent, bound holds)
    let recomputed = (0..n)
        .into_par_iter()
        .map(|i| {
            if !valid[i] {
                return Ok((true, true));
            }
            let ev = scenario.evaluate(&sets[i], &loads[i])?;
            let s = &trace.steps[i];
            let consistent = rel_close(ev.energy.bulk, s.bulk, 1e-9) && rel_close(ev.energy.surface, s.surface, 1e-9);
            let gext = extend_to_dofs(&ev.disc, &loads[i], scenario.load.components())?;
            let g_energy = energy_inner_product(&ev.disc, &scenario.coefficients, &gext, &gext)?;
            let bound = ev.energy.bulk <= g_energy + IDENTITY_TOL * g_energy.max(1.0);
            Ok((consistent, bound))
        })
        .collect::<Result<Vec<_>, crate::elastic::ElasticError>>()?;
    let consistency_violations: Vec<usize> = (0..n).filter(|&i| !recomputed[i].0).collect();
    let bound_violations: Vec<usize> = (0..n).filter(|&i| !recomputed[i].1).collect();

    let forward = (0..n.saturating_sub(1))
        .into_par_iter()
        .map(|i| {
            if !valid[i] || !valid[i + 1] {
                return Ok(false);
            }
            let here = scenario.evaluate(&sets[i], &loads[i])?.energy.total;
            let next = scenario.evaluate(&sets[i + 1], &loads[i])?.energy.total;
            Ok(next < here - tie_tolerance(here))
        })
        .collect::<Result<Vec<_>, crate::elastic::ElasticError>>()?;
    let forward_minimality_violations: Vec<usize> = (0..forward.len()).filter(|&i| forward[i]).collect();

    let mut minimality_checked = Vec::new();
    let mut minimality_violations = Vec::new();
    if !opts.skip_minimality {
        let steps: Vec<usize> = match &opts.minimality_steps {
            Some(s) => s.iter().copied().filter(|&i| i < n).collect(),
            None => (0..n)
                .filter(|&i| valid[i] && scenario.free_edges(&sets[i]).len() <= EXHAUSTIVE_LIMIT)
                .collect(),
        };
        for i in steps {
            if !valid[i] {
                continue;
            }
            let best = incremental_step(scenario, &sets[i], &loads[i], SearchStrategy::Exhaustive)?;
            minimality_checked.push(i);
            let e = trace.steps[i].total;
            if best.evaluation.energy.total < e - tie_tolerance(e) {
                minimality_violations.push(MinimalityViolation {
                    step: i,
                    better_edges: best.edges.iter().copied().collect(),
                    better_total: best.evaluation.energy.total,
                    step_total: e,
                });
            }
        }
    }

    let step0_ok = if scenario.load.starts_at_zero() && n > 0 {
        let f0 = graph.surface_energy(&initial);
        Some(sets[0] == initial && trace.steps[0].bulk == 0.0 && rel_close(trace.steps[0].total, f0, IDENTITY_TOL))
    } else {
        None
    };

    let totals: Vec<f64> = trace.steps.iter().map(|s| s.total).collect();
    let work: Vec<f64> = trace.steps.iter().map(|s| s.work).collect();
    let energy_inequality = energy_inequality(&totals, &work);
    let total_work: f64 = work[..n.saturating_sub(1)].iter().sum();
    let defect = if n > 0 { (totals[n - 1] - totals[0] - total_work).abs() } else { 0.0 };
    let energy_balance = EnergyBalance {
        delta: trace.delta,
        total_work,
        defect,
        constant: defect / trace.delta,
    };

    let passed = contains_initial
        && monotonicity_violations.is_empty()
        && feasibility_violations.is_empty()
        && consistency_violations.is_empty()
        && max_decomposition_error <= IDENTITY_TOL
        && minimality_violations.is_empty()
        && forward_minimality_violations.is_empty()
        && bound_violations.is_empty()
        && step0_ok != Some(false);

    Ok(VerificationReport {
        passed,
        steps: n,
        contains_initial,
        monotonicity_violations,
        feasibility_violations,
        consistency_violations,
        max_decomposition_error,
        minimality_checked,
        minimality_violations,
        forward_minimality_violations,
        bound_violations,
        step0_ok,
        energy_inequality,
        energy_balance,
    })
}
