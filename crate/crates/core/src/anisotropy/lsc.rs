//! Numerical lower-semicontinuity experiments: evaluate `F` along a crack
//! sequence converging in the Hausdorff metric and compare with `F(limit)`.

use serde::Serialize;

use super::{surface_energy, AnisotropyField};
use crate::geometry::{hausdorff_distance, CrackSet, DomainBox, Point2};
use crate::report::fmt_f64;

/// Slack in `F(K) <= inf_tail F(K_n)`.
pub const LSC_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub enum FamilyGenerator {
    /// `K_n = K` for every `n`.
    Constant(CrackSet),
    /// `n` right-then-up steps from (0,0) to (1,1), converging to the diagonal.
    Staircase,
    /// `n` triangular teeth of height `1/(2n)` on the segment `y = 1/2`.
    Sawtooth,
}

#[derive(Clone, Debug)]
pub struct ConvergentFamily {
    generator: FamilyGenerator,
    limit: CrackSet,
    domain: DomainBox,
}

impl ConvergentFamily {
    pub fn constant(k: CrackSet, domain: DomainBox) -> Self {
        Self {
            generator: FamilyGenerator::Constant(k.clone()),
            limit: k,
            domain,
        }
    }

    pub fn staircase() -> Self {
        let limit = CrackSet::polyline(&[Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)])
            .expect("diagonal is a valid crack");
        Self {
            generator: FamilyGenerator::Staircase,
            limit,
            domain: DomainBox::unit_square(),
        }
    }

    pub fn sawtooth() -> Self {
        let limit = CrackSet::polyline(&[Point2::new(0.0, 0.5), Point2::new(1.0, 0.5)])
            .expect("midline is a valid crack");
        Self {
            generator: FamilyGenerator::Sawtooth,
            limit,
            domain: DomainBox::unit_square(),
        }
    }

    /// Every generator shipped with the library.
    pub fn builtin() -> Vec<(&'static str, ConvergentFamily)> {
        vec![
            ("staircase", Self::staircase()),
            ("sawtooth", Self::sawtooth()),
            (
                "constant",
                Self::constant(
                    CrackSet::polyline(&[
                        Point2::new(0.2, 0.2),
                        Point2::new(0.6, 0.3),
                        Point2::new(0.7, 0.8),
                    ])
                    .expect("valid polyline"),
                    DomainBox::unit_square(),
                ),
            ),
        ]
    }

    pub fn by_name(name: &str) -> Option<ConvergentFamily> {
        Self::builtin().into_iter().find(|(n, _)| *n == name).map(|(_, f)| f)
    }

    pub fn generator(&self) -> &FamilyGenerator {
        &self.generator
    }

    pub fn limit(&self) -> &CrackSet {
        &self.limit
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    /// The `n`-th member, `n >= 1`.
    pub fn member(&self, n: usize) -> CrackSet {
        let n = n.max(1);
        let h = 1.0 / n as f64;
        match &self.generator {
            FamilyGenerator::Constant(k) => k.clone(),
            FamilyGenerator::Staircase => {
                let mut pts = Vec::with_capacity(2 * n + 1);
                pts.push(Point2::new(0.0, 0.0));
                for k in 0..n {
                    let x = if k + 1 == n { 1.0 } else { (k + 1) as f64 * h };
                    pts.push(Point2::new(x, k as f64 * h));
                    pts.push(Point2::new(x, x));
                }
                CrackSet::polyline(&pts).expect("staircase is a valid polyline")
            }
            FamilyGenerator::Sawtooth => {
                let mut pts = Vec::with_capacity(2 * n + 1);
                pts.push(Point2::new(0.0, 0.5));
                for k in 0..n {
                    pts.push(Point2::new((k as f64 + 0.5) * h, 0.5 + 0.5 * h));
                    let x = if k + 1 == n { 1.0 } else { (k + 1) as f64 * h };
                    pts.push(Point2::new(x, 0.5));
                }
                CrackSet::polyline(&pts).expect("sawtooth is a valid polyline")
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LscRow {
    pub n: usize,
    pub hausdorff: f64,
    pub energy: f64,
    /// `min_{k >= n} F(K_k)` over the generated range.
    pub running_infimum: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LscReport {
    pub rows: Vec<LscRow>,
    /// First index of the tail, `ceil(n_max / 2)`.
    pub tail_start: usize,
    pub tail_infimum: f64,
    pub limit_energy: f64,
    /// `tail_infimum - limit_energy`
    pub gap: f64,
    pub lower_semicontinuous: bool,
    /// Hausdorff distances never increased along the sequence.
    pub hausdorff_nonincreasing: bool,
}

impl LscReport {
    /// Rows `n,hausdorff,energy` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,hausdorff,energy\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.n, fmt_f64(r.hausdorff), fmt_f64(r.energy)));
        }
        out
    }
}

pub fn lsc_experiment(family: &ConvergentFamily, phi: &AnisotropyField, n_max: usize) -> LscReport {
    let n_max = n_max.max(1);
    let limit_energy = surface_energy(family.limit(), phi);
    let mut rows: Vec<LscRow> = (1..=n_max)
        .map(|n| {
            let k = family.member(n);
            LscRow {
                n,
                hausdorff: hausdorff_distance(&k, family.limit(), family.domain()),
                energy: surface_energy(&k, phi),
                running_infimum: f64::INFINITY,
            }
        })
        .collect();
    let mut inf = f64::INFINITY;
    for r in rows.iter_mut().rev() {
        inf = inf.min(r.energy);
        r.running_infimum = inf;
    }
    let tail_start = n_max.div_ceil(2);
    let tail_infimum = rows[tail_start - 1].running_infimum;
    let hausdorff_nonincreasing = rows
        .windows(2)
        .all(|w| w[1].hausdorff <= w[0].hausdorff + crate::geometry::HAUSDORFF_TOL);
    LscReport {
        rows,
        tail_start,
        tail_infimum,
        limit_energy,
        gap: tail_infimum - limit_energy,
        lower_semicontinuous: limit_energy <= tail_infimum + LSC_TOL,
        hausdorff_nonincreasing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{connected_components, h1_measure};

    #[test]
    fn constant_family_is_an_equality() {
        let family = ConvergentFamily::by_name("constant").unwrap();
        let r = lsc_experiment(&family, &AnisotropyField::euclidean(), 8);
        assert!(r.lower_semicontinuous);
        assert_eq!(r.gap, 0.0);
        assert!(r.rows.iter().all(|row| row.hausdorff == 0.0));
    }

    #[test]
    fn staircase_euclidean_has_strict_gap() {
        let r = lsc_experiment(&ConvergentFamily::staircase(), &AnisotropyField::euclidean(), 16);
        assert!(r.rows.iter().all(|row| (row.energy - 2.0).abs() < 1e-12));
        assert!((r.limit_energy - 2f64.sqrt()).abs() < 1e-12);
        assert!((r.gap - (2.0 - 2f64.sqrt())).abs() < 1e-9);
        assert!(r.lower_semicontinuous && r.hausdorff_nonincreasing);
    }

    #[test]
    fn staircase_crystalline_attains_equality() {
        let phi = AnisotropyField::crystalline([1.0, 0.0], [0.0, 1.0]).unwrap();
        let r = lsc_experiment(&ConvergentFamily::staircase(), &phi, 16);
        assert!(r.rows.iter().all(|row| (row.energy - 2.0).abs() < 1e-12));
        assert!((r.limit_energy - 2.0).abs() < 1e-12);
        assert!(r.gap.abs() < 1e-12 && r.lower_semicontinuous);
    }

    #[test]
    fn sawtooth_members() {
        let f = ConvergentFamily::sawtooth();
        for n in [1, 3, 10] {
            let k = f.member(n);
            assert_eq!(connected_components(&k), 1);
            assert!((h1_measure(&k) - 2f64.sqrt()).abs() < 1e-12);
        }
        let r = lsc_experiment(&f, &AnisotropyField::euclidean(), 12);
        assert!(r.hausdorff_nonincreasing);
        assert!((r.rows[3].hausdorff - 1.0 / 8.0).abs() < 1e-9);
    }

    #[test]
    fn csv_layout() {
        let r = lsc_experiment(&ConvergentFamily::staircase(), &AnisotropyField::euclidean(), 2);
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,hausdorff,energy"));
        assert_eq!(lines.next().unwrap().split(',').count(), 3);
    }
}
