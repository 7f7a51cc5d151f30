//! Anisotropic, inhomogeneous surface energy densities and the crack
//! functional `F(K) = ∫_K φ(x, ν_x) dH¹`.
//!
//! Every field is validated at construction: positive 1-homogeneity,
//! evenness, midpoint convexity in `ν`, and the two-sided bound
//! `c1|ν| ≤ φ(x, ν) ≤ c2|ν|` are sampled over the region the field will be
//! evaluated on. Evaluation itself never fails except for a zero normal.

pub mod lsc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::Expr2;
use crate::geometry::{CrackSet, GeometryError, Point2, Segment, UnitNormal};

/// Number of random samples drawn by field validation.
pub const VALIDATION_SAMPLES: usize = 1000;
/// Slack allowed in the sampled midpoint-convexity check.
pub const CONVEXITY_TOL: f64 = 1e-10;
/// Relative slack in the homogeneity, evenness and bound checks.
pub const BOUND_TOL: f64 = 1e-12;

/// 5-point Gauss-Legendre nodes and weights on `[-1, 1]`.
const GL_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_W: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];
/// Relative accuracy of the per-segment integral for position-dependent densities.
const QUAD_TOL: f64 = 1e-14;
const QUAD_MAX_DEPTH: u32 = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnisotropyError {
    #[error("surface bounds must satisfy 0 < c1 <= c2 (got c1 = {c1}, c2 = {c2})")]
    BadBounds { c1: f64, c2: f64 },
    #[error("crystalline vectors p and q are parallel; the density is not coercive")]
    ParallelCrystalVectors,
    #[error("metric is not symmetric positive definite at ({x}, {y})")]
    MetricNotSpd { x: f64, y: f64 },
    #[error("metric grid: {0}")]
    Grid(String),
    #[error("density violates c1|nu| <= phi <= c2|nu| at x = ({x}, {y}), nu = ({nx}, {ny}): phi = {phi}")]
    BoundViolation { x: f64, y: f64, nx: f64, ny: f64, phi: f64 },
    #[error("density is not positively 1-homogeneous at x = ({x}, {y})")]
    NotHomogeneous { x: f64, y: f64 },
    #[error("density is not even at x = ({x}, {y})")]
    NotEven { x: f64, y: f64 },
    #[error("density fails midpoint convexity at x = ({x}, {y}) by {excess}")]
    NotConvex { x: f64, y: f64, excess: f64 },
    #[error("zero normal vector")]
    ZeroNormal,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Symmetric 2x2 metric field `M(x)` stored as `[m11, m12, m22]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MetricField {
    Constant {
        m: [f64; 3],
    },
    Expression {
        m11: Expr2,
        m12: Expr2,
        m22: Expr2,
    },
    /// Bilinear interpolation on a rectilinear grid; values are row-major
    /// with `ys.len()` rows of `xs.len()` entries. Points outside the grid are
    /// clamped to its rectangle.
    Grid {
        xs: Vec<f64>,
        ys: Vec<f64>,
        m11: Vec<f64>,
        m12: Vec<f64>,
        m22: Vec<f64>,
    },
}

impl MetricField {
    pub fn at(&self, p: Point2) -> [f64; 3] {
        match self {
            MetricField::Constant { m } => *m,
            MetricField::Expression { m11, m12, m22 } => {
                [m11.eval(p.x, p.y), m12.eval(p.x, p.y), m22.eval(p.x, p.y)]
            }
            MetricField::Grid { xs, ys, m11, m12, m22 } => {
                let (i, sx) = locate(xs, p.x);
                let (j, sy) = locate(ys, p.y);
                let nx = xs.len();
                let interp = |v: &[f64]| {
                    let at = |ii: usize, jj: usize| v[jj * nx + ii];
                    let i1 = (i + 1).min(nx - 1);
                    let j1 = (j + 1).min(ys.len() - 1);
                    (1.0 - sx) * (1.0 - sy) * at(i, j)
                        + sx * (1.0 - sy) * at(i1, j)
                        + (1.0 - sx) * sy * at(i, j1)
                        + sx * sy * at(i1, j1)
                };
                [interp(m11), interp(m12), interp(m22)]
            }
        }
    }

    fn check_structure(&self) -> Result<(), AnisotropyError> {
        match self {
            MetricField::Constant { m } => check_spd(*m, Point2::default()),
            MetricField::Expression { .. } => Ok(()),
            MetricField::Grid { xs, ys, m11, m12, m22 } => {
                if xs.is_empty() || ys.is_empty() {
                    return Err(AnisotropyError::Grid("empty axis".into()));
                }
                let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
                if !increasing(xs) || !increasing(ys) {
                    return Err(AnisotropyError::Grid("axes must be strictly increasing".into()));
                }
                let n = xs.len() * ys.len();
                if m11.len() != n || m12.len() != n || m22.len() != n {
                    return Err(AnisotropyError::Grid(format!(
                        "expected {n} values per component"
                    )));
                }
                for j in 0..ys.len() {
                    for i in 0..xs.len() {
                        let k = j * xs.len() + i;
                        check_spd([m11[k], m12[k], m22[k]], Point2::new(xs[i], ys[j]))?;
                    }
                }
                Ok(())
            }
        }
    }
}

/// Index of the cell containing `x` (clamped) and the local coordinate in it.
fn locate(axis: &[f64], x: f64) -> (usize, f64) {
    let n = axis.len();
    if n == 1 || x <= axis[0] {
        return (0, 0.0);
    }
    if x >= axis[n - 1] {
        return (n - 1, 0.0);
    }
    let i = axis.partition_point(|&a| a <= x) - 1;
    (i, (x - axis[i]) / (axis[i + 1] - axis[i]))
}

fn check_spd(m: [f64; 3], at: Point2) -> Result<(), AnisotropyError> {
    let [a, b, c] = m;
    if !(a.is_finite() && b.is_finite() && c.is_finite()) || a <= 0.0 || a * c - b * b <= 0.0 {
        return Err(AnisotropyError::MetricNotSpd { x: at.x, y: at.y });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "snake_case")]
pub enum PhiKind {
    /// `φ(x, ν) = |ν|`
    Euclidean,
    /// `φ(ν) = |p·ν| + |q·ν|`
    Crystalline { p: [f64; 2], q: [f64; 2] },
    /// `φ(x, ν) = sqrt(ν·M(x)ν)`
    WeightedNorm { metric: MetricField },
}

/// Serialized form: `{"kind": ..., "parameters": ..., "c1": ..., "c2": ...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnisotropyConfig {
    #[serde(flatten)]
    pub kind: PhiKind,
    pub c1: f64,
    pub c2: f64,
}

/// A validated surface energy density.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(into = "AnisotropyConfig")]
pub struct AnisotropyField {
    kind: PhiKind,
    c1: f64,
    c2: f64,
}

impl From<AnisotropyField> for AnisotropyConfig {
    fn from(f: AnisotropyField) -> Self {
        AnisotropyConfig {
            kind: f.kind,
            c1: f.c1,
            c2: f.c2,
        }
    }
}

/// Which of the two unit normals is fed to the density.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum NormalSign {
    #[default]
    Canonical,
    Flipped,
}

impl AnisotropyField {
    /// Validates `config` by sampling points of `region = [xmin, ymin, xmax, ymax]`.
    pub fn new(config: AnisotropyConfig, region: [f64; 4], seed: u64) -> Result<Self, AnisotropyError> {
        let AnisotropyConfig { kind, c1, c2 } = config;
        if !(c1 > 0.0 && c2 >= c1 && c2.is_finite()) {
            return Err(AnisotropyError::BadBounds { c1, c2 });
        }
        match &kind {
            PhiKind::Euclidean => {}
            PhiKind::Crystalline { p, q } => {
                if (p[0] * q[1] - p[1] * q[0]).abs() == 0.0 {
                    return Err(AnisotropyError::ParallelCrystalVectors);
                }
            }
            PhiKind::WeightedNorm { metric } => metric.check_structure()?,
        }
        let field = Self { kind, c1, c2 };
        field.validate(region, seed)?;
        Ok(field)
    }

    /// `φ = |ν|`, with `c1 = c2 = 1`.
    pub fn euclidean() -> Self {
        Self {
            kind: PhiKind::Euclidean,
            c1: 1.0,
            c2: 1.0,
        }
    }

    /// `φ(ν) = |p·ν| + |q·ν|` with the exact bounds on the unit circle:
    /// the maximum is `max(|p+q|, |p−q|)` and the minimum is attained where
    /// `ν` is orthogonal to `p` or to `q`.
    pub fn crystalline(p: [f64; 2], q: [f64; 2]) -> Result<Self, AnisotropyError> {
        let cross = (p[0] * q[1] - p[1] * q[0]).abs();
        if cross == 0.0 {
            return Err(AnisotropyError::ParallelCrystalVectors);
        }
        let norm = |v: [f64; 2]| v[0].hypot(v[1]);
        let c2 = norm([p[0] + q[0], p[1] + q[1]]).max(norm([p[0] - q[0], p[1] - q[1]]));
        let c1 = (cross / norm(p)).min(cross / norm(q));
        let config = AnisotropyConfig {
            kind: PhiKind::Crystalline { p, q },
            c1: c1 * (1.0 - 1e-14),
            c2: c2 * (1.0 + 1e-14),
        };
        Self::new(config, [0.0, 0.0, 1.0, 1.0], 0)
    }

    pub fn kind(&self) -> &PhiKind {
        &self.kind
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    /// `φ(x, n)` for a unit vector `n`.
    pub fn density(&self, x: Point2, n: [f64; 2]) -> f64 {
        match &self.kind {
            PhiKind::Euclidean => 1.0,
            PhiKind::Crystalline { p, q } => {
                (p[0] * n[0] + p[1] * n[1]).abs() + (q[0] * n[0] + q[1] * n[1]).abs()
            }
            PhiKind::WeightedNorm { metric } => {
                let [a, b, c] = metric.at(x);
                (a * n[0] * n[0] + 2.0 * b * n[0] * n[1] + c * n[1] * n[1]).sqrt()
            }
        }
    }

    /// `φ(x, ν)` computed as `φ(x, ν/|ν|)·|ν|`.
    pub fn evaluate(&self, x: Point2, nu: [f64; 2]) -> Result<f64, AnisotropyError> {
        let len = nu[0].hypot(nu[1]);
        if len == 0.0 || !len.is_finite() {
            return Err(AnisotropyError::ZeroNormal);
        }
        Ok(self.density(x, [nu[0] / len, nu[1] / len]) * len)
    }

    fn validate(&self, region: [f64; 4], seed: u64) -> Result<(), AnisotropyError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let point = |rng: &mut ChaCha8Rng| {
            Point2::new(
                rng.gen_range(region[0]..=region[2]),
                rng.gen_range(region[1]..=region[3]),
            )
        };
        let vector = |rng: &mut ChaCha8Rng| {
            let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let r: f64 = rng.gen_range(0.1..10.0);
            [r * angle.cos(), r * angle.sin()]
        };
        let close = |a: f64, b: f64| (a - b).abs() <= BOUND_TOL * a.abs().max(b.abs()).max(1.0);
        for _ in 0..VALIDATION_SAMPLES {
            let x = point(&mut rng);
            if let PhiKind::WeightedNorm { metric } = &self.kind {
                check_spd(metric.at(x), x)?;
            }
            let nu = vector(&mut rng);
            let phi = self.evaluate(x, nu)?;
            let len = nu[0].hypot(nu[1]);
            if !phi.is_finite()
                || phi < self.c1 * len * (1.0 - BOUND_TOL)
                || phi > self.c2 * len * (1.0 + BOUND_TOL)
            {
                return Err(AnisotropyError::BoundViolation {
                    x: x.x,
                    y: x.y,
                    nx: nu[0],
                    ny: nu[1],
                    phi,
                });
            }
            let t: f64 = rng.gen_range(0.1..10.0);
            if !close(self.evaluate(x, [t * nu[0], t * nu[1]])?, t * phi) {
                return Err(AnisotropyError::NotHomogeneous { x: x.x, y: x.y });
            }
            if !close(self.evaluate(x, [-nu[0], -nu[1]])?, phi) {
                return Err(AnisotropyError::NotEven { x: x.x, y: x.y });
            }
            let other = vector(&mut rng);
            let mid = [0.5 * (nu[0] + other[0]), 0.5 * (nu[1] + other[1])];
            if mid[0].hypot(mid[1]) > 0.0 {
                let excess = self.evaluate(x, mid)? - 0.5 * (phi + self.evaluate(x, other)?);
                if excess > CONVEXITY_TOL {
                    return Err(AnisotropyError::NotConvex { x: x.x, y: x.y, excess });
                }
            }
        }
        Ok(())
    }
}

/// `F(K)` with the canonical normal.
pub fn surface_energy(k: &CrackSet, phi: &AnisotropyField) -> f64 {
    surface_energy_oriented(k, phi, NormalSign::Canonical)
}

/// `F(K)` with an explicit normal orientation. Position-independent densities
/// are integrated exactly; otherwise each segment is cut at the metric grid
/// lines and integrated by adaptive Gauss-Legendre quadrature.
pub fn surface_energy_oriented(k: &CrackSet, phi: &AnisotropyField, sign: NormalSign) -> f64 {
    k.segments()
        .iter()
        .map(|s| {
            let (tx, ty) = s.tangent();
            let n = UnitNormal::from_tangent(tx, ty);
            let n = match sign {
                NormalSign::Canonical => n,
                NormalSign::Flipped => n.flipped(),
            };
            segment_energy(s, phi, n.as_array())
        })
        .sum()
}

fn segment_energy(s: &Segment, phi: &AnisotropyField, n: [f64; 2]) -> f64 {
    let len = s.length();
    let metric = match &phi.kind {
        PhiKind::WeightedNorm { metric } if !matches!(metric, MetricField::Constant { .. }) => metric,
        _ => return len * phi.density(s.point_at(0.5), n),
    };
    let f = |t: f64| phi.density(s.point_at(t), n);
    let mut cuts = vec![0.0, 1.0];
    if let MetricField::Grid { xs, ys, .. } = metric {
        let (a, b) = (s.a, s.b);
        for (lines, p, q) in [(xs, a.x, b.x), (ys, a.y, b.y)] {
            if p != q {
                cuts.extend(lines.iter().map(|&l| (l - p) / (q - p)).filter(|t| *t > 0.0 && *t < 1.0));
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
    }
    let tol = QUAD_TOL * phi.c2;
    len * cuts
        .windows(2)
        .map(|w| adaptive(&f, w[0], w[1], gauss(&f, w[0], w[1]), tol, 0))
        .sum::<f64>()
}

fn gauss(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    half * GL_X.iter().zip(GL_W).map(|(x, w)| w * f(mid + half * x)).sum::<f64>()
}

fn adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (left, right) = (gauss(f, a, m), gauss(f, m, b));
    if depth >= QUAD_MAX_DEPTH || (left + right - whole).abs() <= tol * (b - a) {
        return left + right;
    }
    adaptive(f, a, m, left, tol, depth + 1) + adaptive(f, m, b, right, tol, depth + 1)
}

/// `F(K \ H)` for graph-backed sets.
pub fn surface_energy_outside(k: &CrackSet, h: &CrackSet, phi: &AnisotropyField) -> Result<f64, AnisotropyError> {
    Ok(surface_energy(&k.difference(h)?, phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::h1_measure;

    fn seg(x1: f64, y1: f64, x2: f64, y2: f64) -> Segment {
        Segment::from_coords(x1, y1, x2, y2).unwrap()
    }

    fn unit_box() -> [f64; 4] {
        [0.0, 0.0, 1.0, 1.0]
    }

    #[test]
    fn evaluate_examples() {
        let e = AnisotropyField::euclidean();
        assert_eq!(e.evaluate(Point2::default(), [0.0, 2.0]).unwrap(), 2.0);
        assert_eq!(e.evaluate(Point2::default(), [-3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(e.evaluate(Point2::default(), [0.0, 0.0]), Err(AnisotropyError::ZeroNormal));
        let c = AnisotropyField::crystalline([1.0, 0.0], [0.0, 1.0]).unwrap();
        let r = 0.5f64.sqrt();
        let v = c.evaluate(Point2::default(), [r, r]).unwrap();
        // |nu1| + |nu2| by hand
        assert!((v - 1.414_213_56).abs() < 1e-8);
        assert!((v - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn crystalline_bounds_are_exact() {
        let c = AnisotropyField::crystalline([1.0, 0.0], [0.0, 1.0]).unwrap();
        assert!((c.c1() - 1.0).abs() < 1e-13);
        assert!((c.c2() - 2f64.sqrt()).abs() < 1e-13);
        let skew = AnisotropyField::crystalline([2.0, 0.5], [-0.3, 1.0]).unwrap();
        // dense sweep of the unit circle stays inside the computed bounds
        for k in 0..10_000 {
            let a = k as f64 * std::f64::consts::TAU / 10_000.0;
            let v = skew.density(Point2::default(), [a.cos(), a.sin()]);
            assert!(v >= skew.c1() && v <= skew.c2());
        }
        assert_eq!(
            AnisotropyField::crystalline([1.0, 1.0], [2.0, 2.0]),
            Err(AnisotropyError::ParallelCrystalVectors)
        );
    }

    #[test]
    fn config_validation() {
        let bad = AnisotropyConfig {
            kind: PhiKind::Euclidean,
            c1: 0.0,
            c2: 1.0,
        };
        assert!(matches!(AnisotropyField::new(bad, unit_box(), 1), Err(AnisotropyError::BadBounds { .. })));
        let too_tight = AnisotropyConfig {
            kind: PhiKind::Crystalline { p: [1.0, 0.0], q: [0.0, 1.0] },
            c1: 1.0,
            c2: 1.2,
        };
        assert!(matches!(
            AnisotropyField::new(too_tight, unit_box(), 1),
            Err(AnisotropyError::BoundViolation { .. })
        ));
        let not_spd = AnisotropyConfig {
            kind: PhiKind::WeightedNorm {
                metric: MetricField::Constant { m: [1.0, 2.0, 1.0] },
            },
            c1: 0.1,
            c2: 3.0,
        };
        assert!(matches!(
            AnisotropyField::new(not_spd, unit_box(), 1),
            Err(AnisotropyError::MetricNotSpd { .. })
        ));
    }

    #[test]
    fn expression_metric_spd_checked_at_samples() {
        let metric = MetricField::Expression {
            m11: Expr2::parse("1 + x").unwrap(),
            m12: Expr2::parse("0").unwrap(),
            m22: Expr2::parse("x - 0.5").unwrap(),
        };
        let config = AnisotropyConfig {
            kind: PhiKind::WeightedNorm { metric },
            c1: 0.01,
            c2: 10.0,
        };
        assert!(matches!(
            AnisotropyField::new(config, unit_box(), 3),
            Err(AnisotropyError::MetricNotSpd { .. })
        ));
    }

    #[test]
    fn config_json_shape() {
        let json = r#"{"kind":"crystalline","parameters":{"p":[1.0,0.0],"q":[0.0,1.0]},"c1":1.0,"c2":1.5}"#;
        let cfg: AnisotropyConfig = serde_json::from_str(json).unwrap();
        let f = AnisotropyField::new(cfg, unit_box(), 0).unwrap();
        assert_eq!(serde_json::to_string(&f).unwrap(), json);
        let e: AnisotropyConfig = serde_json::from_str(r#"{"kind":"euclidean","c1":1,"c2":1}"#).unwrap();
        assert_eq!(e.kind, PhiKind::Euclidean);
    }

    #[test]
    fn surface_energy_examples() {
        let e = AnisotropyField::euclidean();
        let c = AnisotropyField::crystalline([1.0, 0.0], [0.0, 1.0]).unwrap();
        let k = CrackSet::new(vec![seg(0.0, 0.0, 1.0, 0.3), seg(1.0, 0.3, 0.2, 0.9)]).unwrap();
        assert!((surface_energy(&k, &e) - h1_measure(&k)).abs() <= 1e-15);
        let diag = CrackSet::new(vec![seg(0.0, 0.0, 1.0, 1.0)]).unwrap();
        // length sqrt(2) times phi(nu) = sqrt(2)
        assert!((surface_energy(&diag, &c) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn energy_outside() {
        let e = AnisotropyField::euclidean();
        let k = CrackSet::graph_backed(vec![seg(0.0, 0.0, 1.0, 0.0), seg(1.0, 0.0, 2.0, 0.0)], vec![0, 1]).unwrap();
        let h = CrackSet::graph_backed(vec![seg(1.0, 0.0, 2.0, 0.0)], vec![1]).unwrap();
        assert_eq!(surface_energy_outside(&k, &CrackSet::empty(), &e).unwrap(), surface_energy(&k, &e));
        assert_eq!(surface_energy_outside(&k, &k, &e).unwrap(), 0.0);
        assert_eq!(surface_energy_outside(&k, &h, &e).unwrap(), 1.0);
        let loose = CrackSet::new(vec![seg(0.0, 0.0, 1.0, 0.0)]).unwrap();
        assert!(surface_energy_outside(&loose, &h, &e).is_err());
    }

    #[test]
    fn grid_metric_is_clamped_and_bilinear() {
        let metric = MetricField::Grid {
            xs: vec![0.0, 1.0],
            ys: vec![0.0, 1.0],
            m11: vec![1.0, 3.0, 1.0, 3.0],
            m12: vec![0.0; 4],
            m22: vec![1.0; 4],
        };
        assert_eq!(metric.at(Point2::new(0.5, 0.5))[0], 2.0);
        assert_eq!(metric.at(Point2::new(-4.0, 0.5))[0], 1.0);
        assert_eq!(metric.at(Point2::new(9.0, 9.0))[0], 3.0);
        let config = AnisotropyConfig {
            kind: PhiKind::WeightedNorm { metric },
            c1: 1.0,
            c2: 3f64.sqrt(),
        };
        let f = AnisotropyField::new(config, [-1.0, -1.0, 2.0, 2.0], 11).unwrap();
        // horizontal segment: normal (0,1) sees m22 = 1 everywhere
        let k = CrackSet::new(vec![seg(0.0, 0.5, 1.0, 0.5)]).unwrap();
        assert!((surface_energy(&k, &f) - 1.0).abs() < 1e-15);
        // vertical segment at x: normal (1,0) sees m11(x)
        let v = CrackSet::new(vec![seg(0.5, 0.0, 0.5, 1.0)]).unwrap();
        assert!((surface_energy(&v, &f) - 2f64.sqrt()).abs() < 1e-15);
    }
}
