//! Crack sets represented as finite unions of straight segments.
//!
//! A [`CrackSet`] is the computable stand-in for a compact set with finite
//! length and finitely many connected components. Besides the segment list it
//! keeps deduplicated vertices and a component label per segment, so that the
//! component count needed by the admissibility constraint is available in
//! constant time.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::union_find::UnionFind;

/// Absolute tolerance under which two endpoints are the same vertex.
pub const VERTEX_TOL: f64 = 1e-12;

/// Certification tolerance of the Hausdorff sup computation.
pub const HAUSDORFF_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("segment has zero length at ({x}, {y})")]
    DegenerateSegment { x: f64, y: f64 },
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("segments {first} and {second} overlap along a sub-segment")]
    Overlap { first: usize, second: usize },
    #[error("normal undefined at vertex (t = {t}); t must lie strictly inside (0, 1)")]
    NormalAtVertex { t: f64 },
    #[error("segment index {index} out of range ({len} segments)")]
    SegmentIndex { index: usize, len: usize },
    #[error("crack set is not graph-backed")]
    NotGraphBacked,
    #[error("edge ids must be unique and match the segment count")]
    BadEdgeIds,
    #[error("invalid domain polygon: {0}")]
    BadDomain(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(&self, other: &Point2, t: f64) -> Point2 {
        Point2::new(
            self.x + t * (other.x - self.x),
            self.y + t * (other.y - self.y),
        )
    }

    fn close_to(&self, other: &Point2) -> bool {
        (self.x - other.x).abs() <= VERTEX_TOL && (self.y - other.y).abs() <= VERTEX_TOL
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
}

impl Segment {
    pub fn new(a: Point2, b: Point2) -> Result<Self, GeometryError> {
        if !a.is_finite() || !b.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if a.close_to(&b) {
            return Err(GeometryError::DegenerateSegment { x: a.x, y: a.y });
        }
        Ok(Self { a, b })
    }

    pub fn from_coords(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self, GeometryError> {
        Self::new(Point2::new(x1, y1), Point2::new(x2, y2))
    }

    pub fn length(&self) -> f64 {
        self.a.dist(&self.b)
    }

    pub fn point_at(&self, t: f64) -> Point2 {
        self.a.lerp(&self.b, t)
    }

    pub fn midpoint(&self) -> Point2 {
        self.point_at(0.5)
    }

    pub fn tangent(&self) -> (f64, f64) {
        let len = self.length();
        ((self.b.x - self.a.x) / len, (self.b.y - self.a.y) / len)
    }

    pub fn distance_to(&self, p: &Point2) -> f64 {
        let (dx, dy) = (self.b.x - self.a.x, self.b.y - self.a.y);
        let len2 = dx * dx + dy * dy;
        let t = (((p.x - self.a.x) * dx + (p.y - self.a.y) * dy) / len2).clamp(0.0, 1.0);
        self.point_at(t).dist(p)
    }

    pub fn reversed(&self) -> Segment {
        Segment {
            a: self.b,
            b: self.a,
        }
    }

    /// True when both segments lie on one line and share a piece of positive length.
    fn overlaps(&self, other: &Segment) -> bool {
        let (tx, ty) = self.tangent();
        let cross = |p: &Point2| (p.x - self.a.x) * ty - (p.y - self.a.y) * tx;
        if cross(&other.a).abs() > VERTEX_TOL || cross(&other.b).abs() > VERTEX_TOL {
            return false;
        }
        let proj = |p: &Point2| (p.x - self.a.x) * tx + (p.y - self.a.y) * ty;
        let (s0, s1) = (0.0f64, self.length());
        let (o0, o1) = {
            let (u, v) = (proj(&other.a), proj(&other.b));
            (u.min(v), u.max(v))
        };
        s1.min(o1) - s0.max(o0) > VERTEX_TOL
    }
}

/// Unit normal with the canonical sign: first nonzero coordinate positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitNormal {
    pub nx: f64,
    pub ny: f64,
}

impl UnitNormal {
    /// Rotates the unit tangent by +90 degrees and applies the sign convention.
    pub fn from_tangent(tx: f64, ty: f64) -> Self {
        let (mut nx, mut ny) = (-ty, tx);
        if !(nx > 0.0 || (nx == 0.0 && ny > 0.0)) {
            nx = -nx;
            ny = -ny;
        }
        // normalizes -0.0
        Self {
            nx: nx + 0.0,
            ny: ny + 0.0,
        }
    }

    pub fn flipped(&self) -> Self {
        Self {
            nx: -self.nx,
            ny: -self.ny,
        }
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.nx, self.ny]
    }
}

/// Polygonal domain (counterclockwise, simple) with cached diameter.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainBox {
    boundary: Vec<Point2>,
    diameter: f64,
}

impl DomainBox {
    pub fn new(boundary: Vec<Point2>) -> Result<Self, GeometryError> {
        let n = boundary.len();
        if n < 3 {
            return Err(GeometryError::BadDomain("need at least 3 vertices".into()));
        }
        if boundary.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let area2: f64 = (0..n)
            .map(|i| {
                let (p, q) = (boundary[i], boundary[(i + 1) % n]);
                p.x * q.y - q.x * p.y
            })
            .sum();
        if area2 <= 0.0 {
            return Err(GeometryError::BadDomain(
                "vertices must be ordered counterclockwise".into(),
            ));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let e1 = (boundary[i], boundary[(i + 1) % n]);
                let e2 = (boundary[j], boundary[(j + 1) % n]);
                if segments_intersect(e1, e2) {
                    return Err(GeometryError::BadDomain(format!(
                        "edges {i} and {j} intersect"
                    )));
                }
            }
        }
        let mut diameter: f64 = 0.0;
        for (i, p) in boundary.iter().enumerate() {
            for q in &boundary[i + 1..] {
                diameter = diameter.max(p.dist(q));
            }
        }
        Ok(Self { boundary, diameter })
    }

    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, GeometryError> {
        Self::new(vec![
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ])
    }

    pub fn unit_square() -> Self {
        Self::rectangle(0.0, 0.0, 1.0, 1.0).expect("unit square is a valid domain")
    }

    pub fn boundary(&self) -> &[Point2] {
        &self.boundary
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// `[xmin, ymin, xmax, ymax]`
    pub fn bounding_box(&self) -> [f64; 4] {
        self.boundary.iter().fold(
            [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY],
            |b, p| [b[0].min(p.x), b[1].min(p.y), b[2].max(p.x), b[3].max(p.y)],
        )
    }
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn segments_intersect(e1: (Point2, Point2), e2: (Point2, Point2)) -> bool {
    let d1 = orient(e2.0, e2.1, e1.0);
    let d2 = orient(e2.0, e2.1, e1.1);
    let d3 = orient(e1.0, e1.1, e2.0);
    let d4 = orient(e1.0, e1.1, e2.1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Point2, q: Point2, r: Point2, d: f64| {
        d == 0.0
            && r.x >= p.x.min(q.x)
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    on(e2.0, e2.1, e1.0, d1) || on(e2.0, e2.1, e1.1, d2) || on(e1.0, e1.1, e2.0, d3) || on(e1.0, e1.1, e2.1, d4)
}

/// A compact set made of segments plus isolated points.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "CrackSetJson", into = "CrackSetJson")]
pub struct CrackSet {
    segments: Vec<Segment>,
    points: Vec<Point2>,
    edge_ids: Option<Vec<usize>>,
    vertices: Vec<Point2>,
    segment_vertices: Vec<[usize; 2]>,
    component_labels: Vec<usize>,
    point_labels: Vec<usize>,
    n_components: usize,
}

impl PartialEq for CrackSet {
    fn eq(&self, other: &Self) -> bool {
        self.segments == other.segments
            && self.points == other.points
            && self.edge_ids == other.edge_ids
    }
}

impl CrackSet {
    pub fn empty() -> Self {
        Self::build(Vec::new(), Vec::new(), Some(Vec::new())).expect("empty set is valid")
    }

    pub fn new(segments: Vec<Segment>) -> Result<Self, GeometryError> {
        Self::build(segments, Vec::new(), None)
    }

    pub fn with_points(segments: Vec<Segment>, points: Vec<Point2>) -> Result<Self, GeometryError> {
        if points.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        Self::build(segments, points, None)
    }

    /// Segments tagged with the crack-graph edge each one realizes.
    pub fn graph_backed(segments: Vec<Segment>, edge_ids: Vec<usize>) -> Result<Self, GeometryError> {
        let unique: BTreeSet<usize> = edge_ids.iter().copied().collect();
        if edge_ids.len() != segments.len() || unique.len() != edge_ids.len() {
            return Err(GeometryError::BadEdgeIds);
        }
        Self::build(segments, Vec::new(), Some(edge_ids))
    }

    /// Parses `[x1, y1, x2, y2]` rows.
    pub fn from_coords(rows: &[[f64; 4]]) -> Result<Self, GeometryError> {
        let segments = rows
            .iter()
            .map(|r| Segment::from_coords(r[0], r[1], r[2], r[3]))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(segments)
    }

    /// Polyline through the given points.
    pub fn polyline(points: &[Point2]) -> Result<Self, GeometryError> {
        let segments = points
            .windows(2)
            .map(|w| Segment::new(w[0], w[1]))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(segments)
    }

    fn build(
        segments: Vec<Segment>,
        points: Vec<Point2>,
        edge_ids: Option<Vec<usize>>,
    ) -> Result<Self, GeometryError> {
        for i in 0..segments.len() {
            for j in (i + 1)..segments.len() {
                if segments[i].overlaps(&segments[j]) {
                    return Err(GeometryError::Overlap { first: i, second: j });
                }
            }
        }
        let mut vertices: Vec<Point2> = Vec::new();
        let vertex_of = |p: Point2, vertices: &mut Vec<Point2>| -> usize {
            match vertices.iter().position(|v| v.close_to(&p)) {
                Some(i) => i,
                None => {
                    vertices.push(p);
                    vertices.len() - 1
                }
            }
        };
        let segment_vertices: Vec<[usize; 2]> = segments
            .iter()
            .map(|s| [vertex_of(s.a, &mut vertices), vertex_of(s.b, &mut vertices)])
            .collect();
        let point_vertices: Vec<usize> = points.iter().map(|p| vertex_of(*p, &mut vertices)).collect();

        let mut uf = UnionFind::new(vertices.len());
        for [a, b] in &segment_vertices {
            uf.union(*a, *b);
        }
        // relabel only the vertices that are used, in order of first use
        let mut root_label = vec![usize::MAX; vertices.len()];
        let mut next = 0;
        let mut label_of = |v: usize, uf: &mut UnionFind| {
            let r = uf.find(v);
            if root_label[r] == usize::MAX {
                root_label[r] = next;
                next += 1;
            }
            root_label[r]
        };
        let component_labels: Vec<usize> = segment_vertices
            .iter()
            .map(|[a, _]| label_of(*a, &mut uf))
            .collect();
        let point_labels: Vec<usize> = point_vertices.iter().map(|v| label_of(*v, &mut uf)).collect();

        Ok(Self {
            segments,
            points,
            edge_ids,
            vertices,
            segment_vertices,
            component_labels,
            point_labels,
            n_components: next,
        })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn segment_vertices(&self) -> &[[usize; 2]] {
        &self.segment_vertices
    }

    pub fn component_labels(&self) -> &[usize] {
        &self.component_labels
    }

    pub fn point_labels(&self) -> &[usize] {
        &self.point_labels
    }

    pub fn edge_ids(&self) -> Option<&[usize]> {
        self.edge_ids.as_deref()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty() && self.points.is_empty()
    }

    pub fn is_graph_backed(&self) -> bool {
        self.edge_ids.is_some() || self.is_empty()
    }

    /// Sorted edge ids of a graph-backed set.
    pub fn edge_set(&self) -> Result<BTreeSet<usize>, GeometryError> {
        if self.is_empty() {
            return Ok(BTreeSet::new());
        }
        self.edge_ids
            .as_ref()
            .map(|ids| ids.iter().copied().collect())
            .ok_or(GeometryError::NotGraphBacked)
    }

    /// Set union; segments of `other` already present in `self` (by edge id) are skipped.
    pub fn union(&self, other: &CrackSet) -> Result<CrackSet, GeometryError> {
        let mut segments = self.segments.clone();
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        match (self.is_graph_backed(), other.is_graph_backed()) {
            (true, true) if points.is_empty() => {
                let mut ids = self.edge_ids.clone().unwrap_or_default();
                let present: BTreeSet<usize> = ids.iter().copied().collect();
                for (s, id) in other.segments.iter().zip(other.edge_ids.iter().flatten()) {
                    if !present.contains(id) {
                        segments.push(*s);
                        ids.push(*id);
                    }
                }
                Self::graph_backed(segments, ids)
            }
            _ => {
                segments.extend_from_slice(&other.segments);
                Self::build(segments, points, None)
            }
        }
    }

    /// Graph-backed set difference `self \ other`.
    pub fn difference(&self, other: &CrackSet) -> Result<CrackSet, GeometryError> {
        let remove = other.edge_set()?;
        if !self.is_graph_backed() {
            return Err(GeometryError::NotGraphBacked);
        }
        let (segments, ids): (Vec<Segment>, Vec<usize>) = self
            .segments
            .iter()
            .zip(self.edge_ids.iter().flatten())
            .filter(|(_, id)| !remove.contains(id))
            .map(|(s, id)| (*s, *id))
            .unzip();
        Self::graph_backed(segments, ids)
    }

    /// Each segment cut into `parts` collinear pieces (edge ids are dropped).
    pub fn refined(&self, parts: usize) -> Result<CrackSet, GeometryError> {
        let parts = parts.max(1);
        let mut segments = Vec::with_capacity(self.segments.len() * parts);
        for s in &self.segments {
            for k in 0..parts {
                let t0 = k as f64 / parts as f64;
                let t1 = (k + 1) as f64 / parts as f64;
                let b = if k + 1 == parts { s.b } else { s.point_at(t1) };
                segments.push(Segment::new(s.point_at(t0), b)?);
            }
        }
        Self::build(segments, self.points.clone(), None)
    }

    /// Image under `p -> center + factor * (p - center)`.
    pub fn dilated(&self, center: Point2, factor: f64) -> Result<CrackSet, GeometryError> {
        let map = |p: &Point2| Point2::new(center.x + factor * (p.x - center.x), center.y + factor * (p.y - center.y));
        let segments = self
            .segments
            .iter()
            .map(|s| Segment::new(map(&s.a), map(&s.b)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::build(segments, self.points.iter().map(map).collect(), self.edge_ids.clone())
    }

    pub fn distance_to(&self, p: &Point2) -> f64 {
        let seg = self.segments.iter().map(|s| s.distance_to(p));
        let pts = self.points.iter().map(|q| q.dist(p));
        seg.chain(pts).fold(f64::INFINITY, f64::min)
    }
}

/// Total length of the segments.
pub fn h1_measure(k: &CrackSet) -> f64 {
    k.segments.iter().map(Segment::length).sum()
}

/// Number of connected components, connectivity being shared vertices.
pub fn connected_components(k: &CrackSet) -> usize {
    k.n_components
}

/// Hausdorff distance with the conventions `d(∅,∅) = 0`, `d(∅,K) = diam(Ω)`.
pub fn hausdorff_distance(k1: &CrackSet, k2: &CrackSet, domain: &DomainBox) -> f64 {
    match (k1.is_empty(), k2.is_empty()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => domain.diameter(),
        (false, false) => directed_hausdorff(k1, k2).max(directed_hausdorff(k2, k1)),
    }
}

/// `sup_{p ∈ from} dist(p, to)`, certified within [`HAUSDORFF_TOL`].
///
/// Along a segment of `from`, each distance to a primitive of `to` is convex
/// in the parameter, so on an interval the pointwise minimum is bounded by
/// `min_j max(d_j(s0), d_j(s1))`. Intervals whose bound exceeds the best
/// value found so far by more than the tolerance are bisected.
pub fn directed_hausdorff(from: &CrackSet, to: &CrackSet) -> f64 {
    if from.is_empty() {
        return 0.0;
    }
    let distances = |p: &Point2| -> Vec<f64> {
        to.segments
            .iter()
            .map(|s| s.distance_to(p))
            .chain(to.points.iter().map(|q| q.dist(p)))
            .collect()
    };
    let min = |d: &[f64]| d.iter().copied().fold(f64::INFINITY, f64::min);

    let mut best = from
        .points
        .iter()
        .map(|p| to.distance_to(p))
        .fold(0.0_f64, f64::max);

    struct Interval {
        bound: f64,
        t0: f64,
        t1: f64,
        d0: Vec<f64>,
        d1: Vec<f64>,
    }
    impl PartialEq for Interval {
        fn eq(&self, other: &Self) -> bool {
            self.bound == other.bound
        }
    }
    impl Eq for Interval {}
    impl PartialOrd for Interval {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Interval {
        fn cmp(&self, other: &Self) -> Ordering {
            self.bound.total_cmp(&other.bound)
        }
    }
    let bound = |d0: &[f64], d1: &[f64], len: f64| {
        let convex = d0
            .iter()
            .zip(d1)
            .map(|(a, b)| a.max(*b))
            .fold(f64::INFINITY, f64::min);
        let lipschitz = 0.5 * (min(d0) + min(d1) + len);
        convex.min(lipschitz)
    };

    let mut heap = BinaryHeap::new();
    for s in &from.segments {
        let len = s.length();
        let d0 = distances(&s.a);
        let d1 = distances(&s.b);
        best = best.max(min(&d0)).max(min(&d1));
        heap.push(Interval {
            bound: bound(&d0, &d1, len),
            t0: 0.0,
            t1: 1.0,
            d0,
            d1,
        });
        while let Some(iv) = heap.peek() {
            if iv.bound <= best + HAUSDORFF_TOL {
                break;
            }
            let iv = heap.pop().expect("peeked");
            let tm = 0.5 * (iv.t0 + iv.t1);
            let dm = distances(&s.point_at(tm));
            best = best.max(min(&dm));
            let half = 0.5 * (iv.t1 - iv.t0) * len;
            heap.push(Interval {
                bound: bound(&iv.d0, &dm, half),
                t0: iv.t0,
                t1: tm,
                d0: iv.d0,
                d1: dm.clone(),
            });
            heap.push(Interval {
                bound: bound(&dm, &iv.d1, half),
                t0: tm,
                t1: iv.t1,
                d0: dm,
                d1: iv.d1,
            });
        }
        heap.clear();
    }
    best
}

/// Normal to segment `segment_index` at parameter `t ∈ (0, 1)`.
pub fn approximate_normal(k: &CrackSet, segment_index: usize, t: f64) -> Result<UnitNormal, GeometryError> {
    let seg = k.segments.get(segment_index).ok_or(GeometryError::SegmentIndex {
        index: segment_index,
        len: k.segments.len(),
    })?;
    if !(t > 0.0 && t < 1.0) {
        return Err(GeometryError::NormalAtVertex { t });
    }
    let (tx, ty) = seg.tangent();
    Ok(UnitNormal::from_tangent(tx, ty))
}

/// Edge-identity containment of graph-backed sets.
pub fn is_subset(k1: &CrackSet, k2: &CrackSet) -> Result<bool, GeometryError> {
    let (a, b) = (k1.edge_set()?, k2.edge_set()?);
    Ok(a.is_subset(&b))
}

/// On-disk form: `{"segments": [[x1,y1,x2,y2], ...], "edge_ids": [...], "points": [[x,y], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrackSetJson {
    pub segments: Vec<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_ids: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<[f64; 2]>,
}

impl TryFrom<CrackSetJson> for CrackSet {
    type Error = GeometryError;

    fn try_from(j: CrackSetJson) -> Result<Self, Self::Error> {
        let segments = j
            .segments
            .iter()
            .map(|r| Segment::from_coords(r[0], r[1], r[2], r[3]))
            .collect::<Result<Vec<_>, _>>()?;
        let points = j.points.iter().map(|p| Point2::new(p[0], p[1])).collect();
        match j.edge_ids {
            Some(ids) if j.points.is_empty() => CrackSet::graph_backed(segments, ids),
            Some(_) => Err(GeometryError::BadEdgeIds),
            None => CrackSet::with_points(segments, points),
        }
    }
}

impl From<CrackSet> for CrackSetJson {
    fn from(k: CrackSet) -> Self {
        let edge_ids = if k.segments.is_empty() && k.points.is_empty() {
            None
        } else {
            k.edge_ids.clone()
        };
        Self {
            segments: k.segments.iter().map(|s| [s.a.x, s.a.y, s.b.x, s.b.y]).collect(),
            edge_ids,
            points: k.points.iter().map(|p| [p.x, p.y]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(x1: f64, y1: f64, x2: f64, y2: f64) -> Segment {
        Segment::from_coords(x1, y1, x2, y2).unwrap()
    }

    /// Staircase from (0,0) to (1,1) with `n` right-then-up steps.
    fn staircase(n: usize) -> CrackSet {
        let h = 1.0 / n as f64;
        let mut pts = vec![Point2::new(0.0, 0.0)];
        for k in 0..n {
            pts.push(Point2::new((k + 1) as f64 * h, k as f64 * h));
            pts.push(Point2::new((k + 1) as f64 * h, (k + 1) as f64 * h));
        }
        CrackSet::polyline(&pts).unwrap()
    }

    #[test]
    fn h1_of_trivial_sets() {
        assert_eq!(h1_measure(&CrackSet::empty()), 0.0);
        let k = CrackSet::new(vec![seg(0.0, 0.0, 1.0, 0.0)]).unwrap();
        assert_eq!(h1_measure(&k), 1.0);
    }

    #[test]
    fn staircase_length_is_two() {
        // hand oracle: n horizontal and n vertical steps of length 1/n each
        let oracle = |n: usize| {
            let step = 1.0 / n as f64;
            (0..2 * n).map(|_| step).sum::<f64>()
        };
        for n in [1, 2, 4] {
            let l = h1_measure(&staircase(n));
            assert!((l - oracle(n)).abs() < 1e-15);
            assert!((l - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn component_counts() {
        assert_eq!(connected_components(&CrackSet::empty()), 0);
        let joined = CrackSet::new(vec![seg(0.0, 0.0, 1.0, 0.0), seg(1.0, 0.0, 1.0, 1.0)]).unwrap();
        assert_eq!(connected_components(&joined), 1);
        let parallel = CrackSet::new(vec![seg(0.0, 0.0, 1.0, 0.0), seg(0.0, 1.0, 1.0, 1.0)]).unwrap();
        assert_eq!(connected_components(&parallel), 2);
        let with_point = CrackSet::with_points(vec![seg(0.0, 0.0, 1.0, 0.0)], vec![Point2::new(1.0, 0.0), Point2::new(5.0, 5.0)]).unwrap();
        assert_eq!(connected_components(&with_point), 2);
    }

    #[test]
    fn vertex_dedup_tolerance() {
        let k = CrackSet::new(vec![seg(0.0, 0.0, 1.0, 0.0), seg(1.0 + 5e-13, 0.0, 2.0, 1.0)]).unwrap();
        assert_eq!(k.vertices().len(), 3);
        assert_eq!(connected_components(&k), 1);
    }

    #[test]
    fn overlapping_segments_are_rejected() {
        let err = CrackSet::new(vec![seg(0.0, 0.0, 1.0, 0.0), seg(0.5, 0.0, 2.0, 0.0)]).unwrap_err();
        assert_eq!(err, GeometryError::Overlap { first: 0, second: 1 });
        // touching at an endpoint is fine
        CrackSet::new(vec![seg(0.0, 0.0, 1.0, 0.0), seg(1.0, 0.0, 2.0, 0.0)]).unwrap();
    }

    #[test]
    fn degenerate_segment_rejected() {
        assert!(matches!(
            Segment::from_coords(1.0, 1.0, 1.0, 1.0),
            Err(GeometryError::DegenerateSegment { .. })
        ));
    }

    #[test]
    fn hausdorff_examples() {
        let dom = DomainBox::rectangle(-10.0, -10.0, 10.0, 10.0).unwrap();
        let e = CrackSet::empty();
        assert_eq!(hausdorff_distance(&e, &e, &dom), 0.0);
        let k = CrackSet::new(vec![seg(0.0, 0.0, 1.0, 0.0)]).unwrap();
        assert_eq!(hausdorff_distance(&e, &k, &dom), dom.diameter());
        assert_eq!(hausdorff_distance(&k, &e, &dom), dom.diameter());
        let shifted = CrackSet::new(vec![seg(0.0, 1.0, 1.0, 1.0)]).unwrap();
        assert!((hausdorff_distance(&k, &shifted, &dom) - 1.0).abs() <= HAUSDORFF_TOL);
        let p = CrackSet::with_points(vec![], vec![Point2::new(0.0, 0.0)]).unwrap();
        let q = CrackSet::with_points(vec![], vec![Point2::new(3.0, 4.0)]).unwrap();
        assert_eq!(hausdorff_distance(&p, &q, &dom), 5.0);
    }

    #[test]
    fn hausdorff_interior_maximum() {
        // sup attained in the interior of the segment, equidistant from two points
        let dom = DomainBox::unit_square();
        let k = CrackSet::new(vec![seg(0.0, 0.0, 1.0, 0.0)]).unwrap();
        let pts = CrackSet::with_points(vec![], vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]).unwrap();
        let d = hausdorff_distance(&k, &pts, &dom);
        assert!((d - 0.5).abs() <= HAUSDORFF_TOL, "{d}");
    }

    #[test]
    fn staircase_to_diagonal_distance() {
        let dom = DomainBox::unit_square();
        let diag = CrackSet::new(vec![seg(0.0, 0.0, 1.0, 1.0)]).unwrap();
        for n in [1, 2, 5, 16] {
            let d = hausdorff_distance(&staircase(n), &diag, &dom);
            let exact = 1.0 / (n as f64 * 2f64.sqrt());
            assert!((d - exact).abs() <= HAUSDORFF_TOL, "n={n}: {d} vs {exact}");
        }
    }

    #[test]
    fn normals() {
        let k = CrackSet::new(vec![seg(0.0, 0.0, 1.0, 0.0), seg(2.0, 0.0, 3.0, 1.0)]).unwrap();
        assert_eq!(approximate_normal(&k, 0, 0.5).unwrap(), UnitNormal { nx: 0.0, ny: 1.0 });
        let n = approximate_normal(&k, 1, 0.5).unwrap();
        let r = 0.5f64.sqrt();
        assert!((n.nx - r).abs() < 1e-15 && (n.ny + r).abs() < 1e-15);
        assert_eq!(approximate_normal(&k, 0, 0.0), Err(GeometryError::NormalAtVertex { t: 0.0 }));
        assert_eq!(approximate_normal(&k, 0, 1.0), Err(GeometryError::NormalAtVertex { t: 1.0 }));
        assert!(matches!(approximate_normal(&k, 7, 0.5), Err(GeometryError::SegmentIndex { .. })));
    }

    #[test]
    fn subset_by_edge_identity() {
        let a = CrackSet::graph_backed(vec![seg(0.0, 0.0, 1.0, 0.0)], vec![3]).unwrap();
        let b = CrackSet::graph_backed(vec![seg(0.0, 0.0, 1.0, 0.0), seg(1.0, 0.0, 2.0, 0.0)], vec![3, 4]).unwrap();
        assert!(is_subset(&CrackSet::empty(), &b).unwrap());
        assert!(is_subset(&b, &b).unwrap());
        assert!(is_subset(&a, &b).unwrap());
        assert!(!is_subset(&b, &a).unwrap());
        let loose = CrackSet::new(vec![seg(0.0, 0.0, 1.0, 0.0)]).unwrap();
        assert_eq!(is_subset(&loose, &b), Err(GeometryError::NotGraphBacked));
        assert_eq!(b.difference(&a).unwrap().edge_ids(), Some(&[4][..]));
    }

    #[test]
    fn json_round_trip() {
        let k = CrackSet::graph_backed(vec![seg(0.0, 0.0, 1.0, 0.0), seg(1.0, 0.0, 2.0, 0.5)], vec![0, 5]).unwrap();
        let s = serde_json::to_string(&k).unwrap();
        assert_eq!(s, r#"{"segments":[[0.0,0.0,1.0,0.0],[1.0,0.0,2.0,0.5]],"edge_ids":[0,5]}"#);
        let back: CrackSet = serde_json::from_str(&s).unwrap();
        assert_eq!(back, k);
        assert!(serde_json::from_str::<CrackSet>(r#"{"segments":[[0,0,0,0]]}"#).is_err());
    }

    #[test]
    fn domain_validation() {
        assert!(DomainBox::rectangle(0.0, 0.0, 3.0, 4.0).unwrap().diameter() == 5.0);
        let cw = DomainBox::new(vec![Point2::new(0.0, 0.0), Point2::new(0.0, 1.0), Point2::new(1.0, 0.0)]);
        assert!(cw.is_err());
        let bowtie = DomainBox::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ]);
        assert!(bowtie.is_err());
    }
}
