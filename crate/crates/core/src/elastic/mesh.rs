//! Triangle meshes with tagged boundary and an admissible crack graph.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ElasticError;
use crate::geometry::{CrackSet, DomainBox, Point2, Segment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryTag {
    Dirichlet,
    Neumann,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

/// Parameters of the built-in structured rectangle mesh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectangleSpec {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
    pub dirichlet: Vec<Side>,
}

/// On-disk mesh format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshJson {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    #[serde(default)]
    pub boundary_edges: Vec<BoundaryEdge>,
    #[serde(default)]
    pub crack_graph_edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub allow_boundary_cracks: bool,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    nodes: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    crack_graph_edges: Vec<[usize; 2]>,
    allow_boundary_cracks: bool,
    edge_triangles: BTreeMap<(usize, usize), Vec<usize>>,
    domain: Option<DomainBox>,
}

impl Mesh {
    /// Validates the triangulation; clockwise triangles are reoriented and
    /// untagged boundary edges default to Neumann.
    pub fn new(
        nodes: Vec<Point2>,
        mut triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        crack_graph_edges: Vec<[usize; 2]>,
        allow_boundary_cracks: bool,
    ) -> Result<Self, ElasticError> {
        let bad = |msg: String| Err(ElasticError::InvalidMesh(msg));
        if nodes.iter().any(|p| !p.is_finite()) {
            return bad("non-finite node coordinate".into());
        }
        let n = nodes.len();
        let mut edge_triangles: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return bad(format!("triangle {t} references a missing node"));
            }
            let [a, b, c] = tri.map(|v| nodes[v]);
            let area2 = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
            if area2 == 0.0 {
                return bad(format!("triangle {t} is degenerate"));
            }
            if area2 < 0.0 {
                tri.swap(1, 2);
            }
            for k in 0..3 {
                edge_triangles
                    .entry(key(tri[k], tri[(k + 1) % 3]))
                    .or_default()
                    .push(t);
            }
        }
        if let Some((e, _)) = edge_triangles.iter().find(|(_, ts)| ts.len() > 2) {
            return bad(format!("edge {e:?} is shared by more than two triangles"));
        }
        let mut tagged: BTreeMap<(usize, usize), BoundaryTag> = BTreeMap::new();
        for be in &boundary_edges {
            let k = key(be.nodes[0], be.nodes[1]);
            match edge_triangles.get(&k) {
                Some(ts) if ts.len() == 1 => {
                    tagged.insert(k, be.tag);
                }
                _ => return bad(format!("boundary edge {:?} is not a boundary edge of the mesh", be.nodes)),
            }
        }
        let boundary_edges: Vec<BoundaryEdge> = edge_triangles
            .iter()
            .filter(|(_, ts)| ts.len() == 1)
            .map(|(&(a, b), _)| BoundaryEdge {
                nodes: [a, b],
                tag: tagged.get(&(a, b)).copied().unwrap_or(BoundaryTag::Neumann),
            })
            .collect();
        for (i, e) in crack_graph_edges.iter().enumerate() {
            match edge_triangles.get(&key(e[0], e[1])) {
                None => return bad(format!("crack graph edge {i} {e:?} is not a mesh edge")),
                Some(ts) if ts.len() == 1 && !allow_boundary_cracks => {
                    return bad(format!(
                        "crack graph edge {i} {e:?} lies on the boundary (allow_boundary_cracks is off)"
                    ))
                }
                _ => {}
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for e in &crack_graph_edges {
            if !seen.insert(key(e[0], e[1])) {
                return bad(format!("crack graph edge {e:?} listed twice"));
            }
        }
        Ok(Self {
            nodes,
            triangles,
            boundary_edges,
            crack_graph_edges,
            allow_boundary_cracks,
            edge_triangles,
            domain: None,
        })
    }

    /// Structured mesh of `nx * ny` cells, each split along its rising diagonal.
    pub fn rectangle(spec: &RectangleSpec) -> Result<Self, ElasticError> {
        let RectangleSpec { x0, y0, x1, y1, nx, ny, .. } = *spec;
        if nx == 0 || ny == 0 || !(x1 > x0) || !(y1 > y0) {
            return Err(ElasticError::InvalidMesh("rectangle needs nx, ny >= 1 and positive extent".into()));
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                let x = if i == nx { x1 } else { x0 + (x1 - x0) * i as f64 / nx as f64 };
                let y = if j == ny { y1 } else { y0 + (y1 - y0) * j as f64 / ny as f64 };
                nodes.push(Point2::new(x, y));
            }
        }
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        let mut boundary_edges = Vec::new();
        let tag = |side: Side| {
            if spec.dirichlet.contains(&side) {
                BoundaryTag::Dirichlet
            } else {
                BoundaryTag::Neumann
            }
        };
        for i in 0..nx {
            boundary_edges.push(BoundaryEdge { nodes: [id(i, 0), id(i + 1, 0)], tag: tag(Side::Bottom) });
            boundary_edges.push(BoundaryEdge { nodes: [id(i, ny), id(i + 1, ny)], tag: tag(Side::Top) });
        }
        for j in 0..ny {
            boundary_edges.push(BoundaryEdge { nodes: [id(0, j), id(0, j + 1)], tag: tag(Side::Left) });
            boundary_edges.push(BoundaryEdge { nodes: [id(nx, j), id(nx, j + 1)], tag: tag(Side::Right) });
        }
        let mut mesh = Self::new(nodes, triangles, boundary_edges, Vec::new(), false)?;
        mesh.domain = Some(DomainBox::rectangle(x0, y0, x1, y1)?);
        Ok(mesh)
    }

    pub fn from_json(j: MeshJson) -> Result<Self, ElasticError> {
        let nodes = j.nodes.iter().map(|p| Point2::new(p[0], p[1])).collect();
        Self::new(nodes, j.triangles, j.boundary_edges, j.crack_graph_edges, j.allow_boundary_cracks)
    }

    pub fn to_json(&self) -> MeshJson {
        MeshJson {
            nodes: self.nodes.iter().map(|p| [p.x, p.y]).collect(),
            triangles: self.triangles.clone(),
            boundary_edges: self.boundary_edges.clone(),
            crack_graph_edges: self.crack_graph_edges.clone(),
            allow_boundary_cracks: self.allow_boundary_cracks,
        }
    }

    /// Replaces the crack graph with every mesh edge lying on one of `lines`.
    pub fn with_crack_lines(mut self, lines: &[Segment], allow_boundary: bool) -> Result<Self, ElasticError> {
        let tol = 1e-9 * self.length_scale();
        let mut edges = Vec::new();
        for (&(a, b), ts) in &self.edge_triangles {
            if ts.len() == 1 && !allow_boundary {
                continue;
            }
            let (pa, pb) = (self.nodes[a], self.nodes[b]);
            if lines.iter().any(|l| l.distance_to(&pa) <= tol && l.distance_to(&pb) <= tol) {
                edges.push([a, b]);
            }
        }
        self.crack_graph_edges = edges;
        self.allow_boundary_cracks = allow_boundary;
        Ok(self)
    }

    /// Replaces the crack graph with all interior edges (and boundary edges if allowed).
    pub fn with_all_edges_as_crack_graph(mut self, allow_boundary: bool) -> Self {
        self.crack_graph_edges = self
            .edge_triangles
            .iter()
            .filter(|(_, ts)| allow_boundary || ts.len() == 2)
            .map(|(&(a, b), _)| [a, b])
            .collect();
        self.allow_boundary_cracks = allow_boundary;
        self
    }

    pub fn nodes(&self) -> &[Point2] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn crack_graph_edges(&self) -> &[[usize; 2]] {
        &self.crack_graph_edges
    }

    pub fn allow_boundary_cracks(&self) -> bool {
        self.allow_boundary_cracks
    }

    pub fn edge_triangles(&self, a: usize, b: usize) -> Option<&[usize]> {
        self.edge_triangles.get(&key(a, b)).map(Vec::as_slice)
    }

    pub(crate) fn interior_edges(&self) -> impl Iterator<Item = ((usize, usize), [usize; 2])> + '_ {
        self.edge_triangles
            .iter()
            .filter(|(_, ts)| ts.len() == 2)
            .map(|(&e, ts)| (e, [ts[0], ts[1]]))
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|v| self.nodes[v]);
        0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x))
    }

    pub fn centroid(&self, t: usize) -> Point2 {
        let [a, b, c] = self.triangles[t].map(|v| self.nodes[v]);
        Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Domain polygon for generated meshes, else the bounding rectangle.
    pub fn domain(&self) -> DomainBox {
        if let Some(d) = &self.domain {
            return d.clone();
        }
        let b = self.bounding_box();
        DomainBox::rectangle(b[0], b[1], b[2], b[3]).expect("mesh has positive extent")
    }

    pub fn bounding_box(&self) -> [f64; 4] {
        self.nodes.iter().fold(
            [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY],
            |b, p| [b[0].min(p.x), b[1].min(p.y), b[2].max(p.x), b[3].max(p.y)],
        )
    }

    fn length_scale(&self) -> f64 {
        let b = self.bounding_box();
        (b[2] - b[0]).max(b[3] - b[1]).max(f64::MIN_POSITIVE)
    }

    /// Nodes on Dirichlet-tagged boundary edges.
    pub fn dirichlet_nodes(&self) -> Vec<bool> {
        let mut on = vec![false; self.nodes.len()];
        for be in &self.boundary_edges {
            if be.tag == BoundaryTag::Dirichlet {
                on[be.nodes[0]] = true;
                on[be.nodes[1]] = true;
            }
        }
        on
    }

    pub fn crack_edge_segment(&self, id: usize) -> Segment {
        let [a, b] = self.crack_graph_edges[id];
        Segment {
            a: self.nodes[a],
            b: self.nodes[b],
        }
    }

    /// Graph-backed crack made of the given crack-graph edges.
    pub fn crack_from_edges(&self, ids: &[usize]) -> Result<CrackSet, ElasticError> {
        if let Some(&bad) = ids.iter().find(|&&i| i >= self.crack_graph_edges.len()) {
            return Err(ElasticError::NotInCrackGraph(format!("edge id {bad}")));
        }
        let segments = ids.iter().map(|&i| self.crack_edge_segment(i)).collect();
        Ok(CrackSet::graph_backed(segments, ids.to_vec())?)
    }

    /// Crack-graph ids realizing `k`: taken from its edge ids when graph-backed,
    /// otherwise every segment is decomposed into the graph edges lying on it.
    pub fn crack_edge_ids(&self, k: &CrackSet) -> Result<Vec<usize>, ElasticError> {
        if let Some(ids) = k.edge_ids() {
            if let Some(&bad) = ids.iter().find(|&&i| i >= self.crack_graph_edges.len()) {
                return Err(ElasticError::NotInCrackGraph(format!("edge id {bad}")));
            }
            return Ok(ids.to_vec());
        }
        if !k.points().is_empty() {
            return Err(ElasticError::NotInCrackGraph("isolated points cannot be cut".into()));
        }
        let tol = 1e-9 * self.length_scale();
        let mut ids = Vec::new();
        for s in k.segments() {
            let on: Vec<usize> = (0..self.crack_graph_edges.len())
                .filter(|&i| {
                    let e = self.crack_edge_segment(i);
                    s.distance_to(&e.a) <= tol && s.distance_to(&e.b) <= tol
                })
                .collect();
            let covered: f64 = on.iter().map(|&i| self.crack_edge_segment(i).length()).sum();
            if on.is_empty() || (covered - s.length()).abs() > tol {
                return Err(ElasticError::NotInCrackGraph(format!(
                    "segment ({}, {})-({}, {})",
                    s.a.x, s.a.y, s.b.x, s.b.y
                )));
            }
            ids.extend(on);
        }
        ids.sort_unstable();
        ids.dedup();
        Ok(ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> Mesh {
        Mesh::rectangle(&RectangleSpec {
            x0: 0.0,
            y0: 0.0,
            x1: 1.0,
            y1: 1.0,
            nx: n,
            ny: n,
            dirichlet: vec![Side::Left, Side::Right, Side::Bottom, Side::Top],
        })
        .unwrap()
    }

    #[test]
    fn structured_counts() {
        let m = unit(4);
        assert_eq!(m.nodes().len(), 25);
        assert_eq!(m.triangles().len(), 32);
        assert_eq!(m.boundary_edges().len(), 16);
        assert!((m.area() - 1.0).abs() < 1e-15);
        assert!(m.dirichlet_nodes().iter().filter(|&&d| d).count() == 16);
    }

    #[test]
    fn crack_lines_select_edges() {
        let m = unit(4)
            .with_crack_lines(&[Segment::from_coords(0.0, 0.5, 1.0, 0.5).unwrap()], false)
            .unwrap();
        assert_eq!(m.crack_graph_edges().len(), 4);
        let m = unit(4)
            .with_crack_lines(&[Segment::from_coords(0.0, 0.5, 1.0, 0.5).unwrap()], false)
            .unwrap();
        let k = CrackSet::from_coords(&[[0.0, 0.5, 0.5, 0.5]]).unwrap();
        assert_eq!(m.crack_edge_ids(&k).unwrap().len(), 2);
        let off = CrackSet::from_coords(&[[0.0, 0.3, 0.5, 0.3]]).unwrap();
        assert!(matches!(m.crack_edge_ids(&off), Err(ElasticError::NotInCrackGraph(_))));
        // boundary edges only join the graph when allowed
        let with_boundary = unit(4)
            .with_crack_lines(&[Segment::from_coords(0.0, 0.0, 1.0, 0.0).unwrap()], true)
            .unwrap();
        assert_eq!(with_boundary.crack_graph_edges().len(), 4);
        let without = unit(4)
            .with_crack_lines(&[Segment::from_coords(0.0, 0.0, 1.0, 0.0).unwrap()], false)
            .unwrap();
        assert!(without.crack_graph_edges().is_empty());
    }

    #[test]
    fn rejects_bad_meshes() {
        let nodes = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(2.0, 0.0)];
        assert!(Mesh::new(nodes.clone(), vec![[0, 1, 2]], vec![], vec![], false).is_err());
        assert!(Mesh::new(nodes, vec![[0, 1, 5]], vec![], vec![], false).is_err());
        let square = unit(1).to_json();
        let mut j = square.clone();
        j.crack_graph_edges = vec![[0, 1]];
        assert!(Mesh::from_json(j).is_err());
        let mut j = square;
        j.crack_graph_edges = vec![[0, 3]];
        assert!(Mesh::from_json(j).is_ok());
    }

    #[test]
    fn clockwise_triangles_reoriented() {
        let nodes = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        let m = Mesh::new(nodes, vec![[0, 2, 1]], vec![], vec![], false).unwrap();
        assert!(m.triangle_area(0) > 0.0);
    }
}
