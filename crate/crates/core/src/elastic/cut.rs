//! Node duplication along an active crack.
//!
//! Around every node the incident triangle corners are grouped into sheets:
//! two corners belong to the same sheet when their triangles share an edge
//! through that node that is not cracked. Each sheet carries its own degree
//! of freedom, so the two faces of a crack can open independently. An
//! interior crack tip has a single cracked edge in a closed fan and keeps one
//! sheet; a crack edge reaching the boundary splits the open fan in two.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::mesh::Mesh;
use super::ElasticError;
use crate::geometry::CrackSet;
use crate::union_find::UnionFind;

#[derive(Clone, Debug)]
pub struct CrackedDiscretization {
    mesh: Arc<Mesh>,
    crack: CrackSet,
    active_edges: BTreeSet<usize>,
    /// Original node of every dof; dofs `0..n_nodes` are the first sheets.
    dof_node: Vec<usize>,
    triangle_dofs: Vec<[usize; 3]>,
    crack_nodes: Vec<bool>,
    dirichlet_dofs: Vec<bool>,
    component_of_dof: Vec<usize>,
    n_components: usize,
}

/// Splits node sheets of `mesh` along `k`, which must consist of crack-graph edges.
pub fn cut_mesh(mesh: &Arc<Mesh>, k: &CrackSet) -> Result<CrackedDiscretization, ElasticError> {
    let ids = mesh.crack_edge_ids(k)?;
    let crack = if k.is_graph_backed() && !k.is_empty() {
        k.clone()
    } else {
        mesh.crack_from_edges(&ids)?
    };
    let active_edges: BTreeSet<usize> = ids.iter().copied().collect();
    let n_nodes = mesh.nodes().len();
    let triangles = mesh.triangles();

    let mut cracked_keys = BTreeSet::new();
    let mut crack_nodes = vec![false; n_nodes];
    for &id in &active_edges {
        let [a, b] = mesh.crack_graph_edges()[id];
        cracked_keys.insert((a.min(b), a.max(b)));
        crack_nodes[a] = true;
        crack_nodes[b] = true;
    }

    // corners are (triangle, local vertex) pairs
    let corner = |t: usize, v: usize| -> usize {
        let k = triangles[t].iter().position(|&x| x == v).expect("vertex of triangle");
        3 * t + k
    };
    let mut uf = UnionFind::new(3 * triangles.len());
    for ((a, b), [t1, t2]) in mesh.interior_edges() {
        if cracked_keys.contains(&(a, b)) {
            continue;
        }
        uf.union(corner(t1, a), corner(t2, a));
        uf.union(corner(t1, b), corner(t2, b));
    }

    let mut dof_of_root: Vec<Option<usize>> = vec![None; 3 * triangles.len()];
    let mut first_sheet_root: Vec<Option<usize>> = vec![None; n_nodes];
    let mut dof_node: Vec<usize> = (0..n_nodes).collect();
    let mut triangle_dofs = vec![[0usize; 3]; triangles.len()];
    // first pass fixes the primary sheet of each node so numbering does not
    // depend on triangle order across nodes
    for (t, tri) in triangles.iter().enumerate() {
        for (k, &v) in tri.iter().enumerate() {
            let r = uf.find(3 * t + k);
            if first_sheet_root[v].is_none() {
                first_sheet_root[v] = Some(r);
                dof_of_root[r] = Some(v);
            }
        }
    }
    let mut extra: Vec<(usize, usize)> = Vec::new();
    for (t, tri) in triangles.iter().enumerate() {
        for (k, &v) in tri.iter().enumerate() {
            let r = uf.find(3 * t + k);
            if dof_of_root[r].is_none() {
                extra.push((v, r));
                dof_of_root[r] = Some(usize::MAX);
            }
        }
    }
    // extra sheets numbered by node, then by discovery order
    extra.sort_by_key(|&(v, _)| v);
    for (v, r) in extra {
        dof_of_root[r] = Some(dof_node.len());
        dof_node.push(v);
    }
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            let r = uf.find(3 * t + k);
            triangle_dofs[t][k] = dof_of_root[r].expect("assigned");
            debug_assert_eq!(dof_node[triangle_dofs[t][k]], tri[k]);
        }
    }

    let on_dirichlet = mesh.dirichlet_nodes();
    let dirichlet_dofs: Vec<bool> = dof_node
        .iter()
        .map(|&v| on_dirichlet[v] && !crack_nodes[v])
        .collect();

    let mut dof_uf = UnionFind::new(dof_node.len());
    for d in &triangle_dofs {
        dof_uf.union(d[0], d[1]);
        dof_uf.union(d[1], d[2]);
    }
    let (component_of_dof, n_components) = dof_uf.labels();

    Ok(CrackedDiscretization {
        mesh: Arc::clone(mesh),
        crack,
        active_edges,
        dof_node,
        triangle_dofs,
        crack_nodes,
        dirichlet_dofs,
        component_of_dof,
        n_components,
    })
}

impl CrackedDiscretization {
    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn crack(&self) -> &CrackSet {
        &self.crack
    }

    pub fn active_edges(&self) -> &BTreeSet<usize> {
        &self.active_edges
    }

    pub fn n_dofs(&self) -> usize {
        self.dof_node.len()
    }

    pub fn n_duplicated(&self) -> usize {
        self.dof_node.len() - self.mesh.nodes().len()
    }

    pub fn dof_node(&self) -> &[usize] {
        &self.dof_node
    }

    pub fn triangle_dofs(&self) -> &[[usize; 3]] {
        &self.triangle_dofs
    }

    pub fn is_crack_node(&self, node: usize) -> bool {
        self.crack_nodes[node]
    }

    /// Dofs carrying the boundary condition: on `∂_D Ω` and not on the crack.
    pub fn dirichlet_dofs(&self) -> &[bool] {
        &self.dirichlet_dofs
    }

    pub fn component_of_dof(&self) -> &[usize] {
        &self.component_of_dof
    }

    /// Connected components of the dof adjacency graph.
    pub fn n_components(&self) -> usize {
        self.n_components
    }
}
