use std::collections::HashMap;

use super::constraints::DofMap;
use super::element::P2_EDGES;
use crate::mesh::{BoundaryTag, TriMesh};

/// Degree-of-freedom layout for quadratic Lagrange elements: mesh vertices first, then one
/// dof per unique edge (midpoint).
#[derive(Clone, Debug)]
pub struct P2Dofs {
    n_vertices: usize,
    edges: Vec<[usize; 2]>,
    edge_index: HashMap<(usize, usize), usize>,
    triangles: Vec<[usize; 6]>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl P2Dofs {
    pub fn new(mesh: &TriMesh) -> Self {
        let n_vertices = mesh.n_nodes();
        let edges = mesh.unique_edges();
        let edge_index: HashMap<_, _> = edges
            .iter()
            .enumerate()
            .map(|(k, e)| ((e[0], e[1]), n_vertices + k))
            .collect();
        let triangles = mesh
            .triangles()
            .iter()
            .map(|tri| {
                let mut d = [0; 6];
                d[..3].copy_from_slice(tri);
                for (k, [i, j]) in P2_EDGES.iter().enumerate() {
                    d[3 + k] = edge_index[&key(tri[*i], tri[*j])];
                }
                d
            })
            .collect();
        Self {
            n_vertices,
            edges,
            edge_index,
            triangles,
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.n_vertices + self.edges.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle(&self, t: usize) -> &[usize; 6] {
        &self.triangles[t]
    }

    pub fn edge_dof(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&key(a, b)).copied()
    }

    pub fn position(&self, mesh: &TriMesh, dof: usize) -> [f64; 2] {
        if dof < self.n_vertices {
            mesh.nodes()[dof]
        } else {
            let [a, b] = self.edges[dof - self.n_vertices];
            let (p, q) = (mesh.nodes()[a], mesh.nodes()[b]);
            [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
        }
    }

    /// Vertex and edge dofs lying on boundary edges with any of the given tags.
    pub fn boundary_dofs(&self, mesh: &TriMesh, tags: &[BoundaryTag]) -> Vec<usize> {
        let mut out = Vec::new();
        for e in mesh.boundary_edges() {
            if tags.contains(&e.tag) {
                let [a, b] = e.nodes;
                out.extend([a, b, self.edge_index[&key(a, b)]]);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Periodic identification of P2 dofs induced by the mesh's vertex pairing.
    pub fn periodic_map(&self, mesh: &TriMesh) -> DofMap {
        let rep = mesh.periodic_representative();
        let mut full: Vec<usize> = (0..self.n_dofs()).collect();
        full[..self.n_vertices].copy_from_slice(&rep);
        let mut canonical: HashMap<(usize, usize), usize> = HashMap::new();
        for (k, &[a, b]) in self.edges.iter().enumerate() {
            let dof = self.n_vertices + k;
            let r = key(rep[a], rep[b]);
            full[dof] = *canonical.entry(r).or_insert(dof);
        }
        DofMap::from_representatives(&full)
    }
}
