use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    /// Fluid-solid interface `Γ`.
    GammaInterior,
    /// Outer boundary of the cell or of the macroscopic domain.
    OuterBoundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
}

/// Conforming triangulation with tagged boundary edges and periodic node identification.
///
/// Immutable after construction; every constructor path goes through [`TriMesh::new`],
/// which checks orientation, conformity, closure of `Γ` and the periodic pairing.
#[derive(Clone, Debug)]
pub struct TriMesh {
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    periodic_pairs: Vec<(usize, usize)>,
}

pub fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl TriMesh {
    pub fn new(
        nodes: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        periodic_pairs: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let mesh = Self {
            nodes,
            triangles,
            boundary_edges,
            periodic_pairs,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if self.triangles.is_empty() {
            return Err(Error::InvalidMesh("mesh has no triangles".into()));
        }
        if self.nodes.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::InvalidMesh("non-finite node coordinate".into()));
        }
        let mut edge_count: HashMap<(usize, usize), u32> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing node")));
            }
            let area = self.signed_area(t);
            if !(area > 0.0) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} has non-positive signed area {area:e}"
                )));
            }
            for k in 0..3 {
                *edge_count
                    .entry(edge_key(tri[k], tri[(k + 1) % 3]))
                    .or_default() += 1;
            }
        }
        let mut tagged: HashMap<(usize, usize), BoundaryTag> = HashMap::new();
        for e in &self.boundary_edges {
            let key = edge_key(e.nodes[0], e.nodes[1]);
            if tagged.insert(key, e.tag).is_some() {
                return Err(Error::InvalidMesh(format!("boundary edge {key:?} tagged twice")));
            }
            if edge_count.get(&key) != Some(&1) {
                return Err(Error::InvalidMesh(format!(
                    "tagged edge {key:?} is not a boundary edge of the triangulation"
                )));
            }
        }
        for (key, count) in &edge_count {
            match count {
                1 if !tagged.contains_key(key) => {
                    return Err(Error::InvalidMesh(format!("boundary edge {key:?} is untagged")))
                }
                1 | 2 => {}
                _ => {
                    return Err(Error::InvalidMesh(format!(
                        "edge {key:?} shared by {count} triangles"
                    )))
                }
            }
        }
        // Γ must consist of closed curves: every Γ vertex has exactly two Γ edges.
        let mut gamma_degree: HashMap<usize, u32> = HashMap::new();
        for e in self.edges_with_tag(BoundaryTag::GammaInterior) {
            for v in e {
                *gamma_degree.entry(v).or_default() += 1;
            }
        }
        if let Some((v, d)) = gamma_degree.iter().find(|(_, &d)| d != 2) {
            return Err(Error::InvalidMesh(format!(
                "interface curve is not closed at node {v} (degree {d})"
            )));
        }
        for &(m, s) in &self.periodic_pairs {
            if m >= n || s >= n || m == s {
                return Err(Error::InvalidMesh(format!("invalid periodic pair ({m}, {s})")));
            }
            let d = [
                self.nodes[s][0] - self.nodes[m][0],
                self.nodes[s][1] - self.nodes[m][1],
            ];
            let lattice = d.iter().all(|c| (c - c.round()).abs() <= 1e-12);
            if !lattice || d.iter().all(|c| c.round() == 0.0) {
                return Err(Error::InvalidMesh(format!(
                    "periodic pair ({m}, {s}) is not related by a lattice translation"
                )));
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn periodic_pairs(&self) -> &[(usize, usize)] {
        &self.periodic_pairs
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self, t: usize) -> [[f64; 2]; 3] {
        let tri = self.triangles[t];
        [self.nodes[tri[0]], self.nodes[tri[1]], self.nodes[tri[2]]]
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.vertices(t);
        signed_area(a, b, c)
    }

    pub fn area(&self, t: usize) -> f64 {
        self.signed_area(t).abs()
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.vertices(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.area(t)).sum()
    }

    pub fn edges_with_tag(&self, tag: BoundaryTag) -> impl Iterator<Item = [usize; 2]> + '_ {
        self.boundary_edges
            .iter()
            .filter(move |e| e.tag == tag)
            .map(|e| e.nodes)
    }

    /// Sorted, deduplicated nodes lying on edges with the given tag.
    pub fn nodes_with_tag(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut v: Vec<usize> = self.edges_with_tag(tag).flatten().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.boundary_edges.iter().flat_map(|e| e.nodes).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn interface_length(&self) -> f64 {
        self.edges_with_tag(BoundaryTag::GammaInterior)
            .map(|[a, b]| {
                let (p, q) = (self.nodes[a], self.nodes[b]);
                (q[0] - p[0]).hypot(q[1] - p[1])
            })
            .sum()
    }

    /// Number of closed interface curves (holes).
    pub fn hole_count(&self) -> usize {
        let mut adjacency: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for [a, b] in self.edges_with_tag(BoundaryTag::GammaInterior) {
            adjacency.entry(a).or_default().push(b);
            adjacency.entry(b).or_default().push(a);
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut holes = 0;
        for &start in adjacency.keys() {
            if !seen.insert(start) {
                continue;
            }
            holes += 1;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &w in &adjacency[&v] {
                    if seen.insert(w) {
                        stack.push(w);
                    }
                }
            }
        }
        holes
    }

    /// Canonical representative of each node under the periodic identification.
    pub fn periodic_representative(&self) -> Vec<usize> {
        let mut rep: Vec<usize> = (0..self.n_nodes()).collect();
        for &(m, s) in &self.periodic_pairs {
            rep[s] = m;
        }
        // Pairs always point at canonical masters, but resolve chains anyway.
        for i in 0..rep.len() {
            let mut r = rep[i];
            while rep[r] != r {
                r = rep[r];
            }
            rep[i] = r;
        }
        rep
    }

    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.nodes {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        (lo, hi)
    }

    /// Unique undirected edges in first-seen order over the triangle list.
    pub fn unique_edges(&self) -> Vec<[usize; 2]> {
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let key = edge_key(tri[k], tri[(k + 1) % 3]);
                index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edges.len() - 1
                });
            }
        }
        edges
    }
}

/// Pairs points on opposite faces of the unit square: `(master, slave)` with the slave on
/// `x = 1` or `y = 1` and the master its canonical (lowest-corner) image.
pub(crate) fn periodic_pairs_from_points(points: &[[f64; 2]]) -> Result<Vec<(usize, usize)>> {
    const TOL: f64 = 1e-12;
    let on = |v: f64, target: f64| (v - target).abs() <= TOL;
    let mut rep: Vec<usize> = (0..points.len()).collect();
    for d in 0..2 {
        let other = 1 - d;
        let mut low: Vec<usize> = (0..points.len()).filter(|&i| on(points[i][d], 0.0)).collect();
        let mut high: Vec<usize> = (0..points.len()).filter(|&i| on(points[i][d], 1.0)).collect();
        if low.len() != high.len() {
            return Err(Error::MeshGenerationFailure(format!(
                "opposite faces carry {} and {} nodes",
                low.len(),
                high.len()
            )));
        }
        low.sort_by(|&a, &b| points[a][other].total_cmp(&points[b][other]));
        high.sort_by(|&a, &b| points[a][other].total_cmp(&points[b][other]));
        for (&l, &h) in low.iter().zip(&high) {
            if (points[l][other] - points[h][other]).abs() > TOL {
                return Err(Error::MeshGenerationFailure(format!(
                    "face nodes {l} and {h} do not match periodically"
                )));
            }
            rep[h] = l;
        }
    }
    for i in 0..rep.len() {
        let mut r = rep[i];
        while rep[r] != r {
            r = rep[r];
        }
        rep[i] = r;
    }
    Ok(rep
        .iter()
        .enumerate()
        .filter(|&(i, &r)| i != r)
        .map(|(i, &r)| (r, i))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
        (
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
        )
    }

    fn outer(edges: &[[usize; 2]]) -> Vec<BoundaryEdge> {
        edges
            .iter()
            .map(|&nodes| BoundaryEdge {
                nodes,
                tag: BoundaryTag::OuterBoundary,
            })
            .collect()
    }

    #[test]
    fn inverted_triangle_is_rejected() {
        let (nodes, _) = square();
        let tris = vec![[0, 2, 1], [0, 2, 3]];
        let err = TriMesh::new(nodes, tris, vec![], vec![]).unwrap_err();
        assert!(matches!(err, Error::InvalidMesh(_)));
    }

    #[test]
    fn untagged_boundary_is_rejected() {
        let (nodes, tris) = square();
        let err = TriMesh::new(nodes, tris, outer(&[[0, 1], [1, 2]]), vec![]).unwrap_err();
        assert!(matches!(err, Error::InvalidMesh(_)));
    }

    #[test]
    fn valid_square_and_pairs() {
        let (nodes, tris) = square();
        let pairs = periodic_pairs_from_points(&nodes).unwrap();
        let mesh = TriMesh::new(
            nodes,
            tris,
            outer(&[[0, 1], [1, 2], [2, 3], [3, 0]]),
            pairs,
        )
        .unwrap();
        assert_eq!(mesh.periodic_representative(), vec![0, 0, 0, 0]);
        assert_eq!(mesh.hole_count(), 0);
        assert!((mesh.total_area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_lattice_pair_is_rejected() {
        let (nodes, tris) = square();
        let err = TriMesh::new(
            nodes,
            tris,
            outer(&[[0, 1], [1, 2], [2, 3], [3, 0]]),
            vec![(0, 2), (1, 3)],
        );
        assert!(err.is_ok(), "diagonal lattice translations are allowed");
        let (mut nodes, tris) = square();
        nodes[2] = [1.0, 0.9];
        let err = TriMesh::new(
            nodes,
            tris,
            outer(&[[0, 1], [1, 2], [2, 3], [3, 0]]),
            vec![(0, 2)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidMesh(_)));
    }
}
