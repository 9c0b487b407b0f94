use super::trimesh::TriMesh;

/// Bucket-grid point location over the triangles of a mesh.
#[derive(Clone, Debug)]
pub struct PointLocator<'a> {
    mesh: &'a TriMesh,
    lo: [f64; 2],
    cell: [f64; 2],
    dims: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl<'a> PointLocator<'a> {
    pub fn new(mesh: &'a TriMesh) -> Self {
        let (lo, hi) = mesh.bounding_box();
        let side = (mesh.n_triangles() as f64).sqrt().ceil().max(1.0) as usize;
        let dims = [side, side];
        let cell = [
            ((hi[0] - lo[0]) / side as f64).max(1e-300),
            ((hi[1] - lo[1]) / side as f64).max(1e-300),
        ];
        let mut loc = Self {
            mesh,
            lo,
            cell,
            dims,
            buckets: vec![Vec::new(); side * side],
        };
        // padded boxes so points rounded just past a vertex still see its triangles
        let pad = 1e-9 * (hi[0] - lo[0]).max(hi[1] - lo[1]);
        for t in 0..mesh.n_triangles() {
            let v = mesh.vertices(t);
            let min = [
                v[0][0].min(v[1][0]).min(v[2][0]) - pad,
                v[0][1].min(v[1][1]).min(v[2][1]) - pad,
            ];
            let max = [
                v[0][0].max(v[1][0]).max(v[2][0]) + pad,
                v[0][1].max(v[1][1]).max(v[2][1]) + pad,
            ];
            let a = loc.bucket_of(min);
            let b = loc.bucket_of(max);
            for j in a[1]..=b[1] {
                for i in a[0]..=b[0] {
                    loc.buckets[j * dims[0] + i].push(t);
                }
            }
        }
        loc
    }

    fn bucket_of(&self, p: [f64; 2]) -> [usize; 2] {
        let mut b = [0; 2];
        for d in 0..2 {
            let s = ((p[d] - self.lo[d]) / self.cell[d]).floor();
            b[d] = (s.max(0.0) as usize).min(self.dims[d] - 1);
        }
        b
    }

    /// Triangle containing `p` and its barycentric coordinates, with a small tolerance.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 3])> {
        const TOL: f64 = 1e-10;
        let b = self.bucket_of(p);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in &self.buckets[b[1] * self.dims[0] + b[0]] {
            let lam = barycentric(self.mesh.vertices(t), p);
            let worst = lam.iter().cloned().fold(f64::INFINITY, f64::min);
            if worst >= 0.0 {
                return Some((t, lam));
            }
            if worst > -TOL && best.as_ref().map_or(true, |b| worst > b.2) {
                best = Some((t, lam, worst));
            }
        }
        best.map(|(t, lam, _)| (t, lam))
    }
}

pub fn barycentric(v: [[f64; 2]; 3], p: [f64; 2]) -> [f64; 3] {
    let det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
    let l1 = ((p[0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (p[1] - v[0][1])) / det;
    let l2 = ((v[1][0] - v[0][0]) * (p[1] - v[0][1]) - (p[0] - v[0][0]) * (v[1][1] - v[0][1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_unit_cell_mesh, UnitCellGeometry};

    #[test]
    fn locates_fluid_points_and_rejects_inclusion() {
        let mesh = generate_unit_cell_mesh(&UnitCellGeometry::centered_disk(0.25, 0.05)).unwrap();
        let loc = PointLocator::new(&mesh);
        for p in [[0.1, 0.1], [0.9, 0.5], [0.5, 0.95], [0.0, 0.0], [1.0, 1.0]] {
            let (t, lam) = loc.locate(p).expect("fluid point");
            let v = mesh.vertices(t);
            let x = lam[0] * v[0][0] + lam[1] * v[1][0] + lam[2] * v[2][0];
            let y = lam[0] * v[0][1] + lam[1] * v[1][1] + lam[2] * v[2][1];
            assert!((x - p[0]).abs() < 1e-12 && (y - p[1]).abs() < 1e-12);
        }
        assert!(loc.locate([0.5, 0.5]).is_none());
    }
}
