//! Mesh generators: structured rectangles, the boundary-fitted periodic unit cell, and the
//! ε-tiled perforated domain.

use std::collections::HashMap;

use super::geometry::{Inclusion, PerforatedDomain, Rect, UnitCellGeometry};
use super::trimesh::{periodic_pairs_from_points, signed_area, BoundaryEdge, BoundaryTag, TriMesh};
use crate::error::{Error, Result};

/// Hard cap on generated triangles; guards against runaway refinement requests.
const MAX_TRIANGLES: usize = 8_000_000;

/// Structured triangulation of a rectangle with `nx × ny` squares split in an alternating
/// ("union jack") diagonal pattern. All outer edges are tagged [`BoundaryTag::OuterBoundary`].
pub fn structured_rect_mesh(rect: Rect, nx: usize, ny: usize) -> Result<TriMesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::MeshGenerationFailure("empty structured grid".into()));
    }
    if 2 * nx * ny > MAX_TRIANGLES {
        return Err(Error::MeshGenerationFailure(format!(
            "{nx}x{ny} grid exceeds the triangle budget"
        )));
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([
                rect.origin[0] + rect.size[0] * (i as f64 / nx as f64),
                rect.origin[1] + rect.size[1] * (j as f64 / ny as f64),
            ]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            } else {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            }
        }
    }
    let mut boundary = Vec::with_capacity(2 * (nx + ny));
    let tag = BoundaryTag::OuterBoundary;
    for i in 0..nx {
        boundary.push(BoundaryEdge { nodes: [id(i, 0), id(i + 1, 0)], tag });
        boundary.push(BoundaryEdge { nodes: [id(i + 1, ny), id(i, ny)], tag });
    }
    for j in 0..ny {
        boundary.push(BoundaryEdge { nodes: [id(nx, j), id(nx, j + 1)], tag });
        boundary.push(BoundaryEdge { nodes: [id(0, j + 1), id(0, j)], tag });
    }
    TriMesh::new(nodes, triangles, boundary, Vec::new())
}

/// Structured mesh of a rectangle with spacing at most `h`.
pub fn rect_mesh_with_spacing(rect: Rect, h: f64) -> Result<TriMesh> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::MeshGenerationFailure(format!("invalid mesh size {h}")));
    }
    let nx = (rect.size[0] / h - 1e-9).ceil().max(1.0) as usize;
    let ny = (rect.size[1] / h - 1e-9).ceil().max(1.0) as usize;
    structured_rect_mesh(rect, nx, ny)
}

/// Number of boundary segments per cell side for a target size; always even so that the
/// side midpoints are nodes (keeps the mesh mirror-symmetric for centred inclusions).
fn segments_per_side(h: f64) -> usize {
    let n = (1.0 / (2.0 * h) - 1e-9).ceil().max(1.0) as usize;
    2 * n
}

/// Mesh of the fluid part `Y_l` of the periodic unit cell.
///
/// With a disk inclusion the cell is meshed by an O-grid: rays join the `4N` uniformly spaced
/// points of the cell boundary to their radial projections on the circle, and the annular
/// region is split into geometrically graded layers so that cells near `Γ` stay close to
/// isotropic. Quads are split along alternating diagonals per octant, which makes the mesh
/// invariant under the symmetries of the square when the disk is centred.
pub fn generate_unit_cell_mesh(geom: &UnitCellGeometry) -> Result<TriMesh> {
    geom.validate()?;
    let n = segments_per_side(geom.target_h);
    let (center, radius) = match geom.inclusion {
        Inclusion::None => {
            // dyadic spacing keeps every node and triangle area exact in floating point
            let n = n.next_power_of_two();
            let mesh = structured_rect_mesh(Rect::unit_square(), n, n)?;
            let pairs = periodic_pairs_from_points(mesh.nodes())?;
            return TriMesh::new(
                mesh.nodes().to_vec(),
                mesh.triangles().to_vec(),
                mesh.boundary_edges().to_vec(),
                pairs,
            );
        }
        Inclusion::Disk { center, radius } => (center, radius),
    };

    // Boundary points counter-clockwise from (0,0), in exact lattice units k/N.
    let nf = n as f64;
    let rays = 4 * n;
    let mut outer = Vec::with_capacity(rays);
    for k in 0..n {
        outer.push([k as f64 / nf, 0.0]);
    }
    for k in 0..n {
        outer.push([1.0, k as f64 / nf]);
    }
    for k in 0..n {
        outer.push([(n - k) as f64 / nf, 1.0]);
    }
    for k in 0..n {
        outer.push([0.0, (n - k) as f64 / nf]);
    }
    let inner: Vec<[f64; 2]> = outer
        .iter()
        .map(|p| {
            let d = [p[0] - center[0], p[1] - center[1]];
            let len = d[0].hypot(d[1]);
            [center[0] + radius * d[0] / len, center[1] + radius * d[1] / len]
        })
        .collect();
    let ray_len = outer
        .iter()
        .zip(&inner)
        .map(|(p, c)| (p[0] - c[0]).hypot(p[1] - c[1]))
        .fold(0.0f64, f64::max);

    // Graded layers: spacing grows from the circle's tangential spacing to 1/N.
    let tangential_inner = 2.0 * std::f64::consts::PI * radius / rays as f64;
    let tangential_outer = 1.0 / nf;
    let ratio = tangential_outer / tangential_inner;
    let layers = if (ratio - 1.0).abs() < 1e-3 {
        (ray_len / tangential_outer).ceil().max(1.0) as usize
    } else {
        (ray_len * ratio.ln() / (tangential_outer - tangential_inner))
            .ceil()
            .max(1.0) as usize
    };
    if 2 * rays * layers > MAX_TRIANGLES {
        return Err(Error::MeshGenerationFailure(format!(
            "{rays} rays x {layers} layers exceeds the triangle budget"
        )));
    }
    let params: Vec<f64> = if (ratio - 1.0).abs() < 1e-3 {
        (0..=layers).map(|j| j as f64 / layers as f64).collect()
    } else {
        let q = ratio.powf(1.0 / layers as f64);
        let denom = q.powi(layers as i32) - 1.0;
        (0..=layers)
            .map(|j| match j {
                0 => 0.0,
                j if j == layers => 1.0,
                j => (q.powi(j as i32) - 1.0) / denom,
            })
            .collect()
    };

    let id = |k: usize, j: usize| (k % rays) * (layers + 1) + j;
    let mut nodes = Vec::with_capacity(rays * (layers + 1));
    for k in 0..rays {
        for (j, &t) in params.iter().enumerate() {
            let p = if j == layers {
                outer[k]
            } else {
                [
                    inner[k][0] + t * (outer[k][0] - inner[k][0]),
                    inner[k][1] + t * (outer[k][1] - inner[k][1]),
                ]
            };
            nodes.push(p);
        }
    }
    let mut triangles = Vec::with_capacity(2 * rays * layers);
    let half = n / 2;
    for k in 0..rays {
        let octant = 2 * (k / n) + usize::from(k % n >= half);
        for j in 0..layers {
            let (a, b, c, d) = (id(k, j), id(k + 1, j), id(k + 1, j + 1), id(k, j + 1));
            let pair = if octant % 2 == 0 {
                [[a, b, c], [a, c, d]]
            } else {
                [[a, b, d], [b, c, d]]
            };
            for mut tri in pair {
                if signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]) < 0.0 {
                    tri.swap(1, 2);
                }
                triangles.push(tri);
            }
        }
    }
    let mut boundary = Vec::with_capacity(2 * rays);
    for k in 0..rays {
        boundary.push(BoundaryEdge {
            nodes: [id(k, 0), id(k + 1, 0)],
            tag: BoundaryTag::GammaInterior,
        });
        boundary.push(BoundaryEdge {
            nodes: [id(k, layers), id(k + 1, layers)],
            tag: BoundaryTag::OuterBoundary,
        });
    }
    let pairs = periodic_pairs_from_points(&nodes)?;
    TriMesh::new(nodes, triangles, boundary, pairs)
}

/// Mesh of the perforated domain `Ω_ε`, built by tiling ε-scaled copies of the unit-cell mesh
/// with cell size `target_h / ε`. Face nodes are merged through exact lattice keys, so the
/// result is conforming across cells; `∂Ω` is tagged `OuterBoundary` and the inclusion
/// boundaries `GammaInterior`.
pub fn generate_perforated_mesh(dom: &PerforatedDomain, target_h: f64) -> Result<TriMesh> {
    let counts = dom.cells_per_side()?;
    if !(target_h.is_finite() && target_h > 0.0) {
        return Err(Error::MeshGenerationFailure(format!("invalid mesh size {target_h}")));
    }
    if target_h > dom.eps / 4.0 * (1.0 + 1e-12) {
        return Err(Error::ResolutionTooCoarse {
            h: target_h,
            eps: dom.eps,
        });
    }
    let cell_mesh = generate_unit_cell_mesh(&dom.cell.with_target_h(target_h / dom.eps))?;
    tile_cell_mesh(&cell_mesh, dom, counts)
}

fn tile_cell_mesh(cell: &TriMesh, dom: &PerforatedDomain, counts: [usize; 2]) -> Result<TriMesh> {
    // Face nodes of the unit-cell mesh sit exactly at k/N; recover N from the x = 0 face.
    let on_face = |p: [f64; 2]| p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0;
    let face_points = cell
        .nodes()
        .iter()
        .filter(|p| p[0] == 0.0)
        .count();
    let n_side = face_points.saturating_sub(1).max(1);
    let nf = n_side as f64;
    let lattice = |v: f64| -> Result<i64> {
        let k = v * nf;
        let r = k.round();
        if (k - r).abs() > 1e-8 {
            return Err(Error::MeshGenerationFailure(format!(
                "face node coordinate {v} is not on the {n_side}-lattice"
            )));
        }
        Ok(r as i64)
    };

    let total_cells = counts[0] * counts[1];
    if cell.n_triangles() * total_cells > MAX_TRIANGLES {
        return Err(Error::MeshGenerationFailure(
            "perforated mesh exceeds the triangle budget".into(),
        ));
    }
    let eps = dom.eps;
    let origin = dom.outer.origin;
    let mut nodes: Vec<[f64; 2]> = Vec::new();
    let mut face_index: HashMap<(i64, i64), usize> = HashMap::new();
    let mut triangles = Vec::with_capacity(cell.n_triangles() * total_cells);
    let mut boundary = Vec::new();
    let mut local_to_global = vec![0usize; cell.n_nodes()];
    let stride = [counts[0] as i64 * n_side as i64, counts[1] as i64 * n_side as i64];
    for cj in 0..counts[1] {
        for ci in 0..counts[0] {
            for (l, p) in cell.nodes().iter().enumerate() {
                if on_face(*p) {
                    let key = (
                        ci as i64 * n_side as i64 + lattice(p[0])?,
                        cj as i64 * n_side as i64 + lattice(p[1])?,
                    );
                    local_to_global[l] = *face_index.entry(key).or_insert_with(|| {
                        nodes.push([
                            origin[0] + eps * (key.0 as f64 / nf),
                            origin[1] + eps * (key.1 as f64 / nf),
                        ]);
                        nodes.len() - 1
                    });
                } else {
                    nodes.push([
                        origin[0] + eps * (ci as f64 + p[0]),
                        origin[1] + eps * (cj as f64 + p[1]),
                    ]);
                    local_to_global[l] = nodes.len() - 1;
                }
            }
            for tri in cell.triangles() {
                triangles.push(tri.map(|v| local_to_global[v]));
            }
            for e in cell.boundary_edges() {
                let [a, b] = e.nodes;
                match e.tag {
                    BoundaryTag::GammaInterior => boundary.push(BoundaryEdge {
                        nodes: [local_to_global[a], local_to_global[b]],
                        tag: BoundaryTag::GammaInterior,
                    }),
                    BoundaryTag::OuterBoundary => {
                        let (pa, pb) = (cell.nodes()[a], cell.nodes()[b]);
                        let on_outer = (pa[0] == 0.0 && pb[0] == 0.0 && ci == 0)
                            || (pa[0] == 1.0 && pb[0] == 1.0 && ci + 1 == counts[0])
                            || (pa[1] == 0.0 && pb[1] == 0.0 && cj == 0)
                            || (pa[1] == 1.0 && pb[1] == 1.0 && cj + 1 == counts[1]);
                        if on_outer {
                            boundary.push(BoundaryEdge {
                                nodes: [local_to_global[a], local_to_global[b]],
                                tag: BoundaryTag::OuterBoundary,
                            });
                        }
                    }
                }
            }
        }
    }
    debug_assert!(face_index.keys().all(|k| k.0 <= stride[0] && k.1 <= stride[1]));
    TriMesh::new(nodes, triangles, boundary, Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::geometry::Rect;

    const PORO_025: f64 = 1.0 - std::f64::consts::PI * 0.0625;

    #[test]
    fn disk_cell_porosity_and_tags() {
        let mesh = generate_unit_cell_mesh(&UnitCellGeometry::centered_disk(0.25, 0.05)).unwrap();
        assert!((mesh.total_area() - PORO_025).abs() < 5e-3);
        assert_eq!(mesh.hole_count(), 1);
        let faces = mesh.nodes().iter().filter(|p| p[0] == 1.0 || p[1] == 1.0).count();
        // every node on x = 1 or y = 1 has a master on the opposite face
        assert_eq!(mesh.periodic_pairs().len(), faces);
    }

    #[test]
    fn empty_cell_is_full_square() {
        let mesh = generate_unit_cell_mesh(&UnitCellGeometry::empty(0.1)).unwrap();
        assert_eq!(mesh.total_area(), 1.0);
        assert_eq!(mesh.edges_with_tag(BoundaryTag::GammaInterior).count(), 0);
        assert!(!mesh.periodic_pairs().is_empty());
    }

    #[test]
    fn perforated_hole_count_and_porosity() {
        let cell = UnitCellGeometry::centered_disk(0.25, 0.05);
        let dom = PerforatedDomain::new(Rect::unit_square(), 0.5, cell).unwrap();
        let mesh = generate_perforated_mesh(&dom, 0.025).unwrap();
        assert_eq!(mesh.hole_count(), 4);
        assert!((mesh.total_area() - PORO_025).abs() < 5e-3);
        assert!(mesh.periodic_pairs().is_empty());
        let outer_len: f64 = mesh
            .edges_with_tag(BoundaryTag::OuterBoundary)
            .map(|[a, b]| {
                let (p, q) = (mesh.nodes()[a], mesh.nodes()[b]);
                (q[0] - p[0]).hypot(q[1] - p[1])
            })
            .sum();
        assert!((outer_len - 4.0).abs() < 1e-12);
    }

    #[test]
    fn perforated_single_empty_cell() {
        let dom = PerforatedDomain::new(Rect::unit_square(), 1.0, UnitCellGeometry::empty(0.1))
            .unwrap();
        let mesh = generate_perforated_mesh(&dom, 0.1).unwrap();
        assert_eq!(mesh.hole_count(), 0);
        assert!((mesh.total_area() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn too_coarse_for_eps() {
        let cell = UnitCellGeometry::centered_disk(0.25, 0.05);
        let dom = PerforatedDomain::new(Rect::unit_square(), 1.0 / 3.0, cell).unwrap();
        assert!(matches!(
            generate_perforated_mesh(&dom, 0.2),
            Err(Error::ResolutionTooCoarse { .. })
        ));
    }

    #[test]
    fn off_centre_disk_meshes() {
        let mesh = generate_unit_cell_mesh(&UnitCellGeometry::disk([0.4, 0.55], 0.2, 0.05)).unwrap();
        let exact = 1.0 - std::f64::consts::PI * 0.04;
        assert!((mesh.total_area() - exact).abs() < 5e-3);
    }
}
