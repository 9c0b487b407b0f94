use super::trimesh::TriMesh;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QualityReport {
    /// Smallest interior angle over all triangles, in degrees.
    pub min_angle_deg: f64,
    /// Largest ratio of longest edge to shortest altitude-equivalent (circumradius / 2·inradius).
    pub max_aspect_ratio: f64,
    pub h_max: f64,
    pub h_min: f64,
}

/// Angle, aspect-ratio and edge-length summary of a mesh.
pub fn mesh_quality_report(mesh: &TriMesh) -> QualityReport {
    let mut min_angle = f64::INFINITY;
    let mut max_aspect: f64 = 0.0;
    let mut h_max: f64 = 0.0;
    let mut h_min = f64::INFINITY;
    for t in 0..mesh.n_triangles() {
        let v = mesh.vertices(t);
        let len = |i: usize, j: usize| (v[j][0] - v[i][0]).hypot(v[j][1] - v[i][1]);
        let e = [len(1, 2), len(2, 0), len(0, 1)];
        for k in 0..3 {
            let (a, b, c) = (e[k], e[(k + 1) % 3], e[(k + 2) % 3]);
            let cos = ((b * b + c * c - a * a) / (2.0 * b * c)).clamp(-1.0, 1.0);
            min_angle = min_angle.min(cos.acos().to_degrees());
            h_max = h_max.max(a);
            h_min = h_min.min(a);
        }
        let area = mesh.area(t);
        let s = 0.5 * (e[0] + e[1] + e[2]);
        let inradius = area / s;
        let circumradius = e[0] * e[1] * e[2] / (4.0 * area);
        max_aspect = max_aspect.max(circumradius / (2.0 * inradius));
    }
    QualityReport {
        min_angle_deg: min_angle,
        max_aspect_ratio: max_aspect,
        h_max,
        h_min,
    }
}
