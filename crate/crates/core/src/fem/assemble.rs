use super::element::{p1_gradients, p2_values};
use super::p2::P2Dofs;
use super::quadrature::{map_point, TriangleRule, GAUSS2_EDGE};
use super::sparse::SparseMatrix;
use super::tensor::Tensor2;
use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, TriMesh};

/// Triangles smaller than this are rejected as degenerate.
pub const MIN_ELEMENT_AREA: f64 = 1e-14;

pub(crate) fn element_geometry(mesh: &TriMesh, t: usize) -> Result<([[f64; 2]; 3], f64)> {
    let (g, area) = p1_gradients(&mesh.vertices(t));
    if !(area >= MIN_ELEMENT_AREA) {
        return Err(Error::DegenerateElement { element: t, area });
    }
    Ok((g, area))
}

/// P1 stiffness matrix of `∫ (A∇u)·∇v` for a constant tensor `A`.
pub fn assemble_stiffness(mesh: &TriMesh, coeff: impl Into<Tensor2>) -> Result<SparseMatrix> {
    let coeff = coeff.into();
    assemble_stiffness_with(mesh, |_| coeff)
}

/// P1 stiffness matrix with an element-wise constant coefficient.
pub fn assemble_stiffness_with(
    mesh: &TriMesh,
    coeff: impl Fn(usize) -> Tensor2,
) -> Result<SparseMatrix> {
    let mut trips = Vec::with_capacity(9 * mesh.n_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let (g, area) = element_geometry(mesh, t)?;
        let a = coeff(t);
        for i in 0..3 {
            for j in 0..3 {
                trips.push((tri[i], tri[j], area * a.bilinear(g[i], g[j])));
            }
        }
    }
    let n = mesh.n_nodes();
    Ok(SparseMatrix::from_triplets(n, n, &trips))
}

/// Consistent P1 mass matrix.
pub fn assemble_mass(mesh: &TriMesh) -> Result<SparseMatrix> {
    let mut trips = Vec::with_capacity(9 * mesh.n_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let (_, area) = element_geometry(mesh, t)?;
        for i in 0..3 {
            for j in 0..3 {
                let m = if i == j { area / 6.0 } else { area / 12.0 };
                trips.push((tri[i], tri[j], m));
            }
        }
    }
    let n = mesh.n_nodes();
    Ok(SparseMatrix::from_triplets(n, n, &trips))
}

/// Row-sum lumped P1 mass, `∫ φ_i`.
pub fn lumped_mass(mesh: &TriMesh) -> Vec<f64> {
    let mut m = vec![0.0; mesh.n_nodes()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let a = mesh.area(t) / 3.0;
        for &v in tri {
            m[v] += a;
        }
    }
    m
}

/// `∫ f φ_i` for a pointwise source, with a degree-4 rule.
pub fn assemble_load(mesh: &TriMesh, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    let rule = TriangleRule::of_degree(4);
    let mut b = vec![0.0; mesh.n_nodes()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let v = mesh.vertices(t);
        let area = mesh.area(t);
        for (lam, w) in rule.points.iter().zip(&rule.weights) {
            let fx = f(map_point(&v, *lam)) * w * area;
            for k in 0..3 {
                b[tri[k]] += fx * lam[k];
            }
        }
    }
    b
}

/// `∫_{edges with tag} g φ_i ds`.
pub fn assemble_boundary_load(mesh: &TriMesh, tag: BoundaryTag, g: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    let mut b = vec![0.0; mesh.n_nodes()];
    for [a, c] in mesh.edges_with_tag(tag) {
        let (p, q) = (mesh.nodes()[a], mesh.nodes()[c]);
        let len = (q[0] - p[0]).hypot(q[1] - p[1]);
        for (s, w) in GAUSS2_EDGE {
            let x = [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])];
            let gx = g(x) * w * len;
            b[a] += gx * (1.0 - s);
            b[c] += gx * s;
        }
    }
    b
}

/// Advecting velocity for [`assemble_convection`].
#[derive(Clone, Copy, Debug)]
pub enum VelocityField<'a> {
    Zero,
    Constant([f64; 2]),
    /// One vector per triangle.
    Cellwise(&'a [[f64; 2]]),
    /// Nodal P1 values.
    Nodal(&'a [[f64; 2]]),
    /// Taylor–Hood P2 values on the given dof layout.
    Quadratic(&'a P2Dofs, &'a [[f64; 2]]),
}

impl VelocityField<'_> {
    fn check(&self, mesh: &TriMesh) -> Result<()> {
        let (len, want) = match self {
            VelocityField::Cellwise(v) => (v.len(), mesh.n_triangles()),
            VelocityField::Nodal(v) => (v.len(), mesh.n_nodes()),
            VelocityField::Quadratic(d, v) => {
                if d.n_vertices() != mesh.n_nodes() || d.n_triangles() != mesh.n_triangles() {
                    return Err(Error::FieldMeshMismatch("P2 layout built on another mesh".into()));
                }
                (v.len(), d.n_dofs())
            }
            _ => return Ok(()),
        };
        if len != want {
            return Err(Error::FieldMeshMismatch(format!(
                "velocity has {len} values, mesh space needs {want}"
            )));
        }
        Ok(())
    }

    fn is_zero(&self) -> bool {
        matches!(self, VelocityField::Zero)
    }

    fn eval(&self, mesh: &TriMesh, t: usize, lam: [f64; 3]) -> [f64; 2] {
        match *self {
            VelocityField::Zero => [0.0; 2],
            VelocityField::Constant(v) => v,
            VelocityField::Cellwise(v) => v[t],
            VelocityField::Nodal(v) => {
                let tri = mesh.triangles()[t];
                let mut u = [0.0; 2];
                for k in 0..3 {
                    u[0] += lam[k] * v[tri[k]][0];
                    u[1] += lam[k] * v[tri[k]][1];
                }
                u
            }
            VelocityField::Quadratic(dofs, v) => {
                let phi = p2_values(lam);
                let mut u = [0.0; 2];
                for (k, &d) in dofs.triangle(t).iter().enumerate() {
                    u[0] += phi[k] * v[d][0];
                    u[1] += phi[k] * v[d][1];
                }
                u
            }
        }
    }
}

/// Electrostatic drift `−A∇Φ` of a P1 potential.
#[derive(Clone, Copy, Debug)]
pub struct Drift<'a> {
    pub potential: &'a [f64],
    pub coeff: Tensor2,
}

impl Drift<'_> {
    fn velocity(&self, tri: &[usize; 3], g: &[[f64; 2]; 3]) -> [f64; 2] {
        let mut grad = [0.0; 2];
        for k in 0..3 {
            grad[0] += self.potential[tri[k]] * g[k][0];
            grad[1] += self.potential[tri[k]] * g[k][1];
        }
        let u = self.coeff.apply(grad);
        [-u[0], -u[1]]
    }
}

/// Convection matrix `C_ij = ∫ φ_j u·∇φ_i` with `u = v − A∇Φ`.
///
/// For a concentration `c`, `(Cc)_i = ∫ c u·∇φ_i`. Column sums vanish identically, so any
/// operator `K − C` with a stiffness `K` conserves `∫ c` under no-flux conditions.
pub fn assemble_convection(
    mesh: &TriMesh,
    velocity: VelocityField<'_>,
    drift: Option<Drift<'_>>,
) -> Result<SparseMatrix> {
    velocity.check(mesh)?;
    if let Some(d) = &drift {
        if d.potential.len() != mesh.n_nodes() {
            return Err(Error::FieldMeshMismatch(format!(
                "potential has {} values, mesh has {} nodes",
                d.potential.len(),
                mesh.n_nodes()
            )));
        }
    }
    let rule = TriangleRule::of_degree(4);
    let mut trips = Vec::with_capacity(9 * mesh.n_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let (g, area) = element_geometry(mesh, t)?;
        // w_j = ∫_T φ_j u
        let mut w = [[0.0; 2]; 3];
        if !velocity.is_zero() {
            for (lam, q) in rule.points.iter().zip(&rule.weights) {
                let u = velocity.eval(mesh, t, *lam);
                for j in 0..3 {
                    w[j][0] += q * area * lam[j] * u[0];
                    w[j][1] += q * area * lam[j] * u[1];
                }
            }
        }
        if let Some(d) = &drift {
            let u = d.velocity(tri, &g);
            for wj in w.iter_mut() {
                wj[0] += area / 3.0 * u[0];
                wj[1] += area / 3.0 * u[1];
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                trips.push((tri[i], tri[j], g[i][0] * w[j][0] + g[i][1] * w[j][1]));
            }
        }
    }
    let n = mesh.n_nodes();
    Ok(SparseMatrix::from_triplets(n, n, &trips))
}

/// First-order upwinding: isotropic artificial diffusion `max(0, |u|h/2 − κ)` on every
/// element whose cell Péclet number `|u|h/(2κ)` exceeds 1 (i.e. `|u|h/κ > 2`).
pub fn assemble_artificial_diffusion(
    mesh: &TriMesh,
    velocity: VelocityField<'_>,
    drift: Option<Drift<'_>>,
    kappa: f64,
) -> Result<SparseMatrix> {
    velocity.check(mesh)?;
    let centre = [1.0 / 3.0; 3];
    let mut extra = vec![0.0; mesh.n_triangles()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let (g, _) = element_geometry(mesh, t)?;
        let mut u = velocity.eval(mesh, t, centre);
        if let Some(d) = &drift {
            let ud = d.velocity(tri, &g);
            u = [u[0] + ud[0], u[1] + ud[1]];
        }
        let v = mesh.vertices(t);
        let h = (0..3)
            .map(|k| {
                let (p, q) = (v[k], v[(k + 1) % 3]);
                (q[0] - p[0]).hypot(q[1] - p[1])
            })
            .fold(0.0, f64::max);
        let speed = u[0].hypot(u[1]);
        if speed * h > 2.0 * kappa {
            extra[t] = 0.5 * speed * h - kappa;
        }
    }
    assemble_stiffness_with(mesh, |t| Tensor2::scalar(extra[t]))
}

/// Gradient of a P1 field on each triangle.
pub fn p1_cell_gradients(mesh: &TriMesh, u: &[f64]) -> Vec<[f64; 2]> {
    mesh.triangles()
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            let (g, _) = p1_gradients(&mesh.vertices(t));
            let mut grad = [0.0; 2];
            for k in 0..3 {
                grad[0] += u[tri[k]] * g[k][0];
                grad[1] += u[tri[k]] * g[k][1];
            }
            grad
        })
        .collect()
}

/// `∫ u` for a P1 field.
pub fn integrate_p1(mesh: &TriMesh, u: &[f64]) -> f64 {
    mesh.triangles()
        .iter()
        .enumerate()
        .map(|(t, tri)| mesh.area(t) / 3.0 * (u[tri[0]] + u[tri[1]] + u[tri[2]]))
        .sum()
}

/// `‖u‖²_{L²}` for a P1 field (exact, consistent mass).
pub fn l2_norm_sq_p1(mesh: &TriMesh, u: &[f64]) -> f64 {
    mesh.triangles()
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            let (a, b, c) = (u[tri[0]], u[tri[1]], u[tri[2]]);
            mesh.area(t) / 6.0 * (a * a + b * b + c * c + a * b + b * c + c * a)
        })
        .sum()
}

/// Nodal gradient recovered by area-weighted averaging of the element gradients.
pub fn recovered_gradient(mesh: &TriMesh, u: &[f64]) -> Vec<[f64; 2]> {
    let cell = p1_cell_gradients(mesh, u);
    let mut sum = vec![[0.0; 2]; mesh.n_nodes()];
    let mut weight = vec![0.0; mesh.n_nodes()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let a = mesh.area(t);
        for &v in tri {
            sum[v][0] += a * cell[t][0];
            sum[v][1] += a * cell[t][1];
            weight[v] += a;
        }
    }
    sum.iter()
        .zip(&weight)
        .map(|(g, w)| if *w > 0.0 { [g[0] / w, g[1] / w] } else { [0.0; 2] })
        .collect()
}

/// `‖u − f‖_{L²}` between a P1 field and a function, by degree-4 quadrature.
pub fn l2_error_p1(mesh: &TriMesh, u: &[f64], exact: impl Fn([f64; 2]) -> f64) -> f64 {
    let rule = TriangleRule::of_degree(4);
    let mut sum = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let v = mesh.vertices(t);
        let area = mesh.area(t);
        for (lam, w) in rule.points.iter().zip(&rule.weights) {
            let uh = lam[0] * u[tri[0]] + lam[1] * u[tri[1]] + lam[2] * u[tri[2]];
            let e = uh - exact(map_point(&v, *lam));
            sum += w * area * e * e;
        }
    }
    sum.sqrt()
}
