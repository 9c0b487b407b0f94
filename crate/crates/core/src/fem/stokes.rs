use faer::prelude::*;
use faer::sparse::linalg::solvers::Llt;
use faer::{Mat, Side};

use super::assemble::{element_geometry, lumped_mass};
use super::constraints::DofMap;
use super::element::{p2_gradients, p2_values};
use super::p2::P2Dofs;
use super::quadrature::{map_point, TriangleRule};
use super::solve::{Factorization, LinearSolverKind};
use super::sparse::{dot, norm2, SparseMatrix};
use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, TriMesh};

/// Body force for a Stokes solve.
#[derive(Clone, Copy)]
pub enum Forcing<'a> {
    Zero,
    Constant([f64; 2]),
    /// Evaluated per triangle at barycentric coordinates.
    Local(&'a dyn Fn(usize, [f64; 3]) -> [f64; 2]),
    /// Evaluated at physical points.
    Pointwise(&'a dyn Fn([f64; 2]) -> [f64; 2]),
}

#[derive(Clone, Debug)]
pub struct StokesOptions {
    pub viscosity: f64,
    pub no_slip: Vec<BoundaryTag>,
    /// Identify opposite cell faces (unit-cell problems).
    pub periodic: bool,
    pub solver: LinearSolverKind,
    /// Relative tolerance of the Uzawa iteration.
    pub tol: f64,
}

impl Default for StokesOptions {
    fn default() -> Self {
        Self {
            viscosity: 1.0,
            no_slip: vec![BoundaryTag::GammaInterior],
            periodic: true,
            solver: LinearSolverKind::Auto,
            tol: 1e-12,
        }
    }
}

/// Velocity (P2, full dof numbering) and pressure (P1, zero mean).
#[derive(Clone, Debug)]
pub struct StokesSolution {
    pub velocity: Vec<[f64; 2]>,
    pub pressure: Vec<f64>,
    /// Euclidean norm of the weak divergence `(∫ q_k ∇·v)_k` over pressure test functions.
    pub divergence_residual: f64,
}

enum Backend {
    Direct(Factorization),
    Uzawa { velocity: Llt<usize, f64>, pressure_diag: Vec<f64> },
}

/// Assembled and factorized Taylor–Hood system, reusable across forcings.
pub struct StokesSystem {
    dofs: P2Dofs,
    vmap: DofMap,
    pmap: DofMap,
    free: Vec<usize>,
    free_index: Vec<usize>,
    bx: SparseMatrix,
    by: SparseMatrix,
    pressure_weights: Vec<f64>,
    backend: Option<Backend>,
    tol: f64,
}

impl std::fmt::Debug for StokesSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StokesSystem")
            .field("velocity_dofs", &(2 * self.free.len()))
            .field("pressure_dofs", &self.pmap.n_dofs())
            .finish()
    }
}

impl StokesSystem {
    pub fn new(mesh: &TriMesh, opts: &StokesOptions) -> Result<Self> {
        if !(opts.viscosity > 0.0 && opts.viscosity.is_finite()) {
            return Err(Error::InvalidData(format!("viscosity must be positive, got {}", opts.viscosity)));
        }
        let dofs = P2Dofs::new(mesh);
        let (vmap, pmap) = if opts.periodic {
            (dofs.periodic_map(mesh), DofMap::periodic(mesh))
        } else {
            (DofMap::identity(dofs.n_dofs()), DofMap::identity(mesh.n_nodes()))
        };
        let mut fixed = vec![false; vmap.n_dofs()];
        for d in dofs.boundary_dofs(mesh, &opts.no_slip) {
            fixed[vmap.dof(d)] = true;
        }
        let free: Vec<usize> = (0..vmap.n_dofs()).filter(|&i| !fixed[i]).collect();
        let mut free_index = vec![usize::MAX; vmap.n_dofs()];
        for (k, &i) in free.iter().enumerate() {
            free_index[i] = k;
        }
        let nf = free.len();
        let np = pmap.n_dofs();

        let rule = TriangleRule::of_degree(2);
        let mut a_t = Vec::with_capacity(36 * mesh.n_triangles());
        let mut bx_t = Vec::with_capacity(18 * mesh.n_triangles());
        let mut by_t = Vec::with_capacity(18 * mesh.n_triangles());
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let (g, area) = element_geometry(mesh, t)?;
            let loc = dofs.triangle(t);
            let rows: Vec<usize> = loc.iter().map(|&d| free_index[vmap.dof(d)]).collect();
            let prow: Vec<usize> = tri.iter().map(|&v| pmap.dof(v)).collect();
            for (lam, w) in rule.points.iter().zip(&rule.weights) {
                let dphi = p2_gradients(*lam, &g);
                let wa = w * area;
                for i in 0..6 {
                    if rows[i] == usize::MAX {
                        continue;
                    }
                    for j in 0..6 {
                        if rows[j] == usize::MAX {
                            continue;
                        }
                        let v = opts.viscosity * wa * (dphi[i][0] * dphi[j][0] + dphi[i][1] * dphi[j][1]);
                        a_t.push((rows[i], rows[j], v));
                    }
                    for q in 0..3 {
                        bx_t.push((prow[q], rows[i], wa * lam[q] * dphi[i][0]));
                        by_t.push((prow[q], rows[i], wa * lam[q] * dphi[i][1]));
                    }
                }
            }
        }
        let a = SparseMatrix::from_triplets(nf, nf, &a_t);
        let bx = SparseMatrix::from_triplets(np, nf, &bx_t);
        let by = SparseMatrix::from_triplets(np, nf, &by_t);
        let pressure_weights = pmap.restrict_vector(&lumped_mass(mesh));

        let backend = if fixed.iter().any(|&f| f) || !opts.periodic {
            Some(match opts.solver.resolve(2 * nf + np) {
                LinearSolverKind::Iterative => {
                    let m = a.to_faer()?;
                    let velocity = m
                        .sp_cholesky(Side::Lower)
                        .map_err(|e| Error::SolverBreakdown(format!("velocity Cholesky failed: {e:?}")))?;
                    let pressure_diag = pressure_weights.iter().map(|w| w / opts.viscosity).collect();
                    Backend::Uzawa { velocity, pressure_diag }
                }
                _ => {
                    // Pressure is fixed up to a constant: drop pressure dof 0 and its
                    // (linearly dependent) continuity row, then re-centre afterwards.
                    let n = 2 * nf + np - 1;
                    let prow = |q: usize| 2 * nf + q - 1;
                    let mut t: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * a.nnz() + 4 * bx.nnz());
                    for (i, j, v) in a.triplets() {
                        t.push((i, j, v));
                        t.push((nf + i, nf + j, v));
                    }
                    for (q, j, v) in bx.triplets().filter(|e| e.0 != 0) {
                        t.push((prow(q), j, -v));
                        t.push((j, prow(q), -v));
                    }
                    for (q, j, v) in by.triplets().filter(|e| e.0 != 0) {
                        t.push((prow(q), nf + j, -v));
                        t.push((nf + j, prow(q), -v));
                    }
                    let m = SparseMatrix::from_triplets(n, n, &t);
                    Backend::Direct(Factorization::new(&m, LinearSolverKind::Direct)?)
                }
            })
        } else {
            None
        };
        Ok(Self {
            dofs,
            vmap,
            pmap,
            free,
            free_index,
            bx,
            by,
            pressure_weights,
            backend,
            tol: opts.tol,
        })
    }

    pub fn dofs(&self) -> &P2Dofs {
        &self.dofs
    }

    pub fn n_unknowns(&self) -> usize {
        2 * self.free.len() + self.pmap.n_dofs()
    }

    fn load(&self, mesh: &TriMesh, forcing: Forcing<'_>) -> (Vec<f64>, Vec<f64>) {
        let nf = self.free.len();
        let (mut fx, mut fy) = (vec![0.0; nf], vec![0.0; nf]);
        if matches!(forcing, Forcing::Zero) {
            return (fx, fy);
        }
        let rule = TriangleRule::of_degree(4);
        for t in 0..mesh.n_triangles() {
            let v = mesh.vertices(t);
            let area = mesh.area(t);
            let loc = self.dofs.triangle(t);
            for (lam, w) in rule.points.iter().zip(&rule.weights) {
                let f = match forcing {
                    Forcing::Zero => [0.0; 2],
                    Forcing::Constant(f) => f,
                    Forcing::Local(f) => f(t, *lam),
                    Forcing::Pointwise(f) => f(map_point(&v, *lam)),
                };
                let phi = p2_values(*lam);
                for k in 0..6 {
                    let r = self.free_index[self.vmap.dof(loc[k])];
                    if r != usize::MAX {
                        fx[r] += w * area * phi[k] * f[0];
                        fy[r] += w * area * phi[k] * f[1];
                    }
                }
            }
        }
        (fx, fy)
    }

    pub fn solve(&self, mesh: &TriMesh, forcing: Forcing<'_>) -> Result<StokesSolution> {
        if mesh.n_nodes() != self.dofs.n_vertices() || mesh.n_triangles() != self.dofs.n_triangles() {
            return Err(Error::FieldMeshMismatch("Stokes system assembled on another mesh".into()));
        }
        let nf = self.free.len();
        let np = self.pmap.n_dofs();
        let (fx, fy) = self.load(mesh, forcing);
        let fnorm = norm2(&fx).hypot(norm2(&fy));
        let (ux, uy, p) = match &self.backend {
            _ if fnorm == 0.0 => (vec![0.0; nf], vec![0.0; nf], vec![0.0; np]),
            None => {
                return Err(Error::NoSolidPhase(
                    "periodic Stokes problem without a no-slip surface is incompatible with nonzero forcing".into(),
                ))
            }
            Some(Backend::Direct(f)) => {
                let mut b = fx;
                b.extend(fy);
                b.extend(std::iter::repeat(0.0).take(np - 1));
                let x = f.solve(&b)?;
                let mut p = vec![0.0];
                p.extend_from_slice(&x[2 * nf..]);
                (x[..nf].to_vec(), x[nf..2 * nf].to_vec(), p)
            }
            Some(Backend::Uzawa { velocity, pressure_diag }) => {
                self.uzawa(velocity, pressure_diag, &fx, &fy)?
            }
        };
        let div: Vec<f64> = self
            .bx
            .matvec(&ux)
            .iter()
            .zip(self.by.matvec(&uy))
            .map(|(a, b)| a + b)
            .collect();
        let mut reduced = vec![[0.0; 2]; self.vmap.n_dofs()];
        for (k, &i) in self.free.iter().enumerate() {
            reduced[i] = [ux[k], uy[k]];
        }
        let velocity = (0..self.vmap.n_full()).map(|d| reduced[self.vmap.dof(d)]).collect();
        // remove any residual constant from the pressure
        let wsum: f64 = self.pressure_weights.iter().sum();
        let mean = dot(&self.pressure_weights, &p) / wsum;
        let p: Vec<f64> = p.iter().map(|v| v - mean).collect();
        Ok(StokesSolution {
            velocity,
            pressure: self.pmap.expand(&p),
            divergence_residual: norm2(&div),
        })
    }

    /// Pressure Schur-complement CG: `S p = −B A⁻¹ f` with `S = B A⁻¹ Bᵀ`, preconditioned by
    /// the lumped pressure mass scaled by the viscosity.
    fn uzawa(
        &self,
        chol: &Llt<usize, f64>,
        pdiag: &[f64],
        fx: &[f64],
        fy: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let nf = self.free.len();
        let np = self.pmap.n_dofs();
        let solve_a = |b: &[f64]| -> Vec<f64> {
            let mut m = Mat::<f64>::from_fn(nf, 1, |i, _| b[i]);
            chol.solve_in_place(m.as_mut());
            (0..nf).map(|i| m[(i, 0)]).collect()
        };
        let bt = |p: &[f64]| (self.bx.matvec_transpose(p), self.by.matvec_transpose(p));
        let apply_s = |p: &[f64]| -> Vec<f64> {
            let (gx, gy) = bt(p);
            let (vx, vy) = (solve_a(&gx), solve_a(&gy));
            self.bx.matvec(&vx).iter().zip(self.by.matvec(&vy)).map(|(a, b)| a + b).collect()
        };
        let w = &self.pressure_weights;
        let wsum: f64 = w.iter().sum();
        let project = |v: &mut Vec<f64>| {
            // remove the component along constants (kernel of S)
            let m = v.iter().sum::<f64>() / np as f64;
            v.iter_mut().for_each(|x| *x -= m);
        };
        let (ax, ay) = (solve_a(fx), solve_a(fy));
        let mut rhs: Vec<f64> = self
            .bx
            .matvec(&ax)
            .iter()
            .zip(self.by.matvec(&ay))
            .map(|(a, b)| -(a + b))
            .collect();
        project(&mut rhs);
        let bnorm = norm2(&rhs);
        let mut p = vec![0.0; np];
        if bnorm > 0.0 {
            let mut r = rhs.clone();
            let mut z: Vec<f64> = r.iter().zip(pdiag).map(|(r, d)| r / d).collect();
            project(&mut z);
            let mut d = z.clone();
            let mut rz = dot(&r, &z);
            let max_iter = 10 * np.max(100);
            let mut converged = false;
            for _ in 0..max_iter {
                let sd = apply_s(&d);
                let dsd = dot(&d, &sd);
                if !(dsd > 0.0) {
                    return Err(Error::SolverBreakdown(format!("Uzawa curvature {dsd:e}")));
                }
                let alpha = rz / dsd;
                for i in 0..np {
                    p[i] += alpha * d[i];
                    r[i] -= alpha * sd[i];
                }
                if norm2(&r) <= self.tol * bnorm {
                    converged = true;
                    break;
                }
                z = r.iter().zip(pdiag).map(|(r, d)| r / d).collect();
                project(&mut z);
                let rz_new = dot(&r, &z);
                let beta = rz_new / rz;
                rz = rz_new;
                for i in 0..np {
                    d[i] = z[i] + beta * d[i];
                }
            }
            if !converged {
                return Err(Error::MaxIterationsExceeded {
                    iterations: max_iter,
                    residual: norm2(&r) / bnorm,
                });
            }
        }
        let mean = dot(w, &p) / wsum;
        p.iter_mut().for_each(|x| *x -= mean);
        let (gx, gy) = bt(&p);
        let rx: Vec<f64> = fx.iter().zip(&gx).map(|(f, g)| f + g).collect();
        let ry: Vec<f64> = fy.iter().zip(&gy).map(|(f, g)| f + g).collect();
        Ok((solve_a(&rx), solve_a(&ry), p))
    }
}

/// One-shot Taylor–Hood solve.
pub fn solve_stokes(mesh: &TriMesh, forcing: Forcing<'_>, opts: &StokesOptions) -> Result<StokesSolution> {
    StokesSystem::new(mesh, opts)?.solve(mesh, forcing)
}

/// `∫ v` of a P2 vector field.
pub fn integrate_p2(mesh: &TriMesh, dofs: &P2Dofs, v: &[[f64; 2]]) -> [f64; 2] {
    // vertex basis functions integrate to zero, edge functions to area/3
    let mut s = [0.0; 2];
    for t in 0..mesh.n_triangles() {
        let a = mesh.area(t) / 3.0;
        for &d in &dofs.triangle(t)[3..] {
            s[0] += a * v[d][0];
            s[1] += a * v[d][1];
        }
    }
    s
}

/// `∫ ∇u : ∇w` for two P2 vector fields.
pub fn p2_gradient_inner(mesh: &TriMesh, dofs: &P2Dofs, u: &[[f64; 2]], w: &[[f64; 2]]) -> f64 {
    let rule = TriangleRule::of_degree(2);
    let mut s = 0.0;
    for t in 0..mesh.n_triangles() {
        let (g, area) = super::element::p1_gradients(&mesh.vertices(t));
        let loc = dofs.triangle(t);
        for (lam, q) in rule.points.iter().zip(&rule.weights) {
            let dphi = p2_gradients(*lam, &g);
            let mut gu = [[0.0; 2]; 2];
            let mut gw = [[0.0; 2]; 2];
            for k in 0..6 {
                for c in 0..2 {
                    for d in 0..2 {
                        gu[c][d] += u[loc[k]][c] * dphi[k][d];
                        gw[c][d] += w[loc[k]][c] * dphi[k][d];
                    }
                }
            }
            let mut inner = 0.0;
            for c in 0..2 {
                for d in 0..2 {
                    inner += gu[c][d] * gw[c][d];
                }
            }
            s += q * area * inner;
        }
    }
    s
}

/// Cell average of a P2 velocity on each triangle.
pub fn p2_cell_means(mesh: &TriMesh, dofs: &P2Dofs, v: &[[f64; 2]]) -> Vec<[f64; 2]> {
    (0..mesh.n_triangles())
        .map(|t| {
            let loc = dofs.triangle(t);
            let mut s = [0.0; 2];
            for &d in &loc[3..] {
                s[0] += v[d][0] / 3.0;
                s[1] += v[d][1] / 3.0;
            }
            s
        })
        .collect()
}
