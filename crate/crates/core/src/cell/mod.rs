//! Periodic cell problems and the effective coefficients of the homogenized model.

mod corrector;

pub use corrector::{reconstruct_corrector, CellCorrector};

use crate::error::{Context, Error, Result};
use crate::fem::{
    assemble_stiffness, integrate_p1, integrate_p2, lumped_mass, p1_gradients, p2_gradient_inner,
    solve_constrained, DofMap, Forcing, LinearSolverKind, P2Dofs, ScalarConstraints,
    StokesOptions, StokesSystem, Tensor2,
};
use crate::mesh::{generate_unit_cell_mesh, BoundaryTag, TriMesh, UnitCellGeometry};

/// Relative tolerance for averaging vs. energy evaluations of D and K.
pub const FORMULA_TOL: f64 = 1e-6;

/// Correctors `φ_1, φ_2` (nodal P1 values, zero mean, periodic).
#[derive(Clone, Debug)]
pub struct ScalarCellSolutions {
    pub phi: [Vec<f64>; 2],
    /// Sum of the assembled (periodically reduced) right-hand side of each problem.
    pub rhs_sum: [f64; 2],
}

/// Stokes correctors `w_j` (P2) and pressures `π_j` (P1, zero mean).
#[derive(Clone, Debug)]
pub struct StokesCellSolutions {
    pub dofs: P2Dofs,
    pub w: [Vec<[f64; 2]>; 2],
    pub pi: [Vec<f64>; 2],
    pub divergence_residual: f64,
}

/// Solution of `−Δφ = 1`, `φ = 0` on `Γ`, periodic.
#[derive(Clone, Debug)]
pub struct DirichletCellSolution {
    pub phi: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveCoefficients {
    pub geometry: UnitCellGeometry,
    /// Fluid fraction measured on the mesh.
    pub porosity: f64,
    pub d: Tensor2,
    pub k: Tensor2,
    pub sigma_bar: f64,
    pub dirichlet_mean: f64,
}

impl EffectiveCoefficients {
    /// Coefficients of a solid-free medium: `D = K = I`, unit porosity, no surface terms.
    pub fn unit() -> Self {
        Self {
            geometry: UnitCellGeometry::empty(1.0),
            porosity: 1.0,
            d: Tensor2::IDENTITY,
            k: Tensor2::IDENTITY,
            sigma_bar: 0.0,
            dirichlet_mean: 0.0,
        }
    }
}

/// Periodic Neumann problems `∫∇φ_j·∇ψ = −∫ e_j·∇ψ` with zero mean.
pub fn solve_scalar_cell_problems(mesh: &TriMesh) -> Result<ScalarCellSolutions> {
    let k = assemble_stiffness(mesh, 1.0)?;
    let map = DofMap::periodic(mesh);
    let mut rhs = [vec![0.0; mesh.n_nodes()], vec![0.0; mesh.n_nodes()]];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let (g, area) = p1_gradients(&mesh.vertices(t));
        for (i, &v) in tri.iter().enumerate() {
            rhs[0][v] -= area * g[i][0];
            rhs[1][v] -= area * g[i][1];
        }
    }
    let constraints = ScalarConstraints {
        periodic: Some(map.clone()),
        dirichlet: vec![],
        zero_mean: Some(lumped_mass(mesh)),
    };
    let rhs_sum = [0, 1].map(|j| map.restrict_vector(&rhs[j]).iter().sum::<f64>());
    let solver = crate::fem::ConstrainedSolver::new(&k, &constraints, LinearSolverKind::Auto)
        .during("cell", "solve_scalar_cell_problems")?;
    let phi0 = solver.solve(&rhs[0]).during("cell", "solve_scalar_cell_problems")?;
    let phi1 = solver.solve(&rhs[1]).during("cell", "solve_scalar_cell_problems")?;
    Ok(ScalarCellSolutions {
        phi: [phi0, phi1],
        rhs_sum,
    })
}

fn gradient_integrals(mesh: &TriMesh, u: &[f64]) -> [f64; 2] {
    let mut s = [0.0; 2];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let (g, area) = p1_gradients(&mesh.vertices(t));
        for k in 0..3 {
            s[0] += area * u[tri[k]] * g[k][0];
            s[1] += area * u[tri[k]] * g[k][1];
        }
    }
    s
}

fn check_formulas(quantity: &str, avg: Tensor2, energy: Tensor2) -> Result<()> {
    let scale = avg.0.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let diff = avg.max_abs_diff(&energy);
    if diff > FORMULA_TOL * scale {
        let (i, j) = (0..4)
            .map(|k| (k / 2, k % 2))
            .max_by(|a, b| {
                let da = (avg.0[a.0][a.1] - energy.0[a.0][a.1]).abs();
                let db = (avg.0[b.0][b.1] - energy.0[b.0][b.1]).abs();
                da.total_cmp(&db)
            })
            .unwrap();
        return Err(Error::FormulaMismatch {
            quantity: format!("{quantity}{}{}", i + 1, j + 1),
            averaged: avg.0[i][j],
            energy: energy.0[i][j],
        });
    }
    Ok(())
}

/// `D_ij = ∫(δ_ij + ∂_i φ_j)`, cross-checked against `∫(e_i+∇φ_i)·(e_j+∇φ_j)`.
pub fn compute_diffusion_tensor(sols: &ScalarCellSolutions, mesh: &TriMesh) -> Result<Tensor2> {
    let (avg, energy) = diffusion_tensor_pair(sols, mesh);
    check_formulas("D", avg, energy).during("cell", "compute_diffusion_tensor")?;
    Ok(avg)
}

/// Averaging and energy evaluations of D, without the consistency check.
pub fn diffusion_tensor_pair(sols: &ScalarCellSolutions, mesh: &TriMesh) -> (Tensor2, Tensor2) {
    let area = mesh.total_area();
    let grads = [gradient_integrals(mesh, &sols.phi[0]), gradient_integrals(mesh, &sols.phi[1])];
    let mut avg = Tensor2::ZERO;
    for i in 0..2 {
        for j in 0..2 {
            avg.0[i][j] = if i == j { area } else { 0.0 } + grads[j][i];
        }
    }
    let mut energy = Tensor2::ZERO;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let (g, a) = p1_gradients(&mesh.vertices(t));
        let mut f = [[1.0, 0.0], [0.0, 1.0]];
        for (j, fj) in f.iter_mut().enumerate() {
            for k in 0..3 {
                fj[0] += sols.phi[j][tri[k]] * g[k][0];
                fj[1] += sols.phi[j][tri[k]] * g[k][1];
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                energy.0[i][j] += a * (f[i][0] * f[j][0] + f[i][1] * f[j][1]);
            }
        }
    }
    (avg, energy)
}

fn no_slip_required(mesh: &TriMesh) -> Result<()> {
    if mesh.edges_with_tag(BoundaryTag::GammaInterior).next().is_none() {
        return Err(Error::NoSolidPhase(
            "the cell has no inclusion, so periodic Stokes flow under constant forcing is unbounded".into(),
        ));
    }
    Ok(())
}

/// `−Δw_j + ∇π_j = e_j`, `w_j = 0` on `Γ`, periodic, `∫π_j = 0`.
pub fn solve_stokes_cell_problems(mesh: &TriMesh) -> Result<StokesCellSolutions> {
    no_slip_required(mesh).during("cell", "solve_stokes_cell_problems")?;
    let system = StokesSystem::new(mesh, &StokesOptions::default()).during("cell", "solve_stokes_cell_problems")?;
    let s0 = system
        .solve(mesh, Forcing::Constant([1.0, 0.0]))
        .during("cell", "solve_stokes_cell_problems")?;
    let s1 = system
        .solve(mesh, Forcing::Constant([0.0, 1.0]))
        .during("cell", "solve_stokes_cell_problems")?;
    Ok(StokesCellSolutions {
        dofs: system.dofs().clone(),
        divergence_residual: s0.divergence_residual.max(s1.divergence_residual),
        w: [s0.velocity, s1.velocity],
        pi: [s0.pressure, s1.pressure],
    })
}

/// `K_ij = ∫ w^i_j` (the i-th component of `w_j`), cross-checked against `∫∇w_i:∇w_j`.
pub fn compute_permeability_tensor(sols: &StokesCellSolutions, mesh: &TriMesh) -> Result<Tensor2> {
    let (avg, energy) = permeability_tensor_pair(sols, mesh);
    check_formulas("K", avg, energy).during("cell", "compute_permeability_tensor")?;
    Ok(avg)
}

pub fn permeability_tensor_pair(sols: &StokesCellSolutions, mesh: &TriMesh) -> (Tensor2, Tensor2) {
    let means = [
        integrate_p2(mesh, &sols.dofs, &sols.w[0]),
        integrate_p2(mesh, &sols.dofs, &sols.w[1]),
    ];
    let mut avg = Tensor2::ZERO;
    let mut energy = Tensor2::ZERO;
    for i in 0..2 {
        for j in 0..2 {
            avg.0[i][j] = means[j][i];
            energy.0[i][j] = p2_gradient_inner(mesh, &sols.dofs, &sols.w[i], &sols.w[j]);
        }
    }
    (avg, energy)
}

/// `−Δφ = 1` in `Y_l`, `φ = 0` on `Γ`, periodic.
pub fn solve_dirichlet_cell_problem(mesh: &TriMesh) -> Result<DirichletCellSolution> {
    no_slip_required(mesh).during("cell", "solve_dirichlet_cell_problem")?;
    let k = assemble_stiffness(mesh, 1.0)?;
    let constraints = ScalarConstraints {
        periodic: Some(DofMap::periodic(mesh)),
        dirichlet: mesh
            .nodes_with_tag(BoundaryTag::GammaInterior)
            .into_iter()
            .map(|v| (v, 0.0))
            .collect(),
        zero_mean: None,
    };
    let phi = solve_constrained(&k, &lumped_mass(mesh), &constraints)
        .during("cell", "solve_dirichlet_cell_problem")?;
    Ok(DirichletCellSolution { phi })
}

/// `m = ∫_{Y_l} φ`.
pub fn compute_dirichlet_mean(sol: &DirichletCellSolution, mesh: &TriMesh) -> f64 {
    integrate_p1(mesh, &sol.phi)
}

/// `σ̄₀ = σ |Γ|` for a constant surface charge.
pub fn compute_sigma_bar(geom: &UnitCellGeometry, sigma: f64) -> f64 {
    sigma * geom.interface_length()
}

/// All effective coefficients on a cell mesh generated from `geom`.
pub fn compute_effective_coefficients(geom: &UnitCellGeometry, sigma: f64) -> Result<EffectiveCoefficients> {
    let mesh = generate_unit_cell_mesh(geom).during("cell", "generate_unit_cell_mesh")?;
    effective_coefficients_on(geom, &mesh, sigma)
}

/// All effective coefficients on a given cell mesh; the three problem families run
/// concurrently.
pub fn effective_coefficients_on(
    geom: &UnitCellGeometry,
    mesh: &TriMesh,
    sigma: f64,
) -> Result<EffectiveCoefficients> {
    let (d, (k, m)) = rayon::join(
        || solve_scalar_cell_problems(mesh).and_then(|s| compute_diffusion_tensor(&s, mesh)),
        || {
            rayon::join(
                || solve_stokes_cell_problems(mesh).and_then(|s| compute_permeability_tensor(&s, mesh)),
                || solve_dirichlet_cell_problem(mesh).map(|s| compute_dirichlet_mean(&s, mesh)),
            )
        },
    );
    Ok(EffectiveCoefficients {
        geometry: *geom,
        porosity: mesh.total_area(),
        d: d?,
        k: k?,
        sigma_bar: compute_sigma_bar(geom, sigma),
        dirichlet_mean: m?,
    })
}
