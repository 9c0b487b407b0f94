use super::regime::{DarcyForcing, MacroModelClass, NpDrift, ScalingRegime};
use crate::cell::EffectiveCoefficients;
use crate::error::{Context, Error, Result};
use crate::fem::{
    assemble_mass, assemble_stiffness, lumped_mass, p1_cell_gradients, p1_gradients,
    ConstrainedSolver, LinearSolverKind, PatternLu, ScalarConstraints, SparseMatrix, Tensor2,
    VelocityField,
};
use crate::mesh::TriMesh;
use crate::transport::{np_step, NpTerms};

/// Absolute tolerance of the Poisson compatibility condition.
pub const COMPATIBILITY_TOL: f64 = 1e-8;

/// Discrete macroscopic fields at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct MacroState {
    pub t: f64,
    pub c_plus: Vec<f64>,
    pub c_minus: Vec<f64>,
    /// `Φ̃₀` (Neumann) or the averaged potential `Φ̄` (Dirichlet), nodal.
    pub phi: Vec<f64>,
    pub pressure: Vec<f64>,
    /// `v̄₀`, one vector per triangle.
    pub velocity: Vec<[f64; 2]>,
}

impl MacroState {
    /// State with the given concentrations and zero potential and flow.
    pub fn at_rest(mesh: &TriMesh, t: f64, c_plus: Vec<f64>, c_minus: Vec<f64>) -> Self {
        Self {
            t,
            c_plus,
            c_minus,
            phi: vec![0.0; mesh.n_nodes()],
            pressure: vec![0.0; mesh.n_nodes()],
            velocity: vec![[0.0; 2]; mesh.n_triangles()],
        }
    }

    pub(crate) fn check(&self, mesh: &TriMesh) -> Result<()> {
        let n = mesh.n_nodes();
        if [&self.c_plus, &self.c_minus, &self.phi, &self.pressure].iter().any(|v| v.len() != n)
            || self.velocity.len() != mesh.n_triangles()
        {
            return Err(Error::FieldMeshMismatch("macroscopic state does not match the mesh".into()));
        }
        Ok(())
    }
}

/// `p₀` (nodal, zero mean) and `v̄₀` (per triangle).
#[derive(Clone, Debug, PartialEq)]
pub struct DarcySolution {
    pub pressure: Vec<f64>,
    pub velocity: Vec<[f64; 2]>,
}

/// Prefactorized macroscopic operators for one mesh and coefficient set.
#[derive(Debug)]
pub struct MacroOperators {
    pub coeffs: EffectiveCoefficients,
    mass: SparseMatrix,
    lumped: Vec<f64>,
    diffusion: SparseMatrix,
    poisson: ConstrainedSolver,
    darcy: ConstrainedSolver,
}

impl MacroOperators {
    pub fn new(mesh: &TriMesh, coeffs: &EffectiveCoefficients) -> Result<Self> {
        for (name, t) in [("D", coeffs.d), ("K", coeffs.k)] {
            if !t.is_positive_definite() {
                return Err(Error::InvalidData(format!("{name} = {:?} is not positive definite", t.0)));
            }
        }
        let lumped = lumped_mass(mesh);
        let zero_mean = ScalarConstraints {
            zero_mean: Some(lumped.clone()),
            ..Default::default()
        };
        let diffusion = assemble_stiffness(mesh, coeffs.d)?;
        let poisson = ConstrainedSolver::new(&diffusion, &zero_mean, LinearSolverKind::Auto)?;
        let darcy = ConstrainedSolver::new(&assemble_stiffness(mesh, coeffs.k)?, &zero_mean, LinearSolverKind::Auto)?;
        Ok(Self {
            coeffs: *coeffs,
            mass: assemble_mass(mesh)?,
            lumped,
            diffusion,
            poisson,
            darcy,
        })
    }

    pub fn lumped(&self) -> &[f64] {
        &self.lumped
    }

    /// Right-hand side `∫(|Y_l|(c⁺−c⁻) + σ̄₀)ψ_i` and its sum (the compatibility residual).
    pub fn poisson_source(&self, c_plus: &[f64], c_minus: &[f64]) -> (Vec<f64>, f64) {
        let q: Vec<f64> = c_plus.iter().zip(c_minus).map(|(p, m)| self.coeffs.porosity * (p - m)).collect();
        let b: Vec<f64> = self
            .mass
            .matvec(&q)
            .iter()
            .zip(&self.lumped)
            .map(|(mq, w)| mq + self.coeffs.sigma_bar * w)
            .collect();
        let residual = b.iter().sum();
        (b, residual)
    }

    /// Zero-mean Neumann solve; with `strict` an incompatible source is an error, otherwise
    /// the source is projected onto compatible data.
    pub fn poisson(&self, c_plus: &[f64], c_minus: &[f64], strict: bool) -> Result<(Vec<f64>, f64)> {
        let (b, residual) = self.poisson_source(c_plus, c_minus);
        if strict && residual.abs() > COMPATIBILITY_TOL {
            return Err(Error::IncompatibleSource {
                residual,
                tolerance: COMPATIBILITY_TOL,
            });
        }
        Ok((self.poisson.solve(&b)?, residual))
    }

    pub fn darcy(&self, mesh: &TriMesh, forcing: Option<&[[f64; 2]]>) -> Result<DarcySolution> {
        let k = self.coeffs.k;
        let Some(f) = forcing else {
            return Ok(DarcySolution {
                pressure: vec![0.0; mesh.n_nodes()],
                velocity: vec![[0.0; 2]; mesh.n_triangles()],
            });
        };
        if f.len() != mesh.n_triangles() {
            return Err(Error::FieldMeshMismatch("Darcy forcing must have one vector per triangle".into()));
        }
        let mut b = vec![0.0; mesh.n_nodes()];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let (g, area) = p1_gradients(&mesh.vertices(t));
            let kf = k.apply(f[t]);
            for i in 0..3 {
                b[tri[i]] -= area * (kf[0] * g[i][0] + kf[1] * g[i][1]);
            }
        }
        let pressure = self.darcy.solve(&b)?;
        let velocity = p1_cell_gradients(mesh, &pressure)
            .iter()
            .zip(f)
            .map(|(gp, ft)| {
                let u = k.apply([gp[0] + ft[0], gp[1] + ft[1]]);
                [-u[0], -u[1]]
            })
            .collect();
        Ok(DarcySolution { pressure, velocity })
    }

    /// Implicit step of both species with the given flow and (optional) drift potential.
    #[allow(clippy::too_many_arguments)]
    pub fn np_step(
        &self,
        mesh: &TriMesh,
        c_old: (&[f64], &[f64]),
        velocity: Option<&[[f64; 2]]>,
        drift_potential: Option<&[f64]>,
        dt: f64,
        upwind: bool,
        lu: &mut PatternLu,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let terms = NpTerms {
            weight: self.coeffs.porosity,
            velocity: velocity.map_or(VelocityField::Zero, VelocityField::Cellwise),
            potential: drift_potential,
            drift_coeff: self.coeffs.d,
            upwind_kappa: upwind.then(|| self.coeffs.d.sym_eigenvalues()[0]),
        };
        np_step(mesh, &self.lumped, &self.diffusion, &terms, c_old, dt, lu)
    }
}

/// Cell-mean electrostatic body force `(c⁺ − c⁻)∇Φ̃₀` on each triangle.
pub fn electrostatic_forcing(mesh: &TriMesh, c_plus: &[f64], c_minus: &[f64], phi: &[f64]) -> Vec<[f64; 2]> {
    p1_cell_gradients(mesh, phi)
        .iter()
        .zip(mesh.triangles())
        .map(|(g, tri)| {
            let q = tri.iter().map(|&v| c_plus[v] - c_minus[v]).sum::<f64>() / 3.0;
            [q * g[0], q * g[1]]
        })
        .collect()
}

/// Macroscopic Poisson problem `−∇·(D∇Φ̃₀) = |Y_l|(c⁺−c⁻) + σ̄₀` with homogeneous Neumann
/// data and zero mean.
pub fn solve_macro_poisson(mesh: &TriMesh, state: &MacroState, coeffs: &EffectiveCoefficients) -> Result<Vec<f64>> {
    state.check(mesh).during("macro", "solve_macro_poisson")?;
    let ops = MacroOperators::new(mesh, coeffs).during("macro", "solve_macro_poisson")?;
    ops.poisson(&state.c_plus, &state.c_minus, true)
        .map(|(phi, _)| phi)
        .during("macro", "solve_macro_poisson")
}

/// Averaged potential of the Dirichlet branch, `m(c⁺ − c⁻)` plus `|Y_l|Φ_D` when `α = 2`.
pub fn eval_macro_potential_dirichlet(
    state: &MacroState,
    coeffs: &EffectiveCoefficients,
    regime: &ScalingRegime,
) -> Vec<f64> {
    let shift = if (regime.alpha - 2.0).abs() < 1e-12 {
        coeffs.porosity * regime.phi_d()
    } else {
        0.0
    };
    state
        .c_plus
        .iter()
        .zip(&state.c_minus)
        .map(|(p, m)| coeffs.dirichlet_mean * (p - m) + shift)
        .collect()
}

/// Darcy problem for the given model class: the electrostatic forcing is used only when the
/// class calls for it.
pub fn solve_macro_darcy(
    mesh: &TriMesh,
    state: &MacroState,
    coeffs: &EffectiveCoefficients,
    class: &MacroModelClass,
) -> Result<DarcySolution> {
    state.check(mesh).during("macro", "solve_macro_darcy")?;
    let ops = MacroOperators::new(mesh, coeffs).during("macro", "solve_macro_darcy")?;
    let f = (class.darcy_forcing == DarcyForcing::WithElectrostatic)
        .then(|| electrostatic_forcing(mesh, &state.c_plus, &state.c_minus, &state.phi));
    ops.darcy(mesh, f.as_deref()).during("macro", "solve_macro_darcy")
}

/// Darcy solve with an explicit per-triangle forcing `f` (`v̄₀ = −K(∇p₀ + f)`).
pub fn solve_darcy_with_forcing(mesh: &TriMesh, k: Tensor2, forcing: &[[f64; 2]]) -> Result<DarcySolution> {
    let coeffs = EffectiveCoefficients {
        k,
        ..EffectiveCoefficients::unit()
    };
    MacroOperators::new(mesh, &coeffs)?.darcy(mesh, Some(forcing))
}

/// One implicit Nernst–Planck step using the flow and potential stored in `state`.
pub fn step_macro_np(
    mesh: &TriMesh,
    state: &MacroState,
    coeffs: &EffectiveCoefficients,
    class: &MacroModelClass,
    dt: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    state.check(mesh).during("macro", "step_macro_np")?;
    let ops = MacroOperators::new(mesh, coeffs).during("macro", "step_macro_np")?;
    let velocity = (class.darcy_forcing == DarcyForcing::WithElectrostatic).then_some(state.velocity.as_slice());
    let drift = (class.np_drift == NpDrift::WithDrift).then_some(state.phi.as_slice());
    ops.np_step(mesh, (&state.c_plus, &state.c_minus), velocity, drift, dt, false, &mut PatternLu::new())
        .during("macro", "step_macro_np")
}

/// Largest weak divergence `|∫ v·∇ψ_i|` of a cellwise velocity.
pub fn weak_divergence(mesh: &TriMesh, velocity: &[[f64; 2]]) -> f64 {
    let mut d = vec![0.0; mesh.n_nodes()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let (g, area) = p1_gradients(&mesh.vertices(t));
        for i in 0..3 {
            d[tri[i]] += area * (velocity[t][0] * g[i][0] + velocity[t][1] * g[i][1]);
        }
    }
    d.iter().fold(0.0, |m, v| m.max(v.abs()))
}
