use crate::data::{balance_charge, check_initial_bounds, InitialData};
use crate::diagnostics::{DiagnosticsRow, RunDiagnostics};
use crate::error::{Context, Error, Result};
use crate::fem::{
    assemble_boundary_load, assemble_mass, assemble_stiffness, lumped_mass, p1_cell_gradients, ConstrainedSolver,
    Forcing, LinearSolverKind, P2Dofs, PatternLu, ScalarConstraints, SparseMatrix, StokesOptions, StokesSystem,
    Tensor2, VelocityField,
};
use crate::macroscale::{classify_regime, BoundaryCondition, ScalingRegime, COMPATIBILITY_TOL};
use crate::mesh::{generate_perforated_mesh, BoundaryTag, PerforatedDomain, TriMesh};
use crate::transport::{keep_snapshot, max_change, np_step, time_grid, CouplingOptions, NpTerms};

/// Pore-scale problem `P_ε` on a meshed perforated domain.
#[derive(Clone, Debug)]
pub struct MicroProblem {
    pub domain: PerforatedDomain,
    pub mesh: TriMesh,
    pub regime: ScalingRegime,
    pub c_plus0: Vec<f64>,
    pub c_minus0: Vec<f64>,
    pub t_end: f64,
    pub dt: f64,
    pub lambda: f64,
    pub volume_additive: bool,
    pub options: CouplingOptions,
    /// Re-solve Stokes on every pass instead of reusing the last solution when the forcing is
    /// unchanged.
    pub exact_stokes: bool,
}

impl MicroProblem {
    /// Meshes `domain` with spacing `h` and interpolates `data`.
    pub fn new(
        domain: PerforatedDomain,
        h: f64,
        regime: ScalingRegime,
        data: &InitialData,
        t_end: f64,
        dt: f64,
    ) -> Result<Self> {
        let mesh = generate_perforated_mesh(&domain, h).during("micro", "MicroProblem::new")?;
        let (c_plus0, c_minus0) = data.interpolate(&mesh);
        Ok(Self {
            domain,
            mesh,
            regime,
            c_plus0,
            c_minus0,
            t_end,
            dt,
            lambda: 1.0,
            volume_additive: data.is_volume_additive(),
            options: CouplingOptions::default(),
            exact_stokes: false,
        })
    }

    /// Shifts the initial charge so that `∫(c⁺ − c⁻) + εσ|Γ_ε| = 0` (Neumann branch only).
    pub fn balance_surface_charge(&mut self) {
        if let BoundaryCondition::Neumann { sigma } = self.regime.bc {
            let target = -self.domain.eps * sigma * self.mesh.interface_length();
            balance_charge(&self.mesh, &mut self.c_plus0, &mut self.c_minus0, target);
        }
    }

    pub fn eps(&self) -> f64 {
        self.domain.eps
    }
}

/// Pore-scale fields at one time; velocity is P2 in the numbering of [`P2Dofs::new`].
#[derive(Clone, Debug, PartialEq)]
pub struct MicroState {
    pub t: f64,
    pub c_plus: Vec<f64>,
    pub c_minus: Vec<f64>,
    pub phi: Vec<f64>,
    pub pressure: Vec<f64>,
    pub velocity: Vec<[f64; 2]>,
}

#[derive(Clone, Debug)]
pub struct MicroRun {
    pub dofs: P2Dofs,
    pub snapshots: Vec<MicroState>,
    pub diagnostics: RunDiagnostics,
    /// Number of Stokes solves actually performed.
    pub stokes_solves: usize,
    pub warnings: Vec<String>,
}

impl MicroRun {
    pub fn final_state(&self) -> &MicroState {
        self.snapshots.last().expect("a run keeps at least its initial state")
    }
}

enum Potential {
    Neumann { solver: ConstrainedSolver, flux: Vec<f64> },
    Dirichlet { solver: ConstrainedSolver, fixed: Vec<(usize, f64)> },
}

struct Flow {
    velocity: Vec<[f64; 2]>,
    pressure: Vec<f64>,
    divergence: f64,
}

struct Stepper<'a> {
    mesh: &'a TriMesh,
    eps_beta: f64,
    eps_gamma: f64,
    potential: Potential,
    mass: SparseMatrix,
    lumped: Vec<f64>,
    diffusion: SparseMatrix,
    stokes: StokesSystem,
    exact_stokes: bool,
    // forcing of the last Stokes solve, per triangle and vertex
    last_forcing: Option<Vec<[f64; 2]>>,
    last_flow: Option<(Vec<[f64; 2]>, Vec<f64>, f64)>,
    stokes_solves: usize,
    upwind: bool,
    lu: PatternLu,
}

impl<'a> Stepper<'a> {
    fn new(problem: &'a MicroProblem) -> Result<Self> {
        let mesh = &problem.mesh;
        let eps = problem.eps();
        let regime = &problem.regime;
        classify_regime(regime)?;
        let lumped = lumped_mass(mesh);
        let stiffness = assemble_stiffness(mesh, Tensor2::IDENTITY)?;
        let laplace = stiffness.scaled(eps.powf(regime.alpha));
        let potential = match regime.bc {
            BoundaryCondition::Neumann { sigma } => Potential::Neumann {
                solver: ConstrainedSolver::new(
                    &laplace,
                    &ScalarConstraints {
                        zero_mean: Some(lumped.clone()),
                        ..Default::default()
                    },
                    LinearSolverKind::Auto,
                )?,
                flux: assemble_boundary_load(mesh, BoundaryTag::GammaInterior, |_| eps * sigma),
            },
            BoundaryCondition::Dirichlet { phi_d } => {
                let fixed: Vec<(usize, f64)> = mesh
                    .nodes_with_tag(BoundaryTag::GammaInterior)
                    .into_iter()
                    .map(|i| (i, phi_d))
                    .collect();
                if fixed.is_empty() {
                    return Err(Error::NoSolidPhase("Dirichlet potential needs a solid surface".into()));
                }
                let constraints = ScalarConstraints {
                    dirichlet: fixed.clone(),
                    ..Default::default()
                };
                Potential::Dirichlet {
                    solver: ConstrainedSolver::new(&laplace, &constraints, LinearSolverKind::Auto)?,
                    fixed,
                }
            }
        };
        let stokes = StokesSystem::new(
            mesh,
            &StokesOptions {
                viscosity: eps * eps,
                no_slip: vec![BoundaryTag::GammaInterior, BoundaryTag::OuterBoundary],
                periodic: false,
                ..Default::default()
            },
        )?;
        Ok(Self {
            mesh,
            eps_beta: eps.powf(regime.beta),
            eps_gamma: eps.powf(regime.gamma),
            potential,
            mass: assemble_mass(mesh)?,
            lumped,
            diffusion: stiffness,
            stokes,
            exact_stokes: problem.exact_stokes,
            last_forcing: None,
            last_flow: None,
            stokes_solves: 0,
            upwind: problem.options.upwind,
            lu: PatternLu::new(),
        })
    }

    /// Potential for given concentrations, and the net Neumann source.
    fn potential(&self, c_plus: &[f64], c_minus: &[f64], strict: bool) -> Result<(Vec<f64>, f64)> {
        let q: Vec<f64> = c_plus.iter().zip(c_minus).map(|(p, m)| p - m).collect();
        let mut b = self.mass.matvec(&q);
        match &self.potential {
            Potential::Neumann { solver, flux } => {
                b.iter_mut().zip(flux).for_each(|(b, f)| *b += f);
                let residual: f64 = b.iter().sum();
                if strict && residual.abs() > COMPATIBILITY_TOL {
                    return Err(Error::IncompatibleSource {
                        residual,
                        tolerance: COMPATIBILITY_TOL,
                    });
                }
                Ok((solver.solve(&b)?, residual))
            }
            Potential::Dirichlet { solver, fixed } => {
                let mut phi = solver.solve(&b)?;
                // pin the surface values exactly
                for &(i, v) in fixed {
                    phi[i] = v;
                }
                Ok((phi, 0.0))
            }
        }
    }

    /// Stokes solve for the forcing `−ε^β (c⁺ − c⁻)∇Φ`, reused when the forcing is unchanged.
    fn flow(&mut self, c_plus: &[f64], c_minus: &[f64], phi: &[f64]) -> Result<Flow> {
        let grads = p1_cell_gradients(self.mesh, phi);
        let s = -self.eps_beta;
        let mut forcing = Vec::with_capacity(3 * grads.len());
        for (tri, g) in self.mesh.triangles().iter().zip(&grads) {
            for &v in tri {
                let q = s * (c_plus[v] - c_minus[v]);
                forcing.push([q * g[0], q * g[1]]);
            }
        }
        let scale = forcing.iter().fold(0.0f64, |m, f| m.max(f[0].abs()).max(f[1].abs()));
        let unchanged = match (&self.last_forcing, &self.last_flow) {
            (Some(last), Some(_)) if !self.exact_stokes => {
                let diff = last
                    .iter()
                    .zip(&forcing)
                    .fold(0.0f64, |m, (a, b)| m.max((a[0] - b[0]).abs()).max((a[1] - b[1]).abs()));
                diff <= 1e-8 * scale || (scale == 0.0 && diff == 0.0)
            }
            _ => false,
        };
        if !unchanged {
            let sol = if scale == 0.0 {
                self.stokes.solve(self.mesh, Forcing::Zero)?
            } else {
                let f = &forcing;
                let local = move |t: usize, lam: [f64; 3]| {
                    let k = 3 * t;
                    [
                        lam[0] * f[k][0] + lam[1] * f[k + 1][0] + lam[2] * f[k + 2][0],
                        lam[0] * f[k][1] + lam[1] * f[k + 1][1] + lam[2] * f[k + 2][1],
                    ]
                };
                self.stokes_solves += 1;
                self.stokes.solve(self.mesh, Forcing::Local(&local))?
            };
            self.last_flow = Some((sol.velocity, sol.pressure, sol.divergence_residual));
            self.last_forcing = Some(forcing);
        }
        let (velocity, pressure, divergence) = self.last_flow.clone().expect("flow computed above");
        Ok(Flow {
            velocity,
            pressure,
            divergence,
        })
    }

    fn transport(&mut self, c_old: (&[f64], &[f64]), velocity: &[[f64; 2]], phi: &[f64], dt: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let terms = NpTerms {
            weight: 1.0,
            velocity: VelocityField::Quadratic(self.stokes.dofs(), velocity),
            potential: Some(phi),
            drift_coeff: Tensor2::scalar(self.eps_gamma),
            upwind_kappa: self.upwind.then_some(1.0),
        };
        np_step(self.mesh, &self.lumped, &self.diffusion, &terms, c_old, dt, &mut self.lu)
    }

    fn state(&mut self, t: f64, c_plus: Vec<f64>, c_minus: Vec<f64>, strict: bool) -> Result<(MicroState, f64, f64)> {
        let (phi, residual) = self.potential(&c_plus, &c_minus, strict)?;
        let flow = self.flow(&c_plus, &c_minus, &phi)?;
        Ok((
            MicroState {
                t,
                c_plus,
                c_minus,
                phi,
                pressure: flow.pressure,
                velocity: flow.velocity,
            },
            residual,
            flow.divergence,
        ))
    }

    fn step(&mut self, old: &MicroState, dt: f64, opts: &CouplingOptions) -> Result<(MicroState, usize, f64, f64)> {
        let mut iter = (old.c_plus.clone(), old.c_minus.clone());
        let (mut phi, mut velocity) = (old.phi.clone(), old.velocity.clone());
        let mut passes = 0;
        loop {
            passes += 1;
            if passes > 1 {
                phi = self.potential(&iter.0, &iter.1, false)?.0;
                velocity = self.flow(&iter.0, &iter.1, &phi)?.velocity;
            }
            let next = self.transport((&old.c_plus, &old.c_minus), &velocity, &phi, dt)?;
            let change = max_change((&next.0, &next.1), (&iter.0, &iter.1));
            iter = next;
            if change <= opts.fp_tol {
                break;
            }
            if passes >= opts.max_fp_iters {
                return Err(Error::FixedPointDivergence {
                    iterations: passes,
                    change,
                });
            }
        }
        let (state, residual, div) = self.state(old.t + dt, iter.0, iter.1, false)?;
        Ok((state, passes, residual, div))
    }

    fn row(&self, state: &MicroState, fp_iters: usize, residual: f64, div: f64) -> DiagnosticsRow {
        let mut row = DiagnosticsRow {
            t: state.t,
            mass: 0.0,
            charge: 0.0,
            min_c: f64::INFINITY,
            max_c: f64::NEG_INFINITY,
            fp_iters,
            energy: 0.0,
            phi_mean: 0.0,
            p_mean: 0.0,
            div_v: div,
            source_residual: residual,
        };
        let area: f64 = self.lumped.iter().sum();
        for (i, w) in self.lumped.iter().enumerate() {
            let (p, m) = (state.c_plus[i], state.c_minus[i]);
            row.mass += w * (p + m);
            row.charge += w * (p - m);
            row.energy += 0.5 * w * (p * p + m * m);
            row.min_c = row.min_c.min(p.min(m));
            row.max_c = row.max_c.max(p.max(m));
            row.phi_mean += w * state.phi[i] / area;
            row.p_mean += w * state.pressure[i] / area;
        }
        row
    }
}

fn check_problem(problem: &MicroProblem) -> Result<()> {
    let n = problem.mesh.n_nodes();
    if problem.c_plus0.len() != n || problem.c_minus0.len() != n {
        return Err(Error::FieldMeshMismatch("initial data does not match the mesh".into()));
    }
    check_initial_bounds(&problem.c_plus0, &problem.c_minus0, problem.lambda)
}

/// One splitting step (Poisson, Stokes, Nernst–Planck) from `state` with the problem's `dt`.
pub fn step_micro(state: &MicroState, problem: &MicroProblem) -> Result<MicroState> {
    (|| {
        let mut stepper = Stepper::new(problem)?;
        let n = problem.mesh.n_nodes();
        if state.c_plus.len() != n
            || state.c_minus.len() != n
            || state.phi.len() != n
            || state.velocity.len() != stepper.stokes.dofs().n_dofs()
        {
            return Err(Error::FieldMeshMismatch("micro state does not match the mesh".into()));
        }
        Ok(stepper.step(state, problem.dt, &problem.options)?.0)
    })()
    .during("micro", "step_micro")
}

/// Runs the pore-scale model from `t = 0` to `t_end`.
pub fn run_micro(problem: &MicroProblem) -> Result<MicroRun> {
    run(problem).during("micro", "run_micro")
}

impl MicroState {
    /// Initial state with potential and flow consistent with the concentrations.
    pub fn initial(problem: &MicroProblem) -> Result<Self> {
        check_problem(problem)?;
        let mut stepper = Stepper::new(problem)?;
        Ok(stepper.state(0.0, problem.c_plus0.clone(), problem.c_minus0.clone(), true)?.0)
    }
}

fn run(problem: &MicroProblem) -> Result<MicroRun> {
    check_problem(problem)?;
    let (steps, dt) = time_grid(problem.t_end, problem.dt)?;
    let opts = problem.options;
    let mut stepper = Stepper::new(problem)?;
    let (mut state, residual, div) = stepper.state(0.0, problem.c_plus0.clone(), problem.c_minus0.clone(), true)?;
    let mut diagnostics = RunDiagnostics {
        rows: vec![stepper.row(&state, 0, residual, div)],
        lambda: problem.lambda,
        volume_additive_start: problem.volume_additive,
        zero_mean_potential: problem.regime.is_neumann(),
    };
    let mut snapshots = vec![state.clone()];
    let mut warnings = Vec::new();
    for step in 1..=steps {
        let (next, passes, residual, div) = stepper.step(&state, dt, &opts)?;
        state = next;
        let row = stepper.row(&state, passes, residual, div);
        if row.min_c < -1e-8 && warnings.is_empty() {
            warnings.push(format!(
                "negative concentration {:.3e} at t = {:.6}; dt may be too large",
                row.min_c, row.t
            ));
        }
        diagnostics.rows.push(row);
        if keep_snapshot(step, steps, opts.snapshot_stride) {
            snapshots.push(state.clone());
        }
    }
    Ok(MicroRun {
        dofs: stepper.stokes.dofs().clone(),
        snapshots,
        diagnostics,
        stokes_solves: stepper.stokes_solves,
        warnings,
    })
}
