use super::regime::{classify_regime, DarcyForcing, MacroModelClass, NpDrift, PotentialModel, ScalingRegime};
use super::solve::{electrostatic_forcing, eval_macro_potential_dirichlet, weak_divergence, MacroOperators, MacroState};
use crate::cell::EffectiveCoefficients;
use crate::data::check_initial_bounds;
use crate::diagnostics::{DiagnosticsRow, RunDiagnostics};
use crate::error::{Context, Error, Result};
use crate::fem::PatternLu;
use crate::mesh::TriMesh;
use crate::transport::{keep_snapshot, max_change, time_grid, CouplingOptions};

/// A macroscopic initial-boundary value problem on a hole-free mesh of Ω.
#[derive(Clone, Debug)]
pub struct MacroProblem {
    pub mesh: TriMesh,
    pub coeffs: EffectiveCoefficients,
    pub regime: ScalingRegime,
    pub c_plus0: Vec<f64>,
    pub c_minus0: Vec<f64>,
    pub t_end: f64,
    pub dt: f64,
    /// Upper bound Λ of the initial data.
    pub lambda: f64,
    /// Whether `c⁺ + c⁻ = 1` holds initially (enables the boundedness check).
    pub volume_additive: bool,
    pub options: CouplingOptions,
}

#[derive(Clone, Debug)]
pub struct MacroRun {
    pub class: MacroModelClass,
    pub snapshots: Vec<MacroState>,
    pub diagnostics: RunDiagnostics,
    /// Non-fatal observations such as negative concentrations.
    pub warnings: Vec<String>,
}

impl MacroRun {
    pub fn final_state(&self) -> &MacroState {
        self.snapshots.last().expect("a run keeps at least its initial state")
    }
}

struct Stepper<'a> {
    mesh: &'a TriMesh,
    ops: MacroOperators,
    regime: ScalingRegime,
    class: MacroModelClass,
    upwind: bool,
    lu: PatternLu,
}

impl Stepper<'_> {
    /// Potential and flow for given concentrations; the last value is the net Poisson source.
    fn fields(&self, c_plus: &[f64], c_minus: &[f64], strict: bool) -> Result<(Vec<f64>, Vec<f64>, Vec<[f64; 2]>, f64)> {
        let (phi, residual) = match self.class.potential {
            PotentialModel::EllipticPoisson => self.ops.poisson(c_plus, c_minus, strict)?,
            PotentialModel::AlgebraicLocal => {
                let state = MacroState::at_rest(self.mesh, 0.0, c_plus.to_vec(), c_minus.to_vec());
                (eval_macro_potential_dirichlet(&state, &self.ops.coeffs, &self.regime), 0.0)
            }
        };
        let forcing = (self.class.darcy_forcing == DarcyForcing::WithElectrostatic)
            .then(|| electrostatic_forcing(self.mesh, c_plus, c_minus, &phi));
        let flow = self.ops.darcy(self.mesh, forcing.as_deref())?;
        Ok((phi, flow.pressure, flow.velocity, residual))
    }

    fn state(&self, t: f64, c_plus: Vec<f64>, c_minus: Vec<f64>, strict: bool) -> Result<(MacroState, f64)> {
        let (phi, pressure, velocity, residual) = self.fields(&c_plus, &c_minus, strict)?;
        Ok((
            MacroState {
                t,
                c_plus,
                c_minus,
                phi,
                pressure,
                velocity,
            },
            residual,
        ))
    }

    /// One time step with the Poisson → Darcy → Nernst–Planck fixed-point sweep.
    fn step(&mut self, old: &MacroState, dt: f64, opts: &CouplingOptions) -> Result<(MacroState, usize, f64)> {
        let decoupled = self.class.is_decoupled();
        let mut iter = (old.c_plus.clone(), old.c_minus.clone());
        let (mut phi, mut velocity) = (old.phi.clone(), old.velocity.clone());
        let mut passes = 0;
        loop {
            passes += 1;
            if passes > 1 {
                let (p, _, v, _) = self.fields(&iter.0, &iter.1, false)?;
                phi = p;
                velocity = v;
            }
            let flow = (self.class.darcy_forcing == DarcyForcing::WithElectrostatic).then_some(velocity.as_slice());
            let drift = (self.class.np_drift == NpDrift::WithDrift).then_some(phi.as_slice());
            let next = self.ops.np_step(
                self.mesh,
                (&old.c_plus, &old.c_minus),
                flow,
                drift,
                dt,
                self.upwind,
                &mut self.lu,
            )?;
            let change = max_change((&next.0, &next.1), (&iter.0, &iter.1));
            iter = next;
            if decoupled || change <= opts.fp_tol {
                break;
            }
            if passes >= opts.max_fp_iters {
                return Err(Error::FixedPointDivergence {
                    iterations: passes,
                    change,
                });
            }
        }
        let (state, residual) = self.state(old.t + dt, iter.0, iter.1, false)?;
        Ok((state, passes, residual))
    }
}

/// Diagnostics of one macroscopic state.
pub(crate) fn macro_row(
    mesh: &TriMesh,
    lumped: &[f64],
    porosity: f64,
    state: &MacroState,
    fp_iters: usize,
    source_residual: f64,
) -> DiagnosticsRow {
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
        div_v: weak_divergence(mesh, &state.velocity),
        source_residual,
    };
    let area: f64 = lumped.iter().sum();
    for (i, w) in lumped.iter().enumerate() {
        let (p, m) = (state.c_plus[i], state.c_minus[i]);
        row.mass += porosity * w * (p + m);
        row.charge += porosity * w * (p - m);
        row.energy += 0.5 * porosity * w * (p * p + m * m);
        row.min_c = row.min_c.min(p.min(m));
        row.max_c = row.max_c.max(p.max(m));
        row.phi_mean += w * state.phi[i] / area;
        row.p_mean += w * state.pressure[i] / area;
    }
    row
}

/// Runs the macroscopic model from `t = 0` to `t_end`.
pub fn run_macro(problem: &MacroProblem) -> Result<MacroRun> {
    run(problem).during("macro", "run_macro")
}

fn run(problem: &MacroProblem) -> Result<MacroRun> {
    let class = classify_regime(&problem.regime)?;
    let mesh = &problem.mesh;
    if mesh.hole_count() != 0 {
        return Err(Error::InvalidMesh("the macroscopic mesh must not contain holes".into()));
    }
    let n = mesh.n_nodes();
    if problem.c_plus0.len() != n || problem.c_minus0.len() != n {
        return Err(Error::FieldMeshMismatch("initial data does not match the mesh".into()));
    }
    check_initial_bounds(&problem.c_plus0, &problem.c_minus0, problem.lambda)?;
    let (steps, dt) = time_grid(problem.t_end, problem.dt)?;
    let opts = problem.options;

    let mut stepper = Stepper {
        mesh,
        ops: MacroOperators::new(mesh, &problem.coeffs)?,
        regime: problem.regime,
        class,
        upwind: opts.upwind,
        lu: PatternLu::new(),
    };
    let porosity = problem.coeffs.porosity;
    let (mut state, residual) = stepper.state(0.0, problem.c_plus0.clone(), problem.c_minus0.clone(), true)?;
    let mut diagnostics = RunDiagnostics {
        rows: vec![macro_row(mesh, stepper.ops.lumped(), porosity, &state, 0, residual)],
        lambda: problem.lambda,
        volume_additive_start: problem.volume_additive,
        zero_mean_potential: problem.regime.is_neumann(),
    };
    let mut snapshots = vec![state.clone()];
    let mut warnings = Vec::new();
    for step in 1..=steps {
        let (next, passes, residual) = stepper.step(&state, dt, &opts)?;
        state = next;
        let row = macro_row(mesh, stepper.ops.lumped(), porosity, &state, passes, residual);
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
    Ok(MacroRun {
        class,
        snapshots,
        diagnostics,
        warnings,
    })
}
