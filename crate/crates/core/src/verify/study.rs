use rayon::prelude::*;

use super::corrector::{corrector_enhanced_error, CorrectorErrors, CorrectorInputs, MacroProbe};
use crate::cell::{effective_coefficients_on, solve_scalar_cell_problems, EffectiveCoefficients, ScalarCellSolutions};
use crate::data::{balance_charge, InitialData};
use crate::diagnostics::RunDiagnostics;
use crate::error::{Context, Error, Result};
use crate::macroscale::{classify_regime, run_macro, BoundaryCondition, MacroProblem, MacroRun, ScalingRegime};
use crate::mesh::{generate_unit_cell_mesh, rect_mesh_with_spacing, PerforatedDomain, Rect, TriMesh, UnitCellGeometry};
use crate::micro::{average_micro_field, coarse_average, run_micro, Averaging, CoarseField, CoarseGrid, MicroField, MicroProblem, MicroRun, NEGLIGIBLE_NORM};
use crate::transport::CouplingOptions;

/// Inputs of an ε-convergence study on the unit square.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub regime: ScalingRegime,
    /// Radius of the centred disk inclusion.
    pub radius: f64,
    pub data: InitialData,
    /// Strictly decreasing; each must divide 1.
    pub eps: Vec<f64>,
    pub t_end: f64,
    /// Time step shared by all runs.
    pub dt: f64,
    /// Pore-scale mesh size in cell units (`h = ε·cell_h`); also used for the cell problems.
    pub cell_h: f64,
    pub macro_h: f64,
    pub lambda: f64,
}

impl StudyConfig {
    /// Fully coupled Neumann study: α = β = γ = 0, σ = 0, disk r = 0.25, charged dipole.
    pub fn neumann_headline() -> Self {
        Self {
            regime: ScalingRegime::neumann(0.0, 0.0, 0.0, 0.0),
            radius: 0.25,
            data: InitialData::charged_dipole(),
            eps: vec![0.5, 0.25, 0.125],
            t_end: 0.1,
            dt: 1e-3,
            cell_h: 0.125,
            macro_h: 1.0 / 64.0,
            lambda: 1.0,
        }
    }

    /// Dirichlet study: α = 2, β = γ = 1, Φ_D = 1.
    pub fn dirichlet_default() -> Self {
        Self {
            regime: ScalingRegime::dirichlet(1.0, 2.0, 1.0, 1.0),
            eps: vec![0.5, 0.25],
            ..Self::neumann_headline()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.eps.is_empty() {
            return Err(Error::validation("eps", "at least one value is required"));
        }
        if self.eps.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::validation("eps", "values must be strictly decreasing"));
        }
        for (name, v) in [("t_end", self.t_end), ("dt", self.dt), ("cell_h", self.cell_h), ("macro_h", self.macro_h)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Errors at `t = T` for one ε.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow {
    pub eps: f64,
    pub h: f64,
    pub e_c_plus: f64,
    pub e_c_minus: f64,
    pub e_phi: f64,
    pub e_v: f64,
    /// Plain and corrector-enhanced potential errors (Neumann branch).
    pub corrector: Option<CorrectorErrors>,
}

impl StudyRow {
    pub fn errors(&self) -> [f64; 4] {
        [self.e_c_plus, self.e_c_minus, self.e_phi, self.e_v]
    }
}

pub const ERROR_FIELDS: [&str; 4] = ["c_plus", "c_minus", "phi", "v"];

/// Errors at or below this are round-off and exempt from the monotonicity requirement.
pub const ERROR_FLOOR: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct ConvergenceStudy {
    pub config: StudyConfig,
    pub coeffs: EffectiveCoefficients,
    pub rows: Vec<StudyRow>,
    /// Fields whose errors fail to decrease strictly, plus corrector regressions.
    pub non_monotone: Vec<String>,
    pub macro_diagnostics: RunDiagnostics,
    pub micro_diagnostics: Vec<RunDiagnostics>,
}

impl ConvergenceStudy {
    /// Observed orders `log(e_{k−1}/e_k) / log(ε_{k−1}/ε_k)` per field; `None` for the first row.
    pub fn observed_orders(&self) -> Vec<Option<[f64; 4]>> {
        let mut out = vec![None];
        for w in self.rows.windows(2) {
            let r = (w[0].eps / w[1].eps).ln();
            let (a, b) = (w[0].errors(), w[1].errors());
            out.push(Some(std::array::from_fn(|i| (a[i] / b[i]).ln() / r)));
        }
        out.truncate(self.rows.len());
        out
    }

    pub fn is_monotone(&self) -> bool {
        self.non_monotone.is_empty()
    }
}

fn cell_average(mesh: &TriMesh, values: &[f64], grid: &CoarseGrid) -> Result<CoarseField> {
    coarse_average(mesh, MicroField::Nodal(values), grid, Averaging::Cell)
}

fn without_mean(mut f: CoarseField) -> CoarseField {
    let mean = f.values.iter().sum::<f64>() / f.values.len() as f64;
    f.values.iter_mut().for_each(|v| *v -= mean);
    f
}

/// Relative error of a vector field given componentwise.
fn vector_error(a: &[CoarseField; 2], b: &[CoarseField; 2]) -> f64 {
    let mut diff = 0.0;
    let mut norm = 0.0;
    for d in 0..2 {
        for (x, y) in a[d].values.iter().zip(&b[d].values) {
            diff += (x - y) * (x - y);
            norm += y * y;
        }
    }
    let w = a[0].grid.cell_size()[0] * a[0].grid.cell_size()[1];
    if (norm * w).sqrt() > NEGLIGIBLE_NORM {
        (diff / norm).sqrt()
    } else {
        (diff * w).sqrt()
    }
}

struct Comparison<'a> {
    config: &'a StudyConfig,
    coeffs: EffectiveCoefficients,
    cell_mesh: &'a TriMesh,
    cell_solutions: ScalarCellSolutions,
    macro_mesh: &'a TriMesh,
    macro_run: &'a MacroRun,
}

fn compare(ctx: &Comparison<'_>, eps: f64, run: &MicroRun, problem: &MicroProblem) -> Result<StudyRow> {
    let regime = &ctx.config.regime;
    let domain = &problem.domain;
    let mesh = &problem.mesh;
    let grid = CoarseGrid::of_cells(domain)?;
    let micro = run.final_state();
    let macro_state = ctx.macro_run.final_state();
    let avg = |f: MicroField<'_>, a| average_micro_field(mesh, f, domain, &grid, a);

    let e_c = |micro_c: &[f64], macro_c: &[f64]| -> Result<f64> {
        Ok(avg(MicroField::Nodal(micro_c), Averaging::Fluid)?.relative_l2_error(&cell_average(ctx.macro_mesh, macro_c, &grid)?))
    };
    let e_c_plus = e_c(&micro.c_plus, &macro_state.c_plus)?;
    let e_c_minus = e_c(&micro.c_minus, &macro_state.c_minus)?;

    let (e_phi, corrector) = match regime.bc {
        BoundaryCondition::Neumann { .. } => {
            // Φ̃_ε = ε^α Φ_ε
            let scale = eps.powf(regime.alpha);
            let tilde: Vec<f64> = micro.phi.iter().map(|p| scale * p).collect();
            let micro_avg = without_mean(avg(MicroField::Nodal(&tilde), Averaging::Fluid)?);
            let macro_avg = without_mean(cell_average(ctx.macro_mesh, &macro_state.phi, &grid)?);
            let probe = MacroProbe::new(ctx.macro_mesh, &macro_state.phi)?;
            let value = |x| probe.value(x);
            let gradient = |x| probe.gradient(x);
            let errors = corrector_enhanced_error(&CorrectorInputs {
                micro_mesh: mesh,
                micro_potential: &tilde,
                domain,
                cell_mesh: ctx.cell_mesh,
                cell_solutions: &ctx.cell_solutions,
                macro_value: &value,
                macro_gradient: &gradient,
                remove_mean: true,
            })?;
            (micro_avg.relative_l2_error(&macro_avg), Some(errors))
        }
        BoundaryCondition::Dirichlet { phi_d } => {
            // ε^{α−2}(Φ_ε − Φ_D) against m (c⁺₀ − c⁻₀)
            let scale = eps.powf(regime.alpha - 2.0);
            let tilde: Vec<f64> = micro.phi.iter().map(|p| scale * (p - phi_d)).collect();
            let micro_avg = avg(MicroField::Nodal(&tilde), Averaging::Cell)?;
            let m = ctx.coeffs.dirichlet_mean;
            let reference: Vec<f64> = macro_state
                .c_plus
                .iter()
                .zip(&macro_state.c_minus)
                .map(|(p, q)| m * (p - q))
                .collect();
            (micro_avg.relative_l2_error(&cell_average(ctx.macro_mesh, &reference, &grid)?), None)
        }
    };

    let dofs = &run.dofs;
    let component = |d: usize| -> Vec<f64> { micro.velocity.iter().map(|v| v[d]).collect() };
    let (vx, vy) = (component(0), component(1));
    let micro_v = [
        avg(MicroField::Quadratic(dofs, &vx), Averaging::Cell)?,
        avg(MicroField::Quadratic(dofs, &vy), Averaging::Cell)?,
    ];
    let macro_component = |d: usize| -> Result<CoarseField> {
        let v: Vec<f64> = macro_state.velocity.iter().map(|v| v[d]).collect();
        coarse_average(ctx.macro_mesh, MicroField::Cellwise(&v), &grid, Averaging::Cell)
    };
    let e_v = vector_error(&micro_v, &[macro_component(0)?, macro_component(1)?]);
    Ok(StudyRow {
        eps,
        h: eps * ctx.config.cell_h,
        e_c_plus,
        e_c_minus,
        e_phi,
        e_v,
        corrector,
    })
}

/// Runs the pore-scale model for every ε (concurrently) and the homogenized model once, and
/// compares ε-cell averages at `t = T`.
pub fn run_convergence_study(config: &StudyConfig) -> Result<ConvergenceStudy> {
    study(config).during("verify", "run_convergence_study")
}

fn study(config: &StudyConfig) -> Result<ConvergenceStudy> {
    classify_regime(&config.regime)?;
    config.validate()?;
    let cell_geom = UnitCellGeometry::centered_disk(config.radius, config.cell_h);
    let cell_mesh = generate_unit_cell_mesh(&cell_geom)?;
    let sigma = config.regime.sigma();
    let coeffs = effective_coefficients_on(&cell_geom, &cell_mesh, sigma)?;

    let macro_mesh = rect_mesh_with_spacing(Rect::unit_square(), config.macro_h)?;
    let (mut c_plus0, mut c_minus0) = config.data.interpolate(&macro_mesh);
    if config.regime.is_neumann() {
        let target = -coeffs.sigma_bar * macro_mesh.total_area() / coeffs.porosity;
        balance_charge(&macro_mesh, &mut c_plus0, &mut c_minus0, target);
    }
    let macro_problem = MacroProblem {
        mesh: macro_mesh.clone(),
        coeffs,
        regime: config.regime,
        c_plus0,
        c_minus0,
        t_end: config.t_end,
        dt: config.dt,
        lambda: config.lambda,
        volume_additive: config.data.is_volume_additive(),
        options: CouplingOptions::default(),
    };
    let micro_problems = config
        .eps
        .iter()
        .map(|&eps| {
            let domain = PerforatedDomain::new(Rect::unit_square(), eps, cell_geom)?;
            let mut p = MicroProblem::new(domain, eps * config.cell_h, config.regime, &config.data, config.t_end, config.dt)?;
            p.lambda = config.lambda;
            p.balance_surface_charge();
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;

    let (macro_run, micro_runs) = rayon::join(
        || run_macro(&macro_problem),
        || micro_problems.par_iter().map(run_micro).collect::<Vec<_>>(),
    );
    let macro_run = macro_run?;
    let micro_runs = micro_runs.into_iter().collect::<Result<Vec<_>>>()?;

    let ctx = Comparison {
        config,
        coeffs,
        cell_mesh: &cell_mesh,
        cell_solutions: solve_scalar_cell_problems(&cell_mesh)?,
        macro_mesh: &macro_mesh,
        macro_run: &macro_run,
    };
    let rows = config
        .eps
        .iter()
        .zip(micro_runs.iter().zip(&micro_problems))
        .map(|(&eps, (run, problem))| compare(&ctx, eps, run, problem))
        .collect::<Result<Vec<_>>>()?;

    let mut non_monotone = Vec::new();
    for (i, name) in ERROR_FIELDS.iter().enumerate() {
        let fails = rows.windows(2).any(|w| {
            let (a, b) = (w[0].errors()[i], w[1].errors()[i]);
            !(b < a || b <= ERROR_FLOOR)
        });
        if fails {
            non_monotone.push(format!("e_{name}"));
        }
    }
    for r in &rows {
        if r.corrector.is_some_and(|c| !c.improved()) {
            non_monotone.push(format!("corrector at eps = {}", r.eps));
        }
    }
    Ok(ConvergenceStudy {
        config: config.clone(),
        coeffs,
        rows,
        non_monotone,
        macro_diagnostics: macro_run.diagnostics,
        micro_diagnostics: micro_runs.into_iter().map(|r| r.diagnostics).collect(),
    })
}
