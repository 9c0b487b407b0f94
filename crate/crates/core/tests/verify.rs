use std::f64::consts::PI;

use snpp::cell::{solve_scalar_cell_problems, EffectiveCoefficients};
use snpp::data::{Blob, InitialData};
use snpp::diagnostics::{DiagnosticsRow, RunDiagnostics};
use snpp::fem::{
    assemble_stiffness, integrate_p1, solve_constrained, ScalarConstraints,
};
use snpp::macroscale::*;
use snpp::mesh::*;
use snpp::transport::CouplingOptions;
use snpp::verify::*;
use snpp::Error;

fn macro_run(data: InitialData, regime: ScalingRegime, dt: f64, t_end: f64) -> MacroRun {
    let mesh = rect_mesh_with_spacing(Rect::unit_square(), 1.0 / 16.0).unwrap();
    let (c_plus0, c_minus0) = data.interpolate(&mesh);
    run_macro(&MacroProblem {
        mesh,
        coeffs: EffectiveCoefficients::unit(),
        regime,
        c_plus0,
        c_minus0,
        t_end,
        dt,
        lambda: 1.0,
        volume_additive: data.is_volume_additive(),
        options: CouplingOptions::default(),
    })
    .unwrap()
}

/// Transport of a blob by a prescribed strong rotational flow; returns its diagnostics.
fn advected_blob(u: f64, dt_factor: f64) -> RunDiagnostics {
    let h = 1.0 / 32.0;
    let dt = dt_factor * h * h;
    let mesh = rect_mesh_with_spacing(Rect::unit_square(), h).unwrap();
    let class = classify_regime(&ScalingRegime::neumann(0.0, 0.0, 0.0, 1.0)).unwrap();
    let blob = InitialData::NeutralBlob { base: 0.0, amplitude: 1.0, blob: Blob { center: [0.3, 0.5], width: 0.08 } };
    let (cp, cm) = blob.interpolate(&mesh);
    let mut state = MacroState::at_rest(&mesh, 0.0, cp, cm);
    state.velocity = (0..mesh.n_triangles())
        .map(|t| {
            let [x, y] = mesh.centroid(t);
            [-u * (PI * x).sin().powi(2) * (2.0 * PI * y).sin() / 2.0, u * (2.0 * PI * x).sin() * (PI * y).sin().powi(2) / 2.0]
        })
        .collect();
    let row = |s: &MacroState| {
        let all = s.c_plus.iter().chain(&s.c_minus);
        DiagnosticsRow {
            t: s.t,
            mass: integrate_p1(&mesh, &s.c_plus) + integrate_p1(&mesh, &s.c_minus),
            charge: 0.0,
            min_c: all.clone().copied().fold(f64::INFINITY, f64::min),
            max_c: all.copied().fold(f64::NEG_INFINITY, f64::max),
            fp_iters: 1,
            energy: 0.0,
            phi_mean: 0.0,
            p_mean: 0.0,
            div_v: 0.0,
            source_residual: 0.0,
        }
    };
    let mut rows = vec![row(&state)];
    let steps = (0.02 / dt).ceil() as usize;
    for _ in 0..steps {
        let (a, b) = step_macro_np(&mesh, &state, &EffectiveCoefficients::unit(), &class, dt).unwrap();
        state.c_plus = a;
        state.c_minus = b;
        state.t += dt;
        rows.push(row(&state));
    }
    RunDiagnostics { rows, lambda: 1.0, volume_additive_start: false, zero_mean_potential: true }
}

#[test]
fn zero_charge_diffusion_passes_every_check() {
    let data = InitialData::NeutralBlob { base: 0.2, amplitude: 0.3, blob: Blob { center: [0.5, 0.5], width: 0.2 } };
    let run = macro_run(data, ScalingRegime::neumann(0.0, 0.0, 0.0, 0.0), 1e-3, 0.02);
    let report = run_invariant_suite(&run.diagnostics).unwrap();
    assert!(report.passed(), "{report}");
    assert_eq!(report.get("boundedness").unwrap().status, CheckStatus::NotApplicable);
}

#[test]
fn volume_additive_run_checks_boundedness() {
    let run = macro_run(InitialData::charged_dipole(), ScalingRegime::neumann(0.0, 0.0, 0.0, 0.0), 1e-3, 0.02);
    let report = run_invariant_suite(&run.diagnostics).unwrap();
    assert!(report.passed(), "{report}");
    assert_eq!(report.get("boundedness").unwrap().status, CheckStatus::Pass);
}

#[test]
fn positivity_failure_is_flagged() {
    // Cell Péclet number about 15: central convection undershoots at small time steps.
    let report = run_invariant_suite(&advected_blob(1000.0, 0.25)).unwrap();
    let check = report.get("positivity").unwrap();
    assert_eq!(check.status, CheckStatus::Fail, "{report}");
    assert!(check.value < -1e-6);
    assert_eq!(report.get("mass_drift").unwrap().status, CheckStatus::Pass);
    assert!(!report.passed());
}

#[test]
fn large_time_steps_damp_the_undershoot() {
    let report = run_invariant_suite(&advected_blob(1000.0, 10.0)).unwrap();
    assert_eq!(report.get("positivity").unwrap().status, CheckStatus::Pass, "{report}");
}

#[test]
fn empty_diagnostics_are_malformed() {
    let err = run_invariant_suite(&RunDiagnostics::default()).unwrap_err();
    assert!(matches!(err.root(), Error::MalformedDiagnostics(_)));
    let mut run = macro_run(InitialData::charged_dipole(), ScalingRegime::neumann(0.0, 0.0, 0.0, 0.0), 1e-2, 0.02);
    run.diagnostics.rows.swap(0, 1);
    assert!(matches!(run_invariant_suite(&run.diagnostics).unwrap_err().root(), Error::MalformedDiagnostics(_)));
}

#[test]
fn reports_are_deterministic() {
    let run = macro_run(InitialData::charged_dipole(), ScalingRegime::neumann(0.0, 0.0, 0.0, 0.0), 1e-3, 0.01);
    let a = run_invariant_suite(&run.diagnostics).unwrap();
    let b = run_invariant_suite(&run.diagnostics).unwrap();
    assert_eq!(a.to_string(), b.to_string());
}

/// Laplace problem on the perforated square with `Φ = x` on the outer boundary.
fn linear_potential(domain: &PerforatedDomain, h: f64) -> (TriMesh, Vec<f64>) {
    let mesh = generate_perforated_mesh(domain, h).unwrap();
    let k = assemble_stiffness(&mesh, 1.0).unwrap();
    let dirichlet = mesh
        .nodes_with_tag(BoundaryTag::OuterBoundary)
        .into_iter()
        .map(|i| (i, mesh.nodes()[i][0]))
        .collect();
    let phi = solve_constrained(&k, &vec![0.0; mesh.n_nodes()], &ScalarConstraints { dirichlet, ..Default::default() })
        .unwrap();
    (mesh, phi)
}

#[test]
fn corrector_improves_a_uniform_gradient() {
    let cell_h = 0.0625;
    let cell = UnitCellGeometry::centered_disk(0.25, cell_h);
    let cell_mesh = generate_unit_cell_mesh(&cell).unwrap();
    let sols = solve_scalar_cell_problems(&cell_mesh).unwrap();
    for eps in [0.25, 0.125] {
        let domain = PerforatedDomain::new(Rect::unit_square(), eps, cell).unwrap();
        let (mesh, phi) = linear_potential(&domain, eps * cell_h);
        let errors = corrector_enhanced_error(&CorrectorInputs {
            micro_mesh: &mesh,
            micro_potential: &phi,
            domain: &domain,
            cell_mesh: &cell_mesh,
            cell_solutions: &sols,
            macro_value: &|x| Ok(x[0]),
            macro_gradient: &|_| Ok([1.0, 0.0]),
            remove_mean: true,
        })
        .unwrap();
        assert!(errors.enhanced < errors.plain, "eps {eps}: {errors:?}");
    }
}

#[test]
fn corrector_is_inert_without_inclusions() {
    let cell = UnitCellGeometry::empty(0.125);
    let cell_mesh = generate_unit_cell_mesh(&cell).unwrap();
    let sols = solve_scalar_cell_problems(&cell_mesh).unwrap();
    let domain = PerforatedDomain::new(Rect::unit_square(), 0.25, cell).unwrap();
    let (mesh, phi) = linear_potential(&domain, 0.25 * 0.125);
    let errors = corrector_enhanced_error(&CorrectorInputs {
        micro_mesh: &mesh,
        micro_potential: &phi,
        domain: &domain,
        cell_mesh: &cell_mesh,
        cell_solutions: &sols,
        macro_value: &|x| Ok(x[0] + 0.1 * x[1] * x[1]),
        macro_gradient: &|x| Ok([1.0, 0.2 * x[1]]),
        remove_mean: false,
    })
    .unwrap();
    assert_eq!(errors.plain, errors.enhanced);
}

fn short_study(data: InitialData, regime: ScalingRegime) -> snpp::Result<ConvergenceStudy> {
    run_convergence_study(&StudyConfig {
        regime,
        data,
        eps: vec![0.5, 0.25],
        t_end: 0.01,
        dt: 2.5e-3,
        macro_h: 1.0 / 32.0,
        ..StudyConfig::neumann_headline()
    })
}

#[test]
fn zero_charge_study_has_no_potential_or_flow_error() {
    let uniform = InitialData::Uniform { c_plus: 0.4, c_minus: 0.4 };
    let study = short_study(uniform, ScalingRegime::neumann(0.0, 0.0, 0.0, 0.0)).unwrap();
    for row in &study.rows {
        assert!(row.e_phi <= 1e-8 && row.e_v <= 1e-8, "{row:?}");
        assert!(row.e_c_plus <= 1e-8 && row.e_c_minus <= 1e-8, "{row:?}");
        let corr = row.corrector.unwrap();
        assert!(corr.plain <= 1e-8 && corr.enhanced <= 1e-8);
    }
}

#[test]
fn inadmissible_study_fails_before_running() {
    let err = short_study(InitialData::charged_dipole(), ScalingRegime::neumann(0.0, 0.0, -1.0, 0.0)).unwrap_err();
    assert!(matches!(err.root(), Error::InadmissibleScaling(_)), "{err}");
}
