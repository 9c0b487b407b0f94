//! Acceptance suite: one PASS/FAIL line per criterion, written straight to stderr so it shows
//! up in the test log whether or not output capture is on.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use snpp::cell::*;
use snpp::data::InitialData;
use snpp::diagnostics::RunDiagnostics;
use snpp::fem::{l2_error_p1, Tensor2};
use snpp::macroscale::*;
use snpp::mesh::*;
use snpp::micro::{run_micro, MicroProblem};
use snpp::transport::CouplingOptions;
use snpp::verify::*;

fn report(id: u32, title: &str, ok: bool, elapsed: Duration, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    let line = format!("{status} criterion {id:>2} {title} ({:.1} s): {detail}\n", elapsed.as_secs_f64());
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "criterion {id} failed: {detail}");
}

fn sci(values: &[f64]) -> String {
    let v: Vec<String> = values.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", v.join(", "))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn tensor_rel_diff(a: &Tensor2, b: &Tensor2) -> f64 {
    a.max_abs_diff(b) / a.0.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn golden(name: &str) -> f64 {
    std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/golden_r025.kv"))
        .unwrap()
        .lines()
        .filter_map(|l| l.split_once('='))
        .find(|(k, _)| k.trim() == name)
        .map(|(_, v)| v.trim().parse().unwrap())
        .unwrap()
}

fn macro_problem(h: f64, regime: ScalingRegime, data: &InitialData, dt: f64, t_end: f64) -> MacroProblem {
    let mesh = rect_mesh_with_spacing(Rect::unit_square(), h).unwrap();
    let (c_plus0, c_minus0) = data.interpolate(&mesh);
    MacroProblem {
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
    }
}

fn micro_problem(eps: f64, regime: ScalingRegime, data: &InitialData, dt: f64, t_end: f64) -> MicroProblem {
    let domain = PerforatedDomain::new(Rect::unit_square(), eps, UnitCellGeometry::centered_disk(0.25, 0.125)).unwrap();
    let mut p = MicroProblem::new(domain, eps / 8.0, regime, data, t_end, dt).unwrap();
    if regime.is_neumann() {
        p.balance_surface_charge();
    }
    p
}

fn check_status(diag: &RunDiagnostics, name: &str) -> (bool, f64) {
    let report = run_invariant_suite(diag).unwrap();
    let c = report.get(name).unwrap();
    (c.status == CheckStatus::Pass, c.value)
}

#[test]
fn c01_empty_cell_tensor() {
    let start = Instant::now();
    let mesh = generate_unit_cell_mesh(&UnitCellGeometry::empty(0.1)).unwrap();
    let d = compute_diffusion_tensor(&solve_scalar_cell_problems(&mesh).unwrap(), &mesh).unwrap();
    let err = d.max_abs_diff(&Tensor2::IDENTITY);
    let porosity = mesh.total_area();
    let elapsed = start.elapsed();
    let ok = err <= 1e-10 && porosity == 1.0 && elapsed < Duration::from_secs(1);
    report(1, "empty-cell diffusion", ok, elapsed, &format!("|D - I| = {err:.1e}, porosity = {porosity}"));
}

#[test]
fn c02_disk_tensor_structure() {
    let start = Instant::now();
    let mesh = generate_unit_cell_mesh(&UnitCellGeometry::centered_disk(0.25, 0.025)).unwrap();
    let (scalar, stokes) = rayon::join(|| solve_scalar_cell_problems(&mesh).unwrap(), || solve_stokes_cell_problems(&mesh).unwrap());
    let (d, d_energy) = diffusion_tensor_pair(&scalar, &mesh);
    let (k, k_energy) = permeability_tensor_pair(&stokes, &mesh);
    let elapsed = start.elapsed();
    let mut notes = Vec::new();
    let mut ok = elapsed < Duration::from_secs(60);
    for (name, t, energy) in [("D", d, d_energy), ("K", k, k_energy)] {
        let sym = (t.0[0][1] - t.0[1][0]).abs() / t.trace();
        let off = t.0[0][1].abs().max(t.0[1][0].abs()) / t.trace();
        let formulas = tensor_rel_diff(&t, &energy);
        ok &= sym <= 1e-8 && off <= 1e-8 && t.is_positive_definite() && formulas <= 1e-6;
        notes.push(format!("{name}: asym {sym:.1e}, off-diag {off:.1e}, formulas {formulas:.1e}"));
    }
    let porosity = UnitCellGeometry::centered_disk(0.25, 0.025).porosity();
    ok &= d.0[0][0] > 0.0 && d.0[0][0] < porosity;
    notes.push(format!("D11 = {:.6} < {porosity:.5}", d.0[0][0]));
    report(2, "disk tensor structure", ok, elapsed, &notes.join("; "));
}

#[test]
fn c03_golden_values() {
    let start = Instant::now();
    let c = compute_effective_coefficients(&UnitCellGeometry::centered_disk(0.25, 0.025), 0.0).unwrap();
    let elapsed = start.elapsed();
    let errors = [
        ("d", rel(c.d.0[0][0], golden("D"))),
        ("k", rel(c.k.0[0][0], golden("K"))),
        ("m", rel(c.dirichlet_mean, golden("dirichlet_mean"))),
    ];
    let ok = errors.iter().all(|(_, e)| *e <= 5e-3) && elapsed < Duration::from_secs(60);
    let detail: Vec<String> = errors.iter().map(|(n, e)| format!("{n} off by {:.3}%", 100.0 * e)).collect();
    report(3, "golden coefficients", ok, elapsed, &detail.join(", "));
}

#[test]
fn c04_manufactured_poisson() {
    let start = Instant::now();
    let errors: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&h| {
            let mesh = rect_mesh_with_spacing(Rect::unit_square(), h).unwrap();
            let (c_plus, c_minus) = mesh.nodes().iter().map(|x| ((PI * x[0]).cos(), 0.0)).unzip();
            let state = MacroState::at_rest(&mesh, 0.0, c_plus, c_minus);
            let phi = solve_macro_poisson(&mesh, &state, &EffectiveCoefficients::unit()).unwrap();
            l2_error_p1(&mesh, &phi, |x| (PI * x[0]).cos() / (PI * PI))
        })
        .collect();
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let elapsed = start.elapsed();
    let ok = orders.iter().all(|&p| p >= 1.9) && elapsed < Duration::from_secs(30);
    report(4, "manufactured macro Poisson", ok, elapsed, &format!("errors {}, orders {orders:.3?}", sci(&errors)));
}

#[test]
fn c05_conservation() {
    let start = Instant::now();
    let neumann = ScalingRegime::neumann(0.0, 0.0, 0.0, 0.0);
    let dipole = InitialData::charged_dipole();
    let mut notes = Vec::new();
    let mut ok = true;

    // 100 coupled steps at each scale
    let h = 1.0 / 32.0;
    let macro_run = run_macro(&macro_problem(h, neumann, &dipole, h * h / 4.0, 100.0 * h * h / 4.0)).unwrap();
    let micro = micro_problem(0.25, neumann, &dipole, 1e-3, 0.1);
    let micro_run = run_micro(&micro).unwrap();
    for (name, diag) in [("macro", &macro_run.diagnostics), ("micro", &micro_run.diagnostics)] {
        let (pass, drift) = check_status(diag, "mass_drift");
        ok &= pass && diag.rows.len() == 101;
        notes.push(format!("{name} mass drift {drift:.1e} over {} steps", diag.rows.len() - 1));
    }

    // net charge without drift: Q(t) = Q(0) e^{-2t}
    let dirichlet = ScalingRegime::dirichlet(1.0, 2.0, 1.0, 1.0);
    let charged = InitialData::Uniform { c_plus: 0.6, c_minus: 0.4 };
    let refined = run_macro(&macro_problem(1.0 / 16.0, dirichlet, &charged, 1e-3, 0.1)).unwrap();
    let micro_charged = run_micro(&micro_problem(0.25, dirichlet, &charged, 1e-3, 0.1)).unwrap();
    for (name, diag) in [("macro", &refined.diagnostics), ("micro", &micro_charged.diagnostics)] {
        let q0 = diag.rows[0].charge;
        let worst = diag.rows.iter().map(|r| (r.charge / q0 - (-2.0 * r.t).exp()).abs()).fold(0.0, f64::max);
        let (pass, drift) = check_status(diag, "mass_drift");
        ok &= worst <= 1e-3 && pass;
        notes.push(format!("{name} charge vs exp(-2t) {worst:.1e} (mass drift {drift:.1e})"));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(120);
    report(5, "conservation", ok, elapsed, &notes.join("; "));
}

#[test]
fn c06_positivity_and_boundedness() {
    let start = Instant::now();
    let neumann = ScalingRegime::neumann(0.0, 0.0, 0.0, 0.0);
    let dipole = InitialData::charged_dipole();
    let h = 1.0 / 32.0;
    let macro_run = run_macro(&macro_problem(h, neumann, &dipole, h * h / 4.0, 0.1)).unwrap();
    let micro = micro_problem(0.5, neumann, &dipole, (0.5f64 / 8.0).powi(2) / 4.0, 0.1);
    let micro_run = run_micro(&micro).unwrap();
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, diag) in [("macro", &macro_run.diagnostics), ("micro", &micro_run.diagnostics)] {
        let (pos, min_c) = check_status(diag, "positivity");
        let (bnd, max_c) = check_status(diag, "boundedness");
        ok &= pos && bnd;
        notes.push(format!("{name}: min c {min_c:.4}, max c {max_c:.4} over {} steps", diag.rows.len() - 1));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(120);
    report(6, "positivity and boundedness", ok, elapsed, &notes.join("; "));
}

#[test]
fn c07_regime_classifier() {
    use DarcyForcing::*;
    use NpDrift::*;
    use PotentialModel::*;
    let start = Instant::now();
    let n = |a, b, g| ScalingRegime::neumann(0.0, a, b, g);
    let d = |a, b, g| ScalingRegime::dirichlet(1.0, a, b, g);
    let class = |potential, darcy_forcing, np_drift| Some(MacroModelClass { potential, darcy_forcing, np_drift });
    let table = [
        (n(0.0, 0.0, 0.0), class(EllipticPoisson, WithElectrostatic, WithDrift)),
        (n(0.0, 1.0, 1.0), class(EllipticPoisson, Plain, None)),
        (n(0.0, 0.0, 1.0), class(EllipticPoisson, WithElectrostatic, None)),
        (n(1.0, 2.0, 1.0), class(EllipticPoisson, Plain, WithDrift)),
        (d(2.0, 1.0, 1.0), class(AlgebraicLocal, Plain, None)),
        (d(1.0, 0.0, 0.0), class(AlgebraicLocal, Plain, None)),
        (n(0.0, -1.0, 0.0), Option::None),
        (d(2.0, 0.0, 1.0), Option::None),
    ];
    let mut wrong = Vec::new();
    for (regime, expected) in &table {
        let got = classify_regime(regime);
        let matches = match (expected, &got) {
            (Some(e), Ok(g)) => e == g,
            (Option::None, Err(e)) => matches!(e.root(), snpp::Error::InadmissibleScaling(_)),
            _ => false,
        };
        if !matches {
            wrong.push(format!("{regime:?} -> {got:?}"));
        }
    }
    let elapsed = start.elapsed();
    let ok = wrong.is_empty() && elapsed < Duration::from_secs(1);
    report(7, "regime classifier", ok, elapsed, &format!("{} of {} regimes classified exactly {wrong:?}", table.len() - wrong.len(), table.len()));
}

fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

#[test]
fn c08_neumann_convergence_study() {
    let start = Instant::now();
    let study = run_convergence_study(&StudyConfig::neumann_headline()).unwrap();
    let elapsed = start.elapsed();
    let column = |f: fn(&StudyRow) -> f64| study.rows.iter().map(f).collect::<Vec<f64>>();
    let fields = [
        ("e_c+", column(|r| r.e_c_plus)),
        ("e_c-", column(|r| r.e_c_minus)),
        ("e_phi", column(|r| r.e_phi)),
        ("e_v", column(|r| r.e_v)),
    ];
    let mut ok = elapsed < Duration::from_secs(30 * 60) && study.rows.len() == 3;
    let mut notes = Vec::new();
    for (name, values) in &fields {
        ok &= strictly_decreasing(values);
        notes.push(format!("{name} {}", sci(values)));
    }
    let correctors: Vec<CorrectorErrors> = study.rows.iter().map(|r| r.corrector.unwrap()).collect();
    ok &= correctors.iter().all(CorrectorErrors::improved);
    let pairs: Vec<String> = correctors.iter().map(|c| format!("{:.2e}->{:.2e}", c.plain, c.enhanced)).collect();
    notes.push(format!("corrector {}", pairs.join(" ")));
    report(8, "Neumann convergence study", ok, elapsed, &notes.join("; "));
}

#[test]
fn c09_dirichlet_study() {
    let start = Instant::now();
    let study = run_convergence_study(&StudyConfig::dirichlet_default()).unwrap();
    let elapsed = start.elapsed();
    let e_phi: Vec<f64> = study.rows.iter().map(|r| r.e_phi).collect();
    let e_c: Vec<f64> = study.rows.iter().map(|r| r.e_c_plus.max(r.e_c_minus)).collect();
    let ok = strictly_decreasing(&e_phi) && strictly_decreasing(&e_c) && elapsed < Duration::from_secs(15 * 60);
    report(9, "Dirichlet study", ok, elapsed, &format!("potential {}, concentrations {}", sci(&e_phi), sci(&e_c)));
}

#[test]
fn c10_determinism() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("study.json");
    std::fs::write(
        &config,
        r#"{"regime": {"alpha": 0, "beta": 0, "gamma": 0},
            "discretization": {"eps_list": [0.5, 0.25], "t_end": 0.01, "dt": 0.001, "macro_h": 0.03125},
            "output": {"formats": ["csv"]}}"#,
    )
    .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let code = snpp::cli::main_with_args(["snpp", "converge", "--config", config.to_str().unwrap(), "--output", out.to_str().unwrap()]);
        assert!(code == snpp::cli::EXIT_OK || code == snpp::cli::EXIT_CHECK_FAILED, "exit {code}");
        let mut files: Vec<_> = std::fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e == "csv"))
            .collect();
        files.sort();
        files.iter().map(|p| (p.file_name().unwrap().to_owned(), std::fs::read(p).unwrap())).collect::<Vec<_>>()
    };
    let (a, b) = (run("first"), run("second"));
    let elapsed = start.elapsed();
    let ok = !a.is_empty() && a == b;
    report(10, "determinism", ok, elapsed, &format!("{} CSV files compared byte for byte", a.len()));
}
