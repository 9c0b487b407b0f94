use std::path::Path;

use proptest::prelude::*;
use snpp::cli::{main_with_args, EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE};
use snpp::config::{parse_config, parse_config_for, Command};
use snpp::diagnostics::DiagnosticsRow;
use snpp::io::*;
use snpp::mesh::{structured_rect_mesh, Rect};
use snpp::Error;

fn snpp(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("snpp").chain(args.iter().copied()))
}

fn row(t: f64, min_c: f64) -> DiagnosticsRow {
    DiagnosticsRow {
        t,
        mass: 1.0,
        charge: 0.0,
        min_c,
        max_c: 0.6,
        fp_iters: 2,
        energy: 0.1,
        phi_mean: 0.0,
        p_mean: 0.0,
        div_v: 0.0,
        source_residual: 0.0,
    }
}

fn validation_field(err: Error) -> String {
    match err.root() {
        Error::Validation { field, .. } => field.clone(),
        other => panic!("expected a validation error, got {other}"),
    }
}

#[test]
fn geometry_only_cell_config_gets_defaults() {
    let cfg = parse_config(r#"{"command": "cell", "geometry": {"radius": 0.2}}"#).unwrap();
    assert_eq!(cfg.command, Command::Cell);
    assert_eq!(cfg.discretization.h, cfg.geometry.target_h);
    assert!(cfg.discretization.dt > 0.0 && cfg.discretization.t_end > 0.0);
    assert!(cfg.regime.is_neumann());
}

#[test]
fn textual_exponent_is_rejected_with_its_field() {
    let err = parse_config(r#"{"command": "macro", "regime": {"alpha": "two"}}"#).unwrap_err();
    assert_eq!(validation_field(err), "regime.alpha");
}

#[test]
fn unknown_and_missing_fields_are_named() {
    let err = parse_config(r#"{"command": "macro", "regime": {}, "discretization": {"dtt": 1}}"#).unwrap_err();
    assert_eq!(validation_field(err), "discretization.dtt");
    let err = parse_config_for("{}", Some(Command::Micro)).unwrap_err();
    assert_eq!(validation_field(err), "regime");
}

#[test]
fn syntax_errors_carry_a_position() {
    match parse_config("{\n  \"command\": \"cell\",\n  oops\n}").unwrap_err() {
        Error::Parse { line, column, .. } => assert_eq!((line, column), (3, 3)),
        other => panic!("{other}"),
    }
}

#[test]
fn eps_list_is_ordered_descending() {
    let cfg = parse_config(r#"{"command": "converge", "regime": {}, "discretization": {"eps_list": [0.125, 0.5, 0.25]}}"#)
        .unwrap();
    assert_eq!(cfg.discretization.eps_list, vec![0.5, 0.25, 0.125]);
}

#[test]
fn diagnostics_tables_require_the_core_columns() {
    let csv = diagnostics_csv(&[row(0.0, 0.3), row(0.1, 0.31)]);
    assert_eq!(parse_diagnostics_csv(&csv).unwrap()[1], row(0.1, 0.31));
    let short = "t,mass,charge,min_c,max_c\n0,1,0,0.3,0.6\n";
    assert!(matches!(parse_diagnostics_csv(short), Err(Error::MalformedDiagnostics(_))));
    let bad = "t,mass,charge,min_c,max_c,fp_iters\n0,1,0,x,0.6,1\n";
    assert!(matches!(parse_diagnostics_csv(bad), Err(Error::MalformedDiagnostics(_))));
}

#[test]
fn coefficients_file_needs_every_key() {
    let text = "porosity=1\nD11=1\nD12=0\nD22=1\nK11=1\nK12=0\nK22=1\nsigma_bar=0\n";
    assert!(parse_coefficients_kv(text).is_err());
    let c = parse_coefficients_kv(&format!("{text}dirichlet_mean=0.5\n")).unwrap();
    assert_eq!(c.dirichlet_mean, 0.5);
}

#[test]
fn vtk_sections_match_the_mesh() {
    let mesh = structured_rect_mesh(Rect::unit_square(), 2, 3).unwrap();
    let u: Vec<f64> = mesh.nodes().iter().map(|p| p[0]).collect();
    let v = vec![[1.0, 0.0]; mesh.n_triangles()];
    let text = VtkWriter::new(&mesh, "test").point_scalar("u", &u).cell_vector("v", &v).render();
    assert!(text.starts_with("# vtk DataFile Version 3.0\n"));
    assert!(text.contains(&format!("POINTS {} double", mesh.n_nodes())));
    assert!(text.contains(&format!("CELLS {} {}", mesh.n_triangles(), 4 * mesh.n_triangles())));
    assert!(text.contains(&format!("POINT_DATA {}", mesh.n_nodes())));
    assert!(text.contains(&format!("CELL_DATA {}", mesh.n_triangles())));
    assert_eq!(text.lines().filter(|l| *l == "5").count(), mesh.n_triangles());
}

#[test]
fn cell_command_writes_nine_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cell.json");
    std::fs::write(&config, r#"{"geometry": {"radius": 0.25, "cell_h": 0.05}}"#).unwrap();
    let out = dir.path().join("out");
    let code = snpp(&["cell", "--config", config.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let kv = std::fs::read_to_string(out.join("coefficients.kv")).unwrap();
    assert_eq!(kv.lines().filter(|l| !l.starts_with('#')).count(), 9);
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "cell");
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(snpp(&["frobnicate"]), EXIT_USAGE);
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(&config, r#"{"regime": {"alpha": "two"}}"#).unwrap();
    assert_eq!(snpp(&["macro", "--config", config.to_str().unwrap()]), EXIT_USAGE);
    assert_eq!(snpp(&["check", "--diagnostics", dir.path().join("missing.csv").to_str().unwrap()]), EXIT_USAGE);
}

fn check(path: &Path, rows: &[DiagnosticsRow]) -> i32 {
    std::fs::write(path, diagnostics_csv(rows)).unwrap();
    snpp(&["check", "--diagnostics", path.to_str().unwrap()])
}

#[test]
fn check_command_reports_violations() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("diagnostics.csv");
    assert_eq!(check(&path, &[row(0.0, 0.3), row(0.1, 0.2)]), EXIT_OK);
    assert_eq!(check(&path, &[row(0.0, 0.3), row(0.1, -0.01)]), EXIT_CHECK_FAILED);
    std::fs::write(&path, "t,mass\n").unwrap();
    assert_eq!(snpp(&["check", "--diagnostics", path.to_str().unwrap()]), EXIT_USAGE);
}

#[test]
fn converge_command_tabulates_every_eps() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("study.json");
    std::fs::write(
        &config,
        r#"{"regime": {"alpha": 0, "beta": 0, "gamma": 0},
            "discretization": {"eps_list": [0.5, 0.25, 0.125], "t_end": 0.002, "dt": 0.001, "macro_h": 0.03125},
            "output": {"formats": ["csv"]}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let code = snpp(&["converge", "--config", config.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert!(code == EXIT_OK || code == EXIT_CHECK_FAILED, "exit {code}");
    let table = std::fs::read_to_string(out.join("study.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0].split(',').collect::<Vec<_>>(), STUDY_COLUMNS);
    assert_eq!(lines.len(), 4);
    assert!(out.join("macro_diagnostics.csv").exists());
}

proptest! {
    #[test]
    fn floats_are_written_exactly(x in proptest::num::f64::NORMAL | proptest::num::f64::ZERO) {
        prop_assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn eps_lists_are_sorted_and_unique(ks in proptest::collection::vec(0u32..4, 1..6)) {
        let eps: Vec<f64> = ks.iter().map(|&k| 0.5f64.powi(k as i32)).collect();
        let text = format!(r#"{{"command": "converge", "regime": {{}}, "discretization": {{"eps_list": {eps:?}}}}}"#);
        let list = parse_config(&text).unwrap().discretization.eps_list;
        prop_assert!(list.windows(2).all(|w| w[0] > w[1]));
        prop_assert!(eps.iter().all(|e| list.contains(e)));
    }
}
