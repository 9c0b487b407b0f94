//! Command-line front end: `snpp <cell|macro|micro|converge|check>`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::cell::{effective_coefficients_on, EffectiveCoefficients};
use crate::config::{parse_config_for, Command, RunConfig};
use crate::data::{balance_charge, check_initial_bounds};
use crate::diagnostics::RunDiagnostics;
use crate::error::{Context, Error, Result};
use crate::io::{
    coefficients_kv, diagnostics_csv, macro_state_vtk, micro_state_vtk, parse_coefficients_kv, parse_diagnostics_csv,
    study_csv, write_manifest, Manifest,
};
use crate::macroscale::{run_macro, MacroProblem};
use crate::mesh::{generate_unit_cell_mesh, rect_mesh_with_spacing, PerforatedDomain, Rect};
use crate::micro::{run_micro, MicroProblem};
use crate::transport::CouplingOptions;
use crate::verify::{run_convergence_study, run_invariant_suite, StudyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "snpp", version, about = "Stokes–Nernst–Planck–Poisson homogenization toolkit")]
struct Cli {
    /// Allow parallel, non-deterministic reductions in the linear algebra.
    #[arg(long, global = true)]
    fast: bool,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Solve the cell problems and write the effective coefficients.
    Cell(RunArgs),
    /// Run the homogenized model.
    Macro(RunArgs),
    /// Run the pore-scale model on the perforated domain.
    Micro(RunArgs),
    /// Run the ε-convergence study.
    Converge(RunArgs),
    /// Run the invariant suite on a diagnostics CSV.
    Check {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Diagnostics CSV (overrides the configuration).
        #[arg(long)]
        diagnostics: Option<PathBuf>,
        /// Upper bound Λ of the initial data.
        #[arg(long)]
        lambda: Option<f64>,
        /// The run started with c⁺ + c⁻ = 1.
        #[arg(long)]
        volume_additive: bool,
        /// The potential is not normalised to zero mean (Dirichlet branch).
        #[arg(long)]
        dirichlet: bool,
    },
}

fn load_config(path: Option<&Path>, command: Command) -> Result<RunConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)?,
        None => "{}".to_string(),
    };
    parse_config_for(&text, Some(command))
}

fn prepare(args: &RunArgs, command: Command) -> Result<RunConfig> {
    let mut cfg = load_config(args.config.as_deref(), command)?;
    if let Some(dir) = &args.output {
        cfg.output.directory = dir.clone();
    }
    std::fs::create_dir_all(&cfg.output.directory)?;
    Ok(cfg)
}

fn finish(cfg: &RunConfig, start: Instant, run: Value) -> Result<()> {
    write_manifest(
        &cfg.output.directory,
        &Manifest {
            command: cfg.command.name().into(),
            config: cfg.to_json(),
            wall_time_seconds: start.elapsed().as_secs_f64(),
            run,
        },
    )
}

fn run_facts(d: &RunDiagnostics) -> Value {
    json!({
        "lambda": d.lambda,
        "volume_additive": d.volume_additive_start,
        "zero_mean_potential": d.zero_mean_potential,
    })
}

fn coefficients(cfg: &RunConfig) -> Result<EffectiveCoefficients> {
    if let Some(path) = &cfg.coefficients {
        return parse_coefficients_kv(&std::fs::read_to_string(path)?);
    }
    let mesh = generate_unit_cell_mesh(&cfg.geometry)?;
    effective_coefficients_on(&cfg.geometry, &mesh, cfg.regime.sigma())
}

fn cmd_cell(args: &RunArgs) -> Result<i32> {
    let start = Instant::now();
    let cfg = prepare(args, Command::Cell)?;
    let geometry = cfg.geometry.with_target_h(cfg.discretization.h);
    let mesh = generate_unit_cell_mesh(&geometry)?;
    let c = effective_coefficients_on(&geometry, &mesh, cfg.regime.sigma())?;
    let text = coefficients_kv(&c);
    std::fs::write(cfg.output.directory.join("coefficients.kv"), &text)?;
    print!("{text}");
    finish(&cfg, start, json!({"triangles": mesh.n_triangles()}))?;
    Ok(EXIT_OK)
}

fn options(cfg: &RunConfig) -> CouplingOptions {
    CouplingOptions {
        upwind: cfg.upwind,
        snapshot_stride: cfg.output.snapshot_stride,
        ..Default::default()
    }
}

fn report_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn cmd_macro(args: &RunArgs) -> Result<i32> {
    let start = Instant::now();
    let cfg = prepare(args, Command::Macro)?;
    let coeffs = coefficients(&cfg)?;
    let d = &cfg.discretization;
    let mesh = rect_mesh_with_spacing(Rect::unit_square(), d.h)?;
    let (mut c_plus0, mut c_minus0) = cfg.initial.interpolate(&mesh);
    if cfg.balance_charge && cfg.regime.is_neumann() {
        let target = -coeffs.sigma_bar * mesh.total_area() / coeffs.porosity;
        balance_charge(&mesh, &mut c_plus0, &mut c_minus0, target);
    }
    check_initial_bounds(&c_plus0, &c_minus0, cfg.lambda)?;
    let problem = MacroProblem {
        mesh,
        coeffs,
        regime: cfg.regime,
        c_plus0,
        c_minus0,
        t_end: d.t_end,
        dt: d.dt,
        lambda: cfg.lambda,
        volume_additive: cfg.initial.is_volume_additive(),
        options: options(&cfg),
    };
    let run = run_macro(&problem)?;
    report_warnings(&run.warnings);
    let dir = &cfg.output.directory;
    if cfg.output.csv {
        std::fs::write(dir.join("diagnostics.csv"), diagnostics_csv(&run.diagnostics.rows))?;
    }
    if cfg.output.vtk {
        for (k, s) in run.snapshots.iter().enumerate() {
            std::fs::write(dir.join(format!("macro_{k:04}.vtk")), macro_state_vtk(&problem.mesh, s))?;
        }
    }
    let last = run.diagnostics.rows.last().expect("initial row");
    println!(
        "macro: {} steps, t = {}, mass = {:.12e}, charge = {:.6e}, min c = {:.6e}",
        run.diagnostics.rows.len() - 1,
        last.t,
        last.mass,
        last.charge,
        last.min_c
    );
    finish(&cfg, start, run_facts(&run.diagnostics))?;
    Ok(EXIT_OK)
}

fn cmd_micro(args: &RunArgs) -> Result<i32> {
    let start = Instant::now();
    let cfg = prepare(args, Command::Micro)?;
    let d = &cfg.discretization;
    let domain = PerforatedDomain::new(Rect::unit_square(), d.eps, cfg.geometry)?;
    let mut problem = MicroProblem::new(domain, d.h, cfg.regime, &cfg.initial, d.t_end, d.dt)?;
    problem.lambda = cfg.lambda;
    problem.options = options(&cfg);
    problem.exact_stokes = cfg.exact_stokes;
    if cfg.balance_charge {
        problem.balance_surface_charge();
    }
    let run = run_micro(&problem)?;
    report_warnings(&run.warnings);
    let dir = cfg.output.directory.join(format!("eps_{}", d.eps));
    std::fs::create_dir_all(&dir)?;
    if cfg.output.csv {
        std::fs::write(dir.join("diagnostics.csv"), diagnostics_csv(&run.diagnostics.rows))?;
    }
    if cfg.output.vtk {
        for (k, s) in run.snapshots.iter().enumerate() {
            std::fs::write(dir.join(format!("micro_{k:04}.vtk")), micro_state_vtk(&problem.mesh, s))?;
        }
    }
    let last = run.diagnostics.rows.last().expect("initial row");
    println!(
        "micro eps = {}: {} steps, {} Stokes solves, mass = {:.12e}, min c = {:.6e}",
        d.eps,
        run.diagnostics.rows.len() - 1,
        run.stokes_solves,
        last.mass,
        last.min_c
    );
    finish(&cfg, start, run_facts(&run.diagnostics))?;
    Ok(EXIT_OK)
}

fn cmd_converge(args: &RunArgs) -> Result<i32> {
    let start = Instant::now();
    let cfg = prepare(args, Command::Converge)?;
    let radius = match cfg.geometry.inclusion {
        crate::mesh::Inclusion::Disk { center, radius } if center == [0.5, 0.5] => radius,
        _ => return Err(Error::validation("geometry", "the study needs a centred disk inclusion")),
    };
    let d = &cfg.discretization;
    let study = run_convergence_study(&StudyConfig {
        regime: cfg.regime,
        radius,
        data: cfg.initial.clone(),
        eps: d.eps_list.clone(),
        t_end: d.t_end,
        dt: d.dt,
        cell_h: d.cell_h,
        macro_h: d.macro_h,
        lambda: cfg.lambda,
    })?;
    let dir = &cfg.output.directory;
    let table = study_csv(&study);
    std::fs::write(dir.join("study.csv"), &table)?;
    if cfg.output.csv {
        std::fs::write(dir.join("macro_diagnostics.csv"), diagnostics_csv(&study.macro_diagnostics.rows))?;
        for (eps, diag) in d.eps_list.iter().zip(&study.micro_diagnostics) {
            std::fs::write(dir.join(format!("micro_eps_{eps}_diagnostics.csv")), diagnostics_csv(&diag.rows))?;
        }
    }
    print!("{table}");
    finish(&cfg, start, run_facts(&study.macro_diagnostics))?;
    if study.is_monotone() {
        Ok(EXIT_OK)
    } else {
        eprintln!("non-monotone convergence: {}", study.non_monotone.join(", "));
        Ok(EXIT_CHECK_FAILED)
    }
}

/// Run facts from a manifest next to (or one level above) the diagnostics file.
fn manifest_facts(diagnostics: &Path) -> Option<Value> {
    let dir = diagnostics.parent()?;
    [dir.join("manifest.json"), dir.parent()?.join("manifest.json")]
        .iter()
        .find_map(|p| std::fs::read_to_string(p).ok())
        .and_then(|t| serde_json::from_str::<Value>(&t).ok())
        .and_then(|v| v.get("run").cloned())
}

fn cmd_check(
    config: Option<&Path>,
    diagnostics: Option<PathBuf>,
    lambda: Option<f64>,
    volume_additive: bool,
    dirichlet: bool,
) -> Result<i32> {
    let cfg = match config {
        Some(p) => Some(load_config(Some(p), Command::Check)?),
        None => None,
    };
    let path = diagnostics
        .or_else(|| cfg.as_ref().and_then(|c| c.diagnostics.clone()))
        .ok_or_else(|| Error::validation("diagnostics", "no diagnostics file given"))?;
    let rows = parse_diagnostics_csv(&std::fs::read_to_string(&path)?)?;
    let facts = manifest_facts(&path).unwrap_or(Value::Null);
    let diag = RunDiagnostics {
        rows,
        lambda: lambda
            .or_else(|| facts.get("lambda").and_then(Value::as_f64))
            .or(cfg.as_ref().map(|c| c.lambda))
            .unwrap_or(1.0),
        volume_additive_start: volume_additive || facts.get("volume_additive").and_then(Value::as_bool).unwrap_or(false),
        zero_mean_potential: !dirichlet
            && facts.get("zero_mean_potential").and_then(Value::as_bool).unwrap_or(true)
            && cfg.as_ref().map_or(true, |c| c.regime.is_neumann()),
    };
    let report = run_invariant_suite(&diag)?;
    print!("{report}");
    Ok(if report.passed() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn dispatch(cli: Cli) -> Result<i32> {
    match &cli.command {
        Sub::Cell(a) => cmd_cell(a).during("cli", "cell"),
        Sub::Macro(a) => cmd_macro(a).during("cli", "macro"),
        Sub::Micro(a) => cmd_micro(a).during("cli", "micro"),
        Sub::Converge(a) => cmd_converge(a).during("cli", "converge"),
        Sub::Check {
            config,
            diagnostics,
            lambda,
            volume_additive,
            dirichlet,
        } => cmd_check(config.as_deref(), diagnostics.clone(), *lambda, *volume_additive, *dirichlet)
            .during("cli", "check"),
    }
}

fn configure_threads(fast: bool) {
    if let Some(n) = std::env::var("SNPP_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // fails only if the pool already exists, in which case it is kept
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    faer::set_global_parallelism(if fast { faer::Par::rayon(0) } else { faer::Par::Seq });
}

/// Entry point: parses `args` (including the program name) and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    configure_threads(cli.fast);
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                EXIT_USAGE
            } else {
                EXIT_NUMERICAL
            }
        }
    }
}
