//! Fully coupled homogenized run for a charged dipole, with invariant checks.
//!
//! cargo run --release --example macro_run -- out_dir

use snpp::cell::compute_effective_coefficients;
use snpp::data::{balance_charge, InitialData};
use snpp::io::{diagnostics_csv, macro_state_vtk};
use snpp::macroscale::{run_macro, MacroProblem, ScalingRegime};
use snpp::mesh::{rect_mesh_with_spacing, Rect, UnitCellGeometry};
use snpp::transport::CouplingOptions;
use snpp::verify::run_invariant_suite;

fn main() -> snpp::Result<()> {
    let out = std::env::args().nth(1);
    let regime = ScalingRegime::neumann(0.0, 0.0, 0.0, 0.0);
    let coeffs = compute_effective_coefficients(&UnitCellGeometry::centered_disk(0.25, 0.05), regime.sigma())?;
    let mesh = rect_mesh_with_spacing(Rect::unit_square(), 1.0 / 32.0)?;
    let data = InitialData::charged_dipole();
    let (mut c_plus0, mut c_minus0) = data.interpolate(&mesh);
    balance_charge(&mesh, &mut c_plus0, &mut c_minus0, -coeffs.sigma_bar * mesh.total_area() / coeffs.porosity);

    let run = run_macro(&MacroProblem {
        mesh: mesh.clone(),
        coeffs,
        regime,
        c_plus0,
        c_minus0,
        t_end: 0.1,
        dt: 1e-3,
        lambda: 1.0,
        volume_additive: data.is_volume_additive(),
        options: CouplingOptions::default(),
    })?;
    println!("class {:?}", run.class);
    for row in run.diagnostics.rows.iter().step_by(20) {
        println!("t {:.3}  mass {:.12}  charge {:+.3e}  min c {:.4}  passes {}", row.t, row.mass, row.charge, row.min_c, row.fp_iters);
    }
    print!("{}", run_invariant_suite(&run.diagnostics)?);
    if let Some(dir) = out {
        std::fs::create_dir_all(&dir)?;
        std::fs::write(format!("{dir}/diagnostics.csv"), diagnostics_csv(&run.diagnostics.rows))?;
        std::fs::write(format!("{dir}/final.vtk"), macro_state_vtk(&mesh, run.final_state()))?;
    }
    Ok(())
}
