//! Pore-scale simulation on the perforated square for one value of ε.
//!
//! cargo run --release --example micro_dns -- 0.25

use snpp::data::InitialData;
use snpp::macroscale::ScalingRegime;
use snpp::mesh::{PerforatedDomain, Rect, UnitCellGeometry};
use snpp::micro::{run_micro, MicroProblem};
use snpp::verify::run_invariant_suite;

fn main() -> snpp::Result<()> {
    let eps: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.5);
    let cell_h = 0.125;
    let domain = PerforatedDomain::new(Rect::unit_square(), eps, UnitCellGeometry::centered_disk(0.25, cell_h))?;
    let regime = ScalingRegime::neumann(0.0, 0.0, 0.0, 0.0);
    let mut problem = MicroProblem::new(domain, eps * cell_h, regime, &InitialData::charged_dipole(), 0.02, 1e-3)?;
    problem.balance_surface_charge();
    println!("eps {eps}: {} nodes, {} triangles", problem.mesh.n_nodes(), problem.mesh.n_triangles());

    let run = run_micro(&problem)?;
    let last = run.diagnostics.rows.last().expect("at least one row");
    println!("{} steps, {} Stokes solves", run.diagnostics.rows.len() - 1, run.stokes_solves);
    println!("final mass {:.12}, charge {:+.3e}, min c {:.4}", last.mass, last.charge, last.min_c);
    print!("{}", run_invariant_suite(&run.diagnostics)?);
    Ok(())
}
