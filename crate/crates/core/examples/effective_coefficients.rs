//! Effective diffusion, permeability and Dirichlet-mean coefficients of a disk cell.
//!
//! cargo run --release --example effective_coefficients -- 0.25 0.025

use std::time::Instant;

use snpp::cell::compute_effective_coefficients;
use snpp::mesh::UnitCellGeometry;

fn main() -> snpp::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let radius = args.first().copied().unwrap_or(0.25);
    let h = args.get(1).copied().unwrap_or(0.025);
    let start = Instant::now();
    let c = compute_effective_coefficients(&UnitCellGeometry::centered_disk(radius, h), 1.0)?;
    println!("r = {radius}, h = {h}");
    println!("porosity       {:.10}", c.porosity);
    println!("D              {:?}", c.d.0);
    println!("K              {:?}", c.k.0);
    println!("dirichlet mean {:.10e}", c.dirichlet_mean);
    println!("sigma_bar      {:.10}", c.sigma_bar);
    println!("elapsed        {:.2?}", start.elapsed());
    Ok(())
}
