//! Meshes the periodic unit cell around a disk and writes it as VTK.
//!
//! cargo run --release --example unit_cell_mesh -- 0.25 0.05 cell.vtk

use snpp::io::VtkWriter;
use snpp::mesh::{generate_unit_cell_mesh, mesh_quality_report, BoundaryTag, UnitCellGeometry};

fn main() -> snpp::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let radius = args.first().and_then(|a| a.parse().ok()).unwrap_or(0.25);
    let h = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(0.05);
    let geom = UnitCellGeometry::centered_disk(radius, h);
    let mesh = generate_unit_cell_mesh(&geom)?;
    let q = mesh_quality_report(&mesh);
    println!("{} nodes, {} triangles", mesh.n_nodes(), mesh.n_triangles());
    println!("fluid area {:.6} (exact {:.6})", mesh.total_area(), geom.porosity());
    println!("interface nodes {}", mesh.nodes_with_tag(BoundaryTag::GammaInterior).len());
    println!("min angle {:.1} deg, h in [{:.4}, {:.4}]", q.min_angle_deg, q.h_min, q.h_max);
    if let Some(path) = args.get(2) {
        std::fs::write(path, VtkWriter::new(&mesh, "unit cell").render())?;
        println!("wrote {path}");
    }
    Ok(())
}
