//! Unit-cell and perforated-domain geometry and triangulation.

mod generate;
mod geometry;
mod locate;
mod quality;
mod trimesh;

pub use generate::{
    generate_perforated_mesh, generate_unit_cell_mesh, rect_mesh_with_spacing,
    structured_rect_mesh,
};
pub use geometry::{Inclusion, PerforatedDomain, Rect, UnitCellGeometry};
pub use locate::{barycentric, PointLocator};
pub use quality::{mesh_quality_report, QualityReport};
pub use trimesh::{signed_area, BoundaryEdge, BoundaryTag, TriMesh};
