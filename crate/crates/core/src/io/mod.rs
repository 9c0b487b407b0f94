//! Output formats: CSV tables, legacy VTK, key=value coefficient files and run manifests.

mod csv;
mod kv;
mod manifest;
mod vtk;

pub use csv::{diagnostics_csv, parse_diagnostics_csv, study_csv, STUDY_COLUMNS};
pub use kv::{coefficients_kv, parse_coefficients_kv, COEFFICIENT_KEYS};
pub use manifest::{write_manifest, Manifest};
pub use vtk::{macro_state_vtk, micro_state_vtk, VtkWriter};

/// Round-trip exact float formatting (17 significant digits).
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}
