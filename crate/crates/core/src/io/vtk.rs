use std::fmt::Write;

use crate::macroscale::MacroState;
use crate::mesh::TriMesh;
use crate::micro::MicroState;

/// Legacy ASCII VTK (3.0) unstructured grid of a triangle mesh with attached fields.
pub struct VtkWriter<'a> {
    mesh: &'a TriMesh,
    title: String,
    point_scalars: Vec<(String, Vec<f64>)>,
    point_vectors: Vec<(String, Vec<[f64; 2]>)>,
    cell_vectors: Vec<(String, Vec<[f64; 2]>)>,
}

impl<'a> VtkWriter<'a> {
    pub fn new(mesh: &'a TriMesh, title: impl Into<String>) -> Self {
        Self {
            mesh,
            title: title.into().replace('\n', " "),
            point_scalars: Vec::new(),
            point_vectors: Vec::new(),
            cell_vectors: Vec::new(),
        }
    }

    pub fn point_scalar(mut self, name: &str, values: &[f64]) -> Self {
        assert_eq!(values.len(), self.mesh.n_nodes(), "point field `{name}` has the wrong length");
        self.point_scalars.push((name.into(), values.to_vec()));
        self
    }

    pub fn point_vector(mut self, name: &str, values: &[[f64; 2]]) -> Self {
        assert_eq!(values.len(), self.mesh.n_nodes(), "point field `{name}` has the wrong length");
        self.point_vectors.push((name.into(), values.to_vec()));
        self
    }

    pub fn cell_vector(mut self, name: &str, values: &[[f64; 2]]) -> Self {
        assert_eq!(values.len(), self.mesh.n_triangles(), "cell field `{name}` has the wrong length");
        self.cell_vectors.push((name.into(), values.to_vec()));
        self
    }

    pub fn render(&self) -> String {
        let m = self.mesh;
        let mut s = String::new();
        let f = super::fmt_float;
        let _ = writeln!(s, "# vtk DataFile Version 3.0\n{}\nASCII\nDATASET UNSTRUCTURED_GRID", self.title);
        let _ = writeln!(s, "POINTS {} double", m.n_nodes());
        for p in m.nodes() {
            let _ = writeln!(s, "{} {} 0", f(p[0]), f(p[1]));
        }
        let _ = writeln!(s, "CELLS {} {}", m.n_triangles(), 4 * m.n_triangles());
        for t in m.triangles() {
            let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
        }
        let _ = writeln!(s, "CELL_TYPES {}", m.n_triangles());
        for _ in 0..m.n_triangles() {
            s.push_str("5\n");
        }
        if !self.point_scalars.is_empty() || !self.point_vectors.is_empty() {
            let _ = writeln!(s, "POINT_DATA {}", m.n_nodes());
            for (name, v) in &self.point_scalars {
                let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
                for x in v {
                    let _ = writeln!(s, "{}", f(*x));
                }
            }
            for (name, v) in &self.point_vectors {
                let _ = writeln!(s, "VECTORS {name} double");
                for x in v {
                    let _ = writeln!(s, "{} {} 0", f(x[0]), f(x[1]));
                }
            }
        }
        if !self.cell_vectors.is_empty() {
            let _ = writeln!(s, "CELL_DATA {}", m.n_triangles());
            for (name, v) in &self.cell_vectors {
                let _ = writeln!(s, "VECTORS {name} double");
                for x in v {
                    let _ = writeln!(s, "{} {} 0", f(x[0]), f(x[1]));
                }
            }
        }
        s
    }
}

pub fn macro_state_vtk(mesh: &TriMesh, state: &MacroState) -> String {
    VtkWriter::new(mesh, format!("macro t={}", state.t))
        .point_scalar("c_plus", &state.c_plus)
        .point_scalar("c_minus", &state.c_minus)
        .point_scalar("phi", &state.phi)
        .point_scalar("pressure", &state.pressure)
        .cell_vector("velocity", &state.velocity)
        .render()
}

/// Pore-scale snapshot; the P2 velocity is written at the mesh vertices.
pub fn micro_state_vtk(mesh: &TriMesh, state: &MicroState) -> String {
    VtkWriter::new(mesh, format!("micro t={}", state.t))
        .point_scalar("c_plus", &state.c_plus)
        .point_scalar("c_minus", &state.c_minus)
        .point_scalar("phi", &state.phi)
        .point_scalar("pressure", &state.pressure)
        .point_vector("velocity", &state.velocity[..mesh.n_nodes()])
        .render()
}
