use crate::error::{Error, Result};
use crate::fem::P2Dofs;
use crate::mesh::{PerforatedDomain, Rect, TriMesh};

/// Reference norms at or below this are round-off; errors against them are reported absolutely.
pub const NEGLIGIBLE_NORM: f64 = 1e-8;

/// Uniform grid of `nx × ny` coarse cells over a rectangle; cells are numbered row by row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoarseGrid {
    pub rect: Rect,
    pub nx: usize,
    pub ny: usize,
}

impl CoarseGrid {
    /// The grid of ε-cells of a perforated domain.
    pub fn of_cells(domain: &PerforatedDomain) -> Result<Self> {
        let [nx, ny] = domain.cells_per_side()?;
        Ok(Self {
            rect: domain.outer,
            nx,
            ny,
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_size(&self) -> [f64; 2] {
        [self.rect.size[0] / self.nx as f64, self.rect.size[1] / self.ny as f64]
    }

    pub fn cell_center(&self, k: usize) -> [f64; 2] {
        let s = self.cell_size();
        let (i, j) = (k % self.nx, k / self.nx);
        [
            self.rect.origin[0] + (i as f64 + 0.5) * s[0],
            self.rect.origin[1] + (j as f64 + 0.5) * s[1],
        ]
    }

    /// Index of the cell containing `x`, or `None` outside the rectangle.
    pub fn cell_of(&self, x: [f64; 2]) -> Option<usize> {
        let s = self.cell_size();
        let mut idx = [0usize; 2];
        for d in 0..2 {
            let u = (x[d] - self.rect.origin[d]) / s[d];
            let n = [self.nx, self.ny][d];
            if !(u >= -1e-9 && u <= n as f64 + 1e-9) {
                return None;
            }
            idx[d] = (u.max(0.0) as usize).min(n - 1);
        }
        Some(idx[1] * self.nx + idx[0])
    }

    /// Fails unless every coarse cell is a union of whole ε-cells.
    pub fn check_aligned(&self, domain: &PerforatedDomain) -> Result<()> {
        let same = (0..2).all(|d| {
            (self.rect.origin[d] - domain.outer.origin[d]).abs() < 1e-12
                && (self.rect.size[d] - domain.outer.size[d]).abs() < 1e-12
        });
        if !same {
            return Err(Error::GridMisaligned("coarse grid does not cover the perforated domain".into()));
        }
        for s in self.cell_size() {
            let k = s / domain.eps;
            if k.round() < 1.0 || (k - k.round()).abs() > 1e-9 * k.round() {
                return Err(Error::GridMisaligned(format!(
                    "coarse cell size {s} is not a multiple of eps = {}",
                    domain.eps
                )));
            }
        }
        Ok(())
    }
}

/// A field defined on a fine (micro or macro) mesh.
#[derive(Clone, Copy, Debug)]
pub enum MicroField<'a> {
    /// P1 nodal values.
    Nodal(&'a [f64]),
    /// Scalar P2 values, e.g. one velocity component.
    Quadratic(&'a P2Dofs, &'a [f64]),
    /// One value per triangle.
    Cellwise(&'a [f64]),
}

impl MicroField<'_> {
    fn triangle_integral(&self, mesh: &TriMesh, t: usize) -> f64 {
        let area = mesh.area(t);
        match self {
            MicroField::Nodal(u) => {
                let tri = mesh.triangles()[t];
                area / 3.0 * (u[tri[0]] + u[tri[1]] + u[tri[2]])
            }
            // vertex basis functions of P2 integrate to zero, edge ones to area/3
            MicroField::Quadratic(dofs, u) => {
                let loc = dofs.triangle(t);
                area / 3.0 * (u[loc[3]] + u[loc[4]] + u[loc[5]])
            }
            MicroField::Cellwise(u) => area * u[t],
        }
    }

    fn check(&self, mesh: &TriMesh) -> Result<()> {
        let (len, want) = match self {
            MicroField::Nodal(u) => (u.len(), mesh.n_nodes()),
            MicroField::Quadratic(d, _) if d.n_triangles() != mesh.n_triangles() => {
                return Err(Error::FieldMeshMismatch("P2 numbering belongs to another mesh".into()))
            }
            MicroField::Quadratic(d, u) => (u.len(), d.n_dofs()),
            MicroField::Cellwise(u) => (u.len(), mesh.n_triangles()),
        };
        if len != want {
            return Err(Error::FieldMeshMismatch(format!("field has {len} values, mesh needs {want}")));
        }
        Ok(())
    }
}

/// Normalisation of a coarse-cell average.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Averaging {
    /// Divide by the fluid area in the cell (concentrations, potentials).
    Fluid,
    /// Divide by the full cell area, i.e. extend by zero into the solid (`∫_{Y_l} · dy`).
    Cell,
}

/// One value per coarse cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CoarseField {
    pub grid: CoarseGrid,
    pub values: Vec<f64>,
}

impl CoarseField {
    /// `‖self − reference‖ / ‖reference‖` in the discrete L² norm over coarse cells; the
    /// absolute difference norm when the reference norm is below [`NEGLIGIBLE_NORM`].
    pub fn relative_l2_error(&self, reference: &CoarseField) -> f64 {
        let w = self.grid.cell_size()[0] * self.grid.cell_size()[1];
        let diff: f64 = self.values.iter().zip(&reference.values).map(|(a, b)| w * (a - b).powi(2)).sum();
        let norm: f64 = reference.values.iter().map(|b| w * b * b).sum();
        if norm.sqrt() > NEGLIGIBLE_NORM {
            (diff / norm).sqrt()
        } else {
            diff.sqrt()
        }
    }
}

/// Averages of a fine-mesh field over the cells of a coarse grid; triangles are assigned by
/// centroid.
pub fn coarse_average(mesh: &TriMesh, field: MicroField<'_>, grid: &CoarseGrid, averaging: Averaging) -> Result<CoarseField> {
    field.check(mesh)?;
    let mut integral = vec![0.0; grid.len()];
    let mut area = vec![0.0; grid.len()];
    for t in 0..mesh.n_triangles() {
        let c = mesh.centroid(t);
        let k = grid
            .cell_of(c)
            .ok_or_else(|| Error::GridMisaligned(format!("triangle centroid {c:?} outside the coarse grid")))?;
        integral[k] += field.triangle_integral(mesh, t);
        area[k] += mesh.area(t);
    }
    let s = grid.cell_size();
    let cell_area = s[0] * s[1];
    let values = integral
        .iter()
        .zip(&area)
        .enumerate()
        .map(|(k, (i, a))| match averaging {
            Averaging::Cell => Ok(i / cell_area),
            Averaging::Fluid if *a > 0.0 => Ok(i / a),
            Averaging::Fluid => Err(Error::InvalidData(format!("coarse cell {k} contains no fluid"))),
        })
        .collect::<Result<_>>()?;
    Ok(CoarseField { grid: *grid, values })
}

/// Per-cell averages of a pore-scale field; the coarse grid must be aligned with the ε-cells.
pub fn average_micro_field(
    mesh: &TriMesh,
    field: MicroField<'_>,
    domain: &PerforatedDomain,
    grid: &CoarseGrid,
    averaging: Averaging,
) -> Result<CoarseField> {
    grid.check_aligned(domain)?;
    coarse_average(mesh, field, grid, averaging)
}
