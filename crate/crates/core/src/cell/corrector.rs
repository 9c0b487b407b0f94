use super::ScalarCellSolutions;
use crate::error::{Error, Result};
use crate::mesh::{PointLocator, TriMesh};

/// Point evaluation of the scalar cell correctors `φ_j(y)`.
#[derive(Debug)]
pub struct CellCorrector<'a> {
    mesh: &'a TriMesh,
    sols: &'a ScalarCellSolutions,
    locator: PointLocator<'a>,
}

impl<'a> CellCorrector<'a> {
    pub fn new(mesh: &'a TriMesh, sols: &'a ScalarCellSolutions) -> Self {
        Self {
            mesh,
            sols,
            locator: PointLocator::new(mesh),
        }
    }

    /// `(φ_1(y), φ_2(y))` for a cell point `y ∈ [0,1]²`.
    pub fn eval(&self, y: [f64; 2]) -> Result<[f64; 2]> {
        let (t, lam) = self
            .locator
            .locate(y)
            .ok_or(Error::PointOutsideFluidPart { x: y[0], y: y[1] })?;
        let tri = self.mesh.triangles()[t];
        let mut out = [0.0; 2];
        for (j, o) in out.iter_mut().enumerate() {
            *o = (0..3).map(|k| lam[k] * self.sols.phi[j][tri[k]]).sum();
        }
        Ok(out)
    }
}

/// First-order corrector `Σ_j φ_j(y) g_j(x)` for a macroscopic gradient field `g`.
pub fn reconstruct_corrector(
    macro_grad: impl Fn([f64; 2]) -> [f64; 2],
    corrector: &CellCorrector<'_>,
    point_macro: [f64; 2],
    point_cell: [f64; 2],
) -> Result<f64> {
    let g = macro_grad(point_macro);
    let phi = corrector.eval(point_cell)?;
    Ok(phi[0] * g[0] + phi[1] * g[1])
}
