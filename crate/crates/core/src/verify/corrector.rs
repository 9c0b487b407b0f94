use crate::cell::{CellCorrector, ScalarCellSolutions};
use crate::error::{Error, Result};
use crate::fem::{l2_norm_sq_p1, lumped_mass, recovered_gradient};
use crate::mesh::{PerforatedDomain, PointLocator, TriMesh};

/// Point evaluation of a macroscopic P1 field and of its recovered gradient.
pub struct MacroProbe<'a> {
    mesh: &'a TriMesh,
    locator: PointLocator<'a>,
    values: &'a [f64],
    gradient: Vec<[f64; 2]>,
}

impl<'a> MacroProbe<'a> {
    pub fn new(mesh: &'a TriMesh, values: &'a [f64]) -> Result<Self> {
        if values.len() != mesh.n_nodes() {
            return Err(Error::FieldMeshMismatch("macro field does not match the mesh".into()));
        }
        Ok(Self {
            mesh,
            locator: PointLocator::new(mesh),
            values,
            gradient: recovered_gradient(mesh, values),
        })
    }

    fn locate(&self, x: [f64; 2]) -> Result<([usize; 3], [f64; 3])> {
        let (t, lam) = self
            .locator
            .locate(x)
            .ok_or_else(|| Error::InvalidData(format!("point {x:?} outside the macroscopic mesh")))?;
        Ok((self.mesh.triangles()[t], lam))
    }

    pub fn value(&self, x: [f64; 2]) -> Result<f64> {
        let (tri, lam) = self.locate(x)?;
        Ok((0..3).map(|k| lam[k] * self.values[tri[k]]).sum())
    }

    pub fn gradient(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let (tri, lam) = self.locate(x)?;
        let mut g = [0.0; 2];
        for k in 0..3 {
            g[0] += lam[k] * self.gradient[tri[k]][0];
            g[1] += lam[k] * self.gradient[tri[k]][1];
        }
        Ok(g)
    }
}

/// Data for comparing a pore-scale potential with its two-scale approximation.
pub struct CorrectorInputs<'a> {
    pub micro_mesh: &'a TriMesh,
    /// Pore-scale potential, already rescaled to the macroscopic normalisation.
    pub micro_potential: &'a [f64],
    pub domain: &'a PerforatedDomain,
    /// Unit-cell mesh and the scalar cell solutions on it.
    pub cell_mesh: &'a TriMesh,
    pub cell_solutions: &'a ScalarCellSolutions,
    pub macro_value: &'a dyn Fn([f64; 2]) -> Result<f64>,
    pub macro_gradient: &'a dyn Fn([f64; 2]) -> Result<[f64; 2]>,
    /// Compare modulo constants (potentials normalised by a mean condition).
    pub remove_mean: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrectorErrors {
    /// `‖u_ε − u₀‖` over the perforated domain.
    pub plain: f64,
    /// `‖u_ε − u₀ − ε Σ_j φ_j(x/ε) ∂_j u₀‖`.
    pub enhanced: f64,
    /// `‖u_ε‖`, for relative figures.
    pub norm: f64,
}

impl CorrectorErrors {
    pub fn improved(&self) -> bool {
        self.enhanced <= self.plain
    }
}

/// L² errors of the plain and the first-order corrected two-scale approximation.
pub fn corrector_enhanced_error(inputs: &CorrectorInputs<'_>) -> Result<CorrectorErrors> {
    let mesh = inputs.micro_mesh;
    let u = inputs.micro_potential;
    if u.len() != mesh.n_nodes() {
        return Err(Error::FieldMeshMismatch("micro potential does not match the mesh".into()));
    }
    let eps = inputs.domain.eps;
    let corrector = CellCorrector::new(inputs.cell_mesh, inputs.cell_solutions);
    let mut plain = Vec::with_capacity(u.len());
    let mut enhanced = Vec::with_capacity(u.len());
    for (i, &x) in mesh.nodes().iter().enumerate() {
        let d = u[i] - (inputs.macro_value)(x)?;
        let cell = inputs.domain.cell_of(x);
        let phi = corrector.eval(inputs.domain.cell_coordinate(x, cell))?;
        let g = (inputs.macro_gradient)(x)?;
        plain.push(d);
        enhanced.push(d - eps * (phi[0] * g[0] + phi[1] * g[1]));
    }
    if inputs.remove_mean {
        let w = lumped_mass(mesh);
        let area: f64 = w.iter().sum();
        for v in [&mut plain, &mut enhanced] {
            let mean = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / area;
            v.iter_mut().for_each(|a| *a -= mean);
        }
    }
    Ok(CorrectorErrors {
        plain: l2_norm_sq_p1(mesh, &plain).sqrt(),
        enhanced: l2_norm_sq_p1(mesh, &enhanced).sqrt(),
        norm: l2_norm_sq_p1(mesh, u).sqrt(),
    })
}
