//! Coupled implicit Nernst–Planck step for the two species, shared by the macroscopic and
//! microscopic solvers.

use crate::error::Result;
use crate::fem::{
    assemble_artificial_diffusion, assemble_convection, Drift, PatternLu, SparseMatrix, Tensor2,
    VelocityField,
};
use crate::mesh::TriMesh;

/// Transport data of one species pair for a single implicit step.
#[derive(Clone, Copy, Debug)]
pub struct NpTerms<'a> {
    /// Weight of the time derivative and reaction terms (`|Y_l|` at the macroscale, 1 at the
    /// pore scale).
    pub weight: f64,
    pub velocity: VelocityField<'a>,
    /// Potential driving the drift; `None` disables drift.
    pub potential: Option<&'a [f64]>,
    /// Drift tensor for the positive species; the negative species uses its negative.
    pub drift_coeff: Tensor2,
    /// Isotropic diffusivity for the upwinding threshold; `None` disables upwinding.
    pub upwind_kappa: Option<f64>,
}

/// Builds and solves the implicit-Euler system
///
/// ```text
/// w M_L (c± − c±ₙ)/dt + (A − C±) c± = w M_L R±,   R± = ∓(c⁺ − c⁻)
/// ```
///
/// with lumped mass `M_L`, diffusion stiffness `A` and convection matrices `C±`. Every block
/// column of the operator part sums to zero, so `Σ M_L (c⁺ + c⁻)` is conserved exactly.
pub(crate) fn np_step(
    mesh: &TriMesh,
    lumped: &[f64],
    diffusion: &SparseMatrix,
    terms: &NpTerms<'_>,
    c_old: (&[f64], &[f64]),
    dt: f64,
    lu: &mut PatternLu,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = mesh.n_nodes();
    let drift = |sign: f64| {
        terms.potential.map(|potential| Drift {
            potential,
            coeff: terms.drift_coeff * sign,
        })
    };
    let mut ops = Vec::with_capacity(2);
    for sign in [1.0, -1.0] {
        let c = assemble_convection(mesh, terms.velocity, drift(sign))?;
        let mut op = diffusion.add_scaled(&c, -1.0);
        if let Some(kappa) = terms.upwind_kappa {
            let extra = assemble_artificial_diffusion(mesh, terms.velocity, drift(sign), kappa)?;
            op = op.add_scaled(&extra, 1.0);
        }
        ops.push(op);
    }
    let w = terms.weight;
    let mut t = Vec::with_capacity(2 * ops[0].nnz() + 4 * n);
    for (b, op) in ops.iter().enumerate() {
        let off = b * n;
        t.extend(op.triplets().map(|(i, j, v)| (off + i, off + j, v)));
        for i in 0..n {
            let m = w * lumped[i];
            t.push((off + i, off + i, m / dt + m));
            t.push((off + i, (1 - b) * n + i, -m));
        }
    }
    let system = SparseMatrix::from_triplets(2 * n, 2 * n, &t);
    let mut rhs = Vec::with_capacity(2 * n);
    for c in [c_old.0, c_old.1] {
        rhs.extend((0..n).map(|i| w * lumped[i] / dt * c[i]));
    }
    let x = lu.solve(&system, &rhs)?;
    Ok((x[..n].to_vec(), x[n..].to_vec()))
}

/// Largest nodal change between two concentration pairs.
pub(crate) fn max_change(a: (&[f64], &[f64]), b: (&[f64], &[f64])) -> f64 {
    a.0.iter()
        .zip(b.0)
        .chain(a.1.iter().zip(b.1))
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Controls of the per-step fixed-point coupling shared by both solvers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingOptions {
    /// Stop when successive concentration iterates differ by at most this (max norm).
    pub fp_tol: f64,
    pub max_fp_iters: usize,
    /// Adds streamline artificial diffusion to the transport operator.
    pub upwind: bool,
    /// Keep every `snapshot_stride`-th state (0 keeps only the first and last).
    pub snapshot_stride: usize,
}

impl Default for CouplingOptions {
    fn default() -> Self {
        Self {
            fp_tol: 1e-8,
            max_fp_iters: 25,
            upwind: false,
            snapshot_stride: 0,
        }
    }
}

/// Number of steps and the step actually taken for a horizon `t_end` and requested `dt`.
pub fn time_grid(t_end: f64, dt: f64) -> crate::Result<(usize, f64)> {
    if !(t_end.is_finite() && t_end >= 0.0 && dt.is_finite() && dt > 0.0) {
        return Err(crate::Error::InvalidData(format!("invalid time grid: T = {t_end}, dt = {dt}")));
    }
    let steps = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    Ok((steps, if steps == 0 { dt } else { t_end / steps as f64 }))
}

pub(crate) fn keep_snapshot(step: usize, steps: usize, stride: usize) -> bool {
    step == 0 || step == steps || (stride > 0 && step % stride == 0)
}
