//! Initial concentration data.

use crate::error::{Error, Result};
use crate::fem::lumped_mass;
use crate::mesh::TriMesh;

/// Gaussian bump `exp(−|x − centre|² / width²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Blob {
    pub center: [f64; 2],
    pub width: f64,
}

impl Blob {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let d0 = x[0] - self.center[0];
        let d1 = x[1] - self.center[1];
        (-(d0 * d0 + d1 * d1) / (self.width * self.width)).exp()
    }
}

/// Analytic initial concentrations.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialData {
    /// `c⁺ = a`, `c⁻ = b`.
    Uniform { c_plus: f64, c_minus: f64 },
    /// `c± = base ± amplitude (g₁ − g₂)`: a dipole of two Gaussian blobs, with
    /// `c⁺ + c⁻ = 2·base`.
    ChargedBlob {
        base: f64,
        amplitude: f64,
        positive: Blob,
        negative: Blob,
    },
    /// Same profile for both species: `c± = base + amplitude·g` (no charge).
    NeutralBlob { base: f64, amplitude: f64, blob: Blob },
}

impl InitialData {
    /// Default charged dipole on the unit square, `c⁺ + c⁻ = 1`.
    pub fn charged_dipole() -> Self {
        InitialData::ChargedBlob {
            base: 0.5,
            amplitude: 0.2,
            positive: Blob {
                center: [0.35, 0.4],
                width: 0.15,
            },
            negative: Blob {
                center: [0.65, 0.6],
                width: 0.15,
            },
        }
    }

    pub fn eval(&self, x: [f64; 2]) -> (f64, f64) {
        match self {
            InitialData::Uniform { c_plus, c_minus } => (*c_plus, *c_minus),
            InitialData::ChargedBlob {
                base,
                amplitude,
                positive,
                negative,
            } => {
                let q = amplitude * (positive.eval(x) - negative.eval(x));
                (base + q, base - q)
            }
            InitialData::NeutralBlob {
                base,
                amplitude,
                blob,
            } => {
                let c = base + amplitude * blob.eval(x);
                (c, c)
            }
        }
    }

    /// True when `c⁺ + c⁻ = 1` holds identically.
    pub fn is_volume_additive(&self) -> bool {
        match self {
            InitialData::Uniform { c_plus, c_minus } => (c_plus + c_minus - 1.0).abs() < 1e-14,
            InitialData::ChargedBlob { base, .. } => (2.0 * base - 1.0).abs() < 1e-14,
            InitialData::NeutralBlob { .. } => false,
        }
    }

    /// Nodal interpolant on a mesh.
    pub fn interpolate(&self, mesh: &TriMesh) -> (Vec<f64>, Vec<f64>) {
        mesh.nodes().iter().map(|&x| self.eval(x)).unzip()
    }
}

/// Shifts `c⁺` down and `c⁻` up by the same constant so that `∫(c⁺ − c⁻) = target`, which
/// preserves `c⁺ + c⁻`.
pub fn balance_charge(mesh: &TriMesh, c_plus: &mut [f64], c_minus: &mut [f64], target: f64) {
    let m = lumped_mass(mesh);
    let area: f64 = m.iter().sum();
    let q: f64 = m.iter().zip(c_plus.iter().zip(c_minus.iter())).map(|(w, (p, n))| w * (p - n)).sum();
    let shift = 0.5 * (q - target) / area;
    c_plus.iter_mut().for_each(|c| *c -= shift);
    c_minus.iter_mut().for_each(|c| *c += shift);
}

/// Checks `0 ≤ c± ≤ Λ` nodewise.
pub fn check_initial_bounds(c_plus: &[f64], c_minus: &[f64], lambda: f64) -> Result<()> {
    for (name, c) in [("c_plus", c_plus), ("c_minus", c_minus)] {
        if let Some(v) = c.iter().find(|v| !(**v >= 0.0 && **v <= lambda)) {
            return Err(Error::InvalidData(format!(
                "initial {name} value {v} outside [0, {lambda}]"
            )));
        }
    }
    Ok(())
}
