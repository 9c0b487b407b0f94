use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Solid inclusion of the periodic unit cell `Y = (0,1)^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Inclusion {
    Disk { center: [f64; 2], radius: f64 },
    None,
}

/// Unit cell with (at most) one solid inclusion and a target mesh size in cell units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitCellGeometry {
    pub inclusion: Inclusion,
    pub target_h: f64,
}

impl UnitCellGeometry {
    pub fn disk(center: [f64; 2], radius: f64, target_h: f64) -> Self {
        Self {
            inclusion: Inclusion::Disk { center, radius },
            target_h,
        }
    }

    pub fn centered_disk(radius: f64, target_h: f64) -> Self {
        Self::disk([0.5, 0.5], radius, target_h)
    }

    pub fn empty(target_h: f64) -> Self {
        Self {
            inclusion: Inclusion::None,
            target_h,
        }
    }

    pub fn with_target_h(self, target_h: f64) -> Self {
        Self { target_h, ..self }
    }

    pub fn has_inclusion(&self) -> bool {
        matches!(self.inclusion, Inclusion::Disk { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_h.is_finite() && self.target_h > 0.0) {
            return Err(Error::MeshGenerationFailure(format!(
                "target_h must be positive, got {}",
                self.target_h
            )));
        }
        if let Inclusion::Disk { center, radius } = self.inclusion {
            if !(radius.is_finite() && radius > 0.0) || !center.iter().all(|c| c.is_finite()) {
                return Err(Error::MeshGenerationFailure(format!(
                    "invalid disk: center {center:?}, radius {radius}"
                )));
            }
            for c in center {
                if c - radius <= 0.0 || c + radius >= 1.0 {
                    return Err(Error::InclusionTouchesBoundary(format!(
                        "disk at {center:?} with radius {radius} is not strictly inside (0,1)^2"
                    )));
                }
            }
            if self.target_h > 0.5 * radius {
                return Err(Error::MeshGenerationFailure(format!(
                    "target_h = {} does not resolve the inclusion boundary (need h <= r/2 = {})",
                    self.target_h,
                    0.5 * radius
                )));
            }
        }
        Ok(())
    }

    /// Analytic fluid fraction `|Y_l|`.
    pub fn porosity(&self) -> f64 {
        match self.inclusion {
            Inclusion::Disk { radius, .. } => 1.0 - PI * radius * radius,
            Inclusion::None => 1.0,
        }
    }

    /// Analytic length of the fluid-solid interface `|Γ|`.
    pub fn interface_length(&self) -> f64 {
        match self.inclusion {
            Inclusion::Disk { radius, .. } => 2.0 * PI * radius,
            Inclusion::None => 0.0,
        }
    }

    /// True when the cell point lies in the closure of the fluid part.
    pub fn is_fluid(&self, y: [f64; 2]) -> bool {
        match self.inclusion {
            Inclusion::Disk { center, radius } => {
                let dx = y[0] - center[0];
                let dy = y[1] - center[1];
                dx * dx + dy * dy >= radius * radius * (1.0 - 1e-9)
            }
            Inclusion::None => true,
        }
    }
}

/// Axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub origin: [f64; 2],
    pub size: [f64; 2],
}

impl Rect {
    pub fn unit_square() -> Self {
        Self {
            origin: [0.0, 0.0],
            size: [1.0, 1.0],
        }
    }

    pub fn area(&self) -> f64 {
        self.size[0] * self.size[1]
    }
}

/// The ε-tiled macroscopic domain `Ω_ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerforatedDomain {
    pub outer: Rect,
    pub eps: f64,
    pub cell: UnitCellGeometry,
}

impl PerforatedDomain {
    pub fn new(outer: Rect, eps: f64, cell: UnitCellGeometry) -> Result<Self> {
        let dom = Self { outer, eps, cell };
        dom.cells_per_side()?;
        Ok(dom)
    }

    /// Number of ε-cells along x and y; fails unless ε divides both side lengths.
    pub fn cells_per_side(&self) -> Result<[usize; 2]> {
        if !(self.eps.is_finite() && self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::InvalidData(format!(
                "eps must lie in (0, 1], got {}",
                self.eps
            )));
        }
        let mut counts = [0usize; 2];
        for (d, count) in counts.iter_mut().enumerate() {
            let len = self.outer.size[d];
            if !(len.is_finite() && len > 0.0) {
                return Err(Error::InvalidData(format!("domain side {d} has length {len}")));
            }
            let k = len / self.eps;
            let rounded = k.round();
            if rounded < 1.0 || (k - rounded).abs() > 1e-9 * rounded.max(1.0) {
                return Err(Error::InvalidData(format!(
                    "eps = {} does not divide side length {len}",
                    self.eps
                )));
            }
            *count = rounded as usize;
        }
        Ok(counts)
    }

    /// Index of the ε-cell containing `x` (clamped onto the domain).
    pub fn cell_of(&self, x: [f64; 2]) -> [usize; 2] {
        let n = self.cells_per_side().unwrap_or([1, 1]);
        let mut idx = [0; 2];
        for d in 0..2 {
            let s = ((x[d] - self.outer.origin[d]) / self.eps).floor();
            idx[d] = (s.max(0.0) as usize).min(n[d] - 1);
        }
        idx
    }

    /// Cell coordinate `y = x/ε - floor(x/ε)` relative to a given cell.
    pub fn cell_coordinate(&self, x: [f64; 2], cell: [usize; 2]) -> [f64; 2] {
        let mut y = [0.0; 2];
        for d in 0..2 {
            y[d] = ((x[d] - self.outer.origin[d]) / self.eps - cell[d] as f64).clamp(0.0, 1.0);
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_too_large_touches_boundary() {
        let g = UnitCellGeometry::centered_disk(0.55, 0.05);
        assert!(matches!(g.validate(), Err(Error::InclusionTouchesBoundary(_))));
    }

    #[test]
    fn off_center_disk_touching_side_is_rejected() {
        let g = UnitCellGeometry::disk([0.2, 0.5], 0.2, 0.05);
        assert!(matches!(g.validate(), Err(Error::InclusionTouchesBoundary(_))));
    }

    #[test]
    fn analytic_quantities() {
        let g = UnitCellGeometry::centered_disk(0.25, 0.05);
        assert!((g.porosity() - 0.803_650_459_9).abs() < 1e-9);
        assert!((g.interface_length() - 1.570_796_326_8).abs() < 1e-9);
        assert_eq!(UnitCellGeometry::empty(0.1).porosity(), 1.0);
    }

    #[test]
    fn eps_must_divide_domain() {
        let cell = UnitCellGeometry::empty(0.1);
        assert!(PerforatedDomain::new(Rect::unit_square(), 0.3, cell).is_err());
        let d = PerforatedDomain::new(Rect::unit_square(), 0.25, cell).unwrap();
        assert_eq!(d.cells_per_side().unwrap(), [4, 4]);
        assert_eq!(d.cell_of([0.99, 0.26]), [3, 1]);
        assert_eq!(d.cell_of([1.0, 1.0]), [3, 3]);
    }
}
