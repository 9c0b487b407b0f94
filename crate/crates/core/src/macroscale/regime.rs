use crate::error::{Error, Result};

/// Boundary condition of the pore-scale potential on the solid surface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryCondition {
    /// Prescribed surface charge `σ`.
    Neumann { sigma: f64 },
    /// Prescribed surface potential `Φ_D`.
    Dirichlet { phi_d: f64 },
}

/// Scaling exponents of the Poisson operator (α), the electrostatic Stokes forcing (β) and
/// the Nernst–Planck drift (γ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingRegime {
    pub bc: BoundaryCondition,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PotentialModel {
    EllipticPoisson,
    AlgebraicLocal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DarcyForcing {
    WithElectrostatic,
    Plain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NpDrift {
    WithDrift,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MacroModelClass {
    pub potential: PotentialModel,
    pub darcy_forcing: DarcyForcing,
    pub np_drift: NpDrift,
}

impl MacroModelClass {
    /// True when potential, flow and transport are only coupled one way.
    pub fn is_decoupled(&self) -> bool {
        self.darcy_forcing == DarcyForcing::Plain && self.np_drift == NpDrift::None
    }
}

/// Exponents closer than this are treated as equal.
const EXPONENT_TOL: f64 = 1e-12;

impl ScalingRegime {
    pub fn neumann(sigma: f64, alpha: f64, beta: f64, gamma: f64) -> Self {
        Self {
            bc: BoundaryCondition::Neumann { sigma },
            alpha,
            beta,
            gamma,
        }
    }

    pub fn dirichlet(phi_d: f64, alpha: f64, beta: f64, gamma: f64) -> Self {
        Self {
            bc: BoundaryCondition::Dirichlet { phi_d },
            alpha,
            beta,
            gamma,
        }
    }

    pub fn is_neumann(&self) -> bool {
        matches!(self.bc, BoundaryCondition::Neumann { .. })
    }

    pub fn sigma(&self) -> f64 {
        match self.bc {
            BoundaryCondition::Neumann { sigma } => sigma,
            BoundaryCondition::Dirichlet { .. } => 0.0,
        }
    }

    pub fn phi_d(&self) -> f64 {
        match self.bc {
            BoundaryCondition::Dirichlet { phi_d } => phi_d,
            BoundaryCondition::Neumann { .. } => 0.0,
        }
    }
}

/// Selects the limit model for a scaling regime, or rejects regimes outside the range where
/// the limit is known.
pub fn classify_regime(regime: &ScalingRegime) -> Result<MacroModelClass> {
    let ScalingRegime { alpha, beta, gamma, .. } = *regime;
    if ![alpha, beta, gamma].iter().all(|v| v.is_finite()) {
        return Err(Error::InadmissibleScaling(format!(
            "non-finite exponents (α, β, γ) = ({alpha}, {beta}, {gamma})"
        )));
    }
    let shift = match regime.bc {
        BoundaryCondition::Neumann { .. } => 0.0,
        BoundaryCondition::Dirichlet { .. } => 1.0,
    };
    let (db, dg) = (beta - alpha + shift, gamma - alpha + shift);
    if db < -EXPONENT_TOL || dg < -EXPONENT_TOL {
        let bc = if shift == 0.0 { "Neumann" } else { "Dirichlet" };
        return Err(Error::InadmissibleScaling(format!(
            "{bc} regime needs β − α + {shift} ≥ 0 and γ − α + {shift} ≥ 0, got {db} and {dg}"
        )));
    }
    Ok(match regime.bc {
        BoundaryCondition::Neumann { .. } => MacroModelClass {
            potential: PotentialModel::EllipticPoisson,
            darcy_forcing: if (beta - alpha).abs() <= EXPONENT_TOL {
                DarcyForcing::WithElectrostatic
            } else {
                DarcyForcing::Plain
            },
            np_drift: if (gamma - alpha).abs() <= EXPONENT_TOL {
                NpDrift::WithDrift
            } else {
                NpDrift::None
            },
        },
        BoundaryCondition::Dirichlet { .. } => MacroModelClass {
            potential: PotentialModel::AlgebraicLocal,
            darcy_forcing: DarcyForcing::Plain,
            np_drift: NpDrift::None,
        },
    })
}
