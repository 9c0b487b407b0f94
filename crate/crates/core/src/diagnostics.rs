//! Per-step run diagnostics shared by the macroscopic and pore-scale solvers.

/// One row of run diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    /// Total mass `w ∫(c⁺ + c⁻)`.
    pub mass: f64,
    /// Total charge `w ∫(c⁺ − c⁻)`.
    pub charge: f64,
    pub min_c: f64,
    pub max_c: f64,
    pub fp_iters: usize,
    /// `½ w ∫((c⁺)² + (c⁻)²)`.
    pub energy: f64,
    /// Mean of the potential over the mesh (zero in the Neumann branch).
    pub phi_mean: f64,
    pub p_mean: f64,
    /// Largest weak divergence `|∫ v·∇q|` over P1 test functions.
    pub div_v: f64,
    /// Net Poisson source before projection (Neumann branch; 0 otherwise).
    pub source_residual: f64,
}

pub const CSV_COLUMNS: [&str; 11] = [
    "t",
    "mass",
    "charge",
    "min_c",
    "max_c",
    "fp_iters",
    "energy",
    "phi_mean",
    "p_mean",
    "div_v",
    "source_residual",
];

/// Diagnostics of a complete run, together with the data the invariant suite needs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunDiagnostics {
    pub rows: Vec<DiagnosticsRow>,
    /// Upper bound Λ of the initial data.
    pub lambda: f64,
    /// True when the run started with `c⁺ + c⁻ = 1`, enabling the boundedness check.
    pub volume_additive_start: bool,
    /// True when the potential is normalised to zero mean (Neumann branch).
    pub zero_mean_potential: bool,
}

impl DiagnosticsRow {
    pub fn values(&self) -> [f64; 11] {
        [
            self.t,
            self.mass,
            self.charge,
            self.min_c,
            self.max_c,
            self.fp_iters as f64,
            self.energy,
            self.phi_mean,
            self.p_mean,
            self.div_v,
            self.source_residual,
        ]
    }
}
