use crate::diagnostics::RunDiagnostics;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The check does not apply to this run (recorded, never silently dropped).
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub status: CheckStatus,
    /// Worst measured value over the run.
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantReport {
    pub checks: Vec<CheckOutcome>,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl std::fmt::Display for InvariantReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            let status = match c.status {
                CheckStatus::Pass => "PASS",
                CheckStatus::Fail => "FAIL",
                CheckStatus::NotApplicable => "N/A ",
            };
            writeln!(f, "{status} {:<20} value {:.3e}  tolerance {:.1e}", c.name, c.value, c.tolerance)?;
        }
        Ok(())
    }
}

pub const MASS_DRIFT_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-6;
pub const BOUND_TOL: f64 = 1e-6;
pub const ZERO_MEAN_TOL: f64 = 1e-10;
pub const DIVERGENCE_TOL: f64 = 1e-8;

fn check(name: &'static str, value: f64, tolerance: f64, ok: bool) -> CheckOutcome {
    CheckOutcome {
        name,
        status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
        value,
        tolerance,
    }
}

/// Runs the registered checks on a completed run:
///
/// | check | condition |
/// |---|---|
/// | `mass_drift` | `max |m(t) − m(0)| / |m(0)| ≤ 1e-9` |
/// | `positivity` | `min c ≥ −1e-6` |
/// | `boundedness` | `max c ≤ Λ + 1e-6`, runs starting with `c⁺ + c⁻ = 1` only |
/// | `potential_mean` | `|mean Φ| ≤ 1e-10`, zero-mean runs only |
/// | `pressure_mean` | `|mean p| ≤ 1e-10` |
/// | `divergence` | weak divergence `≤ 1e-8` |
/// | `finite` | every recorded value finite |
pub fn run_invariant_suite(diag: &RunDiagnostics) -> Result<InvariantReport> {
    let rows = &diag.rows;
    let Some(first) = rows.first() else {
        return Err(Error::MalformedDiagnostics("no diagnostics rows".into()));
    };
    if rows.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::MalformedDiagnostics("time column is not strictly increasing".into()));
    }
    let max_of = |f: fn(&crate::diagnostics::DiagnosticsRow) -> f64| rows.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    let scale = first.mass.abs();
    let drift = rows
        .iter()
        .map(|r| (r.mass - first.mass).abs() / if scale > 0.0 { scale } else { 1.0 })
        .fold(0.0, f64::max);
    let min_c = rows.iter().map(|r| r.min_c).fold(f64::INFINITY, f64::min);
    let max_c = max_of(|r| r.max_c);
    let phi_mean = max_of(|r| r.phi_mean.abs());
    let p_mean = max_of(|r| r.p_mean.abs());
    let div = max_of(|r| r.div_v);
    let finite = rows.iter().all(|r| r.values().iter().all(|v| v.is_finite()));

    let mut checks = vec![
        check("mass_drift", drift, MASS_DRIFT_TOL, drift <= MASS_DRIFT_TOL),
        check("positivity", min_c, -POSITIVITY_TOL, min_c >= -POSITIVITY_TOL),
    ];
    let bound = diag.lambda + BOUND_TOL;
    checks.push(if diag.volume_additive_start {
        check("boundedness", max_c, bound, max_c <= bound)
    } else {
        CheckOutcome {
            name: "boundedness",
            status: CheckStatus::NotApplicable,
            value: max_c,
            tolerance: bound,
        }
    });
    checks.push(if diag.zero_mean_potential {
        check("potential_mean", phi_mean, ZERO_MEAN_TOL, phi_mean <= ZERO_MEAN_TOL)
    } else {
        CheckOutcome {
            name: "potential_mean",
            status: CheckStatus::NotApplicable,
            value: phi_mean,
            tolerance: ZERO_MEAN_TOL,
        }
    });
    checks.push(check("pressure_mean", p_mean, ZERO_MEAN_TOL, p_mean <= ZERO_MEAN_TOL));
    checks.push(check("divergence", div, DIVERGENCE_TOL, div <= DIVERGENCE_TOL));
    checks.push(check("finite", if finite { 0.0 } else { 1.0 }, 0.0, finite));
    Ok(InvariantReport { checks })
}
