//! Invariant checks on run diagnostics and the ε-convergence harness.

mod corrector;
mod invariants;
mod study;

pub use corrector::{corrector_enhanced_error, CorrectorErrors, CorrectorInputs, MacroProbe};
pub use invariants::{run_invariant_suite, CheckOutcome, CheckStatus, InvariantReport};
pub use study::{run_convergence_study, ConvergenceStudy, StudyConfig, StudyRow, ERROR_FIELDS, ERROR_FLOOR};
