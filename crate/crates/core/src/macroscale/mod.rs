//! Regime classification and the homogenized (macroscopic) transient solver.

mod regime;
mod run;
mod solve;

pub use regime::{
    classify_regime, BoundaryCondition, DarcyForcing, MacroModelClass, NpDrift, PotentialModel, ScalingRegime,
};
pub use run::{run_macro, MacroProblem, MacroRun};
pub use solve::{
    electrostatic_forcing, eval_macro_potential_dirichlet, solve_darcy_with_forcing, solve_macro_darcy,
    solve_macro_poisson, step_macro_np, weak_divergence, DarcySolution, MacroOperators, MacroState,
    COMPATIBILITY_TOL,
};
