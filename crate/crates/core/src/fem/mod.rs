//! Finite-element core: P1/P2 assembly, constraints, linear solvers and time stepping.

mod assemble;
mod constraints;
mod element;
mod p2;
mod quadrature;
mod solve;
mod sparse;
mod stokes;
mod tensor;

pub use assemble::{
    assemble_artificial_diffusion, assemble_boundary_load, assemble_convection, assemble_load,
    assemble_mass, assemble_stiffness, assemble_stiffness_with, integrate_p1, l2_error_p1, l2_norm_sq_p1, recovered_gradient,
    lumped_mass, p1_cell_gradients, Drift, VelocityField, MIN_ELEMENT_AREA,
};
pub use constraints::{
    apply_dirichlet, apply_periodic, apply_zero_mean, solve_constrained, ConstrainedSolver,
    DirichletSystem, DofMap, ScalarConstraints,
};
pub use element::{p1_gradients, p2_gradients, p2_values};
pub use p2::P2Dofs;
pub use quadrature::{map_point, TriangleRule};
pub use solve::{
    direct_threshold, set_direct_threshold, solve_spd, step_implicit, CgOutcome, Factorization,
    LinearSolverKind, PatternLu, DEFAULT_TOL,
};
pub use sparse::{dot, norm2, SparseMatrix};
pub use stokes::{
    integrate_p2, p2_cell_means, p2_gradient_inner, solve_stokes, Forcing, StokesOptions,
    StokesSolution, StokesSystem,
};
pub use tensor::Tensor2;
