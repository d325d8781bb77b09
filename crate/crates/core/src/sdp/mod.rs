//! Dense primal-dual interior-point solver for conic programs with one
//! positive semidefinite block and one nonnegative block.

mod presolve;
mod problem;
pub mod sdpa;
mod solver;

pub use presolve::{presolve, presolve_with_tol, Presolved, RemovedRow, DEFAULT_RANK_TOL};
pub use problem::{Constraint, SdpProblem, SparseSym};
pub use solver::{
    primal_residual_vector, residuals, solve, Candidate, IterationLog, Residuals, SdpSolution,
    SolverConfig, SolverStatus,
};
