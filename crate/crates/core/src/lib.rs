//! Nonnegative matrix factorization under β-divergences.
//!
//! * [`mu`]: multiplicative updates with a step-halving safeguard for any
//!   weighted sum of normalized β-divergences.
//! * [`scaling`]: reference errors that normalize each objective.
//! * [`robust`]: the min-max (distributionally robust) solver.
//! * [`pareto`]: weighted-sum sweeps.
//! * [`data`], [`eval`]: synthetic data, file formats, initialization and
//!   clustering metrics.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod divergence;
pub mod error;
pub mod eval;
pub mod matrix;
pub mod mu;
pub mod pareto;
pub mod robust;
pub mod scaling;

pub use divergence::{
    beta_div_matrix, beta_div_scalar, max_normalized, raw_divergences, weighted_objective, Beta,
    ObjectiveSet,
};
pub use error::{Error, Result};
pub use matrix::{
    col_sums, matmul, wh_at_support, AsData, DataMatrix, DataRef, DenseMatrix, FactorPair,
    SparseMatrix, EPS_FLOOR,
};
pub use mu::{
    grad_split_h, grad_split_h_weighted, mu_step_h, mu_step_w, solve_weighted, MuStep,
    SolveTrace, SolverConfig, TraceRow,
};
pub use pareto::{sweep, sweep_weights, ParetoPoint, Sweep};
pub use robust::{lambda_update, solve_dr, RobustSolution};
pub use scaling::{build_objective_set, compute_reference_errors, ReferenceErrors};
