//! Detailed-balance convergence diagnostics for MCMC on finite grids.
//!
//! A chain targeting `pi ∝ exp(-E)` is in equilibrium when the weights
//! `f_i = pihat_i / exp(-E_i)` are flat. The statistic
//! `V_n = (n/m) sum_i (f_i - mean f)^2` measures how far they are from flat;
//! [`diagnostic`] turns it into a quantitative test and a relative-difference
//! stopping rule, [`samplers`] provides exactly enumerable Metropolis-Hastings
//! and slice kernels on grids, [`annealing`] uses the stopping rule per
//! temperature level, and [`targets`] holds the experiment distributions.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`.

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annealing;
pub mod chain;
pub mod diagnostic;
pub mod error;
pub mod linalg;
pub mod samplers;
pub mod scalar;
pub mod special;
pub mod targets;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default floating point type.
pub type Real = f64;
pub type Grid = chain::GridSpace<Real>;
pub type Kernel = chain::TransitionMatrix<Real>;
pub type DenseMatrix = linalg::Matrix<Real>;
pub type Tabulated = samplers::TabulatedEnergy<Real>;
pub type Proposal = samplers::ProposalSpec<Real>;
pub type Series = diagnostic::DiagnosticSeries<Real>;
pub type Null = diagnostic::NullApproximation<Real>;
pub type Schedule = annealing::CoolingSchedule<Real>;
pub type Funnel = targets::FunnelModel<Real>;
pub type Changepoint = targets::ChangepointModel<Real>;
