//! Finite state spaces, explicit kernels, traces and visit counts.

mod acf;
mod grid;
mod kernel;
mod trace;

pub use acf::autocorrelation;
pub use grid::{GridSpace, StateIndex};
pub use kernel::{
    check_detailed_balance, stationary_distribution, stationary_distribution_capped, BalanceReport, TransitionMatrix,
    DEFAULT_STATIONARY_CAP,
};
pub use trace::{accumulate, read_trace, ChainTrace, EmpiricalCounts, TraceHeader, TraceMeta};
