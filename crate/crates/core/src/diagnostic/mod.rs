//! The `V_n` statistic, its null approximation, the quantitative test,
//! the relative-difference stopping rule and the efficiency measure.

mod cmatrix;
mod moment;
mod monitor;
mod null;
mod sigma;
mod statistic;

pub use cmatrix::{build_c_matrix, build_c_matrix_with_z, CMode};
pub use moment::{abs_z2m1_cubed_moment, adaptive_simpson};
pub use monitor::{
    efficiency_measure, relative_difference, relative_difference_monitor, Checkpoint, DiagnosticSeries, MonitorDecision,
};
pub use null::{null_approximation, null_approximation_diagonal, NullApproximation, LYAPUNOV_STATE_CAP};
pub use sigma::{
    empirical_stay_probabilities, reversible_plugin_kernel, sigma_analytic_mb, sigma_full_analytic, sigma_mb_diagonal,
    sigma_mb_plugin, sigma_plugin, transition_counts, SigmaEstimate, DEFAULT_LAG_CAP, PLUGIN_STATE_CAP, TAIL_WARNING,
};
pub use statistic::{compute_vn, tempered_energies, VnValue, WeightFunctionState};
pub use test::{decide, stationarity_test, Decision, TestOutcome};
