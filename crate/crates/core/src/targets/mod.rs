//! Experiment targets: the changepoint posterior, the funnel, and small
//! analytic targets with known distributions.

mod changepoint;
mod funnel;
mod toy;

pub use changepoint::{
    changepoint_energy, simulate_changepoint, ChangepointDataset, ChangepointModel, TauLaw, BOUND, N_OBS, N_PATIENTS,
    SHIFT,
};
pub use funnel::{funnel_energy, FunnelModel, FunnelSpec, START_QUANTILES};
pub use toy::{three_state, toy_targets, two_well, uniform, ToyTarget};
