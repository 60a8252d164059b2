//! Metropolis-Hastings and slice samplers over grid targets.

mod enumerate;
mod mh;
mod proposal;
mod runner;
mod slice;
mod target;

pub use enumerate::{coordinate_kernel, cube_kernel, iteration_kernel, sweep_kernel, ENUMERATION_CAP};
pub use mh::{cube_offset_probability, mh_coordinate_step, mh_cube_step, truncated_normal_cell_probability};
pub use proposal::{ChainState, HastingsCorrection, ProposalSpec, SamplerConfig};
pub use runner::{run_chain, sweep, Projection, Sampler};
pub use slice::{interval_cells, slice_step};
pub use target::{boltzmann, EnergyModel, EnergyTarget, TabulatedEnergy};
