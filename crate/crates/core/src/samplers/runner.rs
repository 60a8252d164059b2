use rand::Rng;

use crate::chain::{ChainTrace, StateIndex, TraceMeta};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::mh::{mh_coordinate_step, mh_cube_step};
use super::proposal::{ChainState, ProposalSpec, SamplerConfig};
use super::slice::slice_step;
use super::target::{EnergyModel, EnergyTarget};

/// What a trace records for each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    /// Linear index of the full grid point.
    Full,
    /// Grid index of a single coordinate.
    Coordinate(usize),
}

impl Projection {
    pub fn state_count<S: Scalar>(&self, space: &crate::chain::GridSpace<S>) -> Result<usize> {
        match *self {
            Projection::Full => space.state_count(),
            Projection::Coordinate(d) if d < space.dims() => Ok(space.points(d)),
            Projection::Coordinate(d) => Err(Error::Shape { expected: space.dims(), got: d }),
        }
    }

    pub fn project<S: Scalar>(&self, space: &crate::chain::GridSpace<S>, point: &[usize]) -> StateIndex {
        match *self {
            Projection::Full => space.linear_index(point).expect("grid point"),
            Projection::Coordinate(d) => point[d],
        }
    }
}

/// A single chain: target, sampler configuration and current state.
#[derive(Debug, Clone)]
pub struct Sampler<'a, S, M> {
    target: &'a EnergyTarget<S, M>,
    config: SamplerConfig<S>,
    state: ChainState<S>,
    next_coord: usize,
    accepted: u64,
    proposals: u64,
}

impl<'a, S: Scalar, M: EnergyModel<S>> Sampler<'a, S, M> {
    pub fn new(target: &'a EnergyTarget<S, M>, config: SamplerConfig<S>, init: Vec<usize>) -> Result<Self> {
        config.proposal.validate()?;
        if !target.space().contains(&init) {
            return Err(Error::InvalidGrid(format!("initial point {init:?} is not on the grid")));
        }
        let energy = target.energy(&init);
        if !energy.is_finite() {
            return Err(Error::Domain(format!("initial point {init:?} has zero mass")));
        }
        Ok(Sampler {
            target,
            config,
            state: ChainState { point: init, energy },
            next_coord: 0,
            accepted: 0,
            proposals: 0,
        })
    }

    pub fn state(&self) -> &ChainState<S> {
        &self.state
    }

    pub fn target(&self) -> &'a EnergyTarget<S, M> {
        self.target
    }

    /// Continues from the current point under a different target (same grid).
    pub fn retarget(&mut self, target: &'a EnergyTarget<S, M>) {
        self.state.energy = target.energy(&self.state.point);
        self.target = target;
    }

    /// Switches proposal settings, keeping the current point.
    pub fn reconfigure(&mut self, config: SamplerConfig<S>) -> Result<()> {
        config.proposal.validate()?;
        self.config = config;
        self.next_coord = 0;
        Ok(())
    }

    pub fn config(&self) -> &SamplerConfig<S> {
        &self.config
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    pub fn proposals(&self) -> u64 {
        self.proposals
    }

    /// One single update: a joint cube move, or one coordinate (cycled in ascending order).
    pub fn update<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let dims = self.target.space().dims();
        let ok = match self.config.proposal {
            ProposalSpec::UniformCube { width } => mh_cube_step(&mut self.state, self.target, width, rng),
            ProposalSpec::TruncatedNormal { sd, correction } => {
                let c = self.next_coord;
                self.next_coord = (c + 1) % dims;
                mh_coordinate_step(&mut self.state, c, self.target, sd, correction, rng)
            }
            ProposalSpec::Slice { interval, max_steps } => {
                let c = self.next_coord;
                self.next_coord = (c + 1) % dims;
                slice_step(&mut self.state, c, self.target, interval, max_steps, rng)
            }
        };
        self.proposals += 1;
        self.accepted += ok as u64;
        ok
    }

    /// Updates every coordinate once in ascending order (one joint move for cube proposals).
    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.next_coord = 0;
        let n = if self.config.proposal.is_coordinatewise() { self.target.space().dims() } else { 1 };
        for _ in 0..n {
            self.update(rng);
        }
    }

    /// `updates_per_iteration` single updates, starting from coordinate 0.
    pub fn iterate<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.iterate_with(rng, |_| {});
    }

    /// Like [`Sampler::iterate`], calling `visit` after every single update.
    pub fn iterate_with<R: Rng + ?Sized>(&mut self, rng: &mut R, mut visit: impl FnMut(&ChainState<S>)) {
        self.next_coord = 0;
        for _ in 0..self.config.updates_per_iteration {
            self.update(rng);
            visit(&self.state);
        }
    }
}

/// One sweep from `point`, returning the new point.
pub fn sweep<S, M, R>(
    point: &[usize],
    target: &EnergyTarget<S, M>,
    proposal: ProposalSpec<S>,
    rng: &mut R,
) -> Result<Vec<usize>>
where
    S: Scalar,
    M: EnergyModel<S>,
    R: Rng + ?Sized,
{
    let mut s = Sampler::new(target, SamplerConfig::single(proposal)?, point.to_vec())?;
    s.sweep(rng);
    Ok(s.state.point)
}

/// Runs `burn_in + iterations` recorded iterations; the first record is `init`.
/// Burn-in is noted on the trace but not removed.
#[allow(clippy::too_many_arguments)]
pub fn run_chain<S, M, R>(
    init: Vec<usize>,
    target: &EnergyTarget<S, M>,
    config: SamplerConfig<S>,
    iterations: usize,
    burn_in: usize,
    projection: Projection,
    seed: u64,
    rng: &mut R,
) -> Result<ChainTrace>
where
    S: Scalar,
    M: EnergyModel<S>,
    R: Rng + ?Sized,
{
    if iterations == 0 {
        return Err(Error::InvalidSampler("need at least one iteration".into()));
    }
    let space = target.space();
    let m = projection.state_count(space)?;
    let mut sampler = Sampler::new(target, config, init)?;
    let total = burn_in + iterations;
    let mut states = Vec::with_capacity(total);
    states.push(projection.project(space, &sampler.state.point));
    for _ in 1..total {
        sampler.iterate(rng);
        states.push(projection.project(space, &sampler.state.point));
    }
    let meta = TraceMeta {
        sampler: config.proposal.label().to_string(),
        seed,
        accepted: sampler.accepted,
        proposals: sampler.proposals,
    };
    ChainTrace::new(states, m, burn_in, meta)
}
