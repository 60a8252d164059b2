use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Whether the truncated-normal proposal includes the grid-cell Hastings ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HastingsCorrection {
    /// Forward/reverse proposal masses over the rounded grid cells enter the acceptance ratio.
    Corrected,
    /// Plain Metropolis ratio, as if the rounded proposal were symmetric.
    Uncorrected,
}

/// How the next state is proposed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProposalSpec<S> {
    /// Joint move drawn uniformly from a cube of side `width` around the current point, rounded to the grid.
    UniformCube { width: S },
    /// Single-coordinate normal move truncated to the coordinate bounds, rounded to the grid.
    TruncatedNormal { sd: S, correction: HastingsCorrection },
    /// Single-coordinate slice sampling with stepping out and shrinkage.
    Slice { interval: S, max_steps: Option<usize> },
}

impl<S: Scalar> ProposalSpec<S> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSampler(m));
        match *self {
            ProposalSpec::UniformCube { width } if !(width > S::zero()) => {
                bad(format!("cube width {width} must be > 0"))
            }
            ProposalSpec::TruncatedNormal { sd, .. } if !(sd > S::zero()) => bad(format!("sd {sd} must be > 0")),
            ProposalSpec::Slice { interval, .. } if !(interval > S::zero()) => {
                bad(format!("initial interval {interval} must be > 0"))
            }
            ProposalSpec::Slice { max_steps: Some(0), .. } => bad("step limit must be >= 1".into()),
            _ => Ok(()),
        }
    }

    /// True for proposals that update one coordinate at a time.
    pub fn is_coordinatewise(&self) -> bool {
        !matches!(self, ProposalSpec::UniformCube { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            ProposalSpec::UniformCube { .. } => "uniform-cube",
            ProposalSpec::TruncatedNormal { correction: HastingsCorrection::Corrected, .. } => "truncated-normal",
            ProposalSpec::TruncatedNormal { .. } => "truncated-normal-uncorrected",
            ProposalSpec::Slice { .. } => "slice",
        }
    }
}

/// A proposal plus the number of single updates that make up one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig<S> {
    pub proposal: ProposalSpec<S>,
    pub updates_per_iteration: usize,
}

impl<S: Scalar> SamplerConfig<S> {
    pub fn new(proposal: ProposalSpec<S>, updates_per_iteration: usize) -> Result<Self> {
        proposal.validate()?;
        if updates_per_iteration == 0 {
            return Err(Error::InvalidSampler("updates per iteration must be >= 1".into()));
        }
        Ok(SamplerConfig { proposal, updates_per_iteration })
    }

    /// One update per iteration.
    pub fn single(proposal: ProposalSpec<S>) -> Result<Self> {
        Self::new(proposal, 1)
    }
}

/// Current grid point and its (untempered) energy.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState<S> {
    pub point: Vec<usize>,
    pub energy: S,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ProposalSpec::UniformCube { width: 0.0 }.validate().is_err());
        assert!(ProposalSpec::TruncatedNormal { sd: -1.0, correction: HastingsCorrection::Corrected }
            .validate()
            .is_err());
        assert!(ProposalSpec::Slice { interval: 1.0, max_steps: Some(0) }.validate().is_err());
        assert!(ProposalSpec::Slice { interval: 1.0, max_steps: None }.validate().is_ok());
        assert!(SamplerConfig::new(ProposalSpec::UniformCube { width: 1.0 }, 0).is_err());
    }
}
