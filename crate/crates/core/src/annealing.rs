//! Simulated annealing with the relative-difference monitor deciding when
//! each temperature level has equilibrated.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::Rng;

use crate::chain::{EmpiricalCounts, StateIndex};
use crate::diagnostic::{
    compute_vn, relative_difference_monitor, tempered_energies, DiagnosticSeries, MonitorDecision,
};
use crate::error::{Error, Result};
use crate::samplers::{EnergyTarget, Sampler, SamplerConfig, TabulatedEnergy};
use crate::scalar::Scalar;

/// Geometric schedule `T_k = t0 * ratio^k`, `k = 0..levels`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoolingSchedule<S> {
    t0: S,
    ratio: S,
    levels: usize,
}

impl<S: Scalar> CoolingSchedule<S> {
    pub fn new(t0: S, ratio: S, levels: usize) -> Result<Self> {
        if !(t0 > S::zero() && t0.is_finite()) {
            return Err(Error::Domain(format!("initial temperature {t0} must be positive")));
        }
        if !(ratio > S::zero() && ratio < S::one()) {
            return Err(Error::Domain(format!("cooling ratio {ratio} must lie in (0, 1)")));
        }
        if levels == 0 {
            return Err(Error::Domain("need at least one temperature level".into()));
        }
        Ok(CoolingSchedule { t0, ratio, levels })
    }

    pub fn t0(&self) -> S {
        self.t0
    }

    pub fn ratio(&self) -> S {
        self.ratio
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn temperature(&self, k: usize) -> S {
        self.t0 * self.ratio.powi(k as i32)
    }

    pub fn temperatures(&self) -> Vec<S> {
        (0..self.levels).map(|k| self.temperature(k)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealConfig<S> {
    pub schedule: CoolingSchedule<S>,
    /// One configuration for every level, or a single one used throughout.
    pub samplers: Vec<SamplerConfig<S>>,
    /// One value for every level, or a single value used throughout.
    pub epsilon: Vec<S>,
    pub checkpoint: u64,
    pub max_iter_per_level: u64,
}

impl<S: Scalar> AnnealConfig<S> {
    pub fn new(schedule: CoolingSchedule<S>, sampler: SamplerConfig<S>, epsilon: S, checkpoint: u64) -> Self {
        AnnealConfig {
            schedule,
            samplers: vec![sampler],
            epsilon: vec![epsilon],
            checkpoint,
            max_iter_per_level: 100_000,
        }
    }

    fn epsilon_at(&self, k: usize) -> S {
        self.epsilon[k.min(self.epsilon.len() - 1)]
    }

    fn sampler_at(&self, k: usize) -> SamplerConfig<S> {
        self.samplers[k.min(self.samplers.len() - 1)]
    }

    fn validate(&self) -> Result<()> {
        if self.epsilon.is_empty() || self.epsilon.iter().any(|&e| !(e > S::zero())) {
            return Err(Error::Domain("epsilon must be positive".into()));
        }
        if self.epsilon.len() != 1 && self.epsilon.len() != self.schedule.levels {
            return Err(Error::Shape { expected: self.schedule.levels, got: self.epsilon.len() });
        }
        if self.samplers.is_empty() || (self.samplers.len() != 1 && self.samplers.len() != self.schedule.levels) {
            return Err(Error::Shape { expected: self.schedule.levels, got: self.samplers.len() });
        }
        if self.checkpoint == 0 || self.max_iter_per_level == 0 {
            return Err(Error::Domain("checkpoint interval and iteration cap must be positive".into()));
        }
        self.samplers.iter().try_for_each(|c| c.proposal.validate())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult<S> {
    pub temperature: S,
    pub iterations: u64,
    /// Whether the monitor fired before the iteration cap.
    pub equilibrated: bool,
    pub series: DiagnosticSeries<S>,
    pub accepted: u64,
    pub proposals: u64,
    /// Visit counts of the level's iterations.
    pub counts: EmpiricalCounts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealResult<S> {
    pub best_state: StateIndex,
    pub best_point: Vec<usize>,
    pub best_energy: S,
    pub final_point: Vec<usize>,
    pub levels: Vec<LevelResult<S>>,
}

impl<S: Scalar> AnnealResult<S> {
    pub fn total_iterations(&self) -> u64 {
        self.levels.iter().map(|l| l.iterations).sum()
    }

    /// Writes `level_<k>.csv` for every level and `summary.txt` into `dir`.
    pub fn write_outputs(&self, dir: &Path, energy: &TabulatedEnergy<S>) -> std::io::Result<()> {
        use crate::samplers::EnergyModel;
        fs::create_dir_all(dir)?;
        for (k, level) in self.levels.iter().enumerate() {
            let f = fs::File::create(dir.join(format!("level_{k}.csv")))?;
            level.series.write_csv(std::io::BufWriter::new(f))?;
        }
        let mut s = std::io::BufWriter::new(fs::File::create(dir.join("summary.txt"))?);
        let coords: Vec<String> = energy.space().coords(&self.best_point).iter().map(|c| format!("{c}")).collect();
        writeln!(s, "best_state={}", self.best_state)?;
        writeln!(s, "best_coords={}", coords.join(","))?;
        writeln!(s, "best_energy={}", self.best_energy)?;
        writeln!(s, "level,temperature,iterations,equilibrated,acceptance")?;
        for (k, l) in self.levels.iter().enumerate() {
            let rate = if l.proposals == 0 { 0.0 } else { l.accepted as f64 / l.proposals as f64 };
            writeln!(s, "{k},{},{},{},{rate:.4}", l.temperature, l.iterations, l.equilibrated)?;
        }
        s.flush()
    }
}

/// Anneals on a tabulated target from `init`.
///
/// Level `k` samples `exp(-E / T_k)` starting where level `k-1` stopped, with
/// fresh visit counts. Every `checkpoint` iterations `V_n` is evaluated on the
/// level's tempered energies; the level ends when the latest relative
/// difference is below its `epsilon` or after `max_iter_per_level`
/// iterations. The lowest energy seen after any single update is kept.
pub fn anneal<S, R>(
    energy: &TabulatedEnergy<S>,
    init: Vec<usize>,
    config: &AnnealConfig<S>,
    rng: &mut R,
) -> Result<AnnealResult<S>>
where
    S: Scalar,
    R: Rng + ?Sized,
{
    use crate::samplers::EnergyModel;
    config.validate()?;
    let space = energy.space();
    let m = energy.state_count();
    let targets: Vec<EnergyTarget<S, &TabulatedEnergy<S>>> = config
        .schedule
        .temperatures()
        .into_iter()
        .map(|t| EnergyTarget::with_temperature(energy, t))
        .collect::<Result<_>>()?;

    let mut sampler = Sampler::new(&targets[0], config.sampler_at(0), init)?;
    let mut best_point = sampler.state().point.clone();
    let mut best_energy = sampler.state().energy;
    let mut levels = Vec::with_capacity(targets.len());

    for (k, target) in targets.iter().enumerate() {
        if k > 0 {
            sampler.retarget(target);
            sampler.reconfigure(config.sampler_at(k))?;
        }
        let eps = config.epsilon_at(k);
        let level_energies = tempered_energies(energy.energies(), target.temperature());
        let mut counts = EmpiricalCounts::zeros(m);
        let mut series = DiagnosticSeries::new();
        let (acc0, prop0) = (sampler.accepted(), sampler.proposals());
        let mut iterations = 0;
        let mut equilibrated = false;
        while iterations < config.max_iter_per_level {
            sampler.iterate_with(rng, |st| {
                if st.energy < best_energy {
                    best_energy = st.energy;
                    best_point.clone_from(&st.point);
                }
            });
            iterations += 1;
            counts.record(space.linear_index(&sampler.state().point)?);
            if iterations % config.checkpoint == 0 {
                let (vn, _) = compute_vn(&counts, &level_energies)?;
                series.push(iterations, vn)?;
                if relative_difference_monitor(&series, eps)? == MonitorDecision::Stop {
                    equilibrated = true;
                    break;
                }
            }
        }
        levels.push(LevelResult {
            temperature: target.temperature(),
            iterations,
            equilibrated,
            series,
            accepted: sampler.accepted() - acc0,
            proposals: sampler.proposals() - prop0,
            counts,
        });
    }
    Ok(AnnealResult {
        best_state: space.linear_index(&best_point)?,
        best_point,
        best_energy,
        final_point: sampler.state().point.clone(),
        levels,
    })
}

/// Exhaustive minimum over all states; ties go to the smallest index.
pub fn grid_search_minimum<S: Scalar>(energy: &TabulatedEnergy<S>) -> (StateIndex, S) {
    energy
        .energies()
        .iter()
        .enumerate()
        .fold((0, S::infinity()), |best, (i, &e)| if e < best.1 { (i, e) } else { best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::ProposalSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cube(width: f64) -> SamplerConfig<f64> {
        SamplerConfig::single(ProposalSpec::UniformCube { width }).unwrap()
    }

    #[test]
    fn schedule_is_geometric() {
        let s = CoolingSchedule::new(50.0, 0.5, 6).unwrap();
        assert_eq!(s.temperatures(), vec![50.0, 25.0, 12.5, 6.25, 3.125, 1.5625]);
        assert!(CoolingSchedule::new(1.0, 1.0, 3).is_err());
        assert!(CoolingSchedule::new(1.0, 0.5, 0).is_err());
    }

    #[test]
    fn grid_search_ties_and_minimum() {
        assert_eq!(grid_search_minimum(&TabulatedEnergy::line(vec![3.0, 1.0, 2.0]).unwrap()), (1, 1.0));
        assert_eq!(grid_search_minimum(&TabulatedEnergy::line(vec![2.0; 4]).unwrap()).0, 0);
    }

    #[test]
    fn single_mass_state_stops_at_second_checkpoint() {
        let e = TabulatedEnergy::line(vec![f64::INFINITY, 0.0, f64::INFINITY]).unwrap();
        let cfg = AnnealConfig::new(CoolingSchedule::new(4.0, 0.5, 3).unwrap(), cube(3.0), 0.05, 5);
        let r = anneal(&e, vec![1], &cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(r.best_state, 1);
        for l in &r.levels {
            assert_eq!(l.iterations, 10);
            assert!(l.equilibrated);
        }
    }

    #[test]
    fn two_state_cools_into_the_minimum() {
        let e = TabulatedEnergy::line(vec![0.0, 10.0]).unwrap();
        let mut cfg = AnnealConfig::new(CoolingSchedule::new(100.0, 0.1, 4).unwrap(), cube(3.0), 0.05, 25);
        cfg.max_iter_per_level = 4000;
        let r = anneal(&e, vec![1], &cfg, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!((r.best_state, r.best_energy), (0, 0.0));
        let first = &r.levels[0].counts;
        assert!(first.counts().iter().all(|&c| c > 0));
        let last = &r.levels[3].counts;
        assert!(last.counts()[0] as f64 / last.n() as f64 > 0.9);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let e = TabulatedEnergy::line((0..30).map(|i| ((i as f64) * 0.7).sin() * 3.0).collect()).unwrap();
        let cfg = AnnealConfig::new(CoolingSchedule::new(5.0, 0.5, 4).unwrap(), cube(5.0), 0.05, 25);
        let a = anneal(&e, vec![0], &cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = anneal(&e, vec![0], &cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.best_energy, grid_search_minimum(&e).1);
    }
}
