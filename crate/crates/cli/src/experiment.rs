//! Experiment orchestration behind the CLI verbs.
//!
//! Every output is a pure function of the configuration and seed: each chain
//! draws from its own ChaCha stream, parallel chains advance in lockstep
//! between checkpoints and are merged in chain order, and no file records
//! timings.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dbconv::annealing::{anneal, AnnealConfig, AnnealResult, CoolingSchedule};
use dbconv::chain::{ChainTrace, EmpiricalCounts, StateIndex, TraceMeta};
use dbconv::diagnostic::{
    compute_vn, decide, null_approximation_diagonal, relative_difference_monitor, sigma_full_analytic, sigma_mb_plugin,
    sigma_plugin, stationarity_test, Decision, DiagnosticSeries, MonitorDecision, TestOutcome,
};
use dbconv::samplers::{
    boltzmann, iteration_kernel, EnergyModel, EnergyTarget, Projection, Sampler, SamplerConfig, TabulatedEnergy,
};
use dbconv::targets::{
    simulate_changepoint, three_state, two_well, uniform, ChangepointDataset, ChangepointModel, FunnelModel,
    FunnelSpec, TauLaw,
};

use crate::config::{
    ConfigError, DataSource, Reference, RunConfig, RunMode, SamplerSpec, SigmaMode, StartRule, TargetSpec, ToyName,
};
use crate::histogram::{emit_histogram, Histogram};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verb {
    Run,
    Compare,
    Anneal,
    Test,
}

/// How a completed experiment ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    /// An iteration cap was reached before the stopping rule or test was satisfied.
    NotConverged,
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Numerical(dbconv::Error),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Numerical(e) => write!(f, "numerical error: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<dbconv::Error> for CliError {
    fn from(e: dbconv::Error) -> Self {
        CliError::Numerical(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn config_err(message: impl Into<String>) -> CliError {
    CliError::Config(ConfigError::new(message))
}

/// Random stream `k` of `seed`.
pub fn stream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// Start points come from streams above this offset so they never share
/// draws with a chain.
const INIT_STREAM: u64 = 1 << 32;

pub enum Target {
    Funnel(FunnelModel<f64>),
    Table(TabulatedEnergy<f64>),
}

/// Builds the target for repetition `rep`; simulated changepoint data use `data_seed + rep`.
pub fn build_target(spec: &TargetSpec, rep: u64) -> Result<Target> {
    let bad = |e: dbconv::Error| config_err(format!("invalid target: {e}"));
    Ok(match spec {
        &TargetSpec::Funnel { x_sd, dims, bound, width } => {
            Target::Funnel(FunnelModel::new(FunnelSpec { x_sd, dims, bound, width }).map_err(bad)?)
        }
        TargetSpec::Changepoint { data, width } => {
            let dataset = match data {
                DataSource::File(path) => {
                    let f =
                        fs::File::open(path).map_err(|e| config_err(format!("cannot open {}: {e}", path.display())))?;
                    ChangepointDataset::read_from(io::BufReader::new(f))
                        .map_err(|e| config_err(format!("{}: {e}", path.display())))?
                }
                &DataSource::Simulated { seed, patients, observations } => {
                    simulate_changepoint(seed.wrapping_add(rep), patients, observations, TauLaw::Interior)
                        .map_err(bad)?
                }
            };
            let model = ChangepointModel::new(&dataset, *width).map_err(bad)?;
            Target::Table(TabulatedEnergy::from_model(&model).map_err(bad)?)
        }
        TargetSpec::Toy { name } => {
            let t = match *name {
                ToyName::Uniform(m) => uniform(m),
                ToyName::TwoWell(m, barrier) => two_well(m, barrier),
                ToyName::ThreeState => three_state(),
            }
            .map_err(bad)?;
            Target::Table(t.energy)
        }
    })
}

/// What the diagnostic looks at: the projected state and its reference energies.
struct View {
    projection: Projection,
    energies: Vec<f64>,
    pi: Vec<f64>,
}

impl View {
    fn of(target: &Target) -> Self {
        match target {
            // X-marginal occupancy against the grid-restricted normal
            Target::Funnel(m) => {
                let energies = m.x_marginal_energies();
                let pi = energies.iter().map(|e| (-e).exp()).collect();
                View { projection: Projection::Coordinate(0), energies, pi }
            }
            Target::Table(t) => {
                View { projection: Projection::Full, energies: t.energies().to_vec(), pi: boltzmann(t.energies(), 1.0) }
            }
        }
    }
}

fn start_point<M: EnergyModel<f64>>(
    model: &M,
    funnel: Option<&FunnelModel<f64>>,
    rule: &StartRule,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    let space = model.space();
    let bad = |e: dbconv::Error| config_err(format!("invalid start point: {e}"));
    let point = match rule {
        StartRule::Origin => space.encode_point(&vec![0.0; space.dims()]).map_err(bad)?,
        StartRule::X(x) => {
            funnel.ok_or_else(|| config_err("start = x:<v> needs the funnel target"))?.start_at(*x).map_err(bad)?
        }
        StartRule::Quantile(q) => funnel
            .ok_or_else(|| config_err("start = quantile:<q> needs the funnel target"))?
            .quantile_start(*q)
            .map_err(bad)?,
        StartRule::Coords(c) => space.encode_point(c).map_err(bad)?,
        StartRule::Random => {
            let draw = |rng: &mut ChaCha8Rng| {
                (0..space.dims()).map(|d| rng.random_range(0..space.points(d))).collect::<Vec<_>>()
            };
            let mut p = draw(rng);
            let mut tries = 1;
            while !model.energy(&p).is_finite() {
                if tries == 1000 {
                    return Err(config_err("no finite-energy random start found in 1000 draws"));
                }
                p = draw(rng);
                tries += 1;
            }
            p
        }
    };
    if !model.energy(&point).is_finite() {
        return Err(config_err(format!("start point {point:?} has zero mass")));
    }
    Ok(point)
}

/// One chain with its own stream, visit counts and `V_n` series.
struct Chain<'a, M> {
    sampler: Sampler<'a, f64, M>,
    rng: ChaCha8Rng,
    iteration: u64,
    counts: EmpiricalCounts,
    states: Option<Vec<StateIndex>>,
    series: DiagnosticSeries<f64>,
}

impl<'a, M: EnergyModel<f64>> Chain<'a, M> {
    fn new(
        target: &'a EnergyTarget<f64, M>,
        config: SamplerConfig<f64>,
        init: Vec<usize>,
        rng: ChaCha8Rng,
        view: &View,
        keep: bool,
    ) -> Result<Self> {
        Ok(Chain {
            sampler: Sampler::new(target, config, init)?,
            rng,
            iteration: 0,
            counts: EmpiricalCounts::zeros(view.energies.len()),
            states: keep.then(Vec::new),
            series: DiagnosticSeries::new(),
        })
    }

    /// Runs up to iteration `until`; draws after `burn_in` are counted and
    /// `V_n` is recorded at every multiple of `checkpoint`.
    fn advance_to(&mut self, until: u64, view: &View, burn_in: u64, checkpoint: u64) -> dbconv::Result<()> {
        let space = self.sampler.target().space();
        while self.iteration < until {
            self.sampler.iterate(&mut self.rng);
            self.iteration += 1;
            let s = view.projection.project(space, &self.sampler.state().point);
            if let Some(states) = &mut self.states {
                states.push(s);
            }
            if self.iteration > burn_in {
                self.counts.record(s);
            }
            if self.iteration.is_multiple_of(checkpoint) && self.counts.n() > 0 {
                let (vn, _) = compute_vn(&self.counts, &view.energies)?;
                self.series.push(self.iteration, vn)?;
            }
        }
        Ok(())
    }

    fn acceptance_rate(&self) -> f64 {
        let p = self.sampler.proposals();
        if p == 0 {
            0.0
        } else {
            self.sampler.accepted() as f64 / p as f64
        }
    }

    fn trace(&self, view: &View, burn_in: u64, seed: u64) -> dbconv::Result<ChainTrace> {
        let meta = TraceMeta {
            sampler: self.sampler.config().proposal.label().to_string(),
            seed,
            accepted: self.sampler.accepted(),
            proposals: self.sampler.proposals(),
        };
        let states = self.states.clone().unwrap_or_default();
        ChainTrace::new(states, view.energies.len(), burn_in as usize, meta)
    }
}

fn stopped(series: &DiagnosticSeries<f64>, epsilon: f64) -> dbconv::Result<bool> {
    Ok(relative_difference_monitor(series, epsilon)? == MonitorDecision::Stop)
}

fn create(dir: &Path, name: &str) -> io::Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(dir.join(name))?))
}

fn write_series(dir: &Path, name: &str, series: &DiagnosticSeries<f64>) -> io::Result<()> {
    let mut f = create(dir, name)?;
    series.write_csv(&mut f)?;
    f.flush()
}

fn stop_label(stop: Option<u64>) -> String {
    stop.map_or_else(|| "not-converged".to_string(), |s| s.to_string())
}

/// Runs `verb` and writes its files into `out`.
pub fn execute(verb: Verb, config: &RunConfig, out: &Path) -> Result<Status> {
    fs::create_dir_all(out)?;
    let target = build_target(&config.target, 0)?;
    match verb {
        Verb::Run => match config.run.mode {
            RunMode::Single => with_target(&target, |t, f| t.run_single(f, &target, config, out)),
            RunMode::Parallel => with_target(&target, |t, f| t.run_parallel(f, &target, config, out)),
        },
        Verb::Test => with_target(&target, |t, f| t.run_test(f, &target, config, out)),
        Verb::Anneal => run_anneal(target, config, out),
        Verb::Compare => run_compare(target, config, out),
    }
}

/// Calls `f` with an energy target over whichever model `target` holds,
/// plus the funnel model when it is one.
fn with_target<R>(target: &Target, f: impl FnOnce(&dyn AnyTarget, Option<&FunnelModel<f64>>) -> R) -> R {
    match target {
        Target::Funnel(m) => f(&EnergyTarget::new(m), Some(m)),
        Target::Table(t) => f(&EnergyTarget::new(t), None),
    }
}

/// Object-safe handle over `EnergyTarget<f64, M>` so the verbs need not be
/// generic over the model type.
trait AnyTarget: Sync {
    fn run_single(
        &self,
        funnel: Option<&FunnelModel<f64>>,
        target: &Target,
        config: &RunConfig,
        out: &Path,
    ) -> Result<Status>;
    fn run_parallel(
        &self,
        funnel: Option<&FunnelModel<f64>>,
        target: &Target,
        config: &RunConfig,
        out: &Path,
    ) -> Result<Status>;
    fn run_test(
        &self,
        funnel: Option<&FunnelModel<f64>>,
        target: &Target,
        config: &RunConfig,
        out: &Path,
    ) -> Result<Status>;
    fn chain_stop(
        &self,
        funnel: Option<&FunnelModel<f64>>,
        target: &Target,
        sampler: &SamplerSpec,
        config: &RunConfig,
        rep: u64,
    ) -> Result<Option<u64>>;
}

impl<M: EnergyModel<f64> + Sync> AnyTarget for EnergyTarget<f64, M> {
    fn run_single(
        &self,
        funnel: Option<&FunnelModel<f64>>,
        target: &Target,
        config: &RunConfig,
        out: &Path,
    ) -> Result<Status> {
        let view = View::of(target);
        let d = &config.diagnostic;
        let init = start_point(self.model(), funnel, &config.run.start, &mut stream(config.seed, INIT_STREAM))?;
        let keep = config.run.write_trace || config.run.histogram_bins.is_some();
        let mut chain = Chain::new(self, config.sampler.config(0), init, stream(config.seed, 0), &view, keep)?;
        let limit = config.run.iterations.unwrap_or(config.run.max_iterations);
        while chain.iteration < limit {
            let next = (chain.iteration + d.checkpoint).min(limit);
            chain.advance_to(next, &view, d.burn_in, d.checkpoint)?;
            if config.run.iterations.is_none() && stopped(&chain.series, d.epsilon)? {
                break;
            }
        }
        write_series(out, "series.csv", &chain.series)?;
        let stop = chain.series.first_stop(d.epsilon);
        let mut s = create(out, "summary.txt")?;
        writeln!(s, "command=run")?;
        writeln!(s, "sampler={}", config.sampler.label())?;
        writeln!(s, "seed={}", config.seed)?;
        writeln!(s, "iterations={}", chain.iteration)?;
        writeln!(s, "epsilon={}", d.epsilon)?;
        writeln!(s, "stop_iteration={}", stop_label(stop))?;
        writeln!(s, "acceptance_rate={:.6}", chain.acceptance_rate())?;
        s.flush()?;
        if keep {
            let trace = chain.trace(&view, d.burn_in, config.seed)?;
            write_outputs_for_trace(&trace, self.space(), &view, funnel, config, out)?;
        }
        Ok(if stop.is_some() { Status::Converged } else { Status::NotConverged })
    }

    fn run_parallel(
        &self,
        funnel: Option<&FunnelModel<f64>>,
        target: &Target,
        config: &RunConfig,
        out: &Path,
    ) -> Result<Status> {
        let view = View::of(target);
        let d = &config.diagnostic;
        let keep = config.run.write_trace || config.run.histogram_bins.is_some();
        let mut chains = Vec::with_capacity(config.run.quantiles.len());
        for (k, &q) in config.run.quantiles.iter().enumerate() {
            let rule = if funnel.is_some() { StartRule::Quantile(q) } else { StartRule::Random };
            let init = start_point(self.model(), funnel, &rule, &mut stream(config.seed, INIT_STREAM + k as u64))?;
            chains.push(Chain::new(self, config.sampler.config(0), init, stream(config.seed, k as u64), &view, keep)?);
        }
        let limit = config.run.iterations.unwrap_or(config.run.max_iterations);
        let per_worker = chains.len().div_ceil(config.run.workers);
        let mut pooled = DiagnosticSeries::new();
        let mut done = 0;
        while done < limit {
            let next = (done + d.checkpoint).min(limit);
            thread::scope(|s| {
                let handles: Vec<_> = chains
                    .chunks_mut(per_worker)
                    .map(|group| {
                        let view = &view;
                        s.spawn(move || {
                            group.iter_mut().try_for_each(|c| c.advance_to(next, view, d.burn_in, d.checkpoint))
                        })
                    })
                    .collect();
                handles.into_iter().try_for_each(|h| h.join().expect("chain worker panicked"))
            })?;
            done = next;
            let mut counts = EmpiricalCounts::zeros(view.energies.len());
            for c in &chains {
                counts.merge(&c.counts)?;
            }
            if done % d.checkpoint == 0 && counts.n() > 0 {
                let (vn, _) = compute_vn(&counts, &view.energies)?;
                pooled.push(done, vn)?;
                if config.run.iterations.is_none() && stopped(&pooled, d.epsilon)? {
                    break;
                }
            }
        }
        for (k, c) in chains.iter().enumerate() {
            write_series(out, &format!("chain_{k}.csv"), &c.series)?;
        }
        write_series(out, "pooled.csv", &pooled)?;
        let stop = pooled.first_stop(d.epsilon);
        let mut s = create(out, "summary.txt")?;
        writeln!(s, "command=run")?;
        writeln!(s, "mode=parallel")?;
        writeln!(s, "sampler={}", config.sampler.label())?;
        writeln!(s, "seed={}", config.seed)?;
        writeln!(s, "iterations_per_chain={done}")?;
        writeln!(s, "total_iterations={}", done * chains.len() as u64)?;
        writeln!(s, "epsilon={}", d.epsilon)?;
        writeln!(s, "pooled_stop_iteration={}", stop_label(stop))?;
        writeln!(s, "chain,start_quantile,acceptance_rate,stop_iteration")?;
        for (k, c) in chains.iter().enumerate() {
            let q = if funnel.is_some() { config.run.quantiles[k].to_string() } else { "random".into() };
            writeln!(s, "{k},{q},{:.6},{}", c.acceptance_rate(), stop_label(c.series.first_stop(d.epsilon)))?;
        }
        s.flush()?;
        if keep {
            let mut all = Vec::new();
            for c in &chains {
                all.extend_from_slice(c.trace(&view, d.burn_in, config.seed)?.retained());
            }
            let trace =
                ChainTrace::new(all, view.energies.len(), 0, TraceMeta { seed: config.seed, ..TraceMeta::default() })?;
            write_outputs_for_trace(&trace, self.space(), &view, funnel, config, out)?;
        }
        Ok(if stop.is_some() { Status::Converged } else { Status::NotConverged })
    }

    fn run_test(
        &self,
        funnel: Option<&FunnelModel<f64>>,
        target: &Target,
        config: &RunConfig,
        out: &Path,
    ) -> Result<Status> {
        let view = View::of(target);
        let d = &config.diagnostic;
        let sampler = config.sampler.config(0);
        let init = start_point(self.model(), funnel, &config.run.start, &mut stream(config.seed, INIT_STREAM))?;
        let mut chain = Chain::new(self, sampler, init, stream(config.seed, 0), &view, true)?;
        let analytic = match d.sigma {
            SigmaMode::Analytic => {
                if funnel.is_some() {
                    return Err(config_err("sigma = analytic needs an enumerable target"));
                }
                let p = iteration_kernel(self, &sampler)?;
                Some(sigma_full_analytic(&p, &view.pi, d.lag_cap)?.sigma)
            }
            _ => None,
        };
        let mut rows = create(out, "test.csv")?;
        writeln!(rows, "n,V_n,lambda_sum,lambda_sq_sum,quantile,decision")?;
        let mut n = config.test_initial_n;
        let status = loop {
            if d.burn_in + n > config.run.max_iterations {
                break Status::NotConverged;
            }
            chain.advance_to(d.burn_in + n, &view, d.burn_in, d.checkpoint)?;
            let trace = chain.trace(&view, d.burn_in, config.seed)?;
            let outcome: TestOutcome<f64> = match (&analytic, d.sigma) {
                (Some(sigma), _) => stationarity_test(&chain.counts, &view.energies, d.c_mode, sigma, d.alpha)?,
                (None, SigmaMode::Plugin) => {
                    let sigma = sigma_plugin(&trace, d.lag_cap)?.sigma;
                    stationarity_test(&chain.counts, &view.energies, d.c_mode, &sigma, d.alpha)?
                }
                (None, _) => {
                    let diag = sigma_mb_plugin(&trace, &view.pi)?;
                    let null = null_approximation_diagonal(&view.energies, &diag, d.c_mode)?;
                    let (vn, _) = compute_vn(&chain.counts, &view.energies)?;
                    decide(vn, null, d.alpha)?
                }
            };
            writeln!(
                rows,
                "{n},{:e},{:e},{:e},{:e},{}",
                outcome.vn.value,
                outcome.null.lambda_sum,
                outcome.null.lambda_sq_sum,
                outcome.quantile,
                outcome.decision.label()
            )?;
            if outcome.decision == Decision::Stationary {
                break Status::Converged;
            }
            n *= 2;
        };
        rows.flush()?;
        write_series(out, "series.csv", &chain.series)?;
        let mut s = create(out, "summary.txt")?;
        writeln!(s, "command=test")?;
        writeln!(s, "sampler={}", config.sampler.label())?;
        writeln!(s, "seed={}", config.seed)?;
        writeln!(s, "alpha={}", d.alpha)?;
        writeln!(s, "iterations={}", chain.iteration)?;
        writeln!(
            s,
            "result={}",
            if status == Status::Converged { "stationary".to_string() } else { "not-converged".into() }
        )?;
        s.flush()?;
        Ok(status)
    }

    fn chain_stop(
        &self,
        funnel: Option<&FunnelModel<f64>>,
        target: &Target,
        sampler: &SamplerSpec,
        config: &RunConfig,
        rep: u64,
    ) -> Result<Option<u64>> {
        let view = View::of(target);
        let d = &config.diagnostic;
        let init = start_point(self.model(), funnel, &config.run.start, &mut stream(config.seed, INIT_STREAM + rep))?;
        let mut chain = Chain::new(self, sampler.config(0), init, stream(config.seed, rep), &view, false)?;
        while chain.iteration < config.run.max_iterations {
            let next = (chain.iteration + d.checkpoint).min(config.run.max_iterations);
            chain.advance_to(next, &view, d.burn_in, d.checkpoint)?;
            if stopped(&chain.series, d.epsilon)? {
                break;
            }
        }
        Ok(chain.series.first_stop(d.epsilon))
    }
}

fn write_outputs_for_trace(
    trace: &ChainTrace,
    space: &dbconv::chain::GridSpace<f64>,
    view: &View,
    funnel: Option<&FunnelModel<f64>>,
    config: &RunConfig,
    out: &Path,
) -> Result<()> {
    if config.run.write_trace {
        let mut f = create(out, "trace.txt")?;
        trace.write_to(&mut f, space.dims(), space.width())?;
        f.flush()?;
    }
    if let Some(bins) = config.run.histogram_bins {
        let coord = config.run.histogram_coordinate;
        if coord >= space.dims() {
            return Err(config_err(format!("histogram_coordinate {coord} exceeds the {} dimensions", space.dims())));
        }
        let h: Histogram = emit_histogram(trace, space, view.projection, coord, bins)?;
        let reference = match (config.run.histogram_reference, funnel) {
            (Some(r), _) => r,
            (None, Some(m)) if coord == 0 => Reference::Normal { mean: 0.0, sd: m.spec().x_sd },
            (None, _) => Reference::None,
        };
        let mut f = create(out, "histogram.csv")?;
        h.write_csv(&mut f, reference)?;
        f.flush()?;
    }
    Ok(())
}

fn table_of(target: &Target) -> Result<&TabulatedEnergy<f64>> {
    match target {
        Target::Table(t) => Ok(t),
        Target::Funnel(_) => Err(config_err("annealing needs a tabulated target (changepoint or toy)")),
    }
}

fn anneal_config(config: &RunConfig, sampler: &SamplerSpec) -> Result<AnnealConfig<f64>> {
    let s = config.schedule.as_ref().ok_or_else(|| config_err("annealing needs a [schedule] section"))?;
    let schedule =
        CoolingSchedule::new(s.t0, s.ratio, s.levels).map_err(|e| config_err(format!("invalid schedule: {e}")))?;
    let samplers = if sampler.proposals.len() == 1 {
        vec![sampler.config(0)]
    } else {
        (0..s.levels).map(|k| sampler.config(k)).collect()
    };
    Ok(AnnealConfig {
        schedule,
        samplers,
        epsilon: s.epsilon.clone(),
        checkpoint: config.diagnostic.checkpoint,
        max_iter_per_level: s.max_iter_per_level,
    })
}

fn anneal_once(
    table: &TabulatedEnergy<f64>,
    config: &RunConfig,
    sampler: &SamplerSpec,
    rep: u64,
) -> Result<AnnealResult<f64>> {
    let cfg = anneal_config(config, sampler)?;
    let init = start_point(table, None, &config.run.start, &mut stream(config.seed, INIT_STREAM + rep))?;
    Ok(anneal(table, init, &cfg, &mut stream(config.seed, rep))?)
}

fn all_equilibrated(r: &AnnealResult<f64>) -> bool {
    r.levels.iter().all(|l| l.equilibrated)
}

fn run_anneal(target: Target, config: &RunConfig, out: &Path) -> Result<Status> {
    let table = table_of(&target)?;
    let result = anneal_once(table, config, &config.sampler, 0)?;
    result.write_outputs(out, table)?;
    Ok(if all_equilibrated(&result) { Status::Converged } else { Status::NotConverged })
}

/// Iterations to the stopping rule, or `None` when a side hit its cap.
fn side_iterations(target: &Target, config: &RunConfig, sampler: &SamplerSpec, rep: u64) -> Result<Option<u64>> {
    if config.schedule.is_some() {
        let r = anneal_once(table_of(target)?, config, sampler, rep)?;
        return Ok(all_equilibrated(&r).then(|| r.total_iterations()));
    }
    with_target(target, |t, f| t.chain_stop(f, target, sampler, config, rep))
}

fn run_compare(first: Target, config: &RunConfig, out: &Path) -> Result<Status> {
    let b = config.sampler_b.as_ref().ok_or_else(|| config_err("compare needs a [sampler.b] section"))?;
    let mut rows = create(out, "compare.csv")?;
    writeln!(rows, "repeat,iterations_a,iterations_b,ratio")?;
    let mut ratios = Vec::new();
    let mut complete = true;
    let mut target = Some(first);
    for rep in 0..config.repeats {
        let t = match target.take() {
            Some(t) => t,
            None => build_target(&config.target, rep)?,
        };
        let a = side_iterations(&t, config, &config.sampler, rep)?;
        let bb = side_iterations(&t, config, b, rep)?;
        let ratio = match (a, bb) {
            (Some(x), Some(y)) => {
                let r = x as f64 / y as f64;
                ratios.push(r);
                format!("{r}")
            }
            _ => {
                complete = false;
                String::new()
            }
        };
        writeln!(rows, "{rep},{},{},{ratio}", stop_label(a), stop_label(bb))?;
    }
    rows.flush()?;
    let mut s = create(out, "summary.txt")?;
    writeln!(s, "command=compare")?;
    writeln!(s, "sampler_a={}", config.sampler.label())?;
    writeln!(s, "sampler_b={}", b.label())?;
    writeln!(s, "seed={}", config.seed)?;
    writeln!(s, "repeats={}", config.repeats)?;
    writeln!(s, "epsilon={}", config.diagnostic.epsilon)?;
    if ratios.is_empty() {
        writeln!(s, "mean_ratio=not-converged")?;
    } else {
        writeln!(s, "mean_ratio={}", ratios.iter().sum::<f64>() / ratios.len() as f64)?;
        writeln!(s, "ratios_used={}", ratios.len())?;
    }
    s.flush()?;
    Ok(if complete { Status::Converged } else { Status::NotConverged })
}
