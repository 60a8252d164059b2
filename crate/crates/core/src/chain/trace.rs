use std::io::{BufRead, Write};

use num_traits::Num;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::grid::StateIndex;

/// Sampler bookkeeping carried alongside a trace.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraceMeta {
    pub sampler: String,
    pub seed: u64,
    pub accepted: u64,
    pub proposals: u64,
}

impl TraceMeta {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }
}

/// Visited state indices in order, including the first `burn_in` draws.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    states: Vec<StateIndex>,
    state_count: usize,
    burn_in: usize,
    pub meta: TraceMeta,
}

impl ChainTrace {
    pub fn new(states: Vec<StateIndex>, state_count: usize, burn_in: usize, meta: TraceMeta) -> Result<Self> {
        if let Some(&bad) = states.iter().find(|&&s| s >= state_count) {
            return Err(Error::InvalidGrid(format!("state {bad} out of range (m = {state_count})")));
        }
        if meta.accepted > meta.proposals {
            return Err(Error::InvalidSampler(format!(
                "accepted {} exceeds proposals {}",
                meta.accepted, meta.proposals
            )));
        }
        Ok(ChainTrace { states, state_count, burn_in, meta })
    }

    pub fn states(&self) -> &[StateIndex] {
        &self.states
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    /// Draws after burn-in removal.
    pub fn retained(&self) -> &[StateIndex] {
        &self.states[self.burn_in.min(self.states.len())..]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    /// Writes the `# dims=.. width=.. seed=.. burn_in=..` header and one index per line.
    pub fn write_to<W: Write>(&self, mut out: W, dims: usize, width: f64) -> std::io::Result<()> {
        writeln!(out, "# dims={dims} width={width} seed={} burn_in={}", self.meta.seed, self.burn_in)?;
        for s in &self.states {
            writeln!(out, "{s}")?;
        }
        Ok(())
    }
}

/// Header fields of a serialized trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceHeader {
    pub dims: usize,
    pub width: f64,
    pub seed: u64,
    pub burn_in: usize,
}

/// Parses a trace file written by [`ChainTrace::write_to`].
pub fn read_trace<R: BufRead>(input: R, state_count: usize) -> Result<(TraceHeader, ChainTrace)> {
    let mut lines = input.lines().enumerate();
    let (_, first) = lines.next().ok_or(Error::Parse { line: 1, message: "missing header".into() })?;
    let first = first.map_err(|e| Error::Parse { line: 1, message: e.to_string() })?;
    let header = parse_header(&first)?;
    let mut states = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let s = t
            .parse::<usize>()
            .map_err(|e| Error::Parse { line: i + 1, message: format!("bad state index {t:?}: {e}") })?;
        states.push(s);
    }
    let meta = TraceMeta { seed: header.seed, ..TraceMeta::default() };
    let trace = ChainTrace::new(states, state_count, header.burn_in, meta)?;
    Ok((header, trace))
}

fn parse_header(line: &str) -> Result<TraceHeader> {
    let err = |m: String| Error::Parse { line: 1, message: m };
    let body = line.strip_prefix('#').ok_or_else(|| err("header must start with '#'".into()))?;
    let (mut dims, mut width, mut seed, mut burn_in) = (None, None, None, None);
    for field in body.split_whitespace() {
        let (k, v) = field.split_once('=').ok_or_else(|| err(format!("malformed field {field:?}")))?;
        let bad = |e: &dyn std::fmt::Display| err(format!("bad value for {k}: {e}"));
        match k {
            "dims" => dims = Some(v.parse().map_err(|e| bad(&e))?),
            "width" => width = Some(v.parse().map_err(|e| bad(&e))?),
            "seed" => seed = Some(v.parse().map_err(|e| bad(&e))?),
            "burn_in" => burn_in = Some(v.parse().map_err(|e| bad(&e))?),
            _ => return Err(err(format!("unknown header field {k:?}"))),
        }
    }
    match (dims, width, seed, burn_in) {
        (Some(dims), Some(width), Some(seed), Some(burn_in)) => Ok(TraceHeader { dims, width, seed, burn_in }),
        _ => Err(err("header needs dims, width, seed and burn_in".into())),
    }
}

/// Visit counts over a finite state space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalCounts {
    counts: Vec<u64>,
    n: u64,
}

impl EmpiricalCounts {
    pub fn zeros(state_count: usize) -> Self {
        EmpiricalCounts { counts: vec![0; state_count], n: 0 }
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        let n = counts.iter().sum();
        EmpiricalCounts { counts, n }
    }

    pub fn record(&mut self, state: StateIndex) {
        self.counts[state] += 1;
        self.n += 1;
    }

    /// Pools another set of counts over the same space.
    pub fn merge(&mut self, other: &EmpiricalCounts) -> Result<()> {
        if other.counts.len() != self.counts.len() {
            return Err(Error::Shape { expected: self.counts.len(), got: other.counts.len() });
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.n += other.n;
        Ok(())
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn state_count(&self) -> usize {
        self.counts.len()
    }

    /// Empirical distribution `counts_i / n` in floating point.
    pub fn probabilities<S: Scalar>(&self) -> Vec<S> {
        let n = S::from_u64(self.n).unwrap();
        self.counts.iter().map(|&c| S::from_u64(c).unwrap() / n).collect()
    }

    /// Empirical distribution in an exact number type such as `Ratio<u64>`.
    pub fn exact_probabilities<T: Num + From<u64> + Clone>(&self) -> Vec<T> {
        self.counts.iter().map(|&c| T::from(c) / T::from(self.n)).collect()
    }
}

/// Counts post-burn-in visits of each state.
pub fn accumulate(trace: &ChainTrace) -> Result<EmpiricalCounts> {
    let kept = trace.retained();
    if kept.is_empty() {
        return Err(Error::EmptyTrace { burn_in: trace.burn_in });
    }
    let mut c = EmpiricalCounts::zeros(trace.state_count);
    for &s in kept {
        c.record(s);
    }
    Ok(c)
}
