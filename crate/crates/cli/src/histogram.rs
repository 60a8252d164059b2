//! Equal-width histograms of one coordinate, with an optional reference density.

use std::io::Write;

use dbconv::chain::{ChainTrace, GridSpace};
use dbconv::samplers::Projection;

use crate::config::Reference;

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Bins `values` over `[lo, hi]`; values outside are clamped into the end bins.
    pub fn new(values: impl IntoIterator<Item = f64>, bins: usize, lo: f64, hi: f64) -> Self {
        assert!(bins >= 1 && hi > lo, "need bins >= 1 and hi > lo");
        let step = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|k| if k == bins { hi } else { lo + k as f64 * step }).collect();
        let mut counts = vec![0u64; bins];
        for v in values {
            let k = ((v - lo) / step).floor();
            let k = if k.is_nan() || k < 0.0 { 0 } else { (k as usize).min(bins - 1) };
            counts[k] += 1;
        }
        Histogram { edges, counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Rows `lower,upper,count,reference`, where `reference` is the density
    /// at the bin centre (empty without a reference).
    pub fn write_csv<W: Write>(&self, mut out: W, reference: Reference) -> std::io::Result<()> {
        writeln!(out, "lower,upper,count,reference")?;
        for (k, c) in self.counts.iter().enumerate() {
            let (a, b) = (self.edges[k], self.edges[k + 1]);
            let r = match reference {
                Reference::None => String::new(),
                Reference::Normal { mean, sd } => format!("{:e}", normal_density((a + b) / 2.0, mean, sd)),
            };
            writeln!(out, "{a},{b},{c},{r}")?;
        }
        Ok(())
    }
}

pub fn normal_density(x: f64, mean: f64, sd: f64) -> f64 {
    dbconv::special::density((x - mean) / sd) / sd
}

/// Histogram of `coordinate` over the retained draws of a trace recorded
/// under `projection`, binned over that coordinate's grid range.
pub fn emit_histogram(
    trace: &ChainTrace,
    space: &GridSpace<f64>,
    projection: Projection,
    coordinate: usize,
    bins: usize,
) -> dbconv::Result<Histogram> {
    let values = trace
        .retained()
        .iter()
        .map(|&s| match projection {
            Projection::Full => space.decode(s).map(|p| space.value(coordinate, p[coordinate])),
            Projection::Coordinate(d) if d == coordinate => Ok(space.value(coordinate, s)),
            Projection::Coordinate(d) => Err(dbconv::Error::Shape { expected: coordinate, got: d }),
        })
        .collect::<dbconv::Result<Vec<f64>>>()?;
    Ok(Histogram::new(values, bins, space.lower(coordinate), space.upper(coordinate)))
}
