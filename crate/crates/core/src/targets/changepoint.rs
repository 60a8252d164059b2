//! Multipath changepoint model in the `(alpha, beta)` parameterization.
//!
//! Patient `i` has covariate `z_i = +1` for the first half of the patients
//! and `-1` for the rest. With `theta0 = (alpha + beta) / 2` and
//! `theta1 = (alpha - beta) / 2`, observations before the changepoint
//! `tau_i` have mean 0 and those after it have mean
//! `mu_i = 4 (theta1 + theta0 z_i)`, which is `4 alpha` in the first group
//! and `-4 beta` in the second. Unit variance throughout. `tau_i` is uniform
//! on `1..=n_obs-1` and summed out, so the energy is
//!
//! `E = -sum_i ln sum_tau exp(-1/2 sum_{j<=tau} y_ij^2 - 1/2 sum_{j>tau} (y_ij - mu_i)^2)`
//!
//! with additive constants dropped. Data simulated with `theta = (0, 1)`
//! give `(alpha, beta) = (1, -1)` and post-change mean 4 in both groups.
//! Swapping the group coding maps `(alpha, beta)` to `(-beta, -alpha)`.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::chain::GridSpace;
use crate::error::{Error, Result};
use crate::samplers::EnergyModel;
use crate::scalar::Scalar;

pub const N_PATIENTS: usize = 100;
pub const N_OBS: usize = 20;
/// Post-change shift of the generative model.
pub const SHIFT: f64 = 4.0;
/// Half-width of the parameter region.
pub const BOUND: f64 = 10.0;

/// How changepoints are drawn when simulating.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauLaw {
    /// Uniform on `1..=n_obs-1`.
    Interior,
    /// Every patient changes after observation `tau` (`0..=n_obs`).
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChangepointDataset {
    /// `measurements[i][j]`, patients by observations.
    pub measurements: Vec<Vec<f64>>,
    pub true_taus: Vec<usize>,
    pub seed: u64,
}

impl ChangepointDataset {
    pub fn patients(&self) -> usize {
        self.measurements.len()
    }

    pub fn observations(&self) -> usize {
        self.measurements.first().map_or(0, Vec::len)
    }

    /// Dataset with no noise: pre-change values 0, post-change values 4.
    pub fn noiseless(true_taus: Vec<usize>, n_obs: usize) -> Self {
        let measurements =
            true_taus.iter().map(|&t| (0..n_obs).map(|j| if j < t { 0.0 } else { SHIFT }).collect()).collect();
        ChangepointDataset { measurements, true_taus, seed: 0 }
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# seed={}", self.seed)?;
        for row in &self.measurements {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        let taus: Vec<String> = self.true_taus.iter().map(usize::to_string).collect();
        writeln!(out, "{}", taus.join(" "))
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse { line, message };
        let mut lines = Vec::new();
        for (k, l) in input.lines().enumerate() {
            let l = l.map_err(|e| err(k + 1, e.to_string()))?;
            if !l.trim().is_empty() {
                lines.push((k + 1, l));
            }
        }
        let Some((first, header)) = lines.first() else {
            return Err(err(1, "empty dataset".into()));
        };
        let seed = header
            .trim()
            .strip_prefix("# seed=")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| err(*first, "expected `# seed=<u64>`".into()))?;
        if lines.len() < 3 {
            return Err(err(lines.last().unwrap().0, "need measurement rows and a changepoint row".into()));
        }
        let (tau_line, tau_text) = lines.last().unwrap();
        let true_taus = tau_text
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| err(*tau_line, format!("bad changepoint `{t}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let mut measurements = Vec::new();
        for (ln, text) in &lines[1..lines.len() - 1] {
            let row = text
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| err(*ln, format!("bad value `{t}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if let Some(prev) = measurements.first().map(Vec::len) {
                if row.len() != prev {
                    return Err(err(*ln, format!("expected {prev} values, found {}", row.len())));
                }
            }
            measurements.push(row);
        }
        if true_taus.len() != measurements.len() {
            return Err(err(
                *tau_line,
                format!("expected {} changepoints, found {}", measurements.len(), true_taus.len()),
            ));
        }
        Ok(ChangepointDataset { measurements, true_taus, seed })
    }
}

/// Simulates the two-normal changepoint data with `theta = (0, 1)`.
pub fn simulate_changepoint(seed: u64, n_patients: usize, n_obs: usize, law: TauLaw) -> Result<ChangepointDataset> {
    if n_obs < 2 {
        return Err(Error::Domain("need at least two observations per patient".into()));
    }
    if let TauLaw::Fixed(t) = law {
        if t > n_obs {
            return Err(Error::Domain(format!("changepoint {t} exceeds {n_obs} observations")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut measurements = Vec::with_capacity(n_patients);
    let mut true_taus = Vec::with_capacity(n_patients);
    for _ in 0..n_patients {
        let tau = match law {
            TauLaw::Interior => rng.random_range(1..n_obs),
            TauLaw::Fixed(t) => t,
        };
        let row = (0..n_obs)
            .map(|j| {
                let z: f64 = rng.sample(StandardNormal);
                if j < tau {
                    z
                } else {
                    SHIFT + z
                }
            })
            .collect();
        measurements.push(row);
        true_taus.push(tau);
    }
    Ok(ChangepointDataset { measurements, true_taus, seed })
}

/// Per-patient suffix sums used by the energy.
#[derive(Debug, Clone, PartialEq)]
struct PatientStats<S> {
    z: S,
    /// `sum_{j<=tau} y_j^2` for `tau = 1..n-1`.
    pre_sq: Vec<S>,
    /// `sum_{j>tau} y_j` and `sum_{j>tau} y_j^2`.
    post: Vec<S>,
    post_sq: Vec<S>,
}

/// Changepoint energy over a square `(alpha, beta)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangepointModel<S> {
    space: GridSpace<S>,
    patients: Vec<PatientStats<S>>,
    n_obs: usize,
}

impl<S: Scalar> ChangepointModel<S> {
    /// Grid `[-10, 10]^2` at the given spacing.
    pub fn new(data: &ChangepointDataset, width: S) -> Result<Self> {
        let b = S::lit(BOUND);
        Self::with_space(data, GridSpace::cube(2, -b, b, width)?)
    }

    pub fn with_space(data: &ChangepointDataset, space: GridSpace<S>) -> Result<Self> {
        if space.dims() != 2 {
            return Err(Error::Shape { expected: 2, got: space.dims() });
        }
        let n = data.observations();
        if n < 2 {
            return Err(Error::Domain("need at least two observations per patient".into()));
        }
        let half = data.patients().div_ceil(2);
        let patients = data
            .measurements
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let y: Vec<S> = row.iter().map(|&v| S::lit(v)).collect();
                let mut pre_sq = Vec::with_capacity(n - 1);
                let mut post = Vec::with_capacity(n - 1);
                let mut post_sq = Vec::with_capacity(n - 1);
                for tau in 1..n {
                    pre_sq.push(y[..tau].iter().map(|&v| v * v).sum());
                    post.push(y[tau..].iter().copied().sum());
                    post_sq.push(y[tau..].iter().map(|&v| v * v).sum());
                }
                let z = if i < half { S::one() } else { -S::one() };
                PatientStats { z, pre_sq, post, post_sq }
            })
            .collect();
        Ok(ChangepointModel { space, patients, n_obs: n })
    }

    /// Energy at a point of the parameter plane.
    pub fn energy_at(&self, alpha: S, beta: S) -> S {
        let two = S::lit(2.0);
        let theta0 = (alpha + beta) / two;
        let theta1 = (alpha - beta) / two;
        let half = S::lit(0.5);
        let mut total = S::zero();
        let mut terms = vec![S::zero(); self.n_obs - 1];
        for p in &self.patients {
            let mu = S::lit(SHIFT) * (theta1 + theta0 * p.z);
            for (k, t) in terms.iter_mut().enumerate() {
                let count = S::from_usize_lossy(self.n_obs - 1 - k);
                let post = p.post_sq[k] - two * mu * p.post[k] + count * mu * mu;
                *t = -half * (p.pre_sq[k] + post);
            }
            let top = terms.iter().copied().fold(S::neg_infinity(), S::max);
            let lse = top + terms.iter().map(|&t| (t - top).exp()).sum::<S>().ln();
            total = total - lse;
        }
        total
    }
}

impl<S: Scalar> EnergyModel<S> for ChangepointModel<S> {
    fn space(&self) -> &GridSpace<S> {
        &self.space
    }

    fn energy(&self, point: &[usize]) -> S {
        self.energy_at(self.space.value(0, point[0]), self.space.value(1, point[1]))
    }
}

/// Energy at `(alpha, beta)`; zero mass outside `[-10, 10]^2`.
pub fn changepoint_energy<S: Scalar>(alpha: S, beta: S, data: &ChangepointDataset) -> Result<S> {
    let b = S::lit(BOUND);
    if !(alpha.abs() <= b && beta.abs() <= b) {
        return Err(Error::Domain(format!("({alpha}, {beta}) outside [-{b}, {b}]^2")));
    }
    Ok(ChangepointModel::new(data, S::one())?.energy_at(alpha, beta))
}
