//! Exact one-step kernels of the samplers on small enumerable grids, built
//! by summing over every outcome of the sampler's randomness.

use std::collections::HashMap;

use crate::chain::TransitionMatrix;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

use super::mh::{cube_offset_probability, truncated_normal_cell_probability};
use super::proposal::{HastingsCorrection, ProposalSpec, SamplerConfig};
use super::slice::interval_cells;
use super::target::{energy_delta, EnergyModel, EnergyTarget};

/// Largest state count for which kernels are enumerated.
pub const ENUMERATION_CAP: usize = 5_000;

fn metropolis<S: Scalar>(delta_effective: S, log_hastings: f64) -> S {
    let r = -delta_effective.as_f64() + log_hastings;
    if r >= 0.0 {
        S::one()
    } else {
        S::lit(r.exp())
    }
}

fn finish_rows<S: Scalar>(mut p: Matrix<S>) -> Result<TransitionMatrix<S>> {
    for i in 0..p.rows() {
        let off: S = (0..p.cols()).filter(|&j| j != i).map(|j| p[(i, j)]).sum();
        p[(i, i)] = (S::one() - off).max(S::zero());
    }
    TransitionMatrix::new(p)
}

fn state_count<S: Scalar, M: EnergyModel<S>>(target: &EnergyTarget<S, M>) -> Result<usize> {
    let m = target.space().state_count()?;
    if m > ENUMERATION_CAP {
        return Err(Error::TooManyStates);
    }
    Ok(m)
}

/// Kernel of one uniform-cube Metropolis step.
pub fn cube_kernel<S: Scalar, M: EnergyModel<S>>(target: &EnergyTarget<S, M>, width: S) -> Result<TransitionMatrix<S>> {
    let space = target.space();
    let m = state_count(target)?;
    let h = space.width();
    let reach = (width / h / S::lit(2.0)).ceil().to_i64().unwrap() + 1;
    let offsets: Vec<(i64, S)> =
        (-reach..=reach).map(|d| (d, cube_offset_probability(d, width, h))).filter(|(_, q)| *q > S::zero()).collect();
    let mut p = Matrix::zeros(m, m);
    for x in 0..m {
        let px = space.decode(x)?;
        let ex = target.effective_energy(&px);
        // odometer over the offset product
        let mut idx = vec![0usize; space.dims()];
        'outer: loop {
            let mut q = S::one();
            let mut y = px.clone();
            let mut on_grid = true;
            for (d, &i) in idx.iter().enumerate() {
                let (off, qd) = offsets[i];
                q = q * qd;
                let k = px[d] as i64 + off;
                if k < 0 || k >= space.points(d) as i64 {
                    on_grid = false;
                } else {
                    y[d] = k as usize;
                }
            }
            if on_grid && y != px {
                let ey = target.effective_energy(&y);
                let j = space.linear_index(&y)?;
                p[(x, j)] = p[(x, j)] + q * metropolis(energy_delta(ey, ex), 0.0);
            }
            for slot in idx.iter_mut() {
                *slot += 1;
                if *slot < offsets.len() {
                    continue 'outer;
                }
                *slot = 0;
            }
            break;
        }
    }
    finish_rows(p)
}

/// Kernel of one single-coordinate update of `coord`.
pub fn coordinate_kernel<S: Scalar, M: EnergyModel<S>>(
    target: &EnergyTarget<S, M>,
    coord: usize,
    proposal: ProposalSpec<S>,
) -> Result<TransitionMatrix<S>> {
    let space = target.space();
    let m = state_count(target)?;
    if coord >= space.dims() {
        return Err(Error::Shape { expected: space.dims(), got: coord });
    }
    let n = space.points(coord);
    let mut p = Matrix::zeros(m, m);
    for x in 0..m {
        let px = space.decode(x)?;
        let kx = px[coord];
        let line: Vec<S> = (0..n)
            .map(|j| {
                let mut q = px.clone();
                q[coord] = j;
                target.energy(&q)
            })
            .collect();
        let row: Vec<S> = match proposal {
            ProposalSpec::TruncatedNormal { sd, correction } => (0..n)
                .map(|j| {
                    if j == kx {
                        return S::zero();
                    }
                    let fwd = truncated_normal_cell_probability(space, coord, sd, kx, j);
                    let log_h = match correction {
                        HastingsCorrection::Corrected => {
                            truncated_normal_cell_probability(space, coord, sd, j, kx).ln() - fwd.ln()
                        }
                        HastingsCorrection::Uncorrected => 0.0,
                    };
                    let de = energy_delta(line[j], line[kx]) / target.temperature();
                    S::lit(fwd) * metropolis(de, log_h)
                })
                .collect(),
            ProposalSpec::Slice { interval, max_steps } => {
                slice_line_row(&line, kx, target.temperature(), interval_cells(interval, space.width()), max_steps)
            }
            ProposalSpec::UniformCube { .. } => {
                return Err(Error::InvalidSampler("cube proposals are not coordinate-wise".into()))
            }
        };
        for (j, v) in row.into_iter().enumerate() {
            if j != kx && v > S::zero() {
                let mut py = px.clone();
                py[coord] = j;
                p[(x, space.linear_index(&py)?)] = v;
            }
        }
    }
    finish_rows(p)
}

/// Transition probabilities along one line for the slice update from index `x`.
fn slice_line_row<S: Scalar>(line: &[S], x: usize, temperature: S, w: i64, max_steps: Option<usize>) -> Vec<S> {
    let n = line.len();
    let ex = line[x];
    let mut thresholds: Vec<S> = line.iter().copied().filter(|&e| e >= ex && e.is_finite()).collect();
    thresholds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    thresholds.dedup();
    let mut row = vec![S::zero(); n];
    let x = x as i64;
    for (t, &level) in thresholds.iter().enumerate() {
        let upper = thresholds.get(t + 1).map_or(S::zero(), |&next| (-(next - ex) / temperature).exp());
        let p_level = (-(level - ex) / temperature).exp() - upper;
        if p_level <= S::zero() {
            continue;
        }
        let in_slice = |j: i64| j >= 0 && (j as usize) < n && line[j as usize] <= level;
        let mut memo: HashMap<(i64, i64), Vec<S>> = HashMap::new();
        let splits: Vec<(usize, S)> = match max_steps {
            None => vec![(0, S::one())],
            Some(ms) => (0..ms).map(|j| (j, S::one() / S::from_usize_lossy(ms))).collect(),
        };
        for r in 0..w {
            for &(jsplit, p_split) in &splits {
                let mut left = x - r;
                let mut right = left + w;
                match max_steps {
                    None => {
                        while in_slice(left) {
                            left -= w;
                        }
                        while in_slice(right) {
                            right += w;
                        }
                    }
                    Some(ms) => {
                        let (mut j, mut k) = (jsplit, ms - 1 - jsplit);
                        while j > 0 && in_slice(left) {
                            left -= w;
                            j -= 1;
                        }
                        while k > 0 && in_slice(right) {
                            right += w;
                            k -= 1;
                        }
                    }
                }
                let dist = shrink_distribution(left, right, x, n, &in_slice, &mut memo);
                let weight = p_level * p_split / S::from_i64(w).unwrap();
                for (o, &d) in row.iter_mut().zip(&dist) {
                    *o = *o + weight * d;
                }
            }
        }
    }
    row
}

/// Landing distribution of shrinkage from `[left, right)` around `x`.
fn shrink_distribution<S: Scalar>(
    left: i64,
    right: i64,
    x: i64,
    n: usize,
    in_slice: &impl Fn(i64) -> bool,
    memo: &mut HashMap<(i64, i64), Vec<S>>,
) -> Vec<S> {
    if let Some(d) = memo.get(&(left, right)) {
        return d.clone();
    }
    let mut dist = vec![S::zero(); n];
    let p = S::one() / S::from_i64(right - left).unwrap();
    for y in left..right {
        if in_slice(y) {
            dist[y as usize] = dist[y as usize] + p;
        } else {
            let sub = if y < x {
                shrink_distribution(y + 1, right, x, n, in_slice, memo)
            } else {
                shrink_distribution(left, y, x, n, in_slice, memo)
            };
            for (d, s) in dist.iter_mut().zip(sub) {
                *d = *d + p * s;
            }
        }
    }
    memo.insert((left, right), dist.clone());
    dist
}

/// Kernel of one sweep: every coordinate once in ascending order (one step for cube proposals).
pub fn sweep_kernel<S: Scalar, M: EnergyModel<S>>(
    target: &EnergyTarget<S, M>,
    proposal: ProposalSpec<S>,
) -> Result<TransitionMatrix<S>> {
    if let ProposalSpec::UniformCube { width } = proposal {
        return cube_kernel(target, width);
    }
    let dims = target.space().dims();
    let mut k = coordinate_kernel(target, 0, proposal)?.matrix().clone();
    for c in 1..dims {
        k = k.mul(coordinate_kernel(target, c, proposal)?.matrix())?;
    }
    TransitionMatrix::new(k)
}

/// Kernel of one iteration (`updates_per_iteration` updates from coordinate 0).
pub fn iteration_kernel<S: Scalar, M: EnergyModel<S>>(
    target: &EnergyTarget<S, M>,
    config: &SamplerConfig<S>,
) -> Result<TransitionMatrix<S>> {
    let dims = target.space().dims();
    let singles: Vec<Matrix<S>> = match config.proposal {
        ProposalSpec::UniformCube { width } => vec![cube_kernel(target, width)?.matrix().clone()],
        p => (0..dims).map(|c| Ok(coordinate_kernel(target, c, p)?.matrix().clone())).collect::<Result<_>>()?,
    };
    let mut k = singles[0].clone();
    for u in 1..config.updates_per_iteration {
        k = k.mul(&singles[u % singles.len()])?;
    }
    TransitionMatrix::new(k)
}
