use rand::Rng;

use crate::chain::GridSpace;
use crate::scalar::Scalar;
use crate::special;

use super::proposal::{ChainState, HastingsCorrection};
use super::target::{energy_delta, EnergyModel, EnergyTarget};

/// Metropolis decision on the log acceptance ratio. Non-negative ratios
/// accept without consuming a uniform draw.
fn accept<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    if log_ratio >= 0.0 {
        return true;
    }
    if log_ratio.is_nan() || log_ratio == f64::NEG_INFINITY {
        return false;
    }
    rng.random::<f64>().ln() < log_ratio
}

/// Probability that a uniform offset on `[-width/2, width/2]`, divided by
/// the grid spacing and rounded, equals `delta`.
pub fn cube_offset_probability<S: Scalar>(delta: i64, width: S, spacing: S) -> S {
    let half = width / S::lit(2.0);
    let d = S::from_i64(delta).unwrap();
    let lo = ((d - S::lit(0.5)) * spacing).max(-half);
    let hi = ((d + S::lit(0.5)) * spacing).min(half);
    if hi > lo {
        (hi - lo) / width
    } else {
        S::zero()
    }
}

/// One Metropolis step with a joint uniform-cube proposal. Proposals that
/// leave the grid are rejected.
pub fn mh_cube_step<S, M, R>(state: &mut ChainState<S>, target: &EnergyTarget<S, M>, width: S, rng: &mut R) -> bool
where
    S: Scalar,
    M: EnergyModel<S>,
    R: Rng + ?Sized,
{
    let space = target.space();
    let h = space.width();
    let mut proposal = state.point.clone();
    for (d, k) in proposal.iter_mut().enumerate() {
        let u = S::lit(rng.random::<f64>());
        let offset = (width * (u - S::lit(0.5)) / h).round().to_i64().unwrap_or(i64::MAX);
        let next = *k as i64 + offset;
        if next < 0 || next >= space.points(d) as i64 {
            return false;
        }
        *k = next as usize;
    }
    if proposal == state.point {
        return true;
    }
    let e_new = target.energy(&proposal);
    let log_ratio = -(energy_delta(e_new, state.energy) / target.temperature()).as_f64();
    if accept(log_ratio, rng) {
        state.point = proposal;
        state.energy = e_new;
        true
    } else {
        false
    }
}

/// Grid cell owned by index `j` in dimension `dim`, clipped to the bounds.
pub(crate) fn cell_bounds<S: Scalar>(space: &GridSpace<S>, dim: usize, j: usize) -> (f64, f64) {
    let h = space.width().as_f64();
    let v = space.value(dim, j).as_f64();
    let lo = if j == 0 { space.lower(dim).as_f64() } else { v - h / 2.0 };
    let hi = if j + 1 == space.points(dim) { space.upper(dim).as_f64() } else { v + h / 2.0 };
    (lo, hi)
}

/// Probability that the truncated-normal proposal from grid index `from`
/// lands in the cell of grid index `to`.
pub fn truncated_normal_cell_probability<S: Scalar>(
    space: &GridSpace<S>,
    dim: usize,
    sd: S,
    from: usize,
    to: usize,
) -> f64 {
    let sd = sd.as_f64();
    let mu = space.value(dim, from).as_f64();
    let (lo, hi) = cell_bounds(space, dim, to);
    let num = special::interval_mass((lo - mu) / sd, (hi - mu) / sd);
    let den = special::interval_mass((space.lower(dim).as_f64() - mu) / sd, (space.upper(dim).as_f64() - mu) / sd);
    num / den
}

/// Single-coordinate Metropolis-Hastings step with a normal proposal
/// truncated to the coordinate bounds and rounded to the grid.
pub fn mh_coordinate_step<S, M, R>(
    state: &mut ChainState<S>,
    coord: usize,
    target: &EnergyTarget<S, M>,
    sd: S,
    correction: HastingsCorrection,
    rng: &mut R,
) -> bool
where
    S: Scalar,
    M: EnergyModel<S>,
    R: Rng + ?Sized,
{
    let space = target.space();
    let from = state.point[coord];
    let mu = space.value(coord, from).as_f64();
    let (lo, hi) = (space.lower(coord).as_f64(), space.upper(coord).as_f64());
    let sdf = sd.as_f64();
    let z = loop {
        let z: f64 = mu + sdf * rng.sample::<f64, _>(rand_distr::StandardNormal);
        if z > lo && z < hi {
            break z;
        }
    };
    let to = space.encode_coord(coord, S::lit(z)).expect("draw inside bounds");
    if to == from {
        return true;
    }
    let mut proposal = state.point.clone();
    proposal[coord] = to;
    let e_new = target.energy(&proposal);
    let mut log_ratio = -(energy_delta(e_new, state.energy) / target.temperature()).as_f64();
    if correction == HastingsCorrection::Corrected {
        let fwd = truncated_normal_cell_probability(space, coord, sd, from, to);
        let rev = truncated_normal_cell_probability(space, coord, sd, to, from);
        log_ratio += rev.ln() - fwd.ln();
    }
    if accept(log_ratio, rng) {
        state.point = proposal;
        state.energy = e_new;
        true
    } else {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::TabulatedEnergy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn state<M: EnergyModel<f64>>(t: &EnergyTarget<f64, M>, k: usize) -> ChainState<f64> {
        ChainState { point: vec![k], energy: t.energy(&[k]) }
    }

    #[test]
    fn downhill_always_accepted() {
        let e = TabulatedEnergy::line(vec![0.0, 5.0]).unwrap();
        let t = EnergyTarget::new(&e);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let mut s = state(&t, 1);
            // width 3 on spacing 1: offsets -1, 0, 1 (and out of range)
            mh_cube_step(&mut s, &t, 3.0, &mut rng);
            assert!(s.point[0] <= 1);
        }
        let mut moved = 0;
        for _ in 0..1000 {
            let mut s = state(&t, 1);
            if mh_cube_step(&mut s, &t, 3.0, &mut rng) && s.point[0] == 0 {
                moved += 1;
            }
        }
        // P(offset = -1) = 1/3, always accepted
        assert!((moved as f64 / 1000.0 - 1.0 / 3.0).abs() < 0.05);
    }

    #[test]
    fn flat_target_accepts_everything() {
        let e = TabulatedEnergy::line(vec![1.0, 1.0]).unwrap();
        let t = EnergyTarget::new(&e);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut s = state(&t, 0);
        let mut accepted = 0;
        let mut proposals = 0;
        for _ in 0..100_000 {
            // truncation keeps every draw on the grid
            let before = s.point[0];
            let ok = mh_coordinate_step(&mut s, 0, &t, 1.0, HastingsCorrection::Uncorrected, &mut rng);
            proposals += 1;
            accepted += ok as u32;
            assert!(ok, "equal energies must be accepted (from {before})");
        }
        assert_eq!(accepted, proposals);
    }

    #[test]
    fn cube_offsets_sum_to_one_and_are_symmetric() {
        for &(w, h) in &[(3.0, 1.0), (2.5, 0.1), (12.0, 0.1), (0.05, 0.1)] {
            let kmax = (w / h) as i64 + 2;
            let total: f64 = (-kmax..=kmax).map(|d| cube_offset_probability(d, w, h)).sum();
            assert!((total - 1.0).abs() < 1e-12, "w={w} h={h}");
            for d in 0..kmax {
                assert_eq!(cube_offset_probability(d, w, h), cube_offset_probability(-d, w, h));
            }
        }
    }

    #[test]
    fn truncated_cells_sum_to_one() {
        let g = crate::chain::GridSpace::cube(1, -1.0, 1.0, 0.25).unwrap();
        for from in 0..g.points(0) {
            let total: f64 = (0..g.points(0)).map(|to| truncated_normal_cell_probability(&g, 0, 0.7, from, to)).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
