//! Univariate slice sampling on a grid line.
//!
//! The sampler works in grid-index space. The initial interval spans
//! `W = max(1, round(interval / width))` cells and is placed at a uniformly
//! random alignment around the current index. Stepping out moves both ends
//! on the same lattice of spacing `W`: the left end is the first index of
//! the interval, the right end is one past the last. An end is extended
//! while the index it points at lies in the slice. Shrinkage draws indices
//! uniformly from `[left, right)` and pulls the end on the far side of a
//! rejected draw past it. Indices off the grid have zero mass.
//!
//! Because the current index is always in the slice and every rejection
//! shrinks the interval, shrinkage terminates after at most `right - left`
//! draws.

use rand::Rng;
use rand_distr::Exp1;

use crate::scalar::Scalar;

use super::proposal::ChainState;
use super::target::{EnergyModel, EnergyTarget};

/// Initial interval length in cells.
pub fn interval_cells<S: Scalar>(interval: S, spacing: S) -> i64 {
    (interval / spacing).round().to_i64().unwrap_or(1).max(1)
}

/// Energy of `point` with coordinate `coord` set to `j`, or `None` when `j` is off the grid.
pub(crate) fn line_energy<S, M>(target: &EnergyTarget<S, M>, point: &mut [usize], coord: usize, j: i64) -> Option<S>
where
    S: Scalar,
    M: EnergyModel<S>,
{
    if j < 0 || j >= target.space().points(coord) as i64 {
        return None;
    }
    let saved = point[coord];
    point[coord] = j as usize;
    let e = target.energy(point);
    point[coord] = saved;
    Some(e)
}

/// One slice-sampling update of coordinate `coord`. Returns whether the state moved.
pub fn slice_step<S, M, R>(
    state: &mut ChainState<S>,
    coord: usize,
    target: &EnergyTarget<S, M>,
    interval: S,
    max_steps: Option<usize>,
    rng: &mut R,
) -> bool
where
    S: Scalar,
    M: EnergyModel<S>,
    R: Rng + ?Sized,
{
    let space = target.space();
    let w = interval_cells(interval, space.width());
    let x = state.point[coord] as i64;
    // vertical level in energy units: E* = E_x + T * Exp(1)
    let level = state.energy + target.temperature() * S::lit(rng.sample::<f64, _>(Exp1));
    let mut point = state.point.clone();
    let mut left = x - rng.random_range(0..w);
    let mut right = left + w;
    {
        let mut in_slice = |j: i64| line_energy(target, &mut point, coord, j).is_some_and(|e| e <= level);
        match max_steps {
            None => {
                while in_slice(left) {
                    left -= w;
                }
                while in_slice(right) {
                    right += w;
                }
            }
            Some(m) => {
                let mut j = rng.random_range(0..m);
                let mut k = m - 1 - j;
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
    }

    loop {
        let y = rng.random_range(left..right);
        if y == x {
            return false;
        }
        if let Some(e) = line_energy(target, &mut point, coord, y).filter(|&e| e <= level) {
            state.point[coord] = y as usize;
            state.energy = e;
            return true;
        }
        if y < x {
            left = y + 1;
        } else {
            right = y;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::TabulatedEnergy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flat_line_is_uniform() {
        let e = TabulatedEnergy::line(vec![0.0; 5]).unwrap();
        let t = EnergyTarget::new(&e);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut hits = [0u32; 5];
        for _ in 0..50_000 {
            let mut s = ChainState { point: vec![2], energy: 0.0 };
            slice_step(&mut s, 0, &t, 1.0, None, &mut rng);
            hits[s.point[0]] += 1;
        }
        for h in hits {
            assert!((h as f64 / 50_000.0 - 0.2).abs() < 0.01, "{hits:?}");
        }
    }

    #[test]
    fn unique_mode_with_steep_walls_stays() {
        // neighbours are 1e6 above the mode; an Exp(1) level never reaches them
        let e = TabulatedEnergy::line(vec![1e6, 0.0, 1e6]).unwrap();
        let t = EnergyTarget::new(&e);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let mut s = ChainState { point: vec![1], energy: 0.0 };
            assert!(!slice_step(&mut s, 0, &t, 2.0, Some(3), &mut rng));
            assert_eq!(s.point, vec![1]);
        }
    }

    #[test]
    fn interval_in_cells() {
        assert_eq!(interval_cells(1.0, 0.01), 100);
        assert_eq!(interval_cells(0.1, 0.1), 1);
        assert_eq!(interval_cells(0.001, 0.1), 1);
    }
}
