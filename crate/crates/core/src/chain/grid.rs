use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Index of a state in a finite (enumerable) grid, 0-based.
pub type StateIndex = usize;

/// A rectangular product grid with uniform spacing.
///
/// Points in dimension `d` are `lower[d] + k * width` for
/// `k = 0..points[d]`. Linear indices put dimension 0 in the fastest
/// varying position.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpace<S> {
    lower: Vec<S>,
    upper: Vec<S>,
    width: S,
    points: Vec<usize>,
}

impl<S: Scalar> GridSpace<S> {
    pub fn new(lower: Vec<S>, upper: Vec<S>, width: S) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidGrid(format!(
                "bounds must be nonempty and equal length (got {} and {})",
                lower.len(),
                upper.len()
            )));
        }
        if !(width > S::zero()) || !width.is_finite() {
            return Err(Error::InvalidGrid(format!("width must be positive, got {width}")));
        }
        let mut points = Vec::with_capacity(lower.len());
        for (d, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidGrid(format!("dimension {d}: upper {hi} must exceed lower {lo}")));
            }
            let span = (hi - lo) / width;
            let n = (span + span * S::lit(1e-9)).floor().to_usize().ok_or(Error::TooManyStates)? + 1;
            if n < 2 {
                return Err(Error::InvalidGrid(format!("dimension {d} has fewer than two grid points")));
            }
            points.push(n);
        }
        Ok(GridSpace { lower, upper, width, points })
    }

    /// Same bounds in every dimension.
    pub fn cube(dims: usize, lower: S, upper: S, width: S) -> Result<Self> {
        Self::new(vec![lower; dims], vec![upper; dims], width)
    }

    pub fn dims(&self) -> usize {
        self.lower.len()
    }

    pub fn width(&self) -> S {
        self.width
    }

    pub fn lower(&self, dim: usize) -> S {
        self.lower[dim]
    }

    pub fn upper(&self, dim: usize) -> S {
        self.upper[dim]
    }

    pub fn points(&self, dim: usize) -> usize {
        self.points[dim]
    }

    /// Total number of states, or `TooManyStates` when it overflows `usize`.
    pub fn state_count(&self) -> Result<usize> {
        self.points.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n)).ok_or(Error::TooManyStates)
    }

    pub fn value(&self, dim: usize, index: usize) -> S {
        self.lower[dim] + S::from_usize_lossy(index) * self.width
    }

    pub fn coords(&self, point: &[usize]) -> Vec<S> {
        point.iter().enumerate().map(|(d, &k)| self.value(d, k)).collect()
    }

    /// Nearest grid index for a coordinate value; exact midpoints go to the
    /// point farther from zero.
    pub fn encode_coord(&self, dim: usize, v: S) -> Result<usize> {
        let (lo, hi) = (self.lower[dim], self.upper[dim]);
        if !(v >= lo && v <= hi) {
            return Err(Error::OutOfDomain { dim, value: v.as_f64(), lower: lo.as_f64(), upper: hi.as_f64() });
        }
        let last = self.points[dim] - 1;
        let t = (v - lo) / self.width;
        let k = t.floor().to_usize().unwrap_or(0).min(last);
        if k == last {
            return Ok(last);
        }
        let frac = t - S::from_usize_lossy(k);
        let half = S::lit(0.5);
        let tie_down = frac == half && self.value(dim, k).abs() > self.value(dim, k + 1).abs();
        let idx = if frac < half || tie_down { k } else { k + 1 };
        Ok(idx)
    }

    pub fn encode_point(&self, coords: &[S]) -> Result<Vec<usize>> {
        if coords.len() != self.dims() {
            return Err(Error::Shape { expected: self.dims(), got: coords.len() });
        }
        coords.iter().enumerate().map(|(d, &v)| self.encode_coord(d, v)).collect()
    }

    /// Linear index of the grid point nearest to `coords`.
    pub fn encode_state(&self, coords: &[S]) -> Result<StateIndex> {
        let p = self.encode_point(coords)?;
        self.linear_index(&p)
    }

    pub fn contains(&self, point: &[usize]) -> bool {
        point.len() == self.dims() && point.iter().zip(&self.points).all(|(&k, &n)| k < n)
    }

    pub fn linear_index(&self, point: &[usize]) -> Result<StateIndex> {
        if point.len() != self.dims() {
            return Err(Error::Shape { expected: self.dims(), got: point.len() });
        }
        let mut idx = 0usize;
        let mut stride = 1usize;
        for (d, (&k, &n)) in point.iter().zip(&self.points).enumerate() {
            if k >= n {
                return Err(Error::InvalidGrid(format!("index {k} out of range in dimension {d}")));
            }
            idx = k.checked_mul(stride).and_then(|v| v.checked_add(idx)).ok_or(Error::TooManyStates)?;
            stride = stride.saturating_mul(n);
        }
        Ok(idx)
    }

    pub fn decode(&self, mut index: StateIndex) -> Result<Vec<usize>> {
        let m = self.state_count()?;
        if index >= m {
            return Err(Error::InvalidGrid(format!("state {index} out of range (m = {m})")));
        }
        Ok(self
            .points
            .iter()
            .map(|&n| {
                let k = index % n;
                index /= n;
                k
            })
            .collect())
    }
}
