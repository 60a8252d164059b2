//! Ten-dimensional funnel: `X ~ N(0, 9)` and `Y_i | X = x ~ N(0, e^x)`.
//!
//! On a finite grid the neck is not resolved once `e^{x/2}` falls well below
//! the spacing: every `y_i` then sits on the single point 0 and the grid
//! density in `x` grows like `exp(-x^2/18 - 9x/2)`. Over `(-30, 30)` at
//! width 0.01 this makes the far left end carry most of the grid mass, so
//! the X-marginal reference used by the diagnostic is the continuous
//! `N(0, 9)` restricted to the grid, not the grid marginal.

use crate::chain::GridSpace;
use crate::error::{Error, Result};
use crate::samplers::EnergyModel;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunnelSpec<S> {
    pub x_sd: S,
    pub dims: usize,
    pub bound: S,
    pub width: S,
}

impl<S: Scalar> Default for FunnelSpec<S> {
    fn default() -> Self {
        FunnelSpec { x_sd: S::lit(3.0), dims: 10, bound: S::lit(30.0), width: S::lit(0.01) }
    }
}

/// Start quantiles of the X marginal used for parallel chains.
pub const START_QUANTILES: [f64; 11] = [0.1, 0.2, 0.3, 0.4, 0.45, 0.5, 0.55, 0.6, 0.7, 0.8, 0.9];

/// Funnel energy on the grid `(-bound, bound)^dims`; coordinate 0 is `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunnelModel<S> {
    spec: FunnelSpec<S>,
    space: GridSpace<S>,
}

impl<S: Scalar> FunnelModel<S> {
    pub fn new(spec: FunnelSpec<S>) -> Result<Self> {
        if spec.dims < 2 {
            return Err(Error::Domain("the funnel needs X and at least one Y".into()));
        }
        if !(spec.x_sd > S::zero()) {
            return Err(Error::Domain(format!("x_sd = {} must be positive", spec.x_sd)));
        }
        let space = GridSpace::cube(spec.dims, -spec.bound, spec.bound, spec.width)?;
        Ok(FunnelModel { spec, space })
    }

    pub fn spec(&self) -> &FunnelSpec<S> {
        &self.spec
    }

    /// `x^2 / (2 sd^2) + sum_i [y_i^2 / (2 e^x) + x / 2]`.
    pub fn energy_at(&self, x: S, ys: impl IntoIterator<Item = S>) -> S {
        let two = S::lit(2.0);
        let inv = (-x).exp() / two;
        let half_x = x / two;
        let mut e = x * x / (two * self.spec.x_sd * self.spec.x_sd);
        for y in ys {
            e = e + y * y * inv + half_x;
        }
        e
    }

    /// Energies `-ln q_i` of the grid-restricted `N(0, sd^2)` masses
    /// `q_i ∝ exp(-x_i^2 / (2 sd^2))`, indexed by X grid point.
    pub fn x_marginal_energies(&self) -> Vec<S> {
        let two = S::lit(2.0);
        let v = two * self.spec.x_sd * self.spec.x_sd;
        let raw: Vec<S> = (0..self.space.points(0))
            .map(|i| {
                let x = self.space.value(0, i);
                x * x / v
            })
            .collect();
        let ln_z = raw.iter().map(|&e| (-e).exp()).sum::<S>().ln();
        raw.into_iter().map(|e| e + ln_z).collect()
    }

    /// Grid point with `X` at the `q`-quantile of `N(0, sd^2)` and every `Y_i = 1`.
    pub fn quantile_start(&self, q: f64) -> Result<Vec<usize>> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain(format!("quantile {q} must lie in (0, 1)")));
        }
        let x = self.spec.x_sd * S::lit(crate::special::quantile(q));
        self.start_at(x)
    }

    /// Grid point with `X = x` and every `Y_i = 1`.
    pub fn start_at(&self, x: S) -> Result<Vec<usize>> {
        let mut coords = vec![S::one(); self.spec.dims];
        coords[0] = x;
        self.space.encode_point(&coords)
    }

    /// Unnormalized grid marginal of `X`: `sum_y exp(-E(x, y))` for every
    /// X grid point, returned as logarithms. The Y sum factorizes into a
    /// power of a one-dimensional sum.
    pub fn grid_x_log_marginal(&self) -> Vec<S> {
        let n = self.space.points(1);
        let k = S::from_usize_lossy(self.spec.dims - 1);
        let two = S::lit(2.0);
        (0..self.space.points(0))
            .map(|i| {
                let x = self.space.value(0, i);
                let inv = (-x).exp() / two;
                let line: S = (0..n)
                    .map(|j| {
                        let y = self.space.value(1, j);
                        (-y * y * inv - x / two).exp()
                    })
                    .sum();
                -x * x / (two * self.spec.x_sd * self.spec.x_sd) + k * line.ln()
            })
            .collect()
    }
}

impl<S: Scalar> EnergyModel<S> for FunnelModel<S> {
    fn space(&self) -> &GridSpace<S> {
        &self.space
    }

    fn energy(&self, point: &[usize]) -> S {
        let x = self.space.value(0, point[0]);
        self.energy_at(x, point[1..].iter().enumerate().map(|(d, &j)| self.space.value(d + 1, j)))
    }
}

/// Energy of a grid state given by its per-dimension indices.
pub fn funnel_energy<S: Scalar>(point: &[usize], model: &FunnelModel<S>) -> Result<S> {
    if !model.space().contains(point) {
        return Err(Error::Shape { expected: model.spec.dims, got: point.len() });
    }
    Ok(model.energy(point))
}
