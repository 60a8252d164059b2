use crate::chain::{GridSpace, StateIndex};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Energy `E` over the points of a grid, `pi ∝ exp(-E)`.
///
/// Points are per-dimension grid indices. `+inf` marks a zero-mass state.
pub trait EnergyModel<S: Scalar>: Sync {
    fn space(&self) -> &GridSpace<S>;
    fn energy(&self, point: &[usize]) -> S;
}

impl<S: Scalar, M: EnergyModel<S> + ?Sized> EnergyModel<S> for &M {
    fn space(&self) -> &GridSpace<S> {
        (**self).space()
    }
    fn energy(&self, point: &[usize]) -> S {
        (**self).energy(point)
    }
}

/// An energy model at a temperature; the effective energy is `E / T`.
#[derive(Debug, Clone)]
pub struct EnergyTarget<S, M> {
    model: M,
    temperature: S,
}

impl<S: Scalar, M: EnergyModel<S>> EnergyTarget<S, M> {
    pub fn new(model: M) -> Self {
        EnergyTarget { model, temperature: S::one() }
    }

    pub fn with_temperature(model: M, temperature: S) -> Result<Self> {
        if !(temperature > S::zero()) || !temperature.is_finite() {
            return Err(Error::Domain(format!("temperature must be positive, got {temperature}")));
        }
        Ok(EnergyTarget { model, temperature })
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn space(&self) -> &GridSpace<S> {
        self.model.space()
    }

    pub fn temperature(&self) -> S {
        self.temperature
    }

    pub fn energy(&self, point: &[usize]) -> S {
        self.model.energy(point)
    }

    pub fn effective_energy(&self, point: &[usize]) -> S {
        self.model.energy(point) / self.temperature
    }
}

/// Energies stored for every state of an enumerable grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedEnergy<S> {
    space: GridSpace<S>,
    energies: Vec<S>,
}

impl<S: Scalar> TabulatedEnergy<S> {
    pub fn new(space: GridSpace<S>, energies: Vec<S>) -> Result<Self> {
        let m = space.state_count()?;
        if energies.len() != m {
            return Err(Error::Shape { expected: m, got: energies.len() });
        }
        if energies.iter().any(|e| e.is_nan() || *e == S::neg_infinity()) {
            return Err(Error::Domain("energies must be finite or +inf".into()));
        }
        Ok(TabulatedEnergy { space, energies })
    }

    /// One-dimensional grid `0, 1, .., m-1` with the given energies.
    pub fn line(energies: Vec<S>) -> Result<Self> {
        let m = energies.len();
        if m < 2 {
            return Err(Error::InvalidGrid("need at least two states".into()));
        }
        let space = GridSpace::new(vec![S::zero()], vec![S::from_usize_lossy(m - 1)], S::one())?;
        Self::new(space, energies)
    }

    /// Energies `-ln pi_i`, so that `Z = 1`.
    pub fn from_probabilities(space: GridSpace<S>, pi: &[S]) -> Result<Self> {
        Self::new(space, pi.iter().map(|&p| -p.ln()).collect())
    }

    /// Evaluates `model` at every state.
    pub fn from_model<M: EnergyModel<S> + ?Sized>(model: &M) -> Result<Self> {
        let space = model.space().clone();
        let m = space.state_count()?;
        let mut energies = Vec::with_capacity(m);
        for i in 0..m {
            energies.push(model.energy(&space.decode(i)?));
        }
        Self::new(space, energies)
    }

    pub fn energies(&self) -> &[S] {
        &self.energies
    }

    pub fn state_energy(&self, state: StateIndex) -> S {
        self.energies[state]
    }

    pub fn state_count(&self) -> usize {
        self.energies.len()
    }

    /// Exact `pi_i ∝ exp(-E_i / T)`.
    pub fn distribution(&self, temperature: S) -> Vec<S> {
        boltzmann(&self.energies, temperature)
    }

    /// `Z = sum exp(-E_i)`.
    pub fn partition_function(&self) -> S {
        self.energies.iter().map(|&e| (-e).exp()).sum()
    }
}

impl<S: Scalar> EnergyModel<S> for TabulatedEnergy<S> {
    fn space(&self) -> &GridSpace<S> {
        &self.space
    }
    fn energy(&self, point: &[usize]) -> S {
        let idx = self.space.linear_index(point).expect("point on grid");
        self.energies[idx]
    }
}

/// `e_new - e_old`, with moves out of a zero-mass state (`e_old = +inf`)
/// treated as downhill so the difference is never NaN.
pub(crate) fn energy_delta<S: Scalar>(e_new: S, e_old: S) -> S {
    if e_old == S::infinity() {
        if e_new == S::infinity() {
            S::zero()
        } else {
            S::neg_infinity()
        }
    } else {
        e_new - e_old
    }
}

/// Normalized `exp(-E_i / T)` computed with a max shift.
pub fn boltzmann<S: Scalar>(energies: &[S], temperature: S) -> Vec<S> {
    let min = energies.iter().copied().fold(S::infinity(), S::min);
    let w: Vec<S> = energies.iter().map(|&e| (-(e - min) / temperature).exp()).collect();
    let z: S = w.iter().copied().sum();
    w.into_iter().map(|v| v / z).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tempering_divides_energy() {
        let t = TabulatedEnergy::line(vec![0.0, 2.0, 4.0]).unwrap();
        let target = EnergyTarget::with_temperature(&t, 2.0).unwrap();
        assert_eq!(target.effective_energy(&[2]), 2.0);
        assert!(EnergyTarget::with_temperature(&t, 0.0).is_err());
    }

    #[test]
    fn distribution_matches_power_of_pi() {
        let pi = [0.2, 0.3, 0.5];
        let t = TabulatedEnergy::line(pi.iter().map(|p: &f64| -p.ln()).collect()).unwrap();
        let d = t.distribution(0.5);
        let z: f64 = pi.iter().map(|p| p * p).sum();
        for (got, p) in d.iter().zip(pi) {
            assert!((got - p * p / z).abs() < 1e-14);
        }
        assert!((t.partition_function() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn length_is_checked() {
        let g = GridSpace::cube(1, 0.0, 2.0, 1.0).unwrap();
        assert!(TabulatedEnergy::new(g, vec![0.0; 2]).is_err());
    }
}
