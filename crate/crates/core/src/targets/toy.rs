use crate::error::Result;
use crate::samplers::TabulatedEnergy;
use crate::scalar::Scalar;

/// A small tabulated target with its exact distribution at `T = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyTarget<S> {
    pub name: &'static str,
    pub energy: TabulatedEnergy<S>,
    pub pi: Vec<S>,
}

impl<S: Scalar> ToyTarget<S> {
    fn from_energy(name: &'static str, energy: TabulatedEnergy<S>) -> Self {
        let pi = energy.distribution(S::one());
        ToyTarget { name, energy, pi }
    }
}

/// `m` states of equal energy.
pub fn uniform<S: Scalar>(m: usize) -> Result<ToyTarget<S>> {
    Ok(ToyTarget::from_energy("uniform", TabulatedEnergy::line(vec![S::zero(); m])?))
}

/// Line of `m` states: two flat wells separated by a barrier over the middle
/// third. An infinite barrier makes the wells mutually unreachable.
pub fn two_well<S: Scalar>(m: usize, barrier: S) -> Result<ToyTarget<S>> {
    let (lo, hi) = (m / 3, (2 * m).div_ceil(3));
    let energies = (0..m).map(|i| if (lo..hi).contains(&i) { barrier } else { S::zero() }).collect();
    Ok(ToyTarget::from_energy("two-well", TabulatedEnergy::line(energies)?))
}

/// Energies `(ln 4, ln 2, ln 4)`, so `pi = (1/4, 1/2, 1/4)`.
pub fn three_state<S: Scalar>() -> Result<ToyTarget<S>> {
    let (l4, l2) = (S::lit(4.0).ln(), S::lit(2.0).ln());
    Ok(ToyTarget::from_energy("three-state", TabulatedEnergy::line(vec![l4, l2, l4])?))
}

/// The standard collection: uniform on 5 states, a 9-state two-well with
/// barrier height 3, and the three-state target.
pub fn toy_targets<S: Scalar>() -> Result<Vec<ToyTarget<S>>> {
    Ok(vec![uniform(5)?, two_well(9, S::lit(3.0))?, three_state()?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::{cube_kernel, EnergyTarget};

    #[test]
    fn exact_distributions() {
        let u = uniform::<f64>(4).unwrap();
        assert!(u.pi.iter().all(|&p| (p - 0.25).abs() < 1e-15));
        let t = three_state::<f64>().unwrap();
        for (p, w) in t.pi.iter().zip([0.25, 0.5, 0.25]) {
            assert!((p - w).abs() < 1e-15);
        }
        assert_eq!(toy_targets::<f32>().unwrap().len(), 3);
    }

    #[test]
    fn infinite_barrier_splits_the_chain() {
        let w = two_well::<f64>(9, f64::INFINITY).unwrap();
        assert_eq!(&w.energy.energies()[3..6], &[f64::INFINITY; 3]);
        let target = EnergyTarget::new(&w.energy);
        let p = cube_kernel(&target, 4.0).unwrap();
        assert!(!p.is_irreducible());
        let reach = p.reachable_from(0);
        assert!(reach[..3].iter().all(|&b| b) && !reach[6..].iter().any(|&b| b));
        let finite = two_well::<f64>(9, 3.0).unwrap();
        assert!(cube_kernel(&EnergyTarget::new(&finite.energy), 4.0).unwrap().is_irreducible());
    }
}
