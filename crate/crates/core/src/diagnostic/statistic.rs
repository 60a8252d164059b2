use crate::chain::EmpiricalCounts;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Per-state weights `f_i = pihat_i / exp(-E_i)` and their mean, over the
/// finite-energy states in index order.
///
/// For high energies the `f_i` can overflow to infinity. The statistic itself
/// is always taken from [`VnValue`], which is computed on a shifted log scale.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunctionState<S> {
    pub f: Vec<S>,
    pub f_bar: S,
    pub n: u64,
    pub m: usize,
}

/// `V_n` with its logarithm. `ln_value` stays finite when `value` would overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VnValue<S> {
    pub value: S,
    pub ln_value: S,
}

impl<S: Scalar> VnValue<S> {
    pub fn from_ln(ln_value: S) -> Self {
        VnValue { value: ln_value.exp(), ln_value }
    }
}

/// `V_n = (n/m) sum_i (f_i - f_bar)^2`, evaluated on a log scale.
///
/// `energies[i]` is the energy of state `i` in the same units as the counts'
/// target (divide by `T` beforehand for tempered targets). Unvisited states
/// have `f_i = 0`. States of infinite energy carry no mass and are left out
/// of the statistic entirely, so `m` counts the finite-energy states.
pub fn compute_vn<S: Scalar>(counts: &EmpiricalCounts, energies: &[S]) -> Result<(VnValue<S>, WeightFunctionState<S>)> {
    if energies.len() != counts.state_count() {
        return Err(Error::Shape { expected: counts.state_count(), got: energies.len() });
    }
    let m = energies.iter().filter(|&&e| e != S::infinity()).count();
    if m == 0 {
        return Err(Error::InvalidGrid("no state has positive mass".into()));
    }
    let n = counts.n();
    if n == 0 {
        return Err(Error::EmptyTrace { burn_in: 0 });
    }
    let ln_n = S::from_u64(n).unwrap().ln();
    let ln_f: Vec<Option<S>> = counts
        .counts()
        .iter()
        .zip(energies)
        .map(|(&c, &e)| (c > 0).then(|| S::from_u64(c).unwrap().ln() - ln_n + e))
        .collect();
    if ln_f.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("visited state with non-finite energy".into()));
    }
    let shift = ln_f.iter().flatten().copied().fold(S::neg_infinity(), S::max);
    let g: Vec<S> = ln_f
        .iter()
        .zip(energies)
        .filter(|(_, &e)| e != S::infinity())
        .map(|(v, _)| v.map_or(S::zero(), |l| (l - shift).exp()))
        .collect();
    let mf = S::from_usize_lossy(m);
    let g_bar = g.iter().copied().sum::<S>() / mf;
    let ss: S = g.iter().map(|&x| (x - g_bar) * (x - g_bar)).sum();
    let ln_value = ln_n - mf.ln() + S::lit(2.0) * shift + ss.ln();

    let scale = shift.exp();
    let f: Vec<S> = g.iter().map(|&x| if x == S::zero() { x } else { x * scale }).collect();
    let state = WeightFunctionState { f_bar: g_bar * scale, f, n, m };
    Ok((VnValue::from_ln(ln_value), state))
}

/// Energies `E_i / T` shifted so the minimum is zero. `V_n` is computed on
/// these during annealing; the shift only rescales `V_n` by a constant.
pub fn tempered_energies<S: Scalar>(energies: &[S], temperature: S) -> Vec<S> {
    let min = energies.iter().copied().fold(S::infinity(), S::min);
    energies.iter().map(|&e| (e - min) / temperature).collect()
}
