//! Asymptotic covariance `Sigma` of `W_n = sqrt(n) (pihat - pi)`.
//!
//! For an ergodic chain with kernel `P` and stationary law `pi`,
//!
//! `Sigma = diag(pi) - pi pi' + 2 diag(pi) sum_{l>=1} (P^l - 1 pi')`.
//!
//! Because `pi P = pi` and `P 1 = 1`, the lag terms are powers of
//! `D = P - 1 pi'`, which is what the series below iterates.

use log::warn;

use crate::chain::{check_detailed_balance, ChainTrace, TransitionMatrix};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Tail bounds above this trigger a warning.
pub const TAIL_WARNING: f64 = 1e-8;

/// Default lag cap for plug-in estimates.
pub const DEFAULT_LAG_CAP: usize = 100;

/// Largest state count the dense plug-in estimate accepts.
pub const PLUGIN_STATE_CAP: usize = 600;

/// `Sigma` truncated at `lags` with a geometric estimate of the neglected tail.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaEstimate<S> {
    pub sigma: Matrix<S>,
    pub lags: usize,
    pub tail_bound: S,
}

impl<S: Scalar> SigmaEstimate<S> {
    pub fn converged(&self) -> bool {
        self.tail_bound.as_f64() <= TAIL_WARNING
    }
}

/// Closed form `Sigma(i,i)` for a two-state indicator chain that stays put with probability `p_ii`.
pub fn sigma_analytic_mb<S: Scalar>(pi_i: S, p_ii: S) -> Result<S> {
    let one = S::one();
    let two = S::lit(2.0);
    if !(pi_i > S::zero() && pi_i < one) {
        return Err(Error::Domain(format!("pi_i = {pi_i} must lie in (0, 1)")));
    }
    let low = (two * pi_i - one).max(S::zero());
    if !(p_ii > low && p_ii < one) {
        return Err(Error::Domain(format!("p_ii = {p_ii} must lie in ({low}, 1)")));
    }
    Ok(pi_i * (one - pi_i) * (one + p_ii - two * pi_i) / (one - p_ii))
}

/// Diagonal of `Sigma` from per-state self-transition probabilities.
pub fn sigma_mb_diagonal<S: Scalar>(pi: &[S], p_diag: &[S]) -> Result<Vec<S>> {
    if pi.len() != p_diag.len() {
        return Err(Error::Shape { expected: pi.len(), got: p_diag.len() });
    }
    pi.iter().zip(p_diag).map(|(&a, &b)| sigma_analytic_mb(a, b)).collect()
}

/// `Sigma` of a reversible kernel, summing lags `1..=lag_cap`.
pub fn sigma_full_analytic<S: Scalar>(p: &TransitionMatrix<S>, pi: &[S], lag_cap: usize) -> Result<SigmaEstimate<S>> {
    let m = p.states();
    if pi.len() != m {
        return Err(Error::Shape { expected: m, got: pi.len() });
    }
    if lag_cap == 0 {
        return Err(Error::Domain("lag cap must be at least 1".into()));
    }
    let report = check_detailed_balance(p, pi, S::loose_eps())?;
    if !report.holds {
        let (i, j) = report.worst;
        return Err(Error::NotReversible { i, j, gap: report.gap.as_f64() });
    }

    let d = Matrix::from_fn(m, m, |i, j| p.get(i, j) - pi[j]);
    let mut power = d.clone();
    let mut sum = d.clone();
    let weighted_max = |q: &Matrix<S>| {
        let mut a = S::zero();
        for (i, &w) in pi.iter().enumerate() {
            for &v in q.row(i) {
                a = a.max(w * v.abs());
            }
        }
        a + a
    };
    let mut prev = weighted_max(&power);
    let mut last = prev;
    let mut lags = 1;
    while lags < lag_cap && last > S::zero() {
        power = power.mul(&d)?;
        sum = Matrix::from_fn(m, m, |i, j| sum[(i, j)] + power[(i, j)]);
        prev = last;
        last = weighted_max(&power);
        lags += 1;
    }
    let tail_bound = if last == S::zero() {
        S::zero()
    } else {
        let rho = last / prev;
        if rho < S::one() {
            last * rho / (S::one() - rho)
        } else {
            S::infinity()
        }
    };
    if tail_bound.as_f64() > TAIL_WARNING {
        warn!("Sigma series not converged at lag {lags}: tail bound {tail_bound}");
    }

    let two = S::lit(2.0);
    let sigma = Matrix::from_fn(m, m, |i, j| {
        let base = if i == j { pi[i] } else { S::zero() } - pi[i] * pi[j];
        base + two * pi[i] * sum[(i, j)]
    });
    Ok(SigmaEstimate { sigma, lags, tail_bound })
}

/// Counts of observed one-step moves `i -> j` among the retained draws, row-major.
pub fn transition_counts(trace: &ChainTrace) -> Vec<u64> {
    let m = trace.state_count();
    let mut c = vec![0u64; m * m];
    for w in trace.retained().windows(2) {
        c[w[0] * m + w[1]] += 1;
    }
    c
}

/// Reversible plug-in kernel: symmetrized move counts, normalized by row.
///
/// The returned `pi` is proportional to the symmetrized row totals, so the
/// pair satisfies detailed balance by construction. States with no observed
/// moves become absorbing with `pi_i = 0`; their rows and columns of
/// `Sigma` come out zero.
pub fn reversible_plugin_kernel<S: Scalar>(trace: &ChainTrace) -> Result<(TransitionMatrix<S>, Vec<S>)> {
    let m = trace.state_count();
    let c = transition_counts(trace);
    let sym = |i: usize, j: usize| c[i * m + j] + c[j * m + i];
    let totals: Vec<u64> = (0..m).map(|i| (0..m).map(|j| sym(i, j)).sum()).collect();
    let grand: u64 = totals.iter().sum();
    if grand == 0 {
        return Err(Error::SeriesTooShort { len: trace.retained().len(), max_lag: 1 });
    }
    let p = Matrix::from_fn(m, m, |i, j| {
        if totals[i] == 0 {
            if i == j {
                S::one()
            } else {
                S::zero()
            }
        } else {
            S::from_u64(sym(i, j)).unwrap() / S::from_u64(totals[i]).unwrap()
        }
    });
    let g = S::from_u64(grand).unwrap();
    let pi = totals.iter().map(|&t| S::from_u64(t).unwrap() / g).collect();
    Ok((TransitionMatrix::new(p)?, pi))
}

/// Plug-in `Sigma` from a trace via [`reversible_plugin_kernel`].
pub fn sigma_plugin<S: Scalar>(trace: &ChainTrace, lag_cap: usize) -> Result<SigmaEstimate<S>> {
    if trace.state_count() > PLUGIN_STATE_CAP {
        return Err(Error::TooManyStates);
    }
    let (p, pi) = reversible_plugin_kernel::<S>(trace)?;
    sigma_full_analytic(&p, &pi, lag_cap)
}

/// Observed stay probabilities `p_ii`, smoothed as `(stays + 1/2) / (moves + 1)`
/// so they lie strictly inside `(0, 1)`.
pub fn empirical_stay_probabilities<S: Scalar>(trace: &ChainTrace) -> Vec<S> {
    let m = trace.state_count();
    let mut stays = vec![0u64; m];
    let mut out = vec![0u64; m];
    for w in trace.retained().windows(2) {
        out[w[0]] += 1;
        if w[0] == w[1] {
            stays[w[0]] += 1;
        }
    }
    stays
        .iter()
        .zip(&out)
        .map(|(&s, &o)| (S::from_u64(s).unwrap() + S::lit(0.5)) / (S::from_u64(o).unwrap() + S::one()))
        .collect()
}

/// Diagonal `Sigma` from the closed form with empirical stay probabilities,
/// each clamped into the closed form's validity region.
pub fn sigma_mb_plugin<S: Scalar>(trace: &ChainTrace, pi: &[S]) -> Result<Vec<S>> {
    if pi.len() != trace.state_count() {
        return Err(Error::Shape { expected: trace.state_count(), got: pi.len() });
    }
    let stay = empirical_stay_probabilities::<S>(trace);
    let eps = S::lit(1e-9);
    pi.iter()
        .zip(stay)
        .map(|(&p, s)| {
            if p <= S::zero() {
                return Ok(S::zero());
            }
            let low = (S::lit(2.0) * p - S::one()).max(S::zero());
            sigma_analytic_mb(p.min(S::one() - eps), s.max(low + eps).min(S::one() - eps))
        })
        .collect()
}
