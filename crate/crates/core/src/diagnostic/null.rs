use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

use super::cmatrix::CMode;

/// Largest `m` for which eigenvalues are computed for the Lyapunov ratio.
pub const LYAPUNOV_STATE_CAP: usize = 400;

/// Normal approximation `N(sum lambda, 2 sum lambda^2)` to the law of `V_n`,
/// where `lambda` are the eigenvalues of `M = C Sigma C'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullApproximation<S> {
    pub lambda_sum: S,
    pub lambda_sq_sum: S,
    pub mean: S,
    pub variance: S,
    /// `sum |lambda|^3 / (2 sum lambda^2)^{3/2}`; `None` when `m` is too large
    /// for an eigendecomposition.
    pub lyapunov_ratio: Option<S>,
}

impl<S: Scalar> NullApproximation<S> {
    fn from_sums(lambda_sum: S, pair_sum: S, eigen: Option<Vec<S>>) -> Result<Self> {
        let mut lambda_sq_sum = lambda_sum * lambda_sum - S::lit(2.0) * pair_sum;
        let tol = S::loose_eps() * S::one().max(lambda_sum * lambda_sum);
        if lambda_sq_sum < -tol {
            return Err(Error::Numerical(format!("negative sum of squared roots: {lambda_sq_sum}")));
        }
        lambda_sq_sum = lambda_sq_sum.max(S::zero());
        let lyapunov_ratio = eigen.and_then(|ev| {
            let cubes: S = ev.iter().map(|l| l.abs().powi(3)).sum();
            let denom = (S::lit(2.0) * lambda_sq_sum).powf(S::lit(1.5));
            (denom > S::zero()).then(|| cubes / denom)
        });
        Ok(NullApproximation {
            lambda_sum,
            lambda_sq_sum,
            mean: lambda_sum,
            variance: S::lit(2.0) * lambda_sq_sum,
            lyapunov_ratio,
        })
    }

    /// Upper `alpha/2` point `sum lambda + z_{alpha/2} sqrt(2 sum lambda^2)`.
    pub fn quantile(&self, alpha: f64) -> Result<S> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("alpha = {alpha} must lie in (0, 1)")));
        }
        if !(self.variance > S::zero()) {
            return Err(Error::DegenerateNull(self.variance.as_f64()));
        }
        let z = S::lit(crate::special::quantile(1.0 - alpha / 2.0));
        Ok(self.mean + z * self.variance.sqrt())
    }
}

/// Sum of the 2x2 principal minors and the trace of a square matrix.
fn trace_and_minors<S: Scalar>(m: usize, at: impl Fn(usize, usize) -> S) -> (S, S) {
    let mut trace = S::zero();
    let mut pairs = S::zero();
    for i in 0..m {
        let mii = at(i, i);
        trace = trace + mii;
        for j in i + 1..m {
            pairs = pairs + mii * at(j, j) - at(i, j) * at(j, i);
        }
    }
    (trace, pairs)
}

/// Null approximation for a general `C` and `Sigma`.
pub fn null_approximation<S: Scalar>(c: &Matrix<S>, sigma: &Matrix<S>) -> Result<NullApproximation<S>> {
    if !sigma.is_square() {
        return Err(Error::Shape { expected: sigma.rows(), got: sigma.cols() });
    }
    if !sigma.is_symmetric(S::loose_eps()) {
        return Err(Error::Numerical("Sigma is not symmetric".into()));
    }
    let m = c.mul(sigma)?.mul(&c.transpose())?;
    let n = m.rows();
    let (trace, pairs) = trace_and_minors(n, |i, j| m[(i, j)]);
    let eigen = if n <= LYAPUNOV_STATE_CAP {
        let sym = Matrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)]) / S::lit(2.0));
        Some(sym.symmetric_eigenvalues()?)
    } else {
        None
    };
    NullApproximation::from_sums(trace, pairs, eigen)
}

/// Null approximation when `Sigma` is diagonal, without forming dense matrices.
///
/// `M` is evaluated entrywise: for the diagonal `C` it is diagonal with
/// entries `c_i^2 s_i`, and for the full `C = A D` it is `A G A` with
/// `G = diag(d_i^2 s_i)`.
pub fn null_approximation_diagonal<S: Scalar>(
    energies: &[S],
    sigma_diag: &[S],
    mode: CMode,
) -> Result<NullApproximation<S>> {
    let m = energies.len();
    if sigma_diag.len() != m {
        return Err(Error::Shape { expected: m, got: sigma_diag.len() });
    }
    if m < 2 {
        return Err(Error::InvalidGrid("need at least two states".into()));
    }
    let mf = S::from_usize_lossy(m);
    let mut g = Vec::with_capacity(m);
    for (i, (&e, &s)) in energies.iter().zip(sigma_diag).enumerate() {
        let w = (-e).exp();
        if !(w > S::zero()) || !w.is_finite() {
            return Err(Error::ZeroProbabilityState(i));
        }
        let d = match mode {
            CMode::Full => S::one() / (mf.sqrt() * w),
            CMode::Diagonal => (mf - S::one()) / (mf * mf.sqrt() * w),
        };
        g.push(d * d * s);
    }
    match mode {
        CMode::Diagonal => {
            // trace shortcut: M is diagonal
            let (trace, pairs) = trace_and_minors(m, |i, j| if i == j { g[i] } else { S::zero() });
            NullApproximation::from_sums(trace, pairs, Some(g))
        }
        CMode::Full => {
            let total: S = g.iter().copied().sum();
            let c = total / (mf * mf);
            let at = |i: usize, j: usize| {
                let diag = if i == j { g[i] } else { S::zero() };
                diag - (g[i] + g[j]) / mf + c
            };
            let (trace, pairs) = trace_and_minors(m, at);
            let eigen =
                if m <= LYAPUNOV_STATE_CAP { Some(Matrix::from_fn(m, m, at).symmetric_eigenvalues()?) } else { None };
            NullApproximation::from_sums(trace, pairs, eigen)
        }
    }
}
