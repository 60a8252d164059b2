use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Which linear map `C` with `V_n = |C W_n|^2` to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CMode {
    /// `A * diag(1 / (sqrt(m) Z pi_i))` with the centring matrix `A`.
    #[default]
    Full,
    /// Diagonal entries `(m-1) / (m^{3/2} exp(-E_i))`, zero elsewhere.
    Diagonal,
}

impl CMode {
    pub fn label(self) -> &'static str {
        match self {
            CMode::Full => "full",
            CMode::Diagonal => "diagonal",
        }
    }
}

/// `C` from energies, using `Z pi_i = exp(-E_i)`.
pub fn build_c_matrix<S: Scalar>(energies: &[S], mode: CMode) -> Result<Matrix<S>> {
    let weights: Vec<S> = energies.iter().map(|&e| (-e).exp()).collect();
    build_from_weights(&weights, mode)
}

/// `C` from a distribution `pi` and an explicit normalizing constant `z`.
pub fn build_c_matrix_with_z<S: Scalar>(pi: &[S], z: S, mode: CMode) -> Result<Matrix<S>> {
    let weights: Vec<S> = pi.iter().map(|&p| z * p).collect();
    build_from_weights(&weights, mode)
}

fn build_from_weights<S: Scalar>(w: &[S], mode: CMode) -> Result<Matrix<S>> {
    let m = w.len();
    if m < 2 {
        return Err(Error::InvalidGrid("C needs at least two states".into()));
    }
    if let Some(i) = w.iter().position(|&x| !(x > S::zero()) || !x.is_finite()) {
        return Err(Error::ZeroProbabilityState(i));
    }
    let mf = S::from_usize_lossy(m);
    let root = mf.sqrt();
    Ok(match mode {
        CMode::Full => {
            let inv_m = S::one() / mf;
            Matrix::from_fn(m, m, |i, j| {
                let a = if i == j { S::one() - inv_m } else { -inv_m };
                a / (root * w[j])
            })
        }
        CMode::Diagonal => {
            let num = (mf - S::one()) / (mf * root);
            Matrix::from_diagonal(&w.iter().map(|&x| num / x).collect::<Vec<_>>())
        }
    })
}
