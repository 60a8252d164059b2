use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Largest state count accepted by the dense stationary solve.
pub const DEFAULT_STATIONARY_CAP: usize = 10_000;

/// Explicit one-step kernel `p_ij` of a small finite chain.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix<S> {
    p: Matrix<S>,
}

impl<S: Scalar> TransitionMatrix<S> {
    /// Validates that entries lie in [0, 1] and rows sum to one.
    pub fn new(p: Matrix<S>) -> Result<Self> {
        if !p.is_square() || p.rows() == 0 {
            return Err(Error::InvalidTransitionMatrix(format!("{}x{} is not square", p.rows(), p.cols())));
        }
        let m = p.rows();
        // 1e-12 in f64, scaled up for lower precision types
        let tol = S::lit(1e-12).max(S::epsilon() * S::from_usize_lossy(4 * m));
        for i in 0..m {
            let row = p.row(i);
            if let Some(j) = row.iter().position(|&v| !(v >= -tol && v <= S::one() + tol)) {
                return Err(Error::InvalidTransitionMatrix(format!("entry ({i}, {j}) = {} outside [0, 1]", row[j])));
            }
            let sum: S = row.iter().copied().sum();
            if (sum - S::one()).abs() > tol {
                return Err(Error::InvalidTransitionMatrix(format!("row {i} sums to {sum}")));
            }
        }
        Ok(TransitionMatrix { p })
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    /// Two-state chain `[[1-a, a], [b, 1-b]]`.
    pub fn two_state(a: S, b: S) -> Result<Self> {
        Self::from_rows(&[vec![S::one() - a, a], vec![b, S::one() - b]])
    }

    pub fn states(&self) -> usize {
        self.p.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.p[(i, j)]
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.p
    }

    /// States reachable from `start` through positive-probability moves.
    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        let m = self.states();
        let mut seen = vec![false; m];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            for (j, &v) in self.p.row(i).iter().enumerate() {
                if v > S::zero() && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen
    }

    /// Whether every state reaches every other one.
    pub fn is_irreducible(&self) -> bool {
        let m = self.states();
        if !self.reachable_from(0).iter().all(|&b| b) {
            return false;
        }
        // all states reach 0 iff 0 reaches all in the reversed graph
        let back = Self { p: self.p.transpose() };
        back.reachable_from(0).iter().all(|&b| b) || m == 1
    }
}

/// Outcome of a detailed-balance check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceReport<S> {
    pub holds: bool,
    /// Pair with the largest flow imbalance.
    pub worst: (usize, usize),
    /// `|pi_i p_ij - pi_j p_ji|` at `worst`.
    pub gap: S,
}

/// Checks `pi_i p_ij = pi_j p_ji` for all pairs within `tol`.
pub fn check_detailed_balance<S: Scalar>(p: &TransitionMatrix<S>, pi: &[S], tol: S) -> Result<BalanceReport<S>> {
    let m = p.states();
    if pi.len() != m {
        return Err(Error::Shape { expected: m, got: pi.len() });
    }
    let mut worst = (0, 0);
    let mut gap = S::zero();
    for i in 0..m {
        for j in i + 1..m {
            let g = (pi[i] * p.get(i, j) - pi[j] * p.get(j, i)).abs();
            if g > gap {
                gap = g;
                worst = (i, j);
            }
        }
    }
    Ok(BalanceReport { holds: gap <= tol, worst, gap })
}

/// Solves `pi P = pi`, `sum(pi) = 1` with a dense direct solve.
pub fn stationary_distribution<S: Scalar>(p: &TransitionMatrix<S>) -> Result<Vec<S>> {
    stationary_distribution_capped(p, DEFAULT_STATIONARY_CAP)
}

pub fn stationary_distribution_capped<S: Scalar>(p: &TransitionMatrix<S>, cap: usize) -> Result<Vec<S>> {
    let m = p.states();
    if m > cap {
        return Err(Error::TooManyStates);
    }
    // (P' - I) pi = 0 with the last equation replaced by the normalization row.
    let mut a = Matrix::from_fn(m, m, |i, j| p.get(j, i) - if i == j { S::one() } else { S::zero() });
    for j in 0..m {
        a[(m - 1, j)] = S::one();
    }
    let mut rhs = vec![S::zero(); m];
    rhs[m - 1] = S::one();
    let pi = a.solve(&rhs).map_err(|_| Error::NoUniqueStationary { residual: f64::INFINITY })?;
    let pi_p = p.matrix().left_mul_vec(&pi)?;
    let residual = pi_p.iter().zip(&pi).fold(S::zero(), |acc, (&x, &y)| acc.max((x - y).abs()));
    if !(residual <= S::loose_eps()) || pi.iter().any(|&v| v < -S::loose_eps()) {
        return Err(Error::NoUniqueStationary { residual: residual.as_f64() });
    }
    Ok(pi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn irreducibility() {
        let p =
            TransitionMatrix::from_rows(&[vec![0.5_f64, 0.5, 0.0], vec![0.0, 0.5, 0.5], vec![0.5, 0.0, 0.5]]).unwrap();
        assert!(p.is_irreducible());
        let q = TransitionMatrix::from_rows(&[vec![1.0_f64, 0.0], vec![0.5, 0.5]]).unwrap();
        assert!(!q.is_irreducible());
        assert_eq!(q.reachable_from(0), vec![true, false]);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(TransitionMatrix::from_rows(&[vec![0.5, 0.6], vec![0.5, 0.5]]).is_err());
        assert!(TransitionMatrix::from_rows(&[vec![1.5, -0.5], vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn symmetric_kernel_with_uniform_pi() {
        let p = TransitionMatrix::from_rows(&[vec![0.2, 0.3, 0.5], vec![0.3, 0.4, 0.3], vec![0.5, 0.3, 0.2]]).unwrap();
        let r = check_detailed_balance(&p, &[1.0 / 3.0; 3], 1e-12).unwrap();
        assert!(r.holds);
        assert_eq!(r.gap, 0.0);
    }

    #[test]
    fn two_state_balance() {
        let p = TransitionMatrix::two_state(0.1_f64, 0.5).unwrap();
        // 5/6 * 0.1 == 1/6 * 0.5
        assert!(check_detailed_balance(&p, &[5.0 / 6.0, 1.0 / 6.0], 1e-12).unwrap().holds);
        let r = check_detailed_balance(&p, &[0.5, 0.5], 1e-12).unwrap();
        assert!(!r.holds);
        assert_eq!(r.worst, (0, 1));
        assert!((r.gap - 0.2).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch() {
        let p = TransitionMatrix::two_state(0.1_f64, 0.5).unwrap();
        assert!(matches!(check_detailed_balance(&p, &[1.0], 1e-12), Err(Error::Shape { .. })));
    }

    #[test]
    fn stationary_two_state() {
        let p = TransitionMatrix::two_state(0.5_f64, 0.5).unwrap();
        let pi = stationary_distribution(&p).unwrap();
        assert!((pi[0] - 0.5).abs() < 1e-14 && (pi[1] - 0.5).abs() < 1e-14);
        let p = TransitionMatrix::two_state(0.1_f64, 0.5).unwrap();
        let pi = stationary_distribution(&p).unwrap();
        // (b, a) / (a + b)
        assert!((pi[0] - 5.0 / 6.0).abs() < 1e-14);
        assert!((pi[1] - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn reducible_chain_has_no_unique_solution() {
        let p = TransitionMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert!(matches!(stationary_distribution(&p), Err(Error::NoUniqueStationary { .. })));
    }

    #[test]
    fn cap_is_enforced() {
        let p = TransitionMatrix::two_state(0.5_f64, 0.5).unwrap();
        assert!(matches!(stationary_distribution_capped(&p, 1), Err(Error::TooManyStates)));
    }
}
