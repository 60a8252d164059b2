use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Sample autocorrelation for lags `0..=max_lag` with the biased `1/n`
/// normalization. The lag-0 value is exactly one.
pub fn autocorrelation<S: Scalar>(series: &[S], max_lag: usize) -> Result<Vec<S>> {
    let n = series.len();
    if max_lag < 1 || n <= max_lag {
        return Err(Error::SeriesTooShort { len: n, max_lag });
    }
    let len = S::from_usize_lossy(n);
    let mean = series.iter().copied().sum::<S>() / len;
    let centered: Vec<S> = series.iter().map(|&x| x - mean).collect();
    let c0 = centered.iter().map(|&x| x * x).sum::<S>() / len;
    if !(c0 > S::zero()) {
        return Err(Error::DegenerateVariance);
    }
    let mut out = Vec::with_capacity(max_lag + 1);
    out.push(S::one());
    for k in 1..=max_lag {
        let ck = centered[..n - k].iter().zip(&centered[k..]).map(|(&a, &b)| a * b).sum::<S>() / len;
        out.push(ck / c0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn lag_zero_is_one() {
        let r = autocorrelation(&[1.0, 3.0, 2.0, 5.0], 2).unwrap();
        assert_eq!(r[0], 1.0);
    }

    #[test]
    fn alternating_series() {
        let n = 100;
        let s: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = autocorrelation(&s, 1).unwrap();
        // mean 0, c0 = 1, c1 = -(n-1)/n
        assert!((r[1] + (n as f64 - 1.0) / n as f64).abs() < 1e-14);
    }

    #[test]
    fn white_noise_lag_one_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let r = autocorrelation(&s, 1).unwrap();
        assert!(r[1].abs() < 0.01, "{}", r[1]);
    }

    #[test]
    fn errors() {
        assert_eq!(autocorrelation(&[2.0, 2.0, 2.0], 1), Err(Error::DegenerateVariance));
        assert!(matches!(autocorrelation(&[1.0, 2.0], 2), Err(Error::SeriesTooShort { .. })));
        assert!(matches!(autocorrelation(&[1.0, 2.0], 0), Err(Error::SeriesTooShort { .. })));
    }
}
