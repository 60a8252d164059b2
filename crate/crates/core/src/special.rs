//! Standard normal helpers in `f64`.

use libm::erfc;
use statrs::distribution::{ContinuousCDF, Normal};

/// Upper tail `P(Z > z)`.
pub fn upper_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

pub fn cdf(z: f64) -> f64 {
    upper_tail(-z)
}

/// `P(a < Z < b)`, accurate in both tails.
pub fn interval_mass(a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if a >= 0.0 {
        upper_tail(a) - upper_tail(b)
    } else if b <= 0.0 {
        upper_tail(-b) - upper_tail(-a)
    } else {
        1.0 - upper_tail(-a) - upper_tail(b)
    }
}

/// `z` with `P(Z <= z) = p`.
pub fn quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

pub fn density(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_table_value() {
        assert!((quantile(0.975) - 1.959963984540054).abs() < 1e-9);
    }

    #[test]
    fn tail_masses() {
        let central = interval_mass(-1.0, 1.0);
        assert!((central - 0.6826894921370859).abs() < 1e-12, "{central}");
        let far = interval_mass(30.0, 30.5);
        assert!(far > 0.0 && far < 1e-190);
        assert_eq!(interval_mass(1.0, 1.0), 0.0);
    }
}
