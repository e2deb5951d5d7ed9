//! Standard-normal helpers used by confidence-weighted learners.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Quantile of the standard normal; rejects levels whose quantile is not
/// finite (p outside (0, 1) exclusive, or rounded to an endpoint).
pub(crate) fn probit(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::config(format!(
            "confidence level must lie strictly between 0 and 1, got {p}"
        )));
    }
    let n = Normal::new(0.0, 1.0).expect("unit normal");
    Ok(n.inverse_cdf(p))
}

pub(crate) fn normal_cdf(z: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).expect("unit normal");
    n.cdf(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probit_round_trips_cdf() {
        for z in [0.1, 0.5, 1.0, 2.0] {
            let p = normal_cdf(z);
            assert!((probit(p).unwrap() - z).abs() < 1e-9);
        }
    }

    #[test]
    fn probit_rejects_endpoints() {
        assert!(probit(0.0).is_err());
        assert!(probit(1.0).is_err());
        assert!(probit(1.5).is_err());
    }
}
