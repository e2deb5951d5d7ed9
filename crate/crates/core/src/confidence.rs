//! Closed-form coefficients for confidence-weighted updates.
//!
//! Given the signed margin `m`, the score variance `v = x' Sigma x` and the
//! required z-score `z`, the update multiplier solves the margin-confidence
//! program exactly; the shrink coefficient then controls the rank-one
//! covariance downdate.

/// Unconstrained update multiplier; zero when the margin already clears
/// `z sqrt(v)`. Requires `v > 0`.
pub(crate) fn update_multiplier(margin: f64, variance: f64, z: f64) -> f64 {
    let zeta = 1.0 + z * z;
    let psi = 1.0 + z * z / 2.0;
    let discriminant = margin * margin * z.powi(4) / 4.0 + variance * z * z * zeta;
    ((-margin * psi + discriminant.sqrt()) / (variance * zeta)).max(0.0)
}

/// Covariance shrink coefficient for a given (possibly capped) multiplier.
pub(crate) fn shrink_coefficient(alpha: f64, variance: f64, z: f64) -> f64 {
    let avz = alpha * variance * z;
    let sqrt_u = 0.5 * (-avz + (avz * avz + 4.0 * variance).sqrt());
    alpha * z / (sqrt_u + variance * alpha * z)
}
