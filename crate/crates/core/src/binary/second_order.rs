//! Second-order update rules over a Gaussian weight distribution.

use crate::confidence;
use crate::error::{Error, Result};
use crate::model::GaussianLinearModel;
use crate::types::{BinaryLabel, FeatureVector, StepOutcome};

/// Adaptive-regularization update. On a positive margin deficit
/// `max(0, target - y (mu . x))` the mean moves along `Sigma x` and the
/// covariance shrinks by a rank-one term, both damped by `gamma`. The plain
/// variant uses `target = 1`; the cost-sensitive one raises the target for
/// the rare class.
pub(super) fn adaptive_step(
    model: &mut GaussianLinearModel,
    x: &FeatureVector,
    y: BinaryLabel,
    gamma: f64,
    target: f64,
    round: usize,
) -> Result<StepOutcome<BinaryLabel>> {
    let (predicted, score) = model.predict(x)?;
    let loss = (target - y.sign() * score).max(0.0);
    let mut updated = false;
    if loss > 0.0 {
        let s = model.covariance().multiply(x);
        let v = x.dot(&s)?;
        let beta = 1.0 / (v + gamma);
        let alpha = loss * beta;
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::Numerical {
                round,
                detail: format!("adaptive step produced alpha={alpha}, beta={beta}"),
            });
        }
        model.mean_mut().add_scaled_slice(&s, alpha * y.sign());
        model.covariance_mut().rank_one_sub(&s, beta);
        updated = true;
    }
    Ok(StepOutcome {
        predicted,
        score,
        loss,
        updated,
    })
}

/// Confidence-weighted update: requires the margin to exceed `z` standard
/// deviations of the score and solves the resulting program in closed form.
/// `cap` bounds the multiplier for the soft variant; `None` leaves it free.
pub(super) fn confidence_weighted_step(
    model: &mut GaussianLinearModel,
    x: &FeatureVector,
    y: BinaryLabel,
    z: f64,
    cap: Option<f64>,
    round: usize,
    degenerate: &mut u64,
) -> Result<StepOutcome<BinaryLabel>> {
    let (predicted, score) = model.predict(x)?;
    let margin = y.sign() * score;
    let s = model.covariance().multiply(x);
    let v = x.dot(&s)?;
    let loss = (z * v.sqrt() - margin).max(0.0);
    let mut updated = false;
    if loss > 0.0 {
        if v <= 0.0 {
            *degenerate += 1;
        } else {
            let mut alpha = confidence::update_multiplier(margin, v, z);
            if let Some(c) = cap {
                alpha = alpha.min(c);
            }
            if alpha > 0.0 {
                let beta = confidence::shrink_coefficient(alpha, v, z);
                if !(alpha.is_finite() && beta.is_finite() && beta >= 0.0) {
                    return Err(Error::Numerical {
                        round,
                        detail: format!(
                            "confidence-weighted step produced alpha={alpha}, beta={beta}"
                        ),
                    });
                }
                model.mean_mut().add_scaled_slice(&s, alpha * y.sign());
                model.covariance_mut().rank_one_sub(&s, beta);
                updated = true;
            }
        }
    }
    Ok(StepOutcome {
        predicted,
        score,
        loss,
        updated,
    })
}
