//! First-order update rules: each touches only the weight vector.

use crate::error::Result;
use crate::model::LinearModel;
use crate::types::{BinaryLabel, FeatureVector, StepOutcome};

/// Mistake-driven update: on a wrong prediction, move one unit along `y x`.
/// The reported loss is the zero-one mistake indicator.
pub(super) fn perceptron_step(
    model: &mut LinearModel,
    x: &FeatureVector,
    y: BinaryLabel,
) -> Result<StepOutcome<BinaryLabel>> {
    let (predicted, score) = model.predict(x)?;
    let mistake = predicted != y;
    if mistake {
        model.add_scaled(x, y.sign());
    }
    Ok(StepOutcome {
        predicted,
        score,
        loss: if mistake { 1.0 } else { 0.0 },
        updated: mistake,
    })
}

/// Margin-violation update with the closed-form step size `loss / |x|^2`,
/// optionally capped. Zero-norm inputs with positive loss are skipped and
/// counted as degenerate.
pub(super) fn passive_aggressive_step(
    model: &mut LinearModel,
    x: &FeatureVector,
    y: BinaryLabel,
    cap: Option<f64>,
    degenerate: &mut u64,
) -> Result<StepOutcome<BinaryLabel>> {
    let (predicted, score) = model.predict(x)?;
    let loss = (1.0 - y.sign() * score).max(0.0);
    let mut updated = false;
    if loss > 0.0 {
        let norm_sq = x.squared_norm();
        if norm_sq <= 0.0 {
            *degenerate += 1;
        } else {
            let mut tau = loss / norm_sq;
            if let Some(c) = cap {
                tau = tau.min(c);
            }
            model.add_scaled(x, tau * y.sign());
            updated = true;
        }
    }
    Ok(StepOutcome {
        predicted,
        score,
        loss,
        updated,
    })
}

/// Subgradient step on the margin deficit `max(0, target - y (w . x))`.
/// The plain hinge uses `target = 1`; cost-sensitive learners raise the
/// target for the rare class. `rate` already includes any decay.
pub(super) fn gradient_step(
    model: &mut LinearModel,
    x: &FeatureVector,
    y: BinaryLabel,
    target: f64,
    rate: f64,
) -> Result<StepOutcome<BinaryLabel>> {
    let (predicted, score) = model.predict(x)?;
    let loss = (target - y.sign() * score).max(0.0);
    let mut updated = false;
    if loss > 0.0 {
        model.add_scaled(x, rate * y.sign());
        updated = true;
    }
    Ok(StepOutcome {
        predicted,
        score,
        loss,
        updated,
    })
}

/// Margin-pursuit update on normalized inputs: demand a shrinking fraction
/// of the maximal margin, step with decaying size, then project the weights
/// back into the unit ball. `updates` counts accepted updates (starts at 1).
pub(super) fn margin_pursuit_step(
    model: &mut LinearModel,
    updates: &mut u64,
    x: &FeatureVector,
    y: BinaryLabel,
    slack: f64,
    degenerate: &mut u64,
) -> Result<StepOutcome<BinaryLabel>> {
    let (predicted, score) = model.predict(x)?;
    let norm = x.squared_norm().sqrt();
    if norm <= 0.0 {
        *degenerate += 1;
        return Ok(StepOutcome {
            predicted,
            score,
            loss: 0.0,
            updated: false,
        });
    }
    let margin = y.sign() * score / norm;
    let k = *updates as f64;
    let threshold = (1.0 - slack) * (1.0 / slack) / k.sqrt();
    let loss = (threshold - margin).max(0.0);
    let mut updated = false;
    if loss > 0.0 {
        let step = std::f64::consts::SQRT_2 / k.sqrt();
        model.add_scaled(x, step * y.sign() / norm);
        let weight_norm = model.squared_norm().sqrt();
        if weight_norm > 1.0 {
            model.scale(1.0 / weight_norm);
        }
        *updates += 1;
        updated = true;
    }
    Ok(StepOutcome {
        predicted,
        score,
        loss,
        updated,
    })
}

/// Relaxed maximum-margin update: on a mistake, pick the smallest weight
/// vector satisfying both the unit margin on the current example and
/// non-regression on the previous solution. `norm_sq` caches `|w|^2`.
pub(super) fn relaxed_maxmargin_step(
    model: &mut LinearModel,
    norm_sq: &mut f64,
    x: &FeatureVector,
    y: BinaryLabel,
    degenerate: &mut u64,
) -> Result<StepOutcome<BinaryLabel>> {
    let (predicted, score) = model.predict(x)?;
    let mistake = predicted != y;
    let loss = if mistake { 1.0 } else { 0.0 };
    let mut updated = false;
    if mistake {
        let x_sq = x.squared_norm();
        if x_sq <= 0.0 {
            *degenerate += 1;
        } else if *norm_sq == 0.0 {
            model.add_scaled(x, y.sign() / x_sq);
            *norm_sq = model.squared_norm();
            updated = true;
        } else {
            let w_sq = *norm_sq;
            let denom = x_sq * w_sq - score * score;
            // x parallel to w leaves the program without a finite solution
            if denom <= f64::EPSILON * x_sq * w_sq {
                *degenerate += 1;
            } else {
                let margin = y.sign() * score;
                let keep = (x_sq * w_sq - margin) / denom;
                let push = w_sq * (1.0 - margin) / denom;
                model.scale(keep);
                model.add_scaled(x, push * y.sign());
                *norm_sq = model.squared_norm();
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
