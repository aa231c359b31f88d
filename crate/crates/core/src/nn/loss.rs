//! Binary cross-entropy.

use crate::nn::tensor::Scalar;

/// Probabilities are clamped to `[EPS, 1−EPS]` before taking logs so the
/// loss and gradient stay finite for saturated predictions.
pub const BCE_EPS: f64 = 1e-7;

#[inline]
fn clamp<T: Scalar>(p: T) -> T {
    let eps = T::from_f64(BCE_EPS);
    p.maximum(eps).minimum(T::ONE - eps)
}

/// `−[y·ln p + (1−y)·ln(1−p)]` with the clamp above.
pub fn bce_loss<T: Scalar>(p: T, y: T) -> T {
    let p = clamp(p);
    -(y * p.ln() + (T::ONE - y) * (T::ONE - p).ln())
}

/// Gradient of the loss w.r.t. the (clamped) probability: `(p−y)/(p(1−p))`.
pub fn bce_grad<T: Scalar>(p: T, y: T) -> T {
    let p = clamp(p);
    (p - y) / (p * (T::ONE - p))
}

/// Gradient of `bce(sigmoid(z), y)` w.r.t. the pre-sigmoid logit z.
///
/// Algebraically `bce_grad(p, y) · p·(1−p) = p − y`; using the composed form
/// directly avoids the 0·∞ cancellation the two-step product hits in f32
/// when a prediction saturates against the clamp.
pub fn bce_sigmoid_grad<T: Scalar>(p: T, y: T) -> T {
    p - y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_at_half_is_ln2() {
        let l: f64 = bce_loss(0.5, 1.0);
        assert!((l - std::f64::consts::LN_2).abs() < 1e-12, "got {l}");
    }

    #[test]
    fn near_perfect_prediction_costs_almost_nothing() {
        let l: f64 = bce_loss(1.0 - 1e-7, 1.0);
        assert!(l > 0.0 && l < 1.5e-7, "got {l}");
    }

    #[test]
    fn clamp_keeps_extreme_predictions_finite() {
        for (p, y) in [(0.0f64, 1.0), (1.0, 0.0), (-0.5, 1.0), (1.5, 0.0)] {
            assert!(bce_loss(p, y).is_finite());
            assert!(bce_grad(p, y).is_finite());
        }
    }

    #[test]
    fn grad_matches_finite_differences_inside_clamp_range() {
        // d/dp at p=0.3, y=0 — central differences on the loss itself
        let (p, y, h) = (0.3f64, 0.0f64, 1e-6);
        let numeric = (bce_loss(p + h, y) - bce_loss(p - h, y)) / (2.0 * h);
        let analytic = bce_grad(p, y);
        assert!(
            (numeric - analytic).abs() / analytic.abs() < 1e-8,
            "numeric {numeric} vs analytic {analytic}"
        );
    }

    #[test]
    fn composed_logit_gradient_equals_chain_rule_product() {
        // away from the clamp, (p−y) == bce_grad(p,y)·σ'(z) with p=σ(z)
        for &z in &[-3.0f64, -0.7, 0.0, 1.3, 4.0] {
            let p = crate::nn::ops::sigmoid_scalar(z);
            for &y in &[0.0, 1.0] {
                let chained = bce_grad(p, y) * p * (1.0 - p);
                let fused = bce_sigmoid_grad(p, y);
                assert!((chained - fused).abs() < 1e-12);
            }
        }
    }
}
