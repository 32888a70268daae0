//! Overexposure-masked multi-scale L1 feature loss.

use crate::error::{PolarError, Result};
use crate::image::Image;
use crate::losses::ncc::LossValueWithGrad;
use crate::losses::pyramid::{feature_map, feature_map_adjoint, FeaturePyramidSpec};

/// L1 distance between the pyramid features of two images, after both are
/// multiplied by the binary mask `mask` (overexposed pixels excluded).
///
/// `betas` weights each level's contribution; when `None`, level l gets
/// 1 / (number of feature elements at level l), so each scale contributes
/// comparably regardless of resolution.
pub fn masked_perceptual(
    target: &Image,
    estimate: &Image,
    mask: &Image,
    spec: &FeaturePyramidSpec,
    betas: Option<&[f64]>,
) -> Result<LossValueWithGrad> {
    target.check_same_shape(estimate)?;
    target.check_same_shape(mask)?;
    spec.check_input(target)?;
    if mask.pixels().iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(PolarError::parameter("mask", "must be binary (0 or 1)"));
    }
    if let Some(b) = betas {
        if b.len() != spec.levels().len() {
            return Err(PolarError::parameter(
                "betas",
                format!("expected {} weights, got {}", spec.levels().len(), b.len()),
            ));
        }
    }

    let masked_target = target.zip_map(mask, |v, m| v * m)?;
    let masked_estimate = estimate.zip_map(mask, |v, m| v * m)?;

    let mut value = 0.0;
    let mut grad_target = Image::zeros(target.width(), target.height());
    let mut grad_estimate = Image::zeros(target.width(), target.height());
    for (l, level) in spec.levels().iter().enumerate() {
        let pooled_w = target.width() / level.factor;
        let pooled_h = target.height() / level.factor;
        let elements = (level.filters.len() * pooled_w * pooled_h) as f64;
        let beta = match betas {
            Some(b) => b[l],
            None => 1.0 / elements,
        };
        for filter in &level.filters {
            let ft = feature_map(&masked_target, filter, level.factor);
            let fe = feature_map(&masked_estimate, filter, level.factor);
            let mut l1 = 0.0;
            let mut sign = Vec::with_capacity(ft.len());
            for i in 0..ft.len() {
                let d = ft.pixels()[i] - fe.pixels()[i];
                l1 += d.abs();
                sign.push(if d > 0.0 {
                    1.0
                } else if d < 0.0 {
                    -1.0
                } else {
                    0.0
                });
            }
            value += beta * l1;
            let sign = Image::new(ft.width(), ft.height(), sign).unwrap();
            let back =
                feature_map_adjoint(&sign, filter, level.factor, target.width(), target.height());
            grad_target.add_scaled(&back, beta);
            grad_estimate.add_scaled(&back, -beta);
        }
    }
    // Chain through the masking: d(masked)/d(image) is the mask itself.
    let grad_a = grad_target.zip_map(mask, |g, m| g * m)?;
    let grad_b = grad_estimate.zip_map(mask, |g, m| g * m)?;
    Ok(LossValueWithGrad {
        value,
        grad_a,
        grad_b,
    })
}
