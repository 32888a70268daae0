//! Normalized cross-correlation and its multi-scale (perceptual) sum.
//!
//! `pncc` scores the correlation of two images across the feature pyramid:
//! both inputs are first rescaled to [0, 1], each pyramid channel
//! contributes a zero-mean, sigma-normalized NCC, channels are averaged
//! within a level, and levels are summed. Minimizing the score
//! decorrelates a candidate decomposition pair.

use crate::error::{PolarError, Result};
use crate::image::Image;
use crate::losses::pyramid::{feature_map, feature_map_adjoint, FeaturePyramidSpec};

/// Guard added to the NCC denominator.
pub const NCC_EPSILON: f64 = 1e-8;

/// A scalar loss with gradients w.r.t. both inputs.
#[derive(Clone, Debug)]
pub struct LossValueWithGrad {
    pub value: f64,
    pub grad_a: Image,
    pub grad_b: Image,
}

/// Affine-rescale an image to [0, 1]; constant images map to all zeros.
pub fn normalize01(img: &Image) -> Image {
    normalize01_with_scale(img).0
}

/// As [`normalize01`], also returning the applied scale 1/(max - min)
/// (0 for constant images). The bounds are treated as constants when
/// differentiating through the normalization.
pub fn normalize01_with_scale(img: &Image) -> (Image, f64) {
    let (min, max) = (img.min(), img.max());
    let range = max - min;
    if range == 0.0 || !range.is_finite() {
        return (Image::zeros(img.width(), img.height()), 0.0);
    }
    let scale = 1.0 / range;
    (img.map(|v| (v - min) * scale), scale)
}

/// Zero-mean, sigma-normalized cross-correlation, clamped into [-1, 1]:
///
/// ```text
/// ncc(X, Y) = sum((X - mean X) * (Y - mean Y)) / (N * sigma_X * sigma_Y + eps)
/// ```
///
/// Symmetric in its arguments and invariant to positive affine rescaling
/// of either input (up to the epsilon guard). Inputs need matching shapes
/// and at least 2 elements.
pub fn ncc(x: &Image, y: &Image) -> Result<f64> {
    Ok(ncc_inner(x, y, false)?.0)
}

/// NCC value plus analytic gradients w.r.t. both inputs.
pub fn ncc_with_grad(x: &Image, y: &Image) -> Result<(f64, Image, Image)> {
    let (value, grads) = ncc_inner(x, y, true)?;
    let (gx, gy) = grads.expect("gradients requested");
    Ok((value, gx, gy))
}

#[allow(clippy::type_complexity)]
fn ncc_inner(x: &Image, y: &Image, with_grad: bool) -> Result<(f64, Option<(Image, Image)>)> {
    x.check_same_shape(y)?;
    let n = x.len();
    if n < 2 {
        return Err(PolarError::parameter(
            "image",
            "ncc needs at least 2 elements",
        ));
    }
    let nf = n as f64;
    let (mx, my) = (x.mean(), y.mean());
    let mut cross = 0.0;
    let mut qx = 0.0;
    let mut qy = 0.0;
    for i in 0..n {
        let a = x.pixels()[i] - mx;
        let b = y.pixels()[i] - my;
        cross += a * b;
        qx += a * a;
        qy += b * b;
    }
    if qx == 0.0 || qy == 0.0 {
        // A constant input carries no correlation signal; define the value
        // and the gradients as zero.
        let grads = with_grad
            .then(|| (Image::zeros(x.width(), x.height()), Image::zeros(x.width(), x.height())));
        return Ok((0.0, grads));
    }
    let sx = (qx / nf).sqrt();
    let sy = (qy / nf).sqrt();
    // grouped so the value is bitwise symmetric in the two arguments
    let den = nf * (sx * sy) + NCC_EPSILON;
    let value = (cross / den).clamp(-1.0, 1.0);
    if !with_grad {
        return Ok((value, None));
    }
    // d/dx_i = yt_i / den - cross * (sy/sx) * xt_i / den^2, and symmetrically.
    let raw = cross / den;
    let cx = raw / den * (sy / sx);
    let cy = raw / den * (sx / sy);
    let mut gx = Vec::with_capacity(n);
    let mut gy = Vec::with_capacity(n);
    for i in 0..n {
        let a = x.pixels()[i] - mx;
        let b = y.pixels()[i] - my;
        gx.push(b / den - cx * a);
        gy.push(a / den - cy * b);
    }
    Ok((
        value,
        Some((
            Image::new(x.width(), x.height(), gx).unwrap(),
            Image::new(x.width(), x.height(), gy).unwrap(),
        )),
    ))
}

/// Multi-scale NCC score of two images (higher = more correlated).
///
/// Value only; see [`pncc`] for gradients.
pub fn pncc_value(a: &Image, b: &Image, spec: &FeaturePyramidSpec) -> Result<f64> {
    a.check_same_shape(b)?;
    spec.check_input(a)?;
    let an = normalize01(a);
    let bn = normalize01(b);
    let mut value = 0.0;
    for level in spec.levels() {
        let weight = 1.0 / level.filters.len() as f64;
        for filter in &level.filters {
            let fa = feature_map(&an, filter, level.factor);
            let fb = feature_map(&bn, filter, level.factor);
            value += weight * ncc(&fa, &fb)?;
        }
    }
    Ok(value)
}

/// Multi-scale NCC score with analytic gradients w.r.t. both inputs.
///
/// Per level, channel NCCs are averaged; levels are summed, so a pair
/// compared against itself scores the number of levels. Gradients chain
/// through the linear pyramid via exact adjoints; the [0, 1] input
/// normalization is differentiated with its bounds held constant.
pub fn pncc(a: &Image, b: &Image, spec: &FeaturePyramidSpec) -> Result<LossValueWithGrad> {
    a.check_same_shape(b)?;
    spec.check_input(a)?;
    let (an, scale_a) = normalize01_with_scale(a);
    let (bn, scale_b) = normalize01_with_scale(b);
    let mut value = 0.0;
    let mut grad_an = Image::zeros(a.width(), a.height());
    let mut grad_bn = Image::zeros(b.width(), b.height());
    for level in spec.levels() {
        let weight = 1.0 / level.filters.len() as f64;
        for filter in &level.filters {
            let fa = feature_map(&an, filter, level.factor);
            let fb = feature_map(&bn, filter, level.factor);
            let (v, ga, gb) = ncc_with_grad(&fa, &fb)?;
            value += weight * v;
            grad_an.add_scaled(
                &feature_map_adjoint(&ga, filter, level.factor, a.width(), a.height()),
                weight,
            );
            grad_bn.add_scaled(
                &feature_map_adjoint(&gb, filter, level.factor, b.width(), b.height()),
                weight,
            );
        }
    }
    Ok(LossValueWithGrad {
        value,
        grad_a: grad_an.map(|v| v * scale_a),
        grad_b: grad_bn.map(|v| v * scale_b),
    })
}
