//! Decomposition losses: a fixed linear feature pyramid, NCC/PNCC, and
//! the overexposure-masked perceptual loss. All losses come with analytic
//! gradients suitable for first-order solvers.

mod ncc;
mod perceptual;
mod pyramid;

pub use ncc::{
    ncc, ncc_with_grad, normalize01, normalize01_with_scale, pncc, pncc_value, LossValueWithGrad,
    NCC_EPSILON,
};
pub use perceptual::masked_perceptual;
pub use pyramid::{feature_pyramid, FeaturePyramidSpec, PyramidLevel, SeparableFilter};
