//! Fixed multi-scale linear feature maps.
//!
//! Each pyramid level applies a small bank of fixed linear filters
//! (Gaussian blur plus horizontal/vertical derivatives) and then sum-pools
//! non-overlapping blocks down by the level's factor. Everything is linear
//! in the input, and every operation has an exact adjoint, so loss
//! gradients through the pyramid are exact rather than approximate.

use crate::error::{PolarError, Result};
use crate::image::Image;

/// A separable 2-D convolution kernel: `row` taps run along x, `col` taps
/// along y. Tap counts must be odd (centered kernels).
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SeparableFilter {
    pub name: &'static str,
    pub row: Vec<f64>,
    pub col: Vec<f64>,
}

impl SeparableFilter {
    /// 5-tap binomial blur on both axes; taps sum to exactly 1 per axis.
    pub fn gaussian() -> Self {
        let taps = vec![1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];
        SeparableFilter {
            name: "gaussian",
            row: taps.clone(),
            col: taps,
        }
    }

    /// Central-difference derivative along x.
    pub fn derivative_x() -> Self {
        SeparableFilter {
            name: "dx",
            row: vec![-0.5, 0.0, 0.5],
            col: vec![1.0],
        }
    }

    /// Central-difference derivative along y.
    pub fn derivative_y() -> Self {
        SeparableFilter {
            name: "dy",
            row: vec![1.0],
            col: vec![-0.5, 0.0, 0.5],
        }
    }
}

/// One pyramid level: a filter bank applied at full resolution, then
/// sum-pooled down by `factor`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct PyramidLevel {
    pub factor: usize,
    pub filters: Vec<SeparableFilter>,
}

/// The level structure of a feature pyramid. Factors must be strictly
/// increasing; kernels are fixed at construction, never learned.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct FeaturePyramidSpec {
    levels: Vec<PyramidLevel>,
}

impl FeaturePyramidSpec {
    pub fn new(levels: Vec<PyramidLevel>) -> Result<Self> {
        if levels.is_empty() {
            return Err(PolarError::parameter("levels", "need at least one level"));
        }
        let mut prev = 0usize;
        for level in &levels {
            if level.factor <= prev {
                return Err(PolarError::parameter(
                    "levels",
                    "downsample factors must be strictly increasing",
                ));
            }
            prev = level.factor;
            if level.filters.is_empty() {
                return Err(PolarError::parameter("levels", "empty filter bank"));
            }
            for f in &level.filters {
                if f.row.len() % 2 == 0 || f.col.len() % 2 == 0 {
                    return Err(PolarError::parameter("levels", "kernel taps must be odd"));
                }
            }
        }
        Ok(FeaturePyramidSpec { levels })
    }

    /// Factors {2, 4, 8}, each with {gaussian, d/dx, d/dy}.
    pub fn with_factors(factors: &[usize]) -> Result<Self> {
        let levels = factors
            .iter()
            .map(|&factor| PyramidLevel {
                factor,
                filters: vec![
                    SeparableFilter::gaussian(),
                    SeparableFilter::derivative_x(),
                    SeparableFilter::derivative_y(),
                ],
            })
            .collect();
        FeaturePyramidSpec::new(levels)
    }

    pub fn levels(&self) -> &[PyramidLevel] {
        &self.levels
    }

    pub fn max_factor(&self) -> usize {
        self.levels.last().map(|l| l.factor).unwrap_or(1)
    }

    pub(crate) fn check_input(&self, img: &Image) -> Result<()> {
        let min = self.max_factor();
        if img.width() < min || img.height() < min {
            return Err(PolarError::ImageTooSmall {
                width: img.width(),
                height: img.height(),
                min,
            });
        }
        Ok(())
    }
}

impl Default for FeaturePyramidSpec {
    fn default() -> Self {
        FeaturePyramidSpec::with_factors(&[2, 4, 8]).expect("valid default factors")
    }
}

#[inline]
fn clamp_index(i: isize, len: usize) -> usize {
    i.clamp(0, len as isize - 1) as usize
}

/// 1-D convolution along x with replicate-edge boundary.
fn conv_x(img: &Image, taps: &[f64]) -> Image {
    let (w, h) = (img.width(), img.height());
    let center = (taps.len() / 2) as isize;
    let src = img.pixels();
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &t) in taps.iter().enumerate() {
                acc += t * row[clamp_index(x as isize + k as isize - center, w)];
            }
            out[y * w + x] = acc;
        }
    }
    Image::new(w, h, out).unwrap()
}

/// Exact adjoint of [`conv_x`]: scatter with the same clamped indices.
fn conv_x_adjoint(grad: &Image, taps: &[f64]) -> Image {
    let (w, h) = (grad.width(), grad.height());
    let center = (taps.len() / 2) as isize;
    let g = grad.pixels();
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let gv = g[y * w + x];
            for (k, &t) in taps.iter().enumerate() {
                let xi = clamp_index(x as isize + k as isize - center, w);
                out[y * w + xi] += t * gv;
            }
        }
    }
    Image::new(w, h, out).unwrap()
}

fn conv_y(img: &Image, taps: &[f64]) -> Image {
    let (w, h) = (img.width(), img.height());
    let center = (taps.len() / 2) as isize;
    let src = img.pixels();
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &t) in taps.iter().enumerate() {
                let yi = clamp_index(y as isize + k as isize - center, h);
                acc += t * src[yi * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    Image::new(w, h, out).unwrap()
}

fn conv_y_adjoint(grad: &Image, taps: &[f64]) -> Image {
    let (w, h) = (grad.width(), grad.height());
    let center = (taps.len() / 2) as isize;
    let g = grad.pixels();
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let gv = g[y * w + x];
            for (k, &t) in taps.iter().enumerate() {
                let yi = clamp_index(y as isize + k as isize - center, h);
                out[yi * w + x] += t * gv;
            }
        }
    }
    Image::new(w, h, out).unwrap()
}

/// Sum-pool non-overlapping `factor` x `factor` blocks. Output dimensions
/// are floor divisions; trailing rows/columns that do not fill a block are
/// dropped. Sum pooling keeps total mass, so a unit impulse keeps unit sum
/// through the blur channel.
fn block_sum(img: &Image, factor: usize) -> Image {
    let (w, h) = (img.width(), img.height());
    let (ow, oh) = (w / factor, h / factor);
    let src = img.pixels();
    let mut out = vec![0.0; ow * oh];
    for by in 0..oh {
        for bx in 0..ow {
            let mut acc = 0.0;
            for dy in 0..factor {
                let row = (by * factor + dy) * w + bx * factor;
                for dx in 0..factor {
                    acc += src[row + dx];
                }
            }
            out[by * ow + bx] = acc;
        }
    }
    Image::new(ow, oh, out).unwrap()
}

/// Exact adjoint of [`block_sum`]: broadcast each pooled gradient back over
/// its block; uncovered trailing pixels get zero.
fn block_sum_adjoint(grad: &Image, factor: usize, orig_w: usize, orig_h: usize) -> Image {
    let (ow, oh) = (grad.width(), grad.height());
    let g = grad.pixels();
    let mut out = vec![0.0; orig_w * orig_h];
    for by in 0..oh {
        for bx in 0..ow {
            let gv = g[by * ow + bx];
            for dy in 0..factor {
                let row = (by * factor + dy) * orig_w + bx * factor;
                for dx in 0..factor {
                    out[row + dx] = gv;
                }
            }
        }
    }
    Image::new(orig_w, orig_h, out).unwrap()
}

/// Filter response followed by sum-pooling: one feature channel.
pub(crate) fn feature_map(img: &Image, filter: &SeparableFilter, factor: usize) -> Image {
    let filtered = conv_y(&conv_x(img, &filter.row), &filter.col);
    block_sum(&filtered, factor)
}

/// Adjoint of [`feature_map`]; maps a gradient at pooled resolution back
/// to input resolution.
pub(crate) fn feature_map_adjoint(
    grad: &Image,
    filter: &SeparableFilter,
    factor: usize,
    orig_w: usize,
    orig_h: usize,
) -> Image {
    let up = block_sum_adjoint(grad, factor, orig_w, orig_h);
    conv_x_adjoint(&conv_y_adjoint(&up, &filter.col), &filter.row)
}

/// All feature channels of all levels: `result[level][channel]`.
///
/// Errors if either image dimension is smaller than the largest downsample
/// factor (the error names the minimum size).
pub fn feature_pyramid(img: &Image, spec: &FeaturePyramidSpec) -> Result<Vec<Vec<Image>>> {
    spec.check_input(img)?;
    Ok(spec
        .levels()
        .iter()
        .map(|level| {
            level
                .filters
                .iter()
                .map(|f| feature_map(img, f, level.factor))
                .collect()
        })
        .collect())
}
