//! Malus-law forward rendering and Stokes-parameter recovery.
//!
//! A partially linearly polarized beam is described by its total intensity
//! I, degree of polarization rho in [0, 1], and angle of polarization phi
//! (defined modulo pi). Through an ideal linear polarizer at angle theta it
//! transmits
//!
//! ```text
//! I(theta) = I/2 * (1 + rho * cos(2 * (theta - phi)))
//! ```
//!
//! which reduces to Malus' law I * cos^2(phi - theta) for rho = 1 and to
//! I/2 for unpolarized light. Measuring at 0°, 45°, 90°, 135° makes the
//! model exactly invertible:
//!
//! ```text
//! I   = (I1 + I2 + I3 + I4) / 2
//! rho = sqrt((I1 - I3)^2 + (I2 - I4)^2) / I
//! phi = atan2(I2 - I4, I1 - I3) / 2
//! ```
//!
//! These identities hold only for data linear in light intensity, so the
//! recovery refuses gamma-encoded stacks.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{PolarError, Result};
use crate::image::Image;
use crate::stack::{Domain, PolarizedStack};

/// Default saturation threshold for the overexposure mask.
pub const DEFAULT_OVEREXPOSURE_DELTA: f64 = 0.98;

/// Scalar description of a partially polarized beam.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LightState {
    pub intensity: f64,
    pub dop: f64,
    pub aop: f64,
}

impl LightState {
    pub fn new(intensity: f64, dop: f64, aop: f64) -> Result<Self> {
        if !intensity.is_finite() || intensity < 0.0 {
            return Err(PolarError::parameter("intensity", "must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&dop) {
            return Err(PolarError::parameter("dop", "must be in [0, 1]"));
        }
        if !aop.is_finite() {
            return Err(PolarError::parameter("aop", "must be finite"));
        }
        Ok(LightState {
            intensity,
            dop,
            aop,
        })
    }
}

/// Per-pixel light description used for forward rendering.
#[derive(Clone, Debug)]
pub struct LightField {
    intensity: Image,
    dop: Image,
    aop: Image,
}

impl LightField {
    pub fn new(intensity: Image, dop: Image, aop: Image) -> Result<Self> {
        intensity.check_same_shape(&dop)?;
        intensity.check_same_shape(&aop)?;
        if intensity.pixels().iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(PolarError::parameter("intensity", "must be finite and >= 0"));
        }
        if dop.pixels().iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(PolarError::parameter("dop", "must be in [0, 1]"));
        }
        Ok(LightField {
            intensity,
            dop,
            aop,
        })
    }

    /// Spatially constant polarization over an intensity image.
    pub fn uniform_polarization(intensity: Image, dop: f64, aop: f64) -> Result<Self> {
        let (w, h) = (intensity.width(), intensity.height());
        LightField::new(intensity, Image::filled(w, h, dop), Image::filled(w, h, aop))
    }

    pub fn intensity(&self) -> &Image {
        &self.intensity
    }

    pub fn dop(&self) -> &Image {
        &self.dop
    }

    pub fn aop(&self) -> &Image {
        &self.aop
    }
}

/// Per-pixel Stokes-derived maps recovered from a four-angle stack.
#[derive(Clone, Debug)]
pub struct StokesMaps {
    /// Total intensity I.
    pub intensity: Image,
    /// Degree of polarization, clamped into [0, 1].
    pub dop: Image,
    /// Angle of polarization in [-pi/2, pi/2).
    pub aop: Image,
    /// Overexposure mask: 0 where any channel saturates, 1 elsewhere.
    pub mask: Image,
    /// Number of pixels whose raw degree of polarization exceeded 1 (noise)
    /// and was clamped.
    pub dop_clamped: usize,
}

/// Intensity through an ideal linear polarizer at angle `theta`.
pub fn malus_render(light: &LightState, theta: f64) -> f64 {
    let half = 0.5 * light.intensity;
    half + half * light.dop * (2.0 * (theta - light.aop)).cos()
}

/// Render the four sensor channels (0°, 45°, 90°, 135°) of a light field.
///
/// The 0/90 and 45/135 pairs are computed as `I/2 +- w`, sharing the same
/// `w`, so the channel identities I1 + I3 = I2 + I4 = I hold to rounding.
pub fn render_stack(light: &LightField) -> PolarizedStack {
    let (w, h) = (light.intensity.width(), light.intensity.height());
    let n = light.intensity.len();
    let mut c = [
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    ];
    for i in 0..n {
        let half = 0.5 * light.intensity.pixels()[i];
        let rho = light.dop.pixels()[i];
        let two_phi = 2.0 * light.aop.pixels()[i];
        let wc = half * rho * two_phi.cos();
        let ws = half * rho * two_phi.sin();
        c[0].push(half + wc);
        c[1].push(half + ws);
        c[2].push(half - wc);
        c[3].push(half - ws);
    }
    let [c0, c1, c2, c3] = c;
    PolarizedStack::new(
        [
            Image::new(w, h, c0).unwrap(),
            Image::new(w, h, c1).unwrap(),
            Image::new(w, h, c2).unwrap(),
            Image::new(w, h, c3).unwrap(),
        ],
        Domain::LinearRaw,
    )
    .expect("rendered channels share shape")
}

/// Wrap an angle into [-pi/2, pi/2); angles of polarization are defined
/// modulo pi.
pub fn wrap_aop(mut phi: f64) -> f64 {
    phi = phi.rem_euclid(PI);
    if phi >= FRAC_PI_2 {
        phi -= PI;
    }
    phi
}

/// Distance between two angles of polarization, compared modulo pi.
pub fn aop_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

/// Recover per-pixel (I, rho, phi) plus the overexposure mask from a
/// linear four-angle stack.
///
/// Conventions: rho is 0 where I = 0 and clamped to 1 where measurement
/// noise pushes it above (the clamp count is reported); phi uses the
/// quadrant-correct two-argument arctangent, halved and wrapped into
/// [-pi/2, pi/2), and is 0 wherever rho = 0. The mask compares channel
/// values against `delta` directly, so channels should be normalized to
/// [0, 1] for it to be meaningful; I, rho, phi themselves are unaffected
/// by global scale.
pub fn compute_stokes(stack: &PolarizedStack, delta: f64) -> Result<StokesMaps> {
    stack.require_domain(Domain::LinearRaw)?;
    let mask = overexposure_mask(stack, delta)?;
    let (w, h) = (stack.width(), stack.height());
    let n = stack.channel(0).len();
    let (c0, c1, c2, c3) = (
        stack.channel(0).pixels(),
        stack.channel(1).pixels(),
        stack.channel(2).pixels(),
        stack.channel(3).pixels(),
    );
    let mut intensity = Vec::with_capacity(n);
    let mut dop = Vec::with_capacity(n);
    let mut aop = Vec::with_capacity(n);
    let mut clamped = 0usize;
    for i in 0..n {
        let s0 = c0[i] + c2[i];
        let s1 = c1[i] + c3[i];
        let total = 0.5 * (s0 + s1);
        let d02 = c0[i] - c2[i];
        let d13 = c1[i] - c3[i];
        let polarized = (d02 * d02 + d13 * d13).sqrt();
        let mut rho = if total > 0.0 { polarized / total } else { 0.0 };
        if rho > 1.0 {
            rho = 1.0;
            clamped += 1;
        }
        let phi = if rho == 0.0 {
            0.0
        } else {
            wrap_aop(0.5 * d13.atan2(d02))
        };
        intensity.push(total);
        dop.push(rho);
        aop.push(phi);
    }
    Ok(StokesMaps {
        intensity: Image::new(w, h, intensity).unwrap(),
        dop: Image::new(w, h, dop).unwrap(),
        aop: Image::new(w, h, aop).unwrap(),
        mask,
        dop_clamped: clamped,
    })
}

/// Binary mask that is 0 wherever any of the four channels strictly
/// exceeds `delta`, 1 elsewhere. Expects channel values normalized to
/// [0, 1]; `delta` must lie in (0, 1].
pub fn overexposure_mask(stack: &PolarizedStack, delta: f64) -> Result<Image> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(PolarError::parameter("delta", "must be in (0, 1]"));
    }
    let (c0, c1, c2, c3) = (
        stack.channel(0).pixels(),
        stack.channel(1).pixels(),
        stack.channel(2).pixels(),
        stack.channel(3).pixels(),
    );
    let mut mask = Vec::with_capacity(c0.len());
    for i in 0..c0.len() {
        let peak = c0[i].max(c1[i]).max(c2[i]).max(c3[i]);
        mask.push(if peak > delta { 0.0 } else { 1.0 });
    }
    Image::new(stack.width(), stack.height(), mask)
}
