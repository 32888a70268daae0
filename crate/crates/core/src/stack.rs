//! Four-channel polarized image stacks.

use crate::error::{PolarError, Result};
use crate::image::Image;

/// Photometric domain of a stack's samples.
///
/// Polarization arithmetic (Stokes recovery, layer composition) is valid
/// only on `LinearRaw` data; `Gamma` marks tone-mapped data on which those
/// operations must refuse to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    LinearRaw,
    Gamma,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::LinearRaw => "linear_raw",
            Domain::Gamma => "gamma",
        }
    }
}

/// Four co-registered angle channels (0°, 45°, 90°, 135°), conventionally
/// called I1..I4.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarizedStack {
    channels: [Image; 4],
    domain: Domain,
}

impl PolarizedStack {
    pub fn new(channels: [Image; 4], domain: Domain) -> Result<Self> {
        for ch in &channels[1..] {
            channels[0].check_same_shape(ch)?;
        }
        Ok(PolarizedStack { channels, domain })
    }

    pub fn width(&self) -> usize {
        self.channels[0].width()
    }

    pub fn height(&self) -> usize {
        self.channels[0].height()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Channel `k` (0..4) for polarizer angle k * 45°.
    pub fn channel(&self, k: usize) -> &Image {
        &self.channels[k]
    }

    pub fn channels(&self) -> &[Image; 4] {
        &self.channels
    }

    pub fn into_channels(self) -> [Image; 4] {
        self.channels
    }

    pub(crate) fn require_domain(&self, required: Domain) -> Result<()> {
        if self.domain == required {
            Ok(())
        } else {
            Err(PolarError::DomainMismatch {
                required: required.name(),
                actual: self.domain.name(),
            })
        }
    }

    pub fn same_shape(&self, other: &PolarizedStack) -> bool {
        self.channels[0].same_shape(&other.channels[0])
    }

    pub(crate) fn check_same_shape(&self, other: &PolarizedStack) -> Result<()> {
        self.channels[0].check_same_shape(&other.channels[0])
    }

    /// Total intensity map: I = (I1 + I2 + I3 + I4) / 2.
    pub fn intensity(&self) -> Image {
        let [c0, c1, c2, c3] = &self.channels;
        let mut out = Vec::with_capacity(c0.len());
        for i in 0..c0.len() {
            out.push(
                0.5 * (c0.pixels()[i] + c1.pixels()[i] + c2.pixels()[i] + c3.pixels()[i]),
            );
        }
        Image::new(c0.width(), c0.height(), out).expect("channel-sized buffer")
    }

    /// Apply `f` to every sample of every channel, keeping the domain.
    pub fn map(&self, f: impl Fn(f64) -> f64 + Copy) -> PolarizedStack {
        PolarizedStack {
            channels: [
                self.channels[0].map(f),
                self.channels[1].map(f),
                self.channels[2].map(f),
                self.channels[3].map(f),
            ],
            domain: self.domain,
        }
    }

    /// Uniformly rescale all channels.
    pub fn scaled(&self, factor: f64) -> PolarizedStack {
        self.map(|v| v * factor)
    }

    /// Gamma-encode each channel as `(v / ceiling) ^ exponent`. The result
    /// is tagged [`Domain::Gamma`] so downstream linear-only operations
    /// reject it.
    pub fn gamma_encoded(&self, exponent: f64, ceiling: f64) -> PolarizedStack {
        let mut out = self.map(|v| (v / ceiling).max(0.0).powf(exponent));
        out.domain = Domain::Gamma;
        out
    }

    pub fn max_value(&self) -> f64 {
        self.channels
            .iter()
            .map(|c| c.max())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.channels
            .iter()
            .map(|c| c.min())
            .fold(f64::INFINITY, f64::min)
    }

    /// Mean over all samples of all four channels.
    pub fn mean_value(&self) -> f64 {
        let n = (self.channels[0].len() * 4) as f64;
        if n == 0.0 {
            return 0.0;
        }
        self.channels.iter().map(|c| c.sum()).sum::<f64>() / n
    }
}
