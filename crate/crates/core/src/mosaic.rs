//! Division-of-focal-plane sensor mosaics and their (de)multiplexing.
//!
//! The sensor tiles the focal plane with 2x2 blocks of micro-polarizers;
//! each of the four sub-pixels in a block sees one of the angles
//! 0°, 45°, 90°, 135°. Demultiplexing extracts the four quarter-resolution
//! angle channels; remultiplexing packs them back into a single plane.

use crate::error::{PolarError, Result};
use crate::image::Image;
use crate::stack::{Domain, PolarizedStack};

/// One of the four micro-polarizer orientations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum PolarizerAngle {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

pub const ALL_ANGLES: [PolarizerAngle; 4] = [
    PolarizerAngle::Deg0,
    PolarizerAngle::Deg45,
    PolarizerAngle::Deg90,
    PolarizerAngle::Deg135,
];

impl PolarizerAngle {
    /// Channel slot in a [`PolarizedStack`] (0..4).
    pub fn index(self) -> usize {
        match self {
            PolarizerAngle::Deg0 => 0,
            PolarizerAngle::Deg45 => 1,
            PolarizerAngle::Deg90 => 2,
            PolarizerAngle::Deg135 => 3,
        }
    }

    pub fn radians(self) -> f64 {
        self.index() as f64 * std::f64::consts::FRAC_PI_4
    }

    pub fn degrees(self) -> f64 {
        self.index() as f64 * 45.0
    }

    pub fn from_degrees(deg: u32) -> Result<Self> {
        match deg {
            0 => Ok(PolarizerAngle::Deg0),
            45 => Ok(PolarizerAngle::Deg45),
            90 => Ok(PolarizerAngle::Deg90),
            135 => Ok(PolarizerAngle::Deg135),
            other => Err(PolarError::parameter(
                "angle",
                format!("{other} is not one of 0, 45, 90, 135"),
            )),
        }
    }
}

/// Assignment of the four angles to the four sub-pixel positions of a
/// 2x2 block. Position order is (row 0, col 0), (row 0, col 1),
/// (row 1, col 0), (row 1, col 1); the assignment must be a bijection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct MosaicPattern {
    angles: [PolarizerAngle; 4],
}

impl MosaicPattern {
    pub fn new(angles: [PolarizerAngle; 4]) -> Result<Self> {
        let mut seen = [false; 4];
        for a in angles {
            if seen[a.index()] {
                return Err(PolarError::parameter(
                    "pattern",
                    format!("angle {}° assigned twice", a.degrees()),
                ));
            }
            seen[a.index()] = true;
        }
        Ok(MosaicPattern { angles })
    }

    /// Angle of the sub-pixel at `(row, col)` within a block.
    pub fn angle_at(&self, row: usize, col: usize) -> PolarizerAngle {
        self.angles[row * 2 + col]
    }

    /// Block-local `(row, col)` position carrying `angle`.
    pub fn position_of(&self, angle: PolarizerAngle) -> (usize, usize) {
        let i = self
            .angles
            .iter()
            .position(|&a| a == angle)
            .expect("pattern is a bijection");
        (i / 2, i % 2)
    }

    pub fn angles(&self) -> [PolarizerAngle; 4] {
        self.angles
    }
}

impl Default for MosaicPattern {
    /// 0° at (0,0), 45° at (0,1), 90° at (1,0), 135° at (1,1).
    ///
    /// The physical layout of real sensors varies; this default is
    /// configurable rather than asserted.
    fn default() -> Self {
        MosaicPattern {
            angles: ALL_ANGLES,
        }
    }
}

/// A single-plane sensor readout with integer samples of `bit_depth` bits
/// (stored in `u16`) and a 2x2 polarizer pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct RawMosaic {
    width: usize,
    height: usize,
    bit_depth: u8,
    pattern: MosaicPattern,
    data: Vec<u16>,
}

pub const DEFAULT_BIT_DEPTH: u8 = 12;

/// Largest representable sample at a given bit depth.
pub fn bit_ceiling(bit_depth: u8) -> f64 {
    ((1u32 << bit_depth) - 1) as f64
}

impl RawMosaic {
    pub fn new(
        width: usize,
        height: usize,
        bit_depth: u8,
        pattern: MosaicPattern,
        data: Vec<u16>,
    ) -> Result<Self> {
        if width == 0 || height == 0 || !width.is_multiple_of(2) || !height.is_multiple_of(2) {
            return Err(PolarError::Dimension(format!(
                "mosaic dimensions must be even and non-zero, got {width}x{height}"
            )));
        }
        if !(1..=16).contains(&bit_depth) {
            return Err(PolarError::parameter("bit_depth", "must be in 1..=16"));
        }
        if data.len() != width * height {
            return Err(PolarError::Dimension(format!(
                "data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        let max = bit_ceiling(bit_depth);
        for &v in &data {
            if f64::from(v) > max {
                return Err(PolarError::ValueOutOfRange {
                    value: f64::from(v),
                    max,
                });
            }
        }
        Ok(RawMosaic {
            width,
            height,
            bit_depth,
            pattern,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bit_depth(&self) -> u8 {
        self.bit_depth
    }

    pub fn pattern(&self) -> MosaicPattern {
        self.pattern
    }

    pub fn samples(&self) -> &[u16] {
        &self.data
    }

    #[inline]
    pub fn sample(&self, x: usize, y: usize) -> u16 {
        self.data[y * self.width + x]
    }
}

/// Split a mosaic into its four quarter-resolution angle channels.
///
/// Channel k at stack pixel `(x, y)` is the mosaic sample of the sub-pixel
/// assigned angle k * 45° inside block `(x, y)`. No interpolation is
/// performed.
pub fn demux_mosaic(mosaic: &RawMosaic) -> PolarizedStack {
    let (bw, bh) = (mosaic.width / 2, mosaic.height / 2);
    let channels: [Image; 4] = std::array::from_fn(|k| {
        let (row, col) = mosaic.pattern.position_of(ALL_ANGLES[k]);
        Image::from_fn(bw, bh, |x, y| {
            f64::from(mosaic.sample(2 * x + col, 2 * y + row))
        })
    });
    PolarizedStack::new(channels, Domain::LinearRaw).expect("channels share block grid")
}

/// Pack four angle channels back into a single mosaic plane; the inverse
/// of [`demux_mosaic`].
///
/// Samples are rounded to the nearest integer. Values that round outside
/// `[0, 2^bit_depth - 1]` are an error unless `clamp` is set.
pub fn remux_mosaic(
    stack: &PolarizedStack,
    pattern: MosaicPattern,
    bit_depth: u8,
    clamp: bool,
) -> Result<RawMosaic> {
    stack.require_domain(Domain::LinearRaw)?;
    let max = bit_ceiling(bit_depth);
    let (bw, bh) = (stack.width(), stack.height());
    let mut data = vec![0u16; bw * bh * 4];
    for (k, angle) in ALL_ANGLES.iter().enumerate() {
        let (row, col) = pattern.position_of(*angle);
        let channel = stack.channel(k);
        for y in 0..bh {
            for x in 0..bw {
                let v = channel.get(x, y).round();
                let v = if clamp {
                    v.clamp(0.0, max)
                } else if v < 0.0 || v > max {
                    return Err(PolarError::ValueOutOfRange { value: v, max });
                } else {
                    v
                };
                data[(2 * y + row) * (2 * bw) + (2 * x + col)] = v as u16;
            }
        }
    }
    RawMosaic::new(2 * bw, 2 * bh, bit_depth, pattern, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_rejects_duplicates() {
        let r = MosaicPattern::new([
            PolarizerAngle::Deg0,
            PolarizerAngle::Deg0,
            PolarizerAngle::Deg90,
            PolarizerAngle::Deg135,
        ]);
        assert!(r.is_err());
    }

    #[test]
    fn odd_dimensions_rejected() {
        let r = RawMosaic::new(3, 2, 12, MosaicPattern::default(), vec![0; 6]);
        assert!(matches!(r, Err(PolarError::Dimension(_))));
    }

    #[test]
    fn out_of_range_sample_rejected() {
        let r = RawMosaic::new(2, 2, 12, MosaicPattern::default(), vec![0, 0, 0, 4096]);
        assert!(matches!(r, Err(PolarError::ValueOutOfRange { .. })));
    }

    #[test]
    fn demux_single_block() {
        // [[a, b], [c, d]] with the default pattern -> (a, b, c, d)
        let m = RawMosaic::new(2, 2, 12, MosaicPattern::default(), vec![1, 2, 3, 4]).unwrap();
        let s = demux_mosaic(&m);
        assert_eq!(s.width(), 1);
        assert_eq!(s.height(), 1);
        assert_eq!(
            [
                s.channel(0).get(0, 0),
                s.channel(1).get(0, 0),
                s.channel(2).get(0, 0),
                s.channel(3).get(0, 0)
            ],
            [1.0, 2.0, 3.0, 4.0]
        );
    }

    #[test]
    fn demux_constant_mosaic() {
        let m = RawMosaic::new(4, 4, 12, MosaicPattern::default(), vec![7; 16]).unwrap();
        let s = demux_mosaic(&m);
        assert_eq!(s.width(), 2);
        for k in 0..4 {
            assert!(s.channel(k).pixels().iter().all(|&v| v == 7.0));
        }
    }

    #[test]
    fn demux_respects_custom_pattern() {
        // Swap 0° and 135° relative to the default.
        let pattern = MosaicPattern::new([
            PolarizerAngle::Deg135,
            PolarizerAngle::Deg45,
            PolarizerAngle::Deg90,
            PolarizerAngle::Deg0,
        ])
        .unwrap();
        let m = RawMosaic::new(2, 2, 12, pattern, vec![1, 2, 3, 4]).unwrap();
        let s = demux_mosaic(&m);
        assert_eq!(s.channel(0).get(0, 0), 4.0);
        assert_eq!(s.channel(3).get(0, 0), 1.0);
    }

    #[test]
    fn remux_single_block() {
        let s = PolarizedStack::new(
            [
                Image::filled(1, 1, 1.0),
                Image::filled(1, 1, 2.0),
                Image::filled(1, 1, 3.0),
                Image::filled(1, 1, 4.0),
            ],
            Domain::LinearRaw,
        )
        .unwrap();
        let m = remux_mosaic(&s, MosaicPattern::default(), 12, false).unwrap();
        assert_eq!(m.samples(), &[1, 2, 3, 4]);
    }

    #[test]
    fn remux_range_error_and_clamp() {
        let s = PolarizedStack::new(
            [
                Image::filled(1, 1, 4096.0),
                Image::filled(1, 1, 0.0),
                Image::filled(1, 1, 0.0),
                Image::filled(1, 1, 0.0),
            ],
            Domain::LinearRaw,
        )
        .unwrap();
        assert!(matches!(
            remux_mosaic(&s, MosaicPattern::default(), 12, false),
            Err(PolarError::ValueOutOfRange { .. })
        ));
        let clamped = remux_mosaic(&s, MosaicPattern::default(), 12, true).unwrap();
        assert_eq!(clamped.sample(0, 0), 4095);
    }

    #[test]
    fn remux_rejects_gamma_domain() {
        let s = PolarizedStack::new(
            [
                Image::filled(1, 1, 1.0),
                Image::filled(1, 1, 1.0),
                Image::filled(1, 1, 1.0),
                Image::filled(1, 1, 1.0),
            ],
            Domain::LinearRaw,
        )
        .unwrap()
        .gamma_encoded(1.0 / 2.2, 4095.0);
        assert!(matches!(
            remux_mosaic(&s, MosaicPattern::default(), 12, false),
            Err(PolarError::DomainMismatch { .. })
        ));
    }
}
