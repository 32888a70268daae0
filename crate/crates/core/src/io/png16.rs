//! Lossless 16-bit grayscale PNG I/O.
//!
//! Raw sensor data is stored in 16-bit containers; 12-bit samples are
//! left-shifted by 4 on write and shifted back on read (4095 -> 65520 ->
//! 4095), a convention the callers record in their metadata sidecars.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use crate::error::{PolarError, Result};

/// A 16-bit grayscale image buffer, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Gray16 {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u16>,
}

impl Gray16 {
    pub fn new(width: u32, height: u32, data: Vec<u16>) -> Result<Self> {
        if data.len() != width as usize * height as usize {
            return Err(PolarError::Format(format!(
                "buffer length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Gray16 {
            width,
            height,
            data,
        })
    }
}

pub fn write_png16(path: impl AsRef<Path>, image: &Gray16) -> Result<()> {
    let file = File::create(path)?;
    let writer = BufWriter::new(file);
    let mut encoder = png::Encoder::new(writer, image.width, image.height);
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Sixteen);
    let mut writer = encoder
        .write_header()
        .map_err(|e| PolarError::Format(format!("png encode: {e}")))?;
    // PNG samples are big-endian on the wire.
    let mut bytes = Vec::with_capacity(image.data.len() * 2);
    for &v in &image.data {
        bytes.extend_from_slice(&v.to_be_bytes());
    }
    writer
        .write_image_data(&bytes)
        .map_err(|e| PolarError::Format(format!("png encode: {e}")))?;
    Ok(())
}

pub fn read_png16(path: impl AsRef<Path>) -> Result<Gray16> {
    let file = File::open(path)?;
    let decoder = png::Decoder::new(BufReader::new(file));
    let mut reader = decoder
        .read_info()
        .map_err(|e| PolarError::Format(format!("png decode: {e}")))?;
    let (color, depth) = reader.output_color_type();
    if color != png::ColorType::Grayscale || depth != png::BitDepth::Sixteen {
        return Err(PolarError::Format(format!(
            "expected 16-bit grayscale PNG, got {color:?}/{depth:?}"
        )));
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| PolarError::Format("png output size overflow".into()))?;
    let mut buf = vec![0u8; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| PolarError::Format(format!("png decode: {e}")))?;
    let data: Vec<u16> = buf[..info.buffer_size()]
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect();
    Gray16::new(info.width, info.height, data)
}
