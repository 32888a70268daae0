//! Shared CLI plumbing: image/stack loading, seeded base generation, and
//! the metadata sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use polarsep_core::io::{
    image_from_tensor, read_png16, read_tensor, stack_from_tensor, write_png16, Gray16,
};
use polarsep_core::mosaic::{bit_ceiling, MosaicPattern, PolarizerAngle, RawMosaic};
use polarsep_core::Image;

pub const PNG16_MAX: f64 = 65535.0;

/// Parse a mosaic pattern given as four angles in block order
/// (0,0), (0,1), (1,0), (1,1), e.g. "0,45,90,135".
pub fn parse_pattern(s: &str) -> Result<MosaicPattern> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        bail!("pattern needs exactly four angles, got {}", parts.len());
    }
    let mut angles = [PolarizerAngle::Deg0; 4];
    for (i, p) in parts.iter().enumerate() {
        let deg: u32 = p
            .trim()
            .parse()
            .with_context(|| format!("bad angle {p:?}"))?;
        angles[i] = PolarizerAngle::from_degrees(deg)?;
    }
    Ok(MosaicPattern::new(angles)?)
}

/// Read a mosaic stored as 16-bit PNG with samples left-shifted by
/// `16 - bit_depth`.
pub fn read_mosaic_png(path: &Path, bit_depth: u8, pattern: MosaicPattern) -> Result<RawMosaic> {
    let png = read_png16(path).with_context(|| format!("reading {}", path.display()))?;
    let shift = 16 - u32::from(bit_depth);
    let data: Vec<u16> = png.data.iter().map(|&v| v >> shift).collect();
    Ok(RawMosaic::new(
        png.width as usize,
        png.height as usize,
        bit_depth,
        pattern,
        data,
    )?)
}

pub fn write_mosaic_png(path: &Path, mosaic: &RawMosaic) -> Result<()> {
    let shift = 16 - u32::from(mosaic.bit_depth());
    let data: Vec<u16> = mosaic.samples().iter().map(|&v| v << shift).collect();
    let img = Gray16::new(mosaic.width() as u32, mosaic.height() as u32, data)?;
    write_png16(path, &img)?;
    Ok(())
}

/// Read an intensity image: `.png` (16-bit grayscale, normalized to
/// [0, 1]) or `.pmrt` (f32 tensor, taken as-is).
pub fn read_image_auto(path: &Path) -> Result<Image> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("png") => {
            let png = read_png16(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(Image::new(
                png.width as usize,
                png.height as usize,
                png.data.iter().map(|&v| f64::from(v) / PNG16_MAX).collect(),
            )?)
        }
        Some("pmrt") => {
            let t = read_tensor(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(image_from_tensor(&t)?)
        }
        _ => bail!(
            "unsupported image extension for {} (expected .png or .pmrt)",
            path.display()
        ),
    }
}

pub fn read_stack(path: &Path) -> Result<polarsep_core::PolarizedStack> {
    let t = read_tensor(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(stack_from_tensor(&t)?)
}

/// Smooth seeded test pattern; see [`polarsep_core::synth::smooth_noise_base`].
pub fn generate_base(width: usize, height: usize, seed: u64, radius: i64) -> Image {
    polarsep_core::synth::smooth_noise_base(width, height, seed, radius)
}

/// Parse "WxH" into (width, height).
pub fn parse_size(s: &str) -> Result<(usize, usize)> {
    let (w, h) = s
        .split_once('x')
        .with_context(|| format!("expected WxH, got {s:?}"))?;
    Ok((w.parse()?, h.parse()?))
}

pub fn normalized_ceiling(bit_depth: u8) -> f64 {
    bit_ceiling(bit_depth)
}

pub fn ensure_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(())
}

/// Write the metadata sidecar. Contents are deterministic (no clocks);
/// reruns with identical inputs produce identical bytes.
pub fn write_metadata(dir: &Path, command: &str, body: serde_json::Value) -> Result<PathBuf> {
    let path = dir.join("meta.json");
    write_metadata_at(&path, command, body)?;
    Ok(path)
}

pub fn write_metadata_at(path: &Path, command: &str, body: serde_json::Value) -> Result<()> {
    let doc = serde_json::json!({
        "tool": "polarsep",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "run": body,
    });
    fs::write(path, format!("{}\n", serde_json::to_string_pretty(&doc)?))
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// CSV writer fixed to '.' decimals, LF line endings, and a header row.
pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut out = String::with_capacity(rows.len() * 32 + header.len() + 1);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
