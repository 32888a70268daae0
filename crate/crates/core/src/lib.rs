//! Polarization-raw imaging toolkit.
//!
//! The crate covers the full desk-scale pipeline around a
//! division-of-focal-plane polarization sensor:
//!
//! - [`mosaic`]: 2x2 micro-polarizer mosaics and their (de)multiplexing.
//! - [`stokes`]: Malus-law rendering and Stokes recovery (I, rho, phi)
//!   plus overexposure masking.
//! - [`fresnel`]: reflectance/transmittance and degree-of-polarization
//!   curves at an air-glass interface.
//! - [`synth`]: physically faithful synthetic {M, R, T} triples in
//!   raw-linear space, with the dataset cleaning rules.
//! - [`losses`]: a fixed linear feature pyramid, NCC/PNCC, and the
//!   masked perceptual loss, all with analytic gradients.
//! - [`separate`]: a two-stage projected-gradient separator that splits a
//!   mixed polarized stack into reflection and transmission.
//! - [`io`]: bit-exact 16-bit PNG and tensor-file round-trips.

pub mod error;
pub mod fresnel;
pub mod image;
pub mod io;
pub mod losses;
pub mod mosaic;
pub mod separate;
pub mod stack;
pub mod stokes;
pub mod synth;

pub use error::{PolarError, Result};
pub use image::{psnr, Image};
pub use mosaic::{
    bit_ceiling, demux_mosaic, remux_mosaic, MosaicPattern, PolarizerAngle, RawMosaic,
};
pub use stack::{Domain, PolarizedStack};
pub use stokes::{
    aop_distance, compute_stokes, malus_render, overexposure_mask, render_stack, wrap_aop,
    LightField, LightState, StokesMaps, DEFAULT_OVEREXPOSURE_DELTA,
};
