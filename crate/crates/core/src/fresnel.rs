//! Fresnel power coefficients and degree-of-polarization curves at a
//! single air-dielectric interface.
//!
//! Unpolarized light striking glass reflects with s- and p-components
//! attenuated differently, so both the reflected and the transmitted beams
//! become partially polarized. The degree of polarization of each beam is
//! computed from the power coefficients:
//!
//! ```text
//! rho_R = |Rs - Rp| / (Rs + Rp)      rho_T = |Ts - Tp| / (Ts + Tp)
//! ```
//!
//! rho_R reaches exactly 1 at the Brewster angle arctan(n), where the
//! p-reflectance vanishes. Only a single non-absorbing interface is
//! modeled; slab effects (double interfaces, thin-film interference) are
//! out of scope.

use crate::error::{PolarError, Result};

/// An air-to-dielectric interface: refractive index `n > 1` and incidence
/// angle `theta_i` in `[0, pi/2)` radians.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InterfaceSpec {
    n: f64,
    theta_i: f64,
}

impl InterfaceSpec {
    pub fn new(n: f64, theta_i: f64) -> Result<Self> {
        if !n.is_finite() || n <= 1.0 {
            return Err(PolarError::parameter("n", "refractive index must be > 1"));
        }
        if !theta_i.is_finite() || !(0.0..std::f64::consts::FRAC_PI_2).contains(&theta_i) {
            return Err(PolarError::parameter(
                "theta_i",
                "incidence angle must be in [0, pi/2)",
            ));
        }
        Ok(InterfaceSpec { n, theta_i })
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn theta_i(&self) -> f64 {
        self.theta_i
    }
}

/// Power reflectance/transmittance per polarization at one interface.
/// Satisfies rs + ts = 1 and rp + tp = 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerCoefficients {
    pub rs: f64,
    pub rp: f64,
    pub ts: f64,
    pub tp: f64,
}

/// Fresnel power coefficients for unpolarized light entering from air.
pub fn fresnel_power_coefficients(spec: InterfaceSpec) -> PowerCoefficients {
    let n = spec.n;
    let cos_i = spec.theta_i.cos();
    let sin_t = spec.theta_i.sin() / n;
    // n > 1 guarantees a real refraction angle (no total internal reflection).
    let cos_t = (1.0 - sin_t * sin_t).sqrt();

    let rs_amp = (cos_i - n * cos_t) / (cos_i + n * cos_t);
    let rp_amp = (n * cos_i - cos_t) / (n * cos_i + cos_t);
    let ts_amp = 2.0 * cos_i / (cos_i + n * cos_t);
    let tp_amp = 2.0 * cos_i / (n * cos_i + cos_t);

    // Transmitted power carries the n*cos_t/cos_i impedance/geometry factor.
    let beam_ratio = n * cos_t / cos_i;
    PowerCoefficients {
        rs: rs_amp * rs_amp,
        rp: rp_amp * rp_amp,
        ts: beam_ratio * ts_amp * ts_amp,
        tp: beam_ratio * tp_amp * tp_amp,
    }
}

/// Incidence angle arctan(n) at which p-reflectance vanishes.
pub fn brewster_angle(n: f64) -> Result<f64> {
    if !n.is_finite() || n <= 0.0 {
        return Err(PolarError::parameter("n", "must be positive"));
    }
    Ok(n.atan())
}

/// Degree of polarization of the reflected beam for unpolarized incidence.
pub fn dop_reflected(spec: InterfaceSpec) -> f64 {
    let c = fresnel_power_coefficients(spec);
    dop_from_pair(c.rs, c.rp)
}

/// Degree of polarization of the transmitted beam for unpolarized incidence.
pub fn dop_transmitted(spec: InterfaceSpec) -> f64 {
    let c = fresnel_power_coefficients(spec);
    dop_from_pair(c.ts, c.tp)
}

fn dop_from_pair(a: f64, b: f64) -> f64 {
    let total = a + b;
    if total == 0.0 {
        return 0.0;
    }
    ((a - b).abs() / total).clamp(0.0, 1.0)
}

/// One row of a degree-of-polarization sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DopSample {
    pub theta_deg: f64,
    pub rho_r: f64,
    pub rho_t: f64,
}

/// Sample rho_R and rho_T on an even grid of `samples` incidence angles
/// covering [0°, 90°): theta_j = j * 90 / samples degrees.
pub fn dop_curve(n: f64, samples: usize) -> Result<Vec<DopSample>> {
    if samples < 2 {
        return Err(PolarError::parameter("samples", "need at least 2"));
    }
    let mut rows = Vec::with_capacity(samples);
    for j in 0..samples {
        let theta_deg = j as f64 * 90.0 / samples as f64;
        let spec = InterfaceSpec::new(n, theta_deg.to_radians())?;
        rows.push(DopSample {
            theta_deg,
            rho_r: dop_reflected(spec),
            rho_t: dop_transmitted(spec),
        });
    }
    Ok(rows)
}
