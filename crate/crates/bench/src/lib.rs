//! Shared fixtures for the pipeline benchmarks.

use polarsep_core::fresnel::brewster_angle;
use polarsep_core::synth::{make_triple, smooth_noise_base, SynthConfig, TriplePair};
use polarsep_core::Image;

pub fn base_pair(side: usize, seed: u64) -> (Image, Image) {
    (
        smooth_noise_base(side, side, seed, 1),
        smooth_noise_base(side, side, seed.wrapping_add(1), 1),
    )
}

/// A clean Brewster-angle triple with unpolarized transmission.
pub fn benchmark_triple(side: usize, seed: u64) -> TriplePair {
    let cfg = SynthConfig {
        quantize: false,
        rho_t_override: Some(0.0),
        theta_i: brewster_angle(1.7).expect("n > 0"),
        ..SynthConfig::seeded(seed)
    };
    let (base_r, base_t) = base_pair(side, seed.wrapping_mul(31));
    make_triple(&base_r, &base_t, &cfg).expect("valid bases")
}
