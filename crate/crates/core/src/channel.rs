//! Circularly symmetric white Gaussian noise and decibel helpers.
//!
//! Noise is parameterized by the total complex variance `n0`; each of the
//! real and imaginary components receives `n0/2`. Samples come from the
//! ziggurat-based normal sampler in `rand_distr`, driven by whatever seeded
//! generator the caller supplies, so noise streams are reproducible.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Channel parameters: noise level plus per-class amplitude gains applied
/// when frames are composed (both default to 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub n0: f64,
    pub gain_a: f64,
    pub gain_b: f64,
}

impl ChannelConfig {
    pub fn new(n0: f64) -> Result<ChannelConfig> {
        ChannelConfig::with_gains(n0, 1.0, 1.0)
    }

    pub fn with_gains(n0: f64, gain_a: f64, gain_b: f64) -> Result<ChannelConfig> {
        if !n0.is_finite() || n0 < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "noise variance n0 must be finite and non-negative, got {n0}"
            )));
        }
        for (name, g) in [("gain_a", gain_a), ("gain_b", gain_b)] {
            if !g.is_finite() || g <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and positive, got {g}"
                )));
            }
        }
        Ok(ChannelConfig {
            n0,
            gain_a,
            gain_b,
        })
    }
}

/// Attenuation in dB to an amplitude factor: `10^(-db/20)`.
pub fn class_gain_db_to_amplitude(db: f64) -> f64 {
    10f64.powf(-db / 20.0)
}

/// Adds complex white Gaussian noise of total variance `cfg.n0`.
pub fn add_noise<R: Rng + ?Sized>(
    signal: &[Complex64],
    cfg: &ChannelConfig,
    rng: &mut R,
) -> Vec<Complex64> {
    let mut out = signal.to_vec();
    add_noise_in_place(&mut out, cfg.n0, rng);
    out
}

/// In-place variant used by the simulation hot path. `n0 == 0` leaves the
/// signal untouched and draws nothing from the generator.
pub fn add_noise_in_place<R: Rng + ?Sized>(signal: &mut [Complex64], n0: f64, rng: &mut R) {
    assert!(n0.is_finite() && n0 >= 0.0, "n0 must be finite and non-negative");
    if n0 == 0.0 {
        return;
    }
    let dist = Normal::new(0.0, (n0 / 2.0).sqrt()).expect("valid std dev");
    for s in signal.iter_mut() {
        *s += Complex64::new(dist.sample(rng), dist.sample(rng));
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_noise_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let signal: Vec<Complex64> = (0..32)
            .map(|i| Complex64::new(i as f64, -(i as f64)))
            .collect();
        let out = add_noise(&signal, &ChannelConfig::new(0.0).unwrap(), &mut rng);
        assert_eq!(out, signal);
    }

    #[test]
    fn noise_moments_match_n0() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let cfg = ChannelConfig::new(1.0).unwrap();
        let n = 10_000_000usize;
        let chunk = vec![Complex64::new(0.0, 0.0); 10_000];
        let mut sum_re = 0.0f64;
        let mut sum_im = 0.0f64;
        let mut sum_re2 = 0.0f64;
        let mut sum_im2 = 0.0f64;
        let mut sum_cross = 0.0f64;
        for _ in 0..n / chunk.len() {
            let noisy = add_noise(&chunk, &cfg, &mut rng);
            for s in noisy {
                sum_re += s.re;
                sum_im += s.im;
                sum_re2 += s.re * s.re;
                sum_im2 += s.im * s.im;
                sum_cross += s.re * s.im;
            }
        }
        let nf = n as f64;
        let var_total = (sum_re2 + sum_im2) / nf;
        let var_re = sum_re2 / nf;
        let var_im = sum_im2 / nf;
        let corr = (sum_cross / nf) / (var_re * var_im).sqrt();
        assert!((0.99..=1.01).contains(&var_total), "variance {var_total}");
        assert!((var_re - 0.5).abs() < 0.01, "re variance {var_re}");
        assert!((var_im - 0.5).abs() < 0.01, "im variance {var_im}");
        assert!(corr.abs() < 0.01, "re/im correlation {corr}");
        assert!((sum_re / nf).abs() < 0.001 && (sum_im / nf).abs() < 0.001);
    }

    #[test]
    fn same_seed_same_noise() {
        let cfg = ChannelConfig::new(0.25).unwrap();
        let signal = vec![Complex64::new(1.0, 1.0); 64];
        let a = add_noise(&signal, &cfg, &mut ChaCha8Rng::seed_from_u64(5));
        let b = add_noise(&signal, &cfg, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
    }

    #[test]
    fn db_to_amplitude_matches_known_points() {
        assert_eq!(class_gain_db_to_amplitude(0.0), 1.0);
        assert!((class_gain_db_to_amplitude(6.0206) - 0.5).abs() < 1e-6);
        assert!((class_gain_db_to_amplitude(20.0) - 0.1).abs() < 1e-15);
        // Power gain is the square of the amplitude gain.
        let amp = class_gain_db_to_amplitude(6.0206);
        assert!((amp * amp - 0.25).abs() < 1e-6);
    }

    #[test]
    fn config_rejects_bad_values() {
        assert!(ChannelConfig::new(-1.0).is_err());
        assert!(ChannelConfig::new(f64::NAN).is_err());
        assert!(ChannelConfig::with_gains(1.0, 0.0, 1.0).is_err());
        assert!(ChannelConfig::with_gains(1.0, 1.0, -0.5).is_err());
    }
}
