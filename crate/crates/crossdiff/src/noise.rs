//! Additive Gaussian noise at a prescribed signal-to-noise ratio.
//!
//! SNR is defined as sigma(clean) / sigma(clean - noisy) with population
//! standard deviations, so the injected noise has standard deviation
//! sigma(img) / target_snr. Output is deliberately not clamped to [0, 255];
//! clamping happens only when an image is written to disk.

use crate::image::Image;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    #[error("target SNR must be positive and finite, got {0}")]
    BadTargetSnr(f64),
    #[error("constant image: SNR is undefined when sigma(img) = 0")]
    ConstantImage,
    #[error("images have different shapes")]
    ShapeMismatch,
    #[error("sigma(clean - noisy) = 0, SNR is undefined")]
    ZeroDenominator,
}

/// Target noise level and RNG seed for reproducible noise injection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub target_snr: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(target_snr: f64, seed: u64) -> Result<Self, NoiseError> {
        if !(target_snr > 0.0 && target_snr.is_finite()) {
            return Err(NoiseError::BadTargetSnr(target_snr));
        }
        Ok(Self { target_snr, seed })
    }
}

/// Adds i.i.d. zero-mean Gaussian noise with std sigma(img) / target_snr.
///
/// Deterministic for a fixed seed: one ChaCha8 stream, pixels sampled in
/// row-major order.
pub fn add_gaussian_noise(img: &Image, spec: &NoiseSpec) -> Result<Image, NoiseError> {
    let sigma = img.std_dev();
    if sigma == 0.0 {
        return Err(NoiseError::ConstantImage);
    }
    let noise_std = sigma / spec.target_snr;
    let normal = Normal::new(0.0, noise_std).expect("validated spec implies finite positive std");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pixels = img
        .pixels()
        .iter()
        .map(|&p| p + normal.sample(&mut rng))
        .collect();
    Ok(Image::new(img.width(), img.height(), pixels).expect("noise keeps pixels finite"))
}

/// Measured SNR between a clean image and its noisy observation.
pub fn snr(clean: &Image, noisy: &Image) -> Result<f64, NoiseError> {
    if !clean.same_shape(noisy) {
        return Err(NoiseError::ShapeMismatch);
    }
    let diff: Vec<f64> = clean
        .pixels()
        .iter()
        .zip(noisy.pixels())
        .map(|(a, b)| a - b)
        .collect();
    let n = diff.len() as f64;
    let mean = diff.iter().sum::<f64>() / n;
    let var = diff.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n;
    let sigma_diff = var.sqrt();
    if sigma_diff == 0.0 {
        return Err(NoiseError::ZeroDenominator);
    }
    Ok(clean.std_dev() / sigma_diff)
}
