//! The three reconstruction quality measures: PSNR, NCC and global SSIM.
//!
//! PSNR normalizes the difference norm per pixel (RMSE) so values are
//! comparable across image sizes, and returns +inf for identical inputs.
//! NCC is the raw inner-product correlation without mean subtraction. SSIM
//! is computed over the whole image with a single mean/variance/covariance
//! triple and the usual constants c1 = (0.01*255)^2, c2 = (0.03*255)^2.

use crate::image::Image;
use thiserror::Error;

const SSIM_C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const SSIM_C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("images have different shapes")]
    ShapeMismatch,
    #[error("zero-norm image: NCC is undefined")]
    ZeroNorm,
}

/// PSNR/NCC/SSIM of a reconstruction against its reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub psnr: f64,
    pub ncc: f64,
    pub ssim: f64,
}

/// Peak signal-to-noise ratio in dB: 20*log10(255 / rmse).
///
/// Returns `f64::INFINITY` when the images are identical.
pub fn psnr(a: &Image, b: &Image) -> Result<f64, MetricError> {
    if !a.same_shape(b) {
        return Err(MetricError::ShapeMismatch);
    }
    let mse = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / a.pixels().len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (255.0 / mse.sqrt()).log10())
}

/// Normalized cross correlation <a,b> / (|a| |b|), no mean subtraction.
pub fn ncc(a: &Image, b: &Image) -> Result<f64, MetricError> {
    if !a.same_shape(b) {
        return Err(MetricError::ShapeMismatch);
    }
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.pixels().iter().zip(b.pixels()) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(MetricError::ZeroNorm);
    }
    Ok(dot / (na.sqrt() * nb.sqrt()))
}

/// Whole-image structural similarity with population moments.
pub fn ssim(a: &Image, b: &Image) -> Result<f64, MetricError> {
    if !a.same_shape(b) {
        return Err(MetricError::ShapeMismatch);
    }
    let n = a.pixels().len() as f64;
    let mu_a = a.mean();
    let mu_b = b.mean();
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    let mut cov = 0.0;
    for (x, y) in a.pixels().iter().zip(b.pixels()) {
        var_a += (x - mu_a) * (x - mu_a);
        var_b += (y - mu_b) * (y - mu_b);
        cov += (x - mu_a) * (y - mu_b);
    }
    var_a /= n;
    var_b /= n;
    cov /= n;
    Ok(((2.0 * mu_a * mu_b + SSIM_C1) * (2.0 * cov + SSIM_C2))
        / ((mu_a * mu_a + mu_b * mu_b + SSIM_C1) * (var_a + var_b + SSIM_C2)))
}

/// All three metrics at once.
pub fn quality_report(reference: &Image, candidate: &Image) -> Result<QualityReport, MetricError> {
    Ok(QualityReport {
        psnr: psnr(reference, candidate)?,
        ncc: ncc(reference, candidate)?,
        ssim: ssim(reference, candidate)?,
    })
}
