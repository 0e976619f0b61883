//! Patch-wise nonlocal means.
//!
//! Weights come from Gaussian-weighted squared patch distances
//! `M(x,y) = sum_z G_sigma(z) (u(x+z) - u(y+z))^2` over a search window;
//! each reference pixel produces an estimate for its whole patch
//! (`sum_y w(x,y) u(y+z) / sum_y w(x,y)`), and overlapping patch estimates
//! are averaged uniformly into the output. Patches read past the border
//! through mirror extension.

use thiserror::Error;

use crate::image::Image;

#[derive(Debug, Error, PartialEq)]
pub enum NlmError {
    #[error("{name} must be positive and finite, got {value}")]
    BadParameter { name: &'static str, value: f64 },
    #[error("patch_radius and search_radius must be at least 1")]
    BadRadius,
}

/// sigma is the std of the patch kernel G_sigma; h defaults to sigma
/// (the range scale is fixed in terms of sigma, kappa = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlmConfig {
    pub sigma: f64,
    pub h: f64,
    pub patch_radius: usize,
    pub search_radius: usize,
}

impl NlmConfig {
    /// Single-parameter constructor: h = sigma, patch 5x5, search 21x21.
    pub fn from_sigma(sigma: f64) -> Result<Self, NlmError> {
        Self::new(sigma, sigma, 2, 10)
    }

    pub fn new(
        sigma: f64,
        h: f64,
        patch_radius: usize,
        search_radius: usize,
    ) -> Result<Self, NlmError> {
        for (name, value) in [("sigma", sigma), ("h", h)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(NlmError::BadParameter { name, value });
            }
        }
        if patch_radius == 0 || search_radius == 0 {
            return Err(NlmError::BadRadius);
        }
        Ok(Self {
            sigma,
            h,
            patch_radius,
            search_radius,
        })
    }
}

/// Mirror (reflect) an out-of-range index into [0, n).
fn mirror(i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    let mut m = i.rem_euclid(period);
    if m >= n {
        m = period - m;
    }
    m as usize
}

/// Normalized Gaussian kernel over the (2f+1)^2 patch offsets.
fn patch_kernel(patch_radius: usize, sigma: f64) -> Vec<f64> {
    let f = patch_radius as isize;
    let mut kernel = Vec::with_capacity(((2 * f + 1) * (2 * f + 1)) as usize);
    let inv = 1.0 / (2.0 * sigma * sigma);
    for dy in -f..=f {
        for dx in -f..=f {
            kernel.push((-((dx * dx + dy * dy) as f64) * inv).exp());
        }
    }
    let total: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= total;
    }
    kernel
}

/// Patch-wise nonlocal means filter.
pub fn nlm(img: &Image, cfg: &NlmConfig) -> Image {
    let (w, h) = (img.width(), img.height());
    let f = cfg.patch_radius as isize;
    let r = cfg.search_radius as isize;
    let src = img.pixels();
    let kernel = patch_kernel(cfg.patch_radius, cfg.sigma);
    let inv_h2 = 1.0 / (cfg.h * cfg.h);
    let at = |x: isize, y: isize| src[mirror(y, h) * w + mirror(x, w)];

    let patch_len = ((2 * f + 1) * (2 * f + 1)) as usize;
    let mut acc = vec![0.0f64; src.len()];
    let mut count = vec![0.0f64; src.len()];
    let mut estimate = vec![0.0f64; patch_len];
    for yc in 0..h as isize {
        for xc in 0..w as isize {
            estimate.fill(0.0);
            let mut weight_sum = 0.0;
            // candidate centers stay inside the image; only patch reads mirror
            for ys in (yc - r).max(0)..=(yc + r).min(h as isize - 1) {
                for xs in (xc - r).max(0)..=(xc + r).min(w as isize - 1) {
                    // Gaussian-weighted squared patch distance
                    let mut dist = 0.0;
                    let mut k = 0;
                    for py in -f..=f {
                        for px in -f..=f {
                            let d = at(xc + px, yc + py) - at(xs + px, ys + py);
                            dist += kernel[k] * d * d;
                            k += 1;
                        }
                    }
                    let weight = (-dist * inv_h2).exp();
                    weight_sum += weight;
                    let mut k = 0;
                    for py in -f..=f {
                        for px in -f..=f {
                            estimate[k] += weight * at(xs + px, ys + py);
                            k += 1;
                        }
                    }
                }
            }
            // distribute the normalized patch estimate over the output
            let mut k = 0;
            for py in -f..=f {
                for px in -f..=f {
                    let (x, y) = (xc + px, yc + py);
                    if x >= 0 && x < w as isize && y >= 0 && y < h as isize {
                        let out_idx = y as usize * w + x as usize;
                        acc[out_idx] += estimate[k] / weight_sum;
                        count[out_idx] += 1.0;
                    }
                    k += 1;
                }
            }
        }
    }
    let out: Vec<f64> = acc.iter().zip(&count).map(|(a, c)| a / c).collect();
    Image::new(w, h, out).expect("averaging keeps pixels finite")
}
