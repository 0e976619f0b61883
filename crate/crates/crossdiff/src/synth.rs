//! Seeded synthetic test images standing in for a natural-image corpus:
//! piecewise-constant shapes (natural-like) and oscillatory texture
//! patterns (texture-like).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::image::Image;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SynthError {
    #[error("synthetic images need size >= 32, got {0}")]
    TooSmall(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    /// Piecewise-constant rectangles and disks on a flat background.
    Shapes,
    /// Sum of oriented sinusoids plus seeded speckle, rescaled to [0, 255].
    Texture,
}

impl SyntheticKind {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "shapes" => Some(Self::Shapes),
            "texture" => Some(Self::Texture),
            _ => None,
        }
    }
}

/// Deterministic square test image of the given kind.
pub fn generate_synthetic(
    kind: SyntheticKind,
    size: usize,
    seed: u64,
) -> Result<Image, SynthError> {
    if size < 32 {
        return Err(SynthError::TooSmall(size));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        SyntheticKind::Shapes => Ok(shapes(size, &mut rng)),
        SyntheticKind::Texture => Ok(texture(size, &mut rng)),
    }
}

fn shapes(size: usize, rng: &mut ChaCha8Rng) -> Image {
    let background = 128.0;
    let mut pixels = vec![background; size * size];

    // distinct intensity levels 32..=224, never the background
    let mut levels: Vec<f64> = (0..13)
        .map(|k| 32.0 + 16.0 * k as f64)
        .filter(|&v| v != background)
        .collect();
    levels.shuffle(rng);

    // one disk per quadrant guarantees several visible levels, then a few
    // random rectangles on top
    let s = size as f64;
    let quadrant_centers = [
        (0.25 * s, 0.25 * s),
        (0.75 * s, 0.25 * s),
        (0.25 * s, 0.75 * s),
        (0.75 * s, 0.75 * s),
    ];
    for (i, &(cx0, cy0)) in quadrant_centers.iter().enumerate() {
        let jitter = s / 16.0;
        let cx = cx0 + rng.random_range(-jitter..jitter);
        let cy = cy0 + rng.random_range(-jitter..jitter);
        let radius = rng.random_range(s / 10.0..s / 7.0);
        let level = levels[i % levels.len()];
        for y in 0..size {
            for x in 0..size {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                if dx * dx + dy * dy <= radius * radius {
                    pixels[y * size + x] = level;
                }
            }
        }
    }
    for i in 0..3 {
        let level = levels[(4 + i) % levels.len()];
        let rw = rng.random_range(size / 8..size / 4);
        let rh = rng.random_range(size / 8..size / 4);
        let x0 = rng.random_range(0..size - rw);
        let y0 = rng.random_range(0..size - rh);
        for y in y0..y0 + rh {
            for x in x0..x0 + rw {
                pixels[y * size + x] = level;
            }
        }
    }
    Image::new(size, size, pixels).expect("synthetic pixels are finite")
}

fn texture(size: usize, rng: &mut ChaCha8Rng) -> Image {
    let mut pixels = vec![0.0f64; size * size];
    // oriented sinusoids with periods of a few pixels
    let waves: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            let angle = rng.random_range(0.0..std::f64::consts::PI);
            let freq = rng.random_range(0.08..0.35);
            let phase = rng.random_range(0.0..2.0 * std::f64::consts::PI);
            let amp = rng.random_range(0.5..1.0);
            (angle, freq, phase, amp)
        })
        .collect();
    for y in 0..size {
        for x in 0..size {
            let mut v = 0.0;
            for &(angle, freq, phase, amp) in &waves {
                let t = x as f64 * angle.cos() + y as f64 * angle.sin();
                v += amp * (2.0 * std::f64::consts::PI * freq * t + phase).sin();
            }
            pixels[y * size + x] = v;
        }
    }
    // speckle makes the clean texture itself noise-like
    let amp: f64 = 0.9;
    for p in &mut pixels {
        *p += rng.random_range(-amp..amp);
    }
    let lo = pixels.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = pixels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for p in &mut pixels {
        *p = (*p - lo) / (hi - lo) * 255.0;
    }
    Image::new(size, size, pixels).expect("synthetic pixels are finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn shapes_have_several_levels() {
        let img = generate_synthetic(SyntheticKind::Shapes, 128, 1).unwrap();
        let levels: BTreeSet<u64> = img.pixels().iter().map(|&p| p.to_bits()).collect();
        assert!(levels.len() >= 4, "got {} distinct levels", levels.len());
        assert!(img.min() >= 0.0 && img.max() <= 255.0);
    }

    #[test]
    fn deterministic_per_seed() {
        for kind in [SyntheticKind::Shapes, SyntheticKind::Texture] {
            let a = generate_synthetic(kind, 64, 9).unwrap();
            let b = generate_synthetic(kind, 64, 9).unwrap();
            assert_eq!(a, b);
            let c = generate_synthetic(kind, 64, 10).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn texture_has_contrast() {
        let img = generate_synthetic(SyntheticKind::Texture, 128, 5).unwrap();
        assert!(img.std_dev() > 10.0);
        assert!(img.min() >= 0.0 && img.max() <= 255.0);
    }

    #[test]
    fn size_floor() {
        assert_eq!(
            generate_synthetic(SyntheticKind::Shapes, 16, 0),
            Err(SynthError::TooSmall(16))
        );
    }

    #[test]
    fn kind_names() {
        assert_eq!(SyntheticKind::parse("shapes"), Some(SyntheticKind::Shapes));
        assert_eq!(SyntheticKind::parse("texture"), Some(SyntheticKind::Texture));
        assert_eq!(SyntheticKind::parse("noise"), None);
    }
}
