//! Real-valued intensity grid shared by every stage of the pipeline.
//!
//! Pixels are stored row-major as `f64` so intermediate results (noisy
//! observations, FEM nodal fields mapped back to images) are never quantized;
//! the nominal range is [0, 255] but values outside it are legal in memory
//! and only clamped when written to disk.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImageError {
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    EmptyDimensions { width: usize, height: usize },
    #[error("pixel buffer length {got} does not match {width}x{height}")]
    PixelCountMismatch {
        width: usize,
        height: usize,
        got: usize,
    },
    #[error("pixel {index} is not finite")]
    NonFinitePixel { index: usize },
}

/// Grayscale image with `f64` intensities, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl Image {
    /// Builds an image, validating dimensions and that every pixel is finite.
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyDimensions { width, height });
        }
        if pixels.len() != width * height {
            return Err(ImageError::PixelCountMismatch {
                width,
                height,
                got: pixels.len(),
            });
        }
        if let Some(index) = pixels.iter().position(|p| !p.is_finite()) {
            return Err(ImageError::NonFinitePixel { index });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Constant-valued image.
    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self, ImageError> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, ImageError> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x]
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }

    /// Population standard deviation (divide by N).
    pub fn std_dev(&self) -> f64 {
        let mean = self.mean();
        let var = self
            .pixels
            .iter()
            .map(|p| (p - mean) * (p - mean))
            .sum::<f64>()
            / self.pixels.len() as f64;
        var.sqrt()
    }

    pub fn min(&self) -> f64 {
        self.pixels.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.pixels.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Pixelwise map; the result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self, ImageError> {
        Self::new(
            self.width,
            self.height,
            self.pixels.iter().map(|&p| f(p)).collect(),
        )
    }
}
