//! Yaroslavsky filter: range-weighted average over a square window, the
//! simplest bilateral filter.

use thiserror::Error;

use crate::image::Image;

#[derive(Debug, Error, PartialEq)]
pub enum BilateralError {
    #[error("range scale h must be positive and finite, got {0}")]
    BadRangeScale(f64),
    #[error("window scale rho = {0} gives half-width round(2 rho) < 1")]
    WindowTooSmall(f64),
}

/// Range scale h and window scale rho; the window is the square of
/// half-width round(2 rho) (a box of diameter about 4 rho), clipped at the
/// image border.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YaroslavskyConfig {
    pub h: f64,
    pub rho: f64,
}

impl YaroslavskyConfig {
    pub fn new(h: f64, rho: f64) -> Result<Self, BilateralError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(BilateralError::BadRangeScale(h));
        }
        let cfg = Self { h, rho };
        if cfg.half_width() < 1 || !rho.is_finite() {
            return Err(BilateralError::WindowTooSmall(rho));
        }
        Ok(cfg)
    }

    pub fn half_width(&self) -> usize {
        (2.0 * self.rho).round().max(0.0) as usize
    }
}

/// out(x) = sum_y w(x,y) u(y) / sum_y w(x,y) over the clipped window,
/// w(x,y) = exp(-(u(x)-u(y))^2 / h^2); y = x is included so the
/// normalizer never vanishes.
pub fn yaroslavsky(img: &Image, cfg: &YaroslavskyConfig) -> Image {
    let (w, h) = (img.width(), img.height());
    let half = cfg.half_width() as isize;
    let inv_h2 = 1.0 / (cfg.h * cfg.h);
    let src = img.pixels();
    let mut out = Vec::with_capacity(src.len());
    for y in 0..h as isize {
        for x in 0..w as isize {
            let center = src[y as usize * w + x as usize];
            let mut num = 0.0;
            let mut den = 0.0;
            let y0 = (y - half).max(0);
            let y1 = (y + half).min(h as isize - 1);
            let x0 = (x - half).max(0);
            let x1 = (x + half).min(w as isize - 1);
            for yy in y0..=y1 {
                for xx in x0..=x1 {
                    let v = src[yy as usize * w + xx as usize];
                    let d = center - v;
                    let weight = (-(d * d) * inv_h2).exp();
                    num += weight * v;
                    den += weight;
                }
            }
            out.push(num / den);
        }
    }
    Image::new(w, h, out).expect("averaging keeps pixels finite")
}
