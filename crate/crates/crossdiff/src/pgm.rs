//! PGM (P2 ASCII / P5 binary) reader and writer.
//!
//! The reader accepts `#` comments in the header, maxval up to 65535
//! (two-byte big-endian samples in P5), and keeps intensities exactly as
//! stored. The writer emits maxval-255 output with single whitespace
//! separators and no comments; pixels are rounded to nearest and clamped to
//! [0, 255] at that point only.

use crate::image::Image;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PgmError {
    #[error("malformed PGM header: {0}")]
    MalformedHeader(&'static str),
    /// Raster ends early or contains an invalid sample.
    #[error("PGM raster is truncated or invalid")]
    TruncatedData,
    #[error("unsupported maxval {0} (must be 1..=65535)")]
    UnsupportedMaxval(u64),
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.data.len() {
            let b = self.data[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    /// Reads an unsigned decimal token, capped so it cannot overflow.
    fn read_number(&mut self) -> Option<u64> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        let mut value: u64 = 0;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            value = value
                .saturating_mul(10)
                .saturating_add(u64::from(self.data[self.pos] - b'0'));
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            Some(value)
        }
    }
}

/// Parses P2 or P5 PGM bytes into an [`Image`], intensities as stored.
pub fn load_pgm(bytes: &[u8]) -> Result<Image, PgmError> {
    if bytes.len() < 2 {
        return Err(PgmError::MalformedHeader("missing magic number"));
    }
    let binary = match &bytes[..2] {
        b"P5" => true,
        b"P2" => false,
        _ => return Err(PgmError::MalformedHeader("magic number is not P2 or P5")),
    };
    let mut cur = Cursor {
        data: bytes,
        pos: 2,
    };

    let width = cur
        .read_number()
        .ok_or(PgmError::MalformedHeader("missing width"))? as usize;
    let height = cur
        .read_number()
        .ok_or(PgmError::MalformedHeader("missing height"))? as usize;
    let maxval = cur
        .read_number()
        .ok_or(PgmError::MalformedHeader("missing maxval"))?;

    if width == 0 || height == 0 {
        return Err(PgmError::MalformedHeader("zero dimension"));
    }
    if !(1..=65535).contains(&maxval) {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    let count = width
        .checked_mul(height)
        .ok_or(PgmError::MalformedHeader("dimensions overflow"))?;

    if binary {
        // Exactly one whitespace byte separates the maxval from the raster.
        if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
            return Err(PgmError::MalformedHeader(
                "missing whitespace before binary raster",
            ));
        }
        cur.pos += 1;
        let raster = &bytes[cur.pos..];
        if maxval < 256 {
            if raster.len() < count {
                return Err(PgmError::TruncatedData);
            }
            let pixels = raster[..count].iter().map(|&b| f64::from(b)).collect();
            // Finite by construction, dimensions checked above.
            Ok(Image::new(width, height, pixels).expect("u8 samples are valid pixels"))
        } else {
            if raster.len() < 2 * count {
                return Err(PgmError::TruncatedData);
            }
            let pixels = raster[..2 * count]
                .chunks_exact(2)
                .map(|c| f64::from(u16::from_be_bytes([c[0], c[1]])))
                .collect();
            Ok(Image::new(width, height, pixels).expect("u16 samples are valid pixels"))
        }
    } else {
        let mut pixels = Vec::new();
        for _ in 0..count {
            let v = cur.read_number().ok_or(PgmError::TruncatedData)?;
            pixels.push(v as f64);
        }
        Ok(Image::new(width, height, pixels).expect("ascii samples are valid pixels"))
    }
}

/// Encodes an image as PGM, P5 when `binary` else P2, maxval 255.
///
/// Pixels are rounded to nearest and clamped to [0, 255];
/// `load_pgm(save_pgm(img))` therefore reproduces `img` up to that
/// quantization.
pub fn save_pgm(img: &Image, binary: bool) -> Vec<u8> {
    let quantize = |p: f64| p.clamp(0.0, 255.0).round() as u8;
    let mut out = Vec::new();
    if binary {
        out.extend_from_slice(format!("P5\n{} {}\n255\n", img.width(), img.height()).as_bytes());
        out.extend(img.pixels().iter().map(|&p| quantize(p)));
    } else {
        out.extend_from_slice(format!("P2\n{} {}\n255\n", img.width(), img.height()).as_bytes());
        for row in img.pixels().chunks(img.width()) {
            let line: Vec<String> = row.iter().map(|&p| quantize(p).to_string()).collect();
            out.extend_from_slice(line.join(" ").as_bytes());
            out.push(b'\n');
        }
    }
    out
}
