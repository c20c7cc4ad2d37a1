//! Image grid representation, cropping, quantization, and raster file I/O.
//!
//! All processing operates on [`ImageGrid`]: a row-major, top-left-origin
//! grid of `f64` pixels with a nominal dynamic-range ceiling (`max_value`).
//! Integer sources (PNG, PGM) widen losslessly on read; quantization back to
//! integers happens only at export.

mod io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{atomic_write_bytes, read_image, write_image};

/// 2-D grayscale raster of finite `f64` pixels.
///
/// Invariants enforced at construction: `pixels.len() == width * height`,
/// every pixel finite, `max_value > 0`. Values are immutable afterwards, so
/// grids are safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    max_value: f64,
    pixels: Vec<f64>,
}

impl ImageGrid {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>, max_value: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid_param("image dimensions must be at least 1x1"));
        }
        let expected = width
            .checked_mul(height)
            .ok_or_else(|| Error::invalid_param("image dimensions overflow"))?;
        if pixels.len() != expected {
            return Err(Error::InvalidParam(format!(
                "pixel buffer length {} does not match {}x{}",
                pixels.len(),
                width,
                height
            )));
        }
        if !max_value.is_finite() || max_value <= 0.0 {
            return Err(Error::invalid_param("max_value must be positive and finite"));
        }
        if let Some(i) = pixels.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidParam(format!("non-finite pixel at index {i}")));
        }
        Ok(Self {
            width,
            height,
            max_value,
            pixels,
        })
    }

    /// Uniform grid of `value`.
    pub fn constant(width: usize, height: usize, value: f64, max_value: f64) -> Result<Self> {
        let len = width
            .checked_mul(height)
            .ok_or_else(|| Error::invalid_param("image dimensions overflow"))?;
        Self::new(width, height, vec![value; len], max_value)
    }

    /// Internal constructor for buffers that are valid by construction.
    pub(crate) fn from_valid_parts(
        width: usize,
        height: usize,
        pixels: Vec<f64>,
        max_value: f64,
    ) -> Self {
        debug_assert_eq!(pixels.len(), width * height);
        debug_assert!(pixels.iter().all(|p| p.is_finite()));
        Self {
            width,
            height,
            max_value,
            pixels,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn max_value(&self) -> f64 {
        self.max_value
    }

    #[inline]
    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    /// Pixel at column `x`, row `y` (top-left origin).
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[f64] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    pub fn same_dims(&self, other: &ImageGrid) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn check_same_dims(&self, other: &ImageGrid) -> Result<()> {
        if self.same_dims(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ))
        }
    }

    /// Copy of the sub-rectangle selected by `region`; `max_value` preserved.
    pub fn crop(&self, region: Region) -> Result<ImageGrid> {
        region.validate(self.width, self.height)?;
        let mut pixels = Vec::with_capacity(region.w * region.h);
        for y in region.y..region.y + region.h {
            pixels.extend_from_slice(&self.row(y)[region.x..region.x + region.w]);
        }
        Ok(ImageGrid::from_valid_parts(
            region.w,
            region.h,
            pixels,
            self.max_value,
        ))
    }

    /// Map pixels into the displayable range `[0, max_value]`.
    ///
    /// `Clamp` clips out-of-range values; `Minmax` stretches the observed
    /// range affinely (a constant grid maps to 0).
    pub fn quantize_for_display(&self, mode: QuantizeMode) -> ImageGrid {
        let pixels = match mode {
            QuantizeMode::Clamp => self
                .pixels
                .iter()
                .map(|v| v.clamp(0.0, self.max_value))
                .collect(),
            QuantizeMode::Minmax => {
                let min = self.pixels.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = self
                    .pixels
                    .iter()
                    .cloned()
                    .fold(f64::NEG_INFINITY, f64::max);
                if max == min {
                    vec![0.0; self.pixels.len()]
                } else {
                    let scale = self.max_value / (max - min);
                    self.pixels.iter().map(|v| (v - min) * scale).collect()
                }
            }
        };
        ImageGrid::from_valid_parts(self.width, self.height, pixels, self.max_value)
    }

    /// Affinely rescale pixels so the nominal ceiling becomes `new_max`.
    pub fn rescaled(&self, new_max: f64) -> Result<ImageGrid> {
        if !new_max.is_finite() || new_max <= 0.0 {
            return Err(Error::invalid_param("rescale target must be positive and finite"));
        }
        let factor = new_max / self.max_value;
        let pixels = self.pixels.iter().map(|v| v * factor).collect();
        Ok(ImageGrid::from_valid_parts(
            self.width,
            self.height,
            pixels,
            new_max,
        ))
    }
}

/// Axis-aligned rectangle selecting a sub-area of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Region {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Region { x, y, w, h }
    }

    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        if self.w == 0 || self.h == 0 {
            return Err(Error::invalid_param("region width and height must be at least 1"));
        }
        let fits_x = self.x.checked_add(self.w).is_some_and(|end| end <= width);
        let fits_y = self.y.checked_add(self.h).is_some_and(|end| end <= height);
        if fits_x && fits_y {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                x: self.x,
                y: self.y,
                w: self.w,
                h: self.h,
                width,
                height,
            })
        }
    }

    /// Offset `self` (interpreted relative to `outer`) into absolute
    /// coordinates.
    pub fn offset_by(&self, outer: Region) -> Region {
        Region {
            x: outer.x + self.x,
            y: outer.y + self.y,
            w: self.w,
            h: self.h,
        }
    }
}

/// Raster container formats understood by [`read_image`] / [`write_image`].
///
/// On read, `Png8` and `Png16` both denote the PNG container; the sample
/// depth comes from the file. On write they select the encoded depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RasterFormat {
    Png8,
    Png16,
    Pgm,
    Sgrid,
}

impl RasterFormat {
    /// Infer the format from a file extension (`.png`, `.pgm`, `.sgrid`).
    /// `.png` defaults to 8-bit for writing.
    pub fn from_extension(path: &std::path::Path) -> Option<RasterFormat> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "png" => Some(RasterFormat::Png8),
            "pgm" => Some(RasterFormat::Pgm),
            "sgrid" => Some(RasterFormat::Sgrid),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RasterFormat::Png8 => "png8",
            RasterFormat::Png16 => "png16",
            RasterFormat::Pgm => "pgm",
            RasterFormat::Sgrid => "sgrid",
        }
    }
}

impl std::str::FromStr for RasterFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "png" | "png8" => Ok(RasterFormat::Png8),
            "png16" => Ok(RasterFormat::Png16),
            "pgm" => Ok(RasterFormat::Pgm),
            "sgrid" => Ok(RasterFormat::Sgrid),
            other => Err(Error::InvalidParam(format!("unknown format '{other}'"))),
        }
    }
}

/// Display-export mapping mode for [`ImageGrid::quantize_for_display`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantizeMode {
    Clamp,
    Minmax,
}

impl std::str::FromStr for QuantizeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "clamp" => Ok(QuantizeMode::Clamp),
            "minmax" => Ok(QuantizeMode::Minmax),
            other => Err(Error::InvalidParam(format!("unknown quantize mode '{other}'"))),
        }
    }
}
