//! Raster codecs: PNG (8/16-bit grayscale), binary PGM, and the SGRID
//! float-grid format.
//!
//! SGRID layout, little-endian throughout: ASCII magic `SGR1`, `u32` width,
//! `u32` height, `f64` max_value, then `width * height` `f32` pixels in
//! row-major order with top-left origin.

use std::io::Write;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma};

use crate::error::{Error, Result};
use crate::raster::{ImageGrid, RasterFormat};

const SGRID_MAGIC: &[u8; 4] = b"SGR1";
const SGRID_HEADER_LEN: usize = 20;

/// Read a raster file into an [`ImageGrid`].
///
/// The format is inferred from the file extension unless `format` is given.
/// PNG and PGM sources must be single-channel grayscale; integer samples
/// widen losslessly and set `max_value` to 255 (8-bit) or 65535 (16-bit).
pub fn read_image(path: &Path, format: Option<RasterFormat>) -> Result<ImageGrid> {
    let format = match format {
        Some(f) => f,
        None => RasterFormat::from_extension(path).ok_or_else(|| Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: "unknown file extension".into(),
        })?,
    };
    match format {
        RasterFormat::Sgrid => read_sgrid(path),
        RasterFormat::Png8 | RasterFormat::Png16 => read_decoded(path, ImageFormat::Png),
        RasterFormat::Pgm => read_decoded(path, ImageFormat::Pnm),
    }
}

/// Write an [`ImageGrid`] to `path` in the given format.
///
/// Integer formats require every pixel to lie within the representable range
/// (`[0, 255]` for PNG8/PGM, `[0, 65535]` for PNG16); in-range values round
/// half-to-even. SGRID stores pixels as `f32` and accepts any finite values
/// within `f32` range. Writes go to a temporary file in the same directory
/// and are renamed into place, so a failed write never leaves partial output.
pub fn write_image(grid: &ImageGrid, path: &Path, format: RasterFormat) -> Result<()> {
    let bytes = match format {
        RasterFormat::Sgrid => encode_sgrid(grid)?,
        RasterFormat::Png8 => {
            let samples = quantize_samples(grid, 255.0, "png8")?;
            encode_luma8(grid, samples, ImageFormat::Png, path)?
        }
        RasterFormat::Pgm => {
            let samples = quantize_samples(grid, 255.0, "pgm")?;
            encode_pgm(grid, samples, path)?
        }
        RasterFormat::Png16 => {
            let samples = quantize_samples(grid, 65535.0, "png16")?;
            encode_luma16(grid, samples, path)?
        }
    };
    atomic_write_bytes(path, &bytes)
}

/// Write `bytes` to `path` atomically (temp file + rename).
pub fn atomic_write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn read_decoded(path: &Path, expected: ImageFormat) -> Result<ImageGrid> {
    let reader = image::ImageReader::open(path)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?
        .with_guessed_format()
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
    if reader.format() != Some(expected) {
        return Err(Error::CorruptFile {
            path: path.to_path_buf(),
            reason: format!("not a {expected:?} file"),
        });
    }
    let decoded = reader.decode().map_err(|e| Error::CorruptFile {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let is_pgm = expected == ImageFormat::Pnm;
    match decoded {
        DynamicImage::ImageLuma8(buf) => {
            let (w, h) = (buf.width() as usize, buf.height() as usize);
            let pixels = buf.into_raw().into_iter().map(f64::from).collect();
            Ok(ImageGrid::from_valid_parts(w, h, pixels, 255.0))
        }
        DynamicImage::ImageLuma16(buf) if !is_pgm => {
            let (w, h) = (buf.width() as usize, buf.height() as usize);
            let pixels = buf.into_raw().into_iter().map(f64::from).collect();
            Ok(ImageGrid::from_valid_parts(w, h, pixels, 65535.0))
        }
        other => Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: format!(
                "expected single-channel grayscale, found {:?}",
                other.color()
            ),
        }),
    }
}

fn read_sgrid(path: &Path) -> Result<ImageGrid> {
    let corrupt = |reason: String| Error::CorruptFile {
        path: path.to_path_buf(),
        reason,
    };
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.len() < SGRID_HEADER_LEN {
        return Err(corrupt("truncated header".into()));
    }
    if &bytes[0..4] != SGRID_MAGIC {
        return Err(corrupt("bad magic, expected SGR1".into()));
    }
    let width = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let max_value = f64::from_le_bytes(bytes[12..20].try_into().unwrap());
    if width == 0 || height == 0 {
        return Err(corrupt("zero dimension".into()));
    }
    if !max_value.is_finite() || max_value <= 0.0 {
        return Err(corrupt(format!("invalid max_value {max_value}")));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| corrupt("dimensions overflow".into()))?;
    let expected_len = SGRID_HEADER_LEN + 4 * count;
    if bytes.len() != expected_len {
        return Err(corrupt(format!(
            "payload length {} does not match {}x{} (expected {} bytes)",
            bytes.len() - SGRID_HEADER_LEN,
            width,
            height,
            expected_len
        )));
    }
    let mut pixels = Vec::with_capacity(count);
    for (i, chunk) in bytes[SGRID_HEADER_LEN..].chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(corrupt(format!("non-finite pixel at index {i}")));
        }
        pixels.push(f64::from(v));
    }
    Ok(ImageGrid::from_valid_parts(width, height, pixels, max_value))
}

fn encode_sgrid(grid: &ImageGrid) -> Result<Vec<u8>> {
    if grid.width() > u32::MAX as usize || grid.height() > u32::MAX as usize {
        return Err(Error::invalid_param("dimensions exceed u32 range"));
    }
    let mut bytes = Vec::with_capacity(SGRID_HEADER_LEN + 4 * grid.pixels().len());
    bytes.extend_from_slice(SGRID_MAGIC);
    bytes.extend_from_slice(&(grid.width() as u32).to_le_bytes());
    bytes.extend_from_slice(&(grid.height() as u32).to_le_bytes());
    bytes.extend_from_slice(&grid.max_value().to_le_bytes());
    for (i, &v) in grid.pixels().iter().enumerate() {
        let narrowed = v as f32;
        if !narrowed.is_finite() {
            return Err(Error::Range {
                value: v,
                index: i,
                max: f64::from(f32::MAX),
                format: "sgrid",
            });
        }
        bytes.extend_from_slice(&narrowed.to_le_bytes());
    }
    Ok(bytes)
}

/// Round pixels to integers, rejecting anything outside `[0, max]`.
/// Ties round to even.
fn quantize_samples(grid: &ImageGrid, max: f64, format: &'static str) -> Result<Vec<u16>> {
    grid.pixels()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if (0.0..=max).contains(&v) {
                Ok(v.round_ties_even() as u16)
            } else {
                Err(Error::Range {
                    value: v,
                    index: i,
                    max,
                    format,
                })
            }
        })
        .collect()
}

fn encode_luma8(
    grid: &ImageGrid,
    samples: Vec<u16>,
    format: ImageFormat,
    path: &Path,
) -> Result<Vec<u8>> {
    let raw: Vec<u8> = samples.into_iter().map(|v| v as u8).collect();
    let buf: ImageBuffer<Luma<u8>, _> =
        ImageBuffer::from_raw(grid.width() as u32, grid.height() as u32, raw)
            .expect("buffer sized from grid");
    let mut out = std::io::Cursor::new(Vec::new());
    buf.write_to(&mut out, format).map_err(|e| Error::CorruptFile {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    Ok(out.into_inner())
}

fn encode_luma16(grid: &ImageGrid, samples: Vec<u16>, path: &Path) -> Result<Vec<u8>> {
    let buf: ImageBuffer<Luma<u16>, _> =
        ImageBuffer::from_raw(grid.width() as u32, grid.height() as u32, samples)
            .expect("buffer sized from grid");
    let mut out = std::io::Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::CorruptFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    Ok(out.into_inner())
}

fn encode_pgm(grid: &ImageGrid, samples: Vec<u16>, path: &Path) -> Result<Vec<u8>> {
    use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
    use image::ImageEncoder;

    let raw: Vec<u8> = samples.into_iter().map(|v| v as u8).collect();
    let mut out = Vec::new();
    let encoder = PnmEncoder::new(&mut out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary));
    encoder
        .write_image(
            &raw,
            grid.width() as u32,
            grid.height() as u32,
            image::ExtendedColorType::L8,
        )
        .map_err(|e| Error::CorruptFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    Ok(out)
}
