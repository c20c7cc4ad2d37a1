//! Non-adaptive smoothers: separable Gaussian, median, and bilateral.

use rayon::prelude::*;

use crate::error::Result;
use crate::raster::ImageGrid;

use super::stats::{check_window, reflect};
use super::{check_positive, check_radius};

/// Normalized 1-D Gaussian taps for `t in [-radius, radius]`.
pub(crate) fn gaussian_taps(sigma: f64, radius: usize) -> Vec<f64> {
    let r = radius as isize;
    let inv = 1.0 / (2.0 * sigma * sigma);
    let taps: Vec<f64> = (-r..=r).map(|t| (-(t * t) as f64 * inv).exp()).collect();
    let sum: f64 = taps.iter().sum();
    taps.into_iter().map(|v| v / sum).collect()
}

pub(crate) fn gaussian_radius(sigma: f64) -> usize {
    (3.0 * sigma).ceil() as usize
}

/// Separable Gaussian convolution with kernel radius `ceil(3 * sigma)` and
/// symmetric boundary padding.
pub fn gaussian_filter(grid: &ImageGrid, sigma_spatial: f64) -> Result<ImageGrid> {
    check_positive(sigma_spatial, "sigma_spatial")?;
    let radius = gaussian_radius(sigma_spatial);
    let taps = gaussian_taps(sigma_spatial, radius);
    let (width, height) = grid.dims();
    let r = radius as isize;
    let pixels = grid.pixels();

    // horizontal pass
    let mut tmp = vec![0.0; width * height];
    tmp.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
        let src = &pixels[y * width..(y + 1) * width];
        for (x, slot) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, tap) in taps.iter().enumerate() {
                acc += tap * src[reflect(x as isize + k as isize - r, width)];
            }
            *slot = acc;
        }
    });

    // vertical pass
    let mut out = vec![0.0; width * height];
    out.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
        for (x, slot) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, tap) in taps.iter().enumerate() {
                let sy = reflect(y as isize + k as isize - r, height);
                acc += tap * tmp[sy * width + x];
            }
            *slot = acc;
        }
    });
    Ok(ImageGrid::from_valid_parts(
        width,
        height,
        out,
        grid.max_value(),
    ))
}

/// Exact order-statistic median over the `(2r+1)^2` window with symmetric
/// padding. Output values are always a subset of the input values.
pub fn median_filter(grid: &ImageGrid, window_radius: usize) -> Result<ImageGrid> {
    check_radius(window_radius)?;
    check_window(grid, window_radius)?;
    let (width, height) = grid.dims();
    let pixels = grid.pixels();
    let r = window_radius as isize;
    let side = 2 * window_radius + 1;
    let count = side * side;
    let mut out = vec![0.0; width * height];
    out.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
        let mut window = Vec::with_capacity(count);
        for (x, slot) in row.iter_mut().enumerate() {
            window.clear();
            for dy in -r..=r {
                let sy = reflect(y as isize + dy, height);
                let src = &pixels[sy * width..(sy + 1) * width];
                for dx in -r..=r {
                    window.push(src[reflect(x as isize + dx, width)]);
                }
            }
            let mid = count / 2;
            let (_, median, _) = window.select_nth_unstable_by(mid, f64::total_cmp);
            *slot = *median;
        }
    });
    Ok(ImageGrid::from_valid_parts(
        width,
        height,
        out,
        grid.max_value(),
    ))
}

/// Bilateral filter: spatial Gaussian of `sigma_spatial` (window radius
/// `ceil(3 * sigma_spatial)`) times a range Gaussian of `sigma_range` in
/// pixel-value units, normalized per pixel.
pub fn bilateral_filter(
    grid: &ImageGrid,
    sigma_spatial: f64,
    sigma_range: f64,
) -> Result<ImageGrid> {
    check_positive(sigma_spatial, "sigma_spatial")?;
    check_positive(sigma_range, "sigma_range")?;
    let radius = gaussian_radius(sigma_spatial);
    let r = radius as isize;
    let inv_spatial = 1.0 / (2.0 * sigma_spatial * sigma_spatial);
    let spatial: Vec<f64> = (-r..=r)
        .flat_map(|dy| {
            (-r..=r).map(move |dx| (-((dx * dx + dy * dy) as f64) * inv_spatial).exp())
        })
        .collect();
    let inv_range = 1.0 / (2.0 * sigma_range * sigma_range);
    let (width, height) = grid.dims();
    let pixels = grid.pixels();
    let mut out = vec![0.0; width * height];
    out.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
        for (x, slot) in row.iter_mut().enumerate() {
            let centre = pixels[y * width + x];
            let mut num = 0.0;
            let mut den = 0.0;
            let mut k = 0;
            for dy in -r..=r {
                let sy = reflect(y as isize + dy, height);
                let src = &pixels[sy * width..(sy + 1) * width];
                for dx in -r..=r {
                    let v = src[reflect(x as isize + dx, width)];
                    let d = v - centre;
                    let w = spatial[k] * (-d * d * inv_range).exp();
                    k += 1;
                    num += w * v;
                    den += w;
                }
            }
            *slot = num / den;
        }
    });
    Ok(ImageGrid::from_valid_parts(
        width,
        height,
        out,
        grid.max_value(),
    ))
}
