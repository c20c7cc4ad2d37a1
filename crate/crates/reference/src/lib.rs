//! Naive per-pixel reference implementations of the despeckling filters.
//!
//! Every function here iterates each window explicitly and computes window
//! statistics with a direct two-pass loop. Nothing is shared with the
//! optimized implementations in `despeckle` beyond the grid type, so these
//! serve as independent oracles in equivalence tests. They are quadratic
//! per pixel in the window side and meant for small test grids only.

use despeckle::ImageGrid;

/// Symmetric (mirror-with-edge-duplication) boundary indexing.
fn reflect(idx: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let mut m = idx % period;
    if m < 0 {
        m += period;
    }
    let m = if m < n { m } else { period - 1 - m };
    m as usize
}

fn window_values(grid: &ImageGrid, x: usize, y: usize, radius: usize) -> Vec<f64> {
    let r = radius as isize;
    let mut values = Vec::with_capacity((2 * radius + 1) * (2 * radius + 1));
    for dy in -r..=r {
        let sy = reflect(y as isize + dy, grid.height());
        for dx in -r..=r {
            let sx = reflect(x as isize + dx, grid.width());
            values.push(grid.get(sx, sy));
        }
    }
    values
}

/// Direct two-pass mean and population variance of a slice.
fn mean_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, variance)
}

/// Window mean and population variance at every pixel.
pub fn local_stats(grid: &ImageGrid, radius: usize) -> (Vec<f64>, Vec<f64>) {
    let mut means = Vec::with_capacity(grid.pixels().len());
    let mut variances = Vec::with_capacity(grid.pixels().len());
    for y in 0..grid.height() {
        for x in 0..grid.width() {
            let (m, v) = mean_variance(&window_values(grid, x, y, radius));
            means.push(m);
            variances.push(v);
        }
    }
    (means, variances)
}

fn map_grid(grid: &ImageGrid, f: impl Fn(usize, usize) -> f64) -> ImageGrid {
    let mut pixels = Vec::with_capacity(grid.pixels().len());
    for y in 0..grid.height() {
        for x in 0..grid.width() {
            pixels.push(f(x, y));
        }
    }
    ImageGrid::new(grid.width(), grid.height(), pixels, grid.max_value()).unwrap()
}

pub fn lee(grid: &ImageGrid, radius: usize, looks: f64) -> ImageGrid {
    let cu2 = 1.0 / looks;
    map_grid(grid, |x, y| {
        let (mean, var) = mean_variance(&window_values(grid, x, y, radius));
        let noise = mean * mean * cu2;
        let signal = ((var - noise) / (1.0 + cu2)).max(0.0);
        let denom = signal + noise;
        let weight = if denom == 0.0 { 0.0 } else { signal / denom };
        let value = grid.get(x, y);
        if weight == 1.0 {
            value
        } else {
            mean + weight * (value - mean)
        }
    })
}

pub fn kuan(grid: &ImageGrid, radius: usize, looks: f64) -> ImageGrid {
    let cu2 = 1.0 / looks;
    map_grid(grid, |x, y| {
        let (mean, var) = mean_variance(&window_values(grid, x, y, radius));
        let ci2 = if mean == 0.0 { 0.0 } else { var / (mean * mean) };
        let weight = if ci2 == 0.0 {
            0.0
        } else {
            ((1.0 - cu2 / ci2) / (1.0 + cu2)).clamp(0.0, 1.0)
        };
        let value = grid.get(x, y);
        if weight == 1.0 {
            value
        } else {
            mean + weight * (value - mean)
        }
    })
}

pub fn frost(grid: &ImageGrid, radius: usize, damping: f64) -> ImageGrid {
    let r = radius as isize;
    map_grid(grid, |x, y| {
        let (mean, var) = mean_variance(&window_values(grid, x, y, radius));
        let ci2 = if mean == 0.0 { 0.0 } else { var / (mean * mean) };
        let mut num = 0.0;
        let mut den = 0.0;
        for dy in -r..=r {
            for dx in -r..=r {
                let sx = reflect(x as isize + dx, grid.width());
                let sy = reflect(y as isize + dy, grid.height());
                let dist = ((dx * dx + dy * dy) as f64).sqrt();
                let m = (-damping * ci2 * dist).exp();
                num += m * grid.get(sx, sy);
                den += m;
            }
        }
        num / den
    })
}

pub fn gaussian(grid: &ImageGrid, sigma: f64) -> ImageGrid {
    let radius = (3.0 * sigma).ceil() as usize;
    let r = radius as isize;
    // full 2-D kernel, normalized over the window
    let mut kernel = Vec::with_capacity((2 * radius + 1) * (2 * radius + 1));
    for dy in -r..=r {
        for dx in -r..=r {
            kernel.push((-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp());
        }
    }
    let total: f64 = kernel.iter().sum();
    map_grid(grid, |x, y| {
        let mut acc = 0.0;
        let mut k = 0;
        for dy in -r..=r {
            for dx in -r..=r {
                let sx = reflect(x as isize + dx, grid.width());
                let sy = reflect(y as isize + dy, grid.height());
                acc += kernel[k] * grid.get(sx, sy);
                k += 1;
            }
        }
        acc / total
    })
}

pub fn median(grid: &ImageGrid, radius: usize) -> ImageGrid {
    map_grid(grid, |x, y| {
        let mut values = window_values(grid, x, y, radius);
        values.sort_by(f64::total_cmp);
        values[values.len() / 2]
    })
}

pub fn bilateral(grid: &ImageGrid, sigma_spatial: f64, sigma_range: f64) -> ImageGrid {
    let radius = (3.0 * sigma_spatial).ceil() as usize;
    let r = radius as isize;
    map_grid(grid, |x, y| {
        let centre = grid.get(x, y);
        let mut num = 0.0;
        let mut den = 0.0;
        for dy in -r..=r {
            for dx in -r..=r {
                let sx = reflect(x as isize + dx, grid.width());
                let sy = reflect(y as isize + dy, grid.height());
                let v = grid.get(sx, sy);
                let spatial =
                    (-((dx * dx + dy * dy) as f64) / (2.0 * sigma_spatial * sigma_spatial)).exp();
                let range = (-(v - centre) * (v - centre) / (2.0 * sigma_range * sigma_range)).exp();
                let w = spatial * range;
                num += w * v;
                den += w;
            }
        }
        num / den
    })
}

/// Deterministic pseudo-random grid for equivalence tests.
pub fn random_grid(width: usize, height: usize, seed: u64, max_value: f64) -> ImageGrid {
    let mut state = seed.wrapping_mul(2862933555777941757).wrapping_add(3037000493) | 1;
    let pixels = (0..width * height)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * max_value
        })
        .collect();
    ImageGrid::new(width, height, pixels, max_value).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_line() {
        let g = ImageGrid::new(3, 1, vec![1.0, 2.0, 9.0], 255.0).unwrap();
        let out = median(&g, 1);
        assert_eq!(out.pixels(), &[1.0, 2.0, 9.0]);
    }

    #[test]
    fn constant_fixed_points() {
        let g = ImageGrid::constant(8, 8, 50.0, 255.0).unwrap();
        for out in [
            lee(&g, 2, 1.0),
            kuan(&g, 2, 1.0),
            frost(&g, 2, 2.0),
            gaussian(&g, 1.0),
            median(&g, 1),
            bilateral(&g, 1.0, 25.5),
        ] {
            for v in out.pixels() {
                assert!((v - 50.0).abs() < 1e-9);
            }
        }
    }
}
