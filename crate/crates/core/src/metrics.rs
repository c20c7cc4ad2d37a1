//! Quality metrics: MSE, PSNR, SSIM, ENL, and SSI.
//!
//! All reductions run in a fixed row-major order with compensated
//! summation, so results are deterministic and independent of any outer
//! parallelism. PSNR and ENL may be infinite (identical images, constant
//! regions); infinities serialize as the string `"inf"`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{gaussian_taps, reflect};
use crate::raster::{ImageGrid, Region};

/// SSIM window and stabilisation constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimParams {
    #[serde(default = "default_k1")]
    pub k1: f64,
    #[serde(default = "default_k2")]
    pub k2: f64,
    /// Window radius; the window side is `2 * window_radius + 1`.
    #[serde(default = "default_ssim_radius")]
    pub window_radius: usize,
    #[serde(default = "default_ssim_sigma")]
    pub window_sigma: f64,
    /// Dynamic range `L`; defaults to the reference image `max_value`.
    #[serde(default)]
    pub dynamic_range: Option<f64>,
}

fn default_k1() -> f64 {
    0.01
}

fn default_k2() -> f64 {
    0.03
}

fn default_ssim_radius() -> usize {
    5
}

fn default_ssim_sigma() -> f64 {
    1.5
}

impl Default for SsimParams {
    fn default() -> Self {
        SsimParams {
            k1: default_k1(),
            k2: default_k2(),
            window_radius: default_ssim_radius(),
            window_sigma: default_ssim_sigma(),
            dynamic_range: None,
        }
    }
}

/// The five metric values for one (reference, test) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(with = "float_sentinel")]
    pub psnr: f64,
    pub mse: f64,
    pub ssim: f64,
    #[serde(with = "float_sentinel")]
    pub enl: f64,
    pub ssi: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub region: Option<Region>,
}

/// Serialize a possibly-infinite `f64` as a number or the string `"inf"`.
pub(crate) mod float_sentinel {
    use serde::de::{self, Unexpected};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str("inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        struct Visitor;

        impl de::Visitor<'_> for Visitor {
            type Value = f64;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                if v == "inf" {
                    Ok(f64::INFINITY)
                } else {
                    Err(E::invalid_value(Unexpected::Str(v), &self))
                }
            }
        }

        d.deserialize_any(Visitor)
    }
}

/// Compensated (Kahan) accumulator; used so every reduction has one fixed,
/// documented summation order.
#[derive(Debug, Clone, Copy, Default)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    #[inline]
    fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    fn total(&self) -> f64 {
        self.sum
    }
}

/// Mean squared error over all pixels, row-major compensated summation.
pub fn mse(reference: &ImageGrid, test: &ImageGrid) -> Result<f64> {
    reference.check_same_dims(test)?;
    let mut acc = KahanSum::default();
    for (a, b) in reference.pixels().iter().zip(test.pixels()) {
        let d = a - b;
        acc.add(d * d);
    }
    Ok(acc.total() / reference.pixels().len() as f64)
}

/// PSNR in decibels computed from an MSE and the peak value `max_value`.
/// Returns `f64::INFINITY` for `mse == 0`.
pub fn psnr_from_mse(max_value: f64, mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (max_value * max_value / mse).log10()
    }
}

/// Peak signal-to-noise ratio; the peak is `reference.max_value()`.
pub fn psnr(reference: &ImageGrid, test: &ImageGrid) -> Result<f64> {
    Ok(psnr_from_mse(reference.max_value(), mse(reference, test)?))
}

/// Mean structural similarity over a Gaussian-weighted sliding window.
pub fn ssim(reference: &ImageGrid, test: &ImageGrid, params: &SsimParams) -> Result<f64> {
    reference.check_same_dims(test)?;
    if !(params.k1 > 0.0) || !(params.k2 > 0.0) {
        return Err(Error::invalid_param("ssim constants k1 and k2 must be positive"));
    }
    if !(params.window_sigma > 0.0) || !params.window_sigma.is_finite() {
        return Err(Error::invalid_param("ssim window sigma must be positive and finite"));
    }
    let radius = params.window_radius;
    let side = 2 * radius + 1;
    let (width, height) = reference.dims();
    if side > width || side > height {
        return Err(Error::WindowTooLarge {
            side,
            width,
            height,
        });
    }
    let dynamic_range = params.dynamic_range.unwrap_or(reference.max_value());
    if !dynamic_range.is_finite() || dynamic_range <= 0.0 {
        return Err(Error::invalid_param("ssim dynamic range must be positive and finite"));
    }
    let c1 = (params.k1 * dynamic_range).powi(2);
    let c2 = (params.k2 * dynamic_range).powi(2);

    // normalized 2-D Gaussian window
    let taps = gaussian_taps(params.window_sigma, radius);
    let mut weights = vec![0.0; side * side];
    for dy in 0..side {
        for dx in 0..side {
            weights[dy * side + dx] = taps[dy] * taps[dx];
        }
    }
    let mut wsum = KahanSum::default();
    for w in &weights {
        wsum.add(*w);
    }
    let norm = wsum.total();
    for w in &mut weights {
        *w /= norm;
    }

    let xs = reference.pixels();
    let ys = test.pixels();
    let r = radius as isize;
    let mut map = vec![0.0; width * height];
    map.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
        for (x, slot) in row.iter_mut().enumerate() {
            let mut sx = 0.0;
            let mut sy = 0.0;
            let mut sxx = 0.0;
            let mut syy = 0.0;
            let mut sxy = 0.0;
            let mut k = 0;
            for dy in -r..=r {
                let iy = reflect(y as isize + dy, height) * width;
                for dx in -r..=r {
                    let ix = reflect(x as isize + dx, width);
                    let w = weights[k];
                    k += 1;
                    let xv = xs[iy + ix];
                    let yv = ys[iy + ix];
                    sx += w * xv;
                    sy += w * yv;
                    // products associated so that swapping x and y is
                    // bit-exact
                    sxx += w * (xv * xv);
                    syy += w * (yv * yv);
                    sxy += w * (xv * yv);
                }
            }
            let var_x = sxx - sx * sx;
            let var_y = syy - sy * sy;
            let cov = sxy - sx * sy;
            *slot = ((2.0 * sx * sy + c1) * (2.0 * cov + c2))
                / ((sx * sx + sy * sy + c1) * (var_x + var_y + c2));
        }
    });

    let mut acc = KahanSum::default();
    for v in &map {
        acc.add(*v);
    }
    Ok(acc.total() / map.len() as f64)
}

/// Mean and population variance over a region (two-pass, compensated).
fn mean_var(grid: &ImageGrid, region: Option<Region>) -> Result<(f64, f64)> {
    let region = match region {
        Some(r) => {
            r.validate(grid.width(), grid.height())?;
            r
        }
        None => Region::new(0, 0, grid.width(), grid.height()),
    };
    let count = (region.w * region.h) as f64;
    let mut sum = KahanSum::default();
    for y in region.y..region.y + region.h {
        for v in &grid.row(y)[region.x..region.x + region.w] {
            sum.add(*v);
        }
    }
    let mean = sum.total() / count;
    let mut dev = KahanSum::default();
    for y in region.y..region.y + region.h {
        for v in &grid.row(y)[region.x..region.x + region.w] {
            let d = v - mean;
            dev.add(d * d);
        }
    }
    Ok((mean, dev.total() / count))
}

/// Equivalent number of looks, `mean^2 / variance`, over `region` (whole
/// image when absent).
///
/// A constant non-zero region yields `f64::INFINITY`; a zero-mean region
/// with spread yields 0; an all-zero region is an error.
pub fn enl(grid: &ImageGrid, region: Option<Region>) -> Result<f64> {
    let (mean, variance) = mean_var(grid, region)?;
    if variance == 0.0 {
        if mean == 0.0 {
            Err(Error::DegenerateRegion("all pixels are zero".into()))
        } else {
            Ok(f64::INFINITY)
        }
    } else if mean == 0.0 {
        Ok(0.0)
    } else {
        Ok(mean * mean / variance)
    }
}

/// Speckle suppression index: the coefficient-of-variation ratio
/// `CV(filtered) / CV(original)`; below 1 means suppression.
pub fn ssi(original: &ImageGrid, filtered: &ImageGrid, region: Option<Region>) -> Result<f64> {
    original.check_same_dims(filtered)?;
    let (mean_o, var_o) = mean_var(original, region)?;
    let (mean_f, var_f) = mean_var(filtered, region)?;
    let sd_o = var_o.sqrt();
    let sd_f = var_f.sqrt();
    if mean_f == 0.0 {
        return Err(Error::DegenerateRegion("filtered mean is zero".into()));
    }
    if sd_o == 0.0 {
        return Err(Error::DegenerateRegion(
            "original region has zero variance".into(),
        ));
    }
    Ok((sd_f * mean_o) / (mean_f * sd_o))
}

/// Compute the full five-metric report.
///
/// PSNR, MSE, and SSIM are taken against `reference` when provided,
/// otherwise against `original` (the no-clean-truth setup). ENL is computed
/// on `filtered` and SSI on `(original, filtered)`, both over `region`.
pub fn evaluate_all(
    reference: Option<&ImageGrid>,
    original: &ImageGrid,
    filtered: &ImageGrid,
    region: Option<Region>,
    params: &SsimParams,
) -> Result<MetricsReport> {
    original.check_same_dims(filtered)?;
    if let Some(r) = reference {
        r.check_same_dims(filtered)?;
    }
    let base = reference.unwrap_or(original);
    let mse_value = mse(base, filtered)?;
    let psnr_value = psnr_from_mse(base.max_value(), mse_value);
    let ssim_value = ssim(base, filtered, params)?;
    let enl_value = enl(filtered, region)?;
    let ssi_value = ssi(original, filtered, region)?;
    Ok(MetricsReport {
        psnr: psnr_value,
        mse: mse_value,
        ssim: ssim_value,
        enl: enl_value,
        ssi: ssi_value,
        region,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(width: usize, height: usize, seed: u64) -> ImageGrid {
        let mut state = seed | 1;
        let pixels = (0..width * height)
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((state >> 33) % 2550) as f64 / 10.0
            })
            .collect();
        ImageGrid::new(width, height, pixels, 255.0).unwrap()
    }

    #[test]
    fn mse_examples() {
        let a = ImageGrid::new(2, 1, vec![0.0, 0.0], 255.0).unwrap();
        let b = ImageGrid::new(2, 1, vec![2.0, 2.0], 255.0).unwrap();
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        assert_eq!(mse(&a, &b).unwrap(), 4.0);

        let c = ImageGrid::new(2, 2, vec![0.0, 255.0, 0.0, 255.0], 255.0).unwrap();
        let zero = ImageGrid::constant(2, 2, 0.0, 255.0).unwrap();
        assert_eq!(mse(&c, &zero).unwrap(), 32512.5);
    }

    #[test]
    fn psnr_matches_published_pairs() {
        for (mse_value, expected) in [
            (6.200277, 40.206693),
            (10.343083, 37.984304),
            (80.514994, 29.072036),
            (70.168261, 29.669396),
            (66.422740, 29.907636),
        ] {
            let got = psnr_from_mse(255.0, mse_value);
            assert!(
                (got - expected).abs() < 0.0005,
                "mse {mse_value}: got {got}, expected {expected}"
            );
        }
    }

    #[test]
    fn psnr_edge_cases() {
        assert_eq!(psnr_from_mse(255.0, 65025.0), 0.0);
        assert_eq!(psnr_from_mse(255.0, 0.0), f64::INFINITY);
        let g = textured(4, 4, 5);
        assert_eq!(psnr(&g, &g).unwrap(), f64::INFINITY);
    }

    #[test]
    fn ssim_identical_is_exactly_one() {
        let g = textured(16, 16, 11);
        assert_eq!(ssim(&g, &g, &SsimParams::default()).unwrap(), 1.0);
    }

    #[test]
    fn ssim_constant_extremes() {
        let black = ImageGrid::constant(16, 16, 0.0, 255.0).unwrap();
        let white = ImageGrid::constant(16, 16, 255.0, 255.0).unwrap();
        let got = ssim(&black, &white, &SsimParams::default()).unwrap();
        let c1 = (0.01f64 * 255.0).powi(2);
        let expected = c1 / (255.0 * 255.0 + c1);
        assert!(
            (got - expected).abs() < 1e-15,
            "got {got}, expected {expected}"
        );
    }

    #[test]
    fn ssim_symmetric_with_pinned_range() {
        let a = textured(16, 16, 3);
        let b = textured(16, 16, 4);
        let params = SsimParams {
            dynamic_range: Some(255.0),
            ..SsimParams::default()
        };
        assert_eq!(
            ssim(&a, &b, &params).unwrap(),
            ssim(&b, &a, &params).unwrap()
        );
    }

    #[test]
    fn ssim_window_must_fit() {
        let g = textured(8, 8, 1);
        assert!(matches!(
            ssim(&g, &g, &SsimParams::default()),
            Err(Error::WindowTooLarge { .. })
        ));
    }

    #[test]
    fn enl_rules() {
        let constant = ImageGrid::constant(8, 8, 7.0, 255.0).unwrap();
        assert_eq!(enl(&constant, None).unwrap(), f64::INFINITY);

        let two = ImageGrid::new(2, 1, vec![0.0, 255.0], 255.0).unwrap();
        assert!((enl(&two, None).unwrap() - 1.0).abs() < 1e-12);

        let zeros = ImageGrid::constant(4, 4, 0.0, 255.0).unwrap();
        assert!(matches!(
            enl(&zeros, None),
            Err(Error::DegenerateRegion(_))
        ));

        let balanced = ImageGrid::new(2, 1, vec![-1.0, 1.0], 255.0).unwrap();
        assert_eq!(enl(&balanced, None).unwrap(), 0.0);
    }

    #[test]
    fn enl_over_region() {
        let mut pixels = vec![1.0; 16];
        pixels[0] = 9.0; // outside the region below
        let g = ImageGrid::new(4, 4, pixels, 255.0).unwrap();
        assert_eq!(
            enl(&g, Some(Region::new(1, 1, 3, 3))).unwrap(),
            f64::INFINITY
        );
        assert!(matches!(
            enl(&g, Some(Region::new(2, 2, 4, 4))),
            Err(Error::OutOfBounds { .. })
        ));
    }

    #[test]
    fn ssi_rules() {
        let g = textured(8, 8, 21);
        assert_eq!(ssi(&g, &g, None).unwrap(), 1.0);

        let flat = ImageGrid::constant(8, 8, 100.0, 255.0).unwrap();
        assert_eq!(ssi(&g, &flat, None).unwrap(), 0.0);

        assert!(matches!(
            ssi(&flat, &g, None),
            Err(Error::DegenerateRegion(_))
        ));
    }

    #[test]
    fn report_consistency_and_serde() {
        let g = textured(16, 16, 31);
        let report = evaluate_all(None, &g, &g, None, &SsimParams::default()).unwrap();
        assert_eq!(report.psnr, f64::INFINITY);
        assert_eq!(report.mse, 0.0);
        assert_eq!(report.ssim, 1.0);
        assert_eq!(report.ssi, 1.0);

        let text = serde_json::to_string(&report).unwrap();
        assert!(text.contains("\"psnr\":\"inf\""), "{text}");
        let back: MetricsReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn evaluate_all_uses_reference_when_given() {
        let clean = textured(16, 16, 41);
        let noisy = textured(16, 16, 42);
        let filtered = textured(16, 16, 43);
        let vs_ref = evaluate_all(Some(&clean), &noisy, &filtered, None, &SsimParams::default())
            .unwrap();
        let direct = mse(&clean, &filtered).unwrap();
        assert_eq!(vs_ref.mse, direct);
        assert_eq!(
            vs_ref.psnr,
            psnr_from_mse(clean.max_value(), direct)
        );
        // SSI still compares filtered against the original
        assert_eq!(vs_ref.ssi, ssi(&noisy, &filtered, None).unwrap());
    }

    #[test]
    fn dimension_mismatch_detected() {
        let a = textured(16, 16, 1);
        let b = textured(16, 12, 1);
        assert!(matches!(
            evaluate_all(None, &a, &b, None, &SsimParams::default()),
            Err(Error::DimensionMismatch(..))
        ));
    }
}
