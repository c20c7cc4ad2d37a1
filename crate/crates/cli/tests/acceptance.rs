//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers (visible with `--nocapture`).
//!
//! Covers the published PSNR/MSE table consistency, filter fixed points and
//! identity limits, oracle equivalence, speckle moments, synthetic
//! despeckling efficacy, metric identities, benchmark determinism, the
//! golden table, and throughput.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use despeckle::filters::{apply_filter, lee_filter, FilterSpec};
use despeckle::metrics::{enl, mse, psnr, psnr_from_mse, ssi, ssim, SsimParams};
use despeckle::raster::{ImageGrid, Region};
use despeckle::synth::{
    apply_multiplicative, generate_speckle_field, make_phantom, PhantomKind, SpeckleParams,
};
use despeckle_reference as reference;

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .expect("workspace root")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_despeckle"))
}

#[test]
fn criterion_01_paper_table_psnr_mse_consistency() {
    let pairs = [
        (6.200277, 40.206693),
        (10.343083, 37.984304),
        (80.514994, 29.072036),
        (70.168261, 29.669396),
        (66.422740, 29.907636),
    ];
    let mut worst = 0.0f64;
    for (mse_value, published) in pairs {
        let computed = psnr_from_mse(255.0, mse_value);
        let diff = (computed - published).abs();
        worst = worst.max(diff);
        assert!(
            diff < 0.0005,
            "MSE {mse_value}: computed {computed}, published {published}"
        );
    }
    println!("criterion 01 PASS: five published pairs consistent, worst diff {worst:.2e} dB");
}

#[test]
fn criterion_02_constant_fixed_point_sweep() {
    let level = 128.0;
    let g = ImageGrid::constant(64, 64, level, 255.0).unwrap();
    let radii = [1usize, 2, 3];
    let looks = [1.0f64, 4.0];
    let sigmas = [0.5f64, 1.0, 2.0];
    let sigma_ranges = [1.0f64, 25.0];
    let dampings = [0.5f64, 2.0];

    let mut specs = Vec::new();
    for &r in &radii {
        for &l in &looks {
            specs.push(FilterSpec::lee(r, l));
            specs.push(FilterSpec::kuan(r, l));
            for &d in &dampings {
                specs.push(FilterSpec::frost(r, l, d));
            }
        }
        specs.push(FilterSpec::median(r));
    }
    for &s in &sigmas {
        specs.push(FilterSpec::gaussian(s));
        for &sr in &sigma_ranges {
            specs.push(FilterSpec::bilateral(s, sr));
        }
    }

    let count = specs.len();
    for spec in specs {
        let out = apply_filter(&g, &spec).unwrap();
        let worst = out
            .pixels()
            .iter()
            .map(|v| (v - level).abs())
            .fold(0.0, f64::max);
        if matches!(spec, FilterSpec::Median { .. }) {
            assert_eq!(worst, 0.0, "median not exact: {worst}");
        } else {
            assert!(worst <= 1e-9, "{}: deviation {worst}", spec.kind_name());
        }
    }
    println!("criterion 02 PASS: {count} parameter sets keep the constant grid fixed");
}

#[test]
fn criterion_03_identity_limits() {
    // strictly textured grid: uniform in [50, 200], no constant windows
    let base = reference::random_grid(48, 48, 4242, 150.0);
    let textured = ImageGrid::new(
        48,
        48,
        base.pixels().iter().map(|v| v + 50.0).collect(),
        255.0,
    )
    .unwrap();

    // C_u^2 = 0 makes Lee and Kuan the identity, bit-exact
    let lee = lee_filter(&textured, 3, f64::INFINITY).unwrap();
    assert_eq!(lee.pixels(), textured.pixels(), "lee identity");
    let kuan = despeckle::filters::kuan_filter(&textured, 3, f64::INFINITY).unwrap();
    assert_eq!(kuan.pixels(), textured.pixels(), "kuan identity");

    // bilateral degenerates to gaussian as sigma_range grows
    let blur = apply_filter(&textured, &FilterSpec::gaussian(1.0)).unwrap();
    let bilateral = apply_filter(
        &textured,
        &FilterSpec::bilateral(1.0, 1e12 * textured.max_value()),
    )
    .unwrap();
    let worst_bilateral = bilateral
        .pixels()
        .iter()
        .zip(blur.pixels())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst_bilateral <= 1e-6, "bilateral vs gaussian: {worst_bilateral}");

    // Frost keeps the input as damping grows (interior pixels)
    let frost = despeckle::filters::frost_filter(&textured, 3, 1e6).unwrap();
    let mut worst_frost = 0.0f64;
    for y in 3..45 {
        for x in 3..45 {
            worst_frost = worst_frost.max((frost.get(x, y) - textured.get(x, y)).abs());
        }
    }
    assert!(worst_frost <= 1e-6, "frost interior: {worst_frost}");

    println!(
        "criterion 03 PASS: exact Lee/Kuan identity; bilateral->gaussian {worst_bilateral:.2e}; frost interior {worst_frost:.2e}"
    );
}

#[test]
fn criterion_04_oracle_equivalence_100_grids() {
    let rel = |a: &ImageGrid, b: &ImageGrid| {
        a.pixels()
            .iter()
            .zip(b.pixels())
            .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-9))
            .fold(0.0, f64::max)
    };
    let mut worst = [("lee", 0.0f64), ("kuan", 0.0), ("frost", 0.0), ("gaussian", 0.0), ("bilateral", 0.0)];
    for seed in 0..100u64 {
        let g = reference::random_grid(16, 16, seed, 255.0);

        let d = rel(&lee_filter(&g, 2, 1.0).unwrap(), &reference::lee(&g, 2, 1.0));
        worst[0].1 = worst[0].1.max(d);

        let d = rel(
            &despeckle::filters::kuan_filter(&g, 2, 4.0).unwrap(),
            &reference::kuan(&g, 2, 4.0),
        );
        worst[1].1 = worst[1].1.max(d);

        let d = rel(
            &despeckle::filters::frost_filter(&g, 2, 2.0).unwrap(),
            &reference::frost(&g, 2, 2.0),
        );
        worst[2].1 = worst[2].1.max(d);

        let d = rel(
            &despeckle::filters::gaussian_filter(&g, 1.0).unwrap(),
            &reference::gaussian(&g, 1.0),
        );
        worst[3].1 = worst[3].1.max(d);

        let d = rel(
            &despeckle::filters::bilateral_filter(&g, 1.0, 25.5).unwrap(),
            &reference::bilateral(&g, 1.0, 25.5),
        );
        worst[4].1 = worst[4].1.max(d);

        let fast = despeckle::filters::median_filter(&g, 1).unwrap();
        let naive = reference::median(&g, 1);
        assert_eq!(fast.pixels(), naive.pixels(), "median differs on seed {seed}");
    }
    for (name, w) in worst {
        assert!(w < 1e-6, "{name}: relative diff {w}");
    }
    println!(
        "criterion 04 PASS: 100 grids per filter; worst relative diffs {:?}; median exact",
        worst.map(|(n, w)| format!("{n} {w:.2e}"))
    );
}

#[test]
fn criterion_05_speckle_moments() {
    for looks in [1.0f64, 4.0] {
        for seed in [1u64, 2, 3] {
            let field =
                generate_speckle_field(1000, 1000, SpeckleParams::new(looks, seed)).unwrap();
            let n = field.pixels().len() as f64;
            let mean = field.pixels().iter().sum::<f64>() / n;
            let var = field
                .pixels()
                .iter()
                .map(|v| (v - mean) * (v - mean))
                .sum::<f64>()
                / n;
            assert!(
                (mean - 1.0).abs() <= 0.01,
                "L={looks} seed={seed}: mean {mean}"
            );
            assert!(
                (var - 1.0 / looks).abs() <= 0.03,
                "L={looks} seed={seed}: var {var}"
            );
        }
    }
    println!("criterion 05 PASS: mean within 0.01 and variance within 0.03 for L in {{1,4}}, 3 seeds");
}

#[test]
fn criterion_06_synthetic_despeckling_efficacy() {
    let clean = make_phantom(
        256,
        256,
        PhantomKind::Quadrants {
            levels: [60.0, 110.0, 160.0, 210.0],
        },
    )
    .unwrap();
    let field = generate_speckle_field(256, 256, SpeckleParams::new(1.0, 42)).unwrap();
    let noisy = apply_multiplicative(&clean, &field).unwrap();
    let noisy_psnr = psnr(&clean, &noisy).unwrap();

    // default parameters
    let adaptive = [
        ("lee", FilterSpec::lee(3, 1.0)),
        ("kuan", FilterSpec::kuan(3, 1.0)),
        ("frost", FilterSpec::frost(3, 1.0, 2.0)),
    ];
    let mut gains = Vec::new();
    for (name, spec) in &adaptive {
        let filtered = apply_filter(&noisy, spec).unwrap();
        let gain = psnr(&clean, &filtered).unwrap() - noisy_psnr;
        assert!(gain >= 4.0, "{name}: PSNR gain {gain:.2} dB < 4 dB");
        gains.push(format!("{name} +{gain:.1} dB"));
    }

    let all_six = [
        FilterSpec::lee(3, 1.0),
        FilterSpec::frost(3, 1.0, 2.0),
        FilterSpec::kuan(3, 1.0),
        FilterSpec::gaussian(1.0),
        FilterSpec::median(1),
        FilterSpec::Bilateral {
            sigma_spatial: 1.0,
            sigma_range: None,
        },
    ];
    let mut ssi_values = Vec::new();
    for spec in &all_six {
        let filtered = apply_filter(&noisy, spec).unwrap();
        let value = ssi(&noisy, &filtered, None).unwrap();
        assert!(value < 1.0, "{}: SSI {value}", spec.kind_name());
        ssi_values.push(format!("{} {value:.3}", spec.kind_name()));
    }

    // 64x64 interior of the bottom-right quadrant
    let region = Some(Region::new(160, 160, 64, 64));
    let noisy_enl = enl(&noisy, region).unwrap();
    let lee_out = apply_filter(&noisy, &FilterSpec::lee(3, 1.0)).unwrap();
    let lee_enl = enl(&lee_out, region).unwrap();
    assert!(
        lee_enl >= 5.0 * noisy_enl,
        "ENL ratio {:.2} < 5 (noisy {noisy_enl:.3}, lee {lee_enl:.3})",
        lee_enl / noisy_enl
    );

    println!(
        "criterion 06 PASS: gains [{}]; SSI [{}]; ENL {noisy_enl:.2} -> {lee_enl:.2}",
        gains.join(", "),
        ssi_values.join(", ")
    );
}

#[test]
fn criterion_07_metric_identities() {
    let mut worst_enl = 0.0f64;
    let mut worst_ssi = 0.0f64;
    for seed in 0..20u64 {
        let base = reference::random_grid(16, 16, seed, 254.0);
        let grid = ImageGrid::new(
            16,
            16,
            base.pixels().iter().map(|v| v + 1.0).collect(),
            255.0,
        )
        .unwrap();

        assert_eq!(ssim(&grid, &grid, &SsimParams::default()).unwrap(), 1.0);
        assert_eq!(mse(&grid, &grid).unwrap(), 0.0);

        let factor = 1.7;
        let scaled = ImageGrid::new(
            16,
            16,
            grid.pixels().iter().map(|v| v * factor).collect(),
            255.0,
        )
        .unwrap();
        let a = enl(&grid, None).unwrap();
        let b = enl(&scaled, None).unwrap();
        let diff = (a - b).abs() / a.abs();
        worst_enl = worst_enl.max(diff);
        assert!(diff <= 1e-12, "seed {seed}: ENL scale diff {diff}");

        let filtered = apply_filter(&grid, &FilterSpec::gaussian(0.8)).unwrap();
        let filtered_scaled = ImageGrid::new(
            16,
            16,
            filtered.pixels().iter().map(|v| v * factor).collect(),
            255.0,
        )
        .unwrap();
        let s1 = ssi(&grid, &filtered, None).unwrap();
        let s2 = ssi(&scaled, &filtered_scaled, None).unwrap();
        let diff = (s1 - s2).abs() / s1.abs();
        worst_ssi = worst_ssi.max(diff);
        assert!(diff <= 1e-12, "seed {seed}: SSI scale diff {diff}");
    }
    println!(
        "criterion 07 PASS: exact SSIM/MSE identities; scale invariance within {worst_enl:.1e} (ENL) / {worst_ssi:.1e} (SSI)"
    );
}

fn run_bench_csv(threads: &str) -> Vec<u8> {
    let config = workspace_root().join("assets/bench_example.json");
    let out = bin()
        .args(["bench", config.to_str().unwrap(), "--threads", threads])
        .output()
        .expect("bench runs");
    assert!(
        out.status.success(),
        "bench failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

#[test]
fn criterion_08_bench_thread_count_determinism() {
    let single = run_bench_csv("1");
    let eight = run_bench_csv("8");
    let again = run_bench_csv("1");
    assert_eq!(single, eight, "CSV differs between --threads 1 and 8");
    assert_eq!(single, again, "CSV differs between repeated runs");
    println!(
        "criterion 08 PASS: byte-identical CSV across --threads 1/8 and repeated runs ({} bytes)",
        single.len()
    );
}

#[test]
fn criterion_09_golden_table() {
    let golden_path = workspace_root().join("assets/golden_bench.csv");
    let golden = std::fs::read(&golden_path).expect("golden file present");
    let rendered = run_bench_csv("0");
    let header = String::from_utf8_lossy(&rendered)
        .lines()
        .next()
        .unwrap_or_default()
        .to_string();
    assert_eq!(
        header,
        "Metric,Lee Filter,Frost Filter,Kuan Filter,Gaussian Filter,Median Filter,Bilateral Filter"
    );
    let rows: Vec<String> = String::from_utf8_lossy(&rendered)
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap_or_default().to_string())
        .collect();
    assert_eq!(rows, ["PSNR", "MSE", "SSIM", "ENL", "SSI"]);
    assert_eq!(
        rendered, golden,
        "rendered CSV does not match the pinned golden file"
    );
    println!("criterion 09 PASS: output matches {} byte-for-byte", golden_path.display());
}

#[test]
fn criterion_10_throughput_7x7_lee_on_2048() {
    let grid = reference::random_grid(2048, 2048, 1234, 255.0);
    let time_with_pool = |threads: usize| -> Duration {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        // best of two runs to damp scheduling noise
        let mut best = Duration::MAX;
        for _ in 0..2 {
            let started = Instant::now();
            let out = pool.install(|| lee_filter(&grid, 3, 1.0).unwrap());
            let elapsed = started.elapsed();
            assert_eq!(out.dims(), grid.dims());
            best = best.min(elapsed);
        }
        best
    };

    let single = time_with_pool(1);
    assert!(
        single < Duration::from_secs(5),
        "single-threaded 7x7 Lee took {single:?}"
    );

    let four = time_with_pool(4);
    let speedup = single.as_secs_f64() / four.as_secs_f64();
    println!(
        "criterion 10: single-threaded {single:?}, 4 workers {four:?}, speedup {speedup:.2}x on {} logical CPUs",
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(0)
    );
    assert!(
        speedup >= 2.0,
        "expected >= 2x speedup with 4 workers, measured {speedup:.2}x"
    );
    println!("criterion 10 PASS: {single:?} single-threaded, {speedup:.2}x with 4 workers");
}
