//! `despeckle` command line: convert rasters, synthesize speckle, filter,
//! evaluate metrics, and run benchmark configs.
//!
//! Exit codes: 0 on success, 1 on validation errors (bad flags or
//! parameters), 2 on I/O errors. Diagnostics go to standard error; results
//! and tables go to standard output unless `--output` is given.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use despeckle::bench::{render_table, run_benchmark, BenchConfig};
use despeckle::error::Error;
use despeckle::filters::{
    apply_filter, FilterSpec, DEFAULT_ADAPTIVE_RADIUS, DEFAULT_DAMPING, DEFAULT_LOOKS,
    DEFAULT_MEDIAN_RADIUS, DEFAULT_SIGMA_SPATIAL,
};
use despeckle::metrics::{evaluate_all, MetricsReport, SsimParams};
use despeckle::raster::{
    atomic_write_bytes, read_image, write_image, ImageGrid, QuantizeMode, RasterFormat, Region,
};
use despeckle::synth::{apply_multiplicative, generate_speckle_field, SpeckleParams};

#[derive(Parser)]
#[command(
    name = "despeckle",
    version,
    about = "Despeckling toolkit for SAR-style rasters"
)]
struct Cli {
    /// Worker threads for filtering and benchmarks (0 = all cores).
    /// Results are identical for any thread count.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Seed for speckle synthesis (default 0)
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert between raster formats (png, pgm, sgrid)
    Convert {
        input: PathBuf,
        output: PathBuf,
        /// Output format: png8, png16, pgm, or sgrid (default: inferred
        /// from the output extension)
        #[arg(long)]
        format: Option<String>,
        /// Map pixels into display range before writing: clamp or minmax.
        /// Integer outputs are rescaled to their full range afterwards.
        #[arg(long)]
        quantize: Option<String>,
    },
    /// Multiply a clean scene by a seeded gamma speckle field
    Speckle {
        clean: PathBuf,
        output: PathBuf,
        /// Number of looks L of the speckle (variance 1/L)
        #[arg(long, default_value_t = 1.0)]
        looks: f64,
    },
    /// Apply one despeckling filter
    Filter {
        input: PathBuf,
        output: PathBuf,
        /// lee, frost, kuan, gaussian, median, or bilateral
        #[arg(long)]
        method: String,
        /// Window radius r (window side 2r+1); lee/frost/kuan/median only
        #[arg(long)]
        window: Option<usize>,
        /// Number of looks; lee/frost/kuan only
        #[arg(long)]
        looks: Option<f64>,
        /// Frost damping factor
        #[arg(long)]
        damping: Option<f64>,
        /// Spatial sigma in pixels; gaussian/bilateral only
        #[arg(long = "sigma-spatial")]
        sigma_spatial: Option<f64>,
        /// Range sigma in pixel-value units; bilateral only
        #[arg(long = "sigma-range")]
        sigma_range: Option<f64>,
    },
    /// Evaluate PSNR/MSE/SSIM/ENL/SSI for a test image
    Metrics {
        test: PathBuf,
        /// Clean reference for PSNR/MSE/SSIM
        #[arg(long = "ref")]
        reference: Option<PathBuf>,
        /// Pre-filter original for SSI (defaults to --ref)
        #[arg(long)]
        original: Option<PathBuf>,
        /// Region x,y,w,h for ENL/SSI (default: whole image)
        #[arg(long)]
        region: Option<String>,
        /// Emit the report as JSON
        #[arg(long)]
        json: bool,
    },
    /// Run a JSON benchmark config and render the comparison table
    Bench {
        config: PathBuf,
        /// Write the table here instead of standard output
        #[arg(long)]
        output: Option<PathBuf>,
        /// csv, markdown, or json (overrides the config)
        #[arg(long)]
        format: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    if cli.threads > 0 {
        // ignore the error if a pool already exists (e.g. repeated inits in
        // tests); determinism does not depend on the pool size
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 1 for validation errors, 2 for file-level errors.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } | Error::CorruptFile { .. } | Error::UnsupportedFormat { .. } => 2,
        Error::FilterFailed { source, .. } => exit_code(source),
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Convert {
            input,
            output,
            format,
            quantize,
        } => cmd_convert(&input, &output, format.as_deref(), quantize.as_deref()),
        Command::Speckle {
            clean,
            output,
            looks,
        } => cmd_speckle(&clean, &output, looks, cli.seed.unwrap_or(0)),
        Command::Filter {
            input,
            output,
            method,
            window,
            looks,
            damping,
            sigma_spatial,
            sigma_range,
        } => {
            let spec = build_filter_spec(
                &method,
                window,
                looks,
                damping,
                sigma_spatial,
                sigma_range,
            )?;
            cmd_filter(&input, &output, &spec)
        }
        Command::Metrics {
            test,
            reference,
            original,
            region,
            json,
        } => cmd_metrics(
            &test,
            reference.as_deref(),
            original.as_deref(),
            region.as_deref(),
            json,
        ),
        Command::Bench {
            config,
            output,
            format,
        } => cmd_bench(&config, output, format.as_deref()),
    }
}

fn output_format_for(path: &Path, format: Option<&str>) -> Result<RasterFormat, Error> {
    match format {
        Some(name) => name.parse(),
        None => RasterFormat::from_extension(path).ok_or_else(|| Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: "unknown file extension; pass --format".into(),
        }),
    }
}

fn cmd_convert(
    input: &Path,
    output: &Path,
    format: Option<&str>,
    quantize: Option<&str>,
) -> Result<(), Error> {
    let out_format = output_format_for(output, format)?;
    let mut grid = read_image(input, None)?;
    if let Some(mode) = quantize {
        let mode: QuantizeMode = mode.parse()?;
        grid = grid.quantize_for_display(mode);
        // quantized pixels span [0, max_value]; stretch them onto the
        // integer range of the target format
        let target = match out_format {
            RasterFormat::Png8 | RasterFormat::Pgm => Some(255.0),
            RasterFormat::Png16 => Some(65535.0),
            RasterFormat::Sgrid => None,
        };
        if let Some(target) = target {
            if grid.max_value() != target {
                grid = grid.rescaled(target)?;
            }
        }
    }
    write_image(&grid, output, out_format)
}

fn cmd_speckle(clean: &Path, output: &Path, looks: f64, seed: u64) -> Result<(), Error> {
    let out_format = output_format_for(output, None)?;
    let clean = read_image(clean, None)?;
    let field = generate_speckle_field(
        clean.width(),
        clean.height(),
        SpeckleParams::new(looks, seed),
    )?;
    let noisy = apply_multiplicative(&clean, &field)?;
    write_image(&noisy, output, out_format)
}

fn build_filter_spec(
    method: &str,
    window: Option<usize>,
    looks: Option<f64>,
    damping: Option<f64>,
    sigma_spatial: Option<f64>,
    sigma_range: Option<f64>,
) -> Result<FilterSpec, Error> {
    // reject flags that do not belong to the chosen method
    let reject = |name: &str, present: bool| {
        if present {
            Err(Error::InvalidParam(format!(
                "--{name} is not valid for --method {method}"
            )))
        } else {
            Ok(())
        }
    };
    match method.to_ascii_lowercase().as_str() {
        "lee" => {
            reject("damping", damping.is_some())?;
            reject("sigma-spatial", sigma_spatial.is_some())?;
            reject("sigma-range", sigma_range.is_some())?;
            Ok(FilterSpec::lee(
                window.unwrap_or(DEFAULT_ADAPTIVE_RADIUS),
                looks.unwrap_or(DEFAULT_LOOKS),
            ))
        }
        "frost" => {
            reject("sigma-spatial", sigma_spatial.is_some())?;
            reject("sigma-range", sigma_range.is_some())?;
            Ok(FilterSpec::frost(
                window.unwrap_or(DEFAULT_ADAPTIVE_RADIUS),
                looks.unwrap_or(DEFAULT_LOOKS),
                damping.unwrap_or(DEFAULT_DAMPING),
            ))
        }
        "kuan" => {
            reject("damping", damping.is_some())?;
            reject("sigma-spatial", sigma_spatial.is_some())?;
            reject("sigma-range", sigma_range.is_some())?;
            Ok(FilterSpec::kuan(
                window.unwrap_or(DEFAULT_ADAPTIVE_RADIUS),
                looks.unwrap_or(DEFAULT_LOOKS),
            ))
        }
        "gaussian" => {
            reject("window", window.is_some())?;
            reject("looks", looks.is_some())?;
            reject("damping", damping.is_some())?;
            reject("sigma-range", sigma_range.is_some())?;
            Ok(FilterSpec::gaussian(
                sigma_spatial.unwrap_or(DEFAULT_SIGMA_SPATIAL),
            ))
        }
        "median" => {
            reject("looks", looks.is_some())?;
            reject("damping", damping.is_some())?;
            reject("sigma-spatial", sigma_spatial.is_some())?;
            reject("sigma-range", sigma_range.is_some())?;
            Ok(FilterSpec::median(window.unwrap_or(DEFAULT_MEDIAN_RADIUS)))
        }
        "bilateral" => {
            reject("window", window.is_some())?;
            reject("looks", looks.is_some())?;
            reject("damping", damping.is_some())?;
            Ok(FilterSpec::Bilateral {
                sigma_spatial: sigma_spatial.unwrap_or(DEFAULT_SIGMA_SPATIAL),
                sigma_range,
            })
        }
        other => Err(Error::InvalidParam(format!("unknown --method '{other}'"))),
    }
}

fn cmd_filter(input: &Path, output: &Path, spec: &FilterSpec) -> Result<(), Error> {
    let out_format = output_format_for(output, None)?;
    let grid = read_image(input, None)?;
    let filtered = apply_filter(&grid, spec)?;
    write_image(&filtered, output, out_format)
}

fn parse_region(text: &str) -> Result<Region, Error> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err(Error::InvalidParam(format!(
            "--region expects x,y,w,h, got '{text}'"
        )));
    }
    let mut values = [0usize; 4];
    for (slot, part) in values.iter_mut().zip(&parts) {
        *slot = part.trim().parse().map_err(|_| {
            Error::InvalidParam(format!("--region component '{part}' is not a number"))
        })?;
    }
    Ok(Region::new(values[0], values[1], values[2], values[3]))
}

fn format_metric(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        "inf".to_string()
    }
}

fn print_report(report: &MetricsReport, json: bool) -> Result<(), Error> {
    if json {
        let text = serde_json::to_string_pretty(report)
            .map_err(|e| Error::InvalidParam(format!("serialize report: {e}")))?;
        println!("{text}");
    } else {
        println!("psnr: {}", format_metric(report.psnr));
        println!("mse: {}", format_metric(report.mse));
        println!("ssim: {}", format_metric(report.ssim));
        println!("enl: {}", format_metric(report.enl));
        println!("ssi: {}", format_metric(report.ssi));
        if let Some(r) = report.region {
            println!("region: {},{},{},{}", r.x, r.y, r.w, r.h);
        }
    }
    Ok(())
}

fn cmd_metrics(
    test: &Path,
    reference: Option<&Path>,
    original: Option<&Path>,
    region: Option<&str>,
    json: bool,
) -> Result<(), Error> {
    if reference.is_none() && original.is_none() {
        return Err(Error::InvalidParam(
            "at least one of --ref or --original is required".into(),
        ));
    }
    let region = region.map(parse_region).transpose()?;
    let test = read_image(test, None)?;
    let reference = reference.map(|p| read_image(p, None)).transpose()?;
    let original = original.map(|p| read_image(p, None)).transpose()?;
    let original: &ImageGrid = original
        .as_ref()
        .or(reference.as_ref())
        .expect("checked above");
    let report = evaluate_all(
        reference.as_ref(),
        original,
        &test,
        region,
        &SsimParams::default(),
    )?;
    print_report(&report, json)
}

fn cmd_bench(config: &Path, output: Option<PathBuf>, format: Option<&str>) -> Result<(), Error> {
    let mut config = BenchConfig::load(config)?;
    if let Some(format) = format {
        config.output_format = format.parse()?;
    }
    if let Some(output) = output {
        config.output_path = Some(output);
    }
    let result = run_benchmark(&config)?;
    for (label, ms) in result.columns.iter().zip(&result.provenance.filter_ms) {
        eprintln!("{label}: {ms:.1} ms");
    }
    let table = render_table(&result, config.output_format);
    match &config.output_path {
        Some(path) => atomic_write_bytes(path, table.as_bytes()),
        None => {
            print!("{table}");
            Ok(())
        }
    }
}
