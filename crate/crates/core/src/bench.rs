//! Config-driven benchmark runner.
//!
//! A [`BenchConfig`] names a noisy input scene, an optional clean reference,
//! an ordered list of labelled filters, and an optional region for ENL/SSI.
//! [`run_benchmark`] applies every filter, evaluates all metrics, and
//! returns a fixed-shape matrix: rows `[PSNR, MSE, SSIM, ENL, SSI]`, one
//! column per filter in config order. Rendering is pure, so identical
//! results always produce byte-identical tables.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{apply_filter, FilterSpec};
use crate::metrics::{evaluate_all, MetricsReport, SsimParams};
use crate::raster::{read_image, Region};

/// Fixed metric row order of every benchmark table.
pub const METRIC_ROWS: [&str; 5] = ["PSNR", "MSE", "SSIM", "ENL", "SSI"];

/// One labelled filter column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterEntry {
    pub label: String,
    #[serde(flatten)]
    pub spec: FilterSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Markdown,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidParam(format!("unknown output format '{other}'"))),
        }
    }
}

/// Declarative benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Path to the (noisy) input scene.
    pub input: PathBuf,
    /// Optional clean ground truth for PSNR/MSE/SSIM.
    #[serde(default)]
    pub reference: Option<PathBuf>,
    pub filters: Vec<FilterEntry>,
    /// Region used for ENL/SSI; whole image when absent.
    #[serde(default)]
    pub region: Option<Region>,
    #[serde(default)]
    pub ssim: SsimParams,
    #[serde(default)]
    pub output_format: OutputFormat,
    /// Table destination; standard output when absent.
    #[serde(default)]
    pub output_path: Option<PathBuf>,
}

impl BenchConfig {
    /// Parse a config file, resolving relative paths against its directory.
    pub fn load(path: &Path) -> Result<BenchConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config: BenchConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let Some(base) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            config.input = resolve(base, config.input);
            config.reference = config.reference.map(|p| resolve(base, p));
            config.output_path = config.output_path.map(|p| resolve(base, p));
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.filters.is_empty() {
            return Err(Error::Config("filter list must not be empty".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for entry in &self.filters {
            if entry.label.is_empty() {
                return Err(Error::Config("filter labels must not be empty".into()));
            }
            if entry.label.contains(',') || entry.label.contains('|') {
                return Err(Error::Config(format!(
                    "filter label '{}' must not contain ',' or '|'",
                    entry.label
                )));
            }
            if !seen.insert(entry.label.as_str()) {
                return Err(Error::Config(format!(
                    "duplicate filter label '{}'",
                    entry.label
                )));
            }
        }
        Ok(())
    }
}

fn resolve(base: &Path, path: PathBuf) -> PathBuf {
    if path.is_relative() {
        base.join(path)
    } else {
        path
    }
}

/// Run provenance: inputs, parameters, version, and per-filter wall-clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub input: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub region: Option<Region>,
    pub toolkit_version: String,
    pub filters: Vec<FilterEntry>,
    /// Wall-clock of each filter application, milliseconds, config order.
    pub filter_ms: Vec<f64>,
}

/// Metric matrix produced by [`run_benchmark`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    /// Always [`METRIC_ROWS`].
    pub rows: Vec<String>,
    /// Filter labels in config order.
    pub columns: Vec<String>,
    /// `values[row][column]`, possibly infinite.
    #[serde(with = "value_matrix")]
    pub values: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

impl BenchResult {
    pub fn value(&self, row: usize, column: usize) -> f64 {
        self.values[row][column]
    }
}

/// (De)serialize the metric matrix with `"inf"` sentinels for infinities.
mod value_matrix {
    use serde::de::Error as _;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Cell {
        Number(f64),
        Sentinel(String),
    }

    pub fn serialize<S: Serializer>(values: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        struct Row<'a>(&'a [f64]);

        impl serde::Serialize for Row<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let mut seq = s.serialize_seq(Some(self.0.len()))?;
                for v in self.0 {
                    if v.is_finite() {
                        seq.serialize_element(v)?;
                    } else {
                        seq.serialize_element("inf")?;
                    }
                }
                seq.end()
            }
        }

        let mut seq = s.serialize_seq(Some(values.len()))?;
        for row in values {
            seq.serialize_element(&Row(row))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        let raw: Vec<Vec<Cell>> = Vec::deserialize(d)?;
        raw.into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|cell| match cell {
                        Cell::Number(v) => Ok(v),
                        Cell::Sentinel(s) if s == "inf" => Ok(f64::INFINITY),
                        Cell::Sentinel(s) => {
                            Err(D::Error::custom(format!("unknown sentinel '{s}'")))
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Apply every configured filter to the input scene and evaluate all
/// metrics. Filters run as independent jobs over the immutable input; the
/// matrix is assembled in config order regardless of completion order.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchResult> {
    config.validate()?;
    let input = read_image(&config.input, None)?;
    let reference = config
        .reference
        .as_ref()
        .map(|p| read_image(p, None))
        .transpose()?;
    if let Some(region) = config.region {
        region.validate(input.width(), input.height())?;
    }

    let tag = |label: &str| {
        let label = label.to_string();
        move |e: Error| Error::FilterFailed {
            label,
            source: Box::new(e),
        }
    };

    let outcomes: Vec<(MetricsReport, f64)> = config
        .filters
        .par_iter()
        .map(|entry| {
            let started = Instant::now();
            let filtered = apply_filter(&input, &entry.spec).map_err(tag(&entry.label))?;
            let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
            let report = evaluate_all(
                reference.as_ref(),
                &input,
                &filtered,
                config.region,
                &config.ssim,
            )
            .map_err(tag(&entry.label))?;
            Ok((report, elapsed_ms))
        })
        .collect::<Result<_>>()?;

    let mut values = vec![vec![0.0; config.filters.len()]; METRIC_ROWS.len()];
    let mut filter_ms = Vec::with_capacity(config.filters.len());
    for (col, (report, ms)) in outcomes.iter().enumerate() {
        values[0][col] = report.psnr;
        values[1][col] = report.mse;
        values[2][col] = report.ssim;
        values[3][col] = report.enl;
        values[4][col] = report.ssi;
        filter_ms.push(*ms);
    }

    Ok(BenchResult {
        rows: METRIC_ROWS.iter().map(|s| s.to_string()).collect(),
        columns: config.filters.iter().map(|f| f.label.clone()).collect(),
        values,
        provenance: Provenance {
            input: config.input.display().to_string(),
            reference: config.reference.as_ref().map(|p| p.display().to_string()),
            region: config.region,
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            filters: config.filters.clone(),
            filter_ms,
        },
    })
}

fn format_cell(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        "inf".to_string()
    }
}

/// Render a result as CSV, a Markdown pipe table, or JSON.
///
/// CSV and Markdown print values with six decimal places and the literal
/// `inf` for infinities; JSON keeps full precision and round-trips exactly.
pub fn render_table(result: &BenchResult, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut out = String::from("Metric");
            for label in &result.columns {
                out.push(',');
                out.push_str(label);
            }
            out.push('\n');
            for (name, row) in result.rows.iter().zip(&result.values) {
                out.push_str(name);
                for v in row {
                    out.push(',');
                    out.push_str(&format_cell(*v));
                }
                out.push('\n');
            }
            out
        }
        OutputFormat::Markdown => {
            let mut out = String::from("| Metric |");
            for label in &result.columns {
                out.push(' ');
                out.push_str(label);
                out.push_str(" |");
            }
            out.push_str("\n| --- |");
            for _ in &result.columns {
                out.push_str(" --- |");
            }
            out.push('\n');
            for (name, row) in result.rows.iter().zip(&result.values) {
                out.push_str("| ");
                out.push_str(name);
                out.push_str(" |");
                for v in row {
                    out.push(' ');
                    out.push_str(&format_cell(*v));
                    out.push_str(" |");
                }
                out.push('\n');
            }
            out
        }
        OutputFormat::Json => {
            let mut out =
                serde_json::to_string_pretty(result).expect("benchmark result serializes");
            out.push('\n');
            out
        }
    }
}
