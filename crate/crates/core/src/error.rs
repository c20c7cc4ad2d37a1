use std::path::PathBuf;

/// Errors produced by raster I/O, synthesis, filtering, metrics, and the
/// benchmark runner.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: unsupported format: {reason}", path.display())]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error("{}: corrupt file: {reason}", path.display())]
    CorruptFile { path: PathBuf, reason: String },

    /// A pixel cannot be represented in the requested integer output format.
    #[error("pixel {value} at index {index} outside [0, {max}] for {format} output")]
    Range {
        value: f64,
        index: usize,
        max: f64,
        format: &'static str,
    },

    #[error("region {x},{y},{w},{h} out of bounds for {width}x{height} image")]
    OutOfBounds {
        x: usize,
        y: usize,
        w: usize,
        h: usize,
        width: usize,
        height: usize,
    },

    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("window of side {side} does not fit a {width}x{height} image")]
    WindowTooLarge {
        side: usize,
        width: usize,
        height: usize,
    },

    #[error("degenerate region: {0}")]
    DegenerateRegion(String),

    #[error("invalid config: {0}")]
    Config(String),

    /// A benchmark step failed; carries the label of the offending filter.
    #[error("filter '{label}': {source}")]
    FilterFailed {
        label: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid_param(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
