use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // geometry
    #[error("invalid spherical point: {0}")]
    InvalidPoint(String),
    #[error("grid step {step}° must divide 180° evenly; valid integer steps are {valid}")]
    InvalidGridStep { step: f64, valid: String },
    #[error("degenerate point set: {0}")]
    DegeneratePoints(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    // spectral
    #[error("empty signal")]
    EmptySignal,
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("signal too short: {len} samples, need at least {min} for {segments} segments of >= {min_segment} samples")]
    SignalTooShort {
        len: usize,
        min: usize,
        segments: usize,
        min_segment: usize,
    },
    #[error("spectrum is not conjugate symmetric (max relative deviation {0:.3e})")]
    NotConjugateSymmetric(f64),
    #[error("spectrum shape mismatch: {0}")]
    SpectrumShape(String),

    // partials
    #[error("invalid note context: {0}")]
    InvalidNoteContext(String),
    #[error("search window {lo:.3}..{hi:.3} Hz contains no spectral bins")]
    EmptySearchWindow { lo: f64, hi: f64 },
    #[error("no channel carries energy inside the search window")]
    NoSignal,

    // directivity
    #[error("operation requires equalization state {expected}, found {found}")]
    WrongState { expected: String, found: String },
    #[error("reference pressure is zero in band {band} ({center} Hz)")]
    ZeroReference { band: usize, center: f64 },
    #[error("orientation weights are not normalized: sum of w'·g' = {0}")]
    WeightsNotNormalized(f64),
    #[error("direction {0} is not a point of the grid")]
    NotOnGrid(String),
    #[error("no effective third-octave bands (all bands are zero)")]
    NoEffectiveBands,
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    // interpolation
    #[error("spline system is singular (duplicate or degenerate nodes)")]
    SingularSystem,
    #[error("unsupported spline order {0}; only order 1 is implemented")]
    UnsupportedOrder(u32),

    // containers
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("wav: {0}")]
    Wav(#[from] hound::Error),
    #[error("unsupported wav format: {0}")]
    UnsupportedWav(String),
    #[error("expected {expected} channels, file has {found}")]
    ChannelMismatch { expected: usize, found: usize },
    #[error("malformed container: {0}")]
    Malformed(String),
    #[error("invalid document: {0}")]
    InvalidDocument(String),
    #[error("missing metadata key {key} required for {kind} documents")]
    MissingMetadata { key: String, kind: String },
    #[error("unrecognized file name {0:?}")]
    BadFileName(String),

    // pipeline
    #[error("manifest: {0}")]
    Manifest(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
