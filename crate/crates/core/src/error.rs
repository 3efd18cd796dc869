use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the pipeline.
///
/// Each variant maps to a stable, machine-parsable category via [`Error::category`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed WAV header: {0}")]
    MalformedHeader(String),
    #[error("unsupported WAV encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("truncated WAV data: expected {expected} bytes, found {found}")]
    TruncatedData { expected: usize, found: usize },
    #[error("audio too short: {samples} samples, need at least {window}")]
    AudioTooShort { samples: usize, window: usize },
    #[error("malformed feature file: {0}")]
    MalformedFeatures(String),
    #[error("malformed checkpoint: {0}")]
    MalformedCheckpoint(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("non-finite update in parameter tensor `{0}`")]
    NonFiniteUpdate(String),
    #[error("clipping invariant violated: norm {norm} exceeds clip {clip}")]
    ClippingViolation { norm: f64, clip: f64 },
    #[error("teacher probability file already exists: {}", .0.display())]
    OneShotViolation(PathBuf),
    #[error("query mode `{mode}` is incompatible with the teacher: {reason}")]
    ModeMismatch { mode: String, reason: String },
    #[error("missing teacher probabilities for example `{0}`")]
    MissingTeacherProbs(String),
    #[error("malformed teacher probability file: {0}")]
    MalformedProbFile(String),
    #[error("malformed manifest: {0}")]
    MalformedManifest(String),
    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },
    #[error("release refused: {0}")]
    ReleaseRefused(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short category string printed by the CLI on failure.
    pub fn category(&self) -> &'static str {
        match self {
            Error::MalformedHeader(_) => "malformed_header",
            Error::UnsupportedEncoding(_) => "unsupported_encoding",
            Error::TruncatedData { .. } => "truncated_data",
            Error::AudioTooShort { .. } => "audio_too_short",
            Error::MalformedFeatures(_) => "malformed_features",
            Error::MalformedCheckpoint(_) => "malformed_checkpoint",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::InvalidConfig(_) => "invalid_config",
            Error::InsufficientData(_) => "insufficient_data",
            Error::NonFiniteUpdate(_) => "non_finite_update",
            Error::ClippingViolation { .. } => "clipping_violation",
            Error::OneShotViolation(_) => "one_shot_violation",
            Error::ModeMismatch { .. } => "mode_mismatch",
            Error::MissingTeacherProbs(_) => "missing_teacher_probs",
            Error::MalformedProbFile(_) => "malformed_prob_file",
            Error::MalformedManifest(_) => "malformed_manifest",
            Error::UnknownStrategy { .. } => "unknown_strategy",
            Error::ReleaseRefused(_) => "release_refused",
            Error::EmptyInput(_) => "empty_input",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
            Error::Toml(_) => "config_parse",
        }
    }
}
