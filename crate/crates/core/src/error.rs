use thiserror::Error;

/// Errors produced by waveform construction, design, and simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sampling grid: {0}")]
    SamplingGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("design frequency {fhat_hz:e} Hz outside the band (0, {band_hz:e}) Hz")]
    OutOfBand { fhat_hz: f64, band_hz: f64 },

    #[error("waveform has zero energy")]
    ZeroEnergy,

    #[error("template does not fit one chip: delta + T_p = {needed:e} s > T_c = {chip:e} s")]
    TemplateOverflow { needed: f64, chip: f64 },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
