use thiserror::Error;

/// Errors raised by the link and rate models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("no absorption entry for wavelength {wavelength_m:e} m")]
    UnknownWavelength { wavelength_m: f64 },

    #[error("target of {target_db} dB not reachable: best is {best_db:.3} dB at the aperture bound")]
    Unachievable { target_db: f64, best_db: f64 },

    #[error("{0} must be evaluated with its own operation")]
    SchemeMismatch(&'static str),

    #[error("elementary-link probability is zero, repeater rate is undefined")]
    DegenerateRate,

    #[error("rate is zero, no finite accumulation time")]
    InfeasibleRate,

    #[error("scenario line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}
