use std::io;

use crate::reliability::PartType;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the evaluation chain.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the model.
    #[error("domain error: {0}")]
    Domain(String),

    /// A closed-form conduction expression was requested for a strategy that has none.
    #[error("no closed-form conduction loss exists for {0}; use the numeric integrator")]
    UnsupportedStrategy(crate::modulation::StrategyId),

    /// A fitted curve was evaluated somewhere it yields a non-physical value.
    #[error("model validity: {0}")]
    ModelValidity(String),

    #[error("curve fit failed after {iterations} iterations (rms residual {rms:.3e}): {message}")]
    Fit {
        message: String,
        iterations: usize,
        rms: f64,
    },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("configuration error: {part:?} failure rate needs factor `{factor}`")]
    MissingFactor { part: PartType, factor: &'static str },

    #[error("diode voltage stress ratio {0} exceeds 1")]
    StressOverrange(f64),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

/// Broad classification used by the CLI to choose an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Numeric,
    Io,
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::MissingFactor { .. } => ErrorClass::Config,
            Error::Io(_) => ErrorClass::Io,
            Error::Context { source, .. } => source.class(),
            _ => ErrorClass::Numeric,
        }
    }
}

pub(crate) trait ResultExt<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| e.context(context()))
    }
}
