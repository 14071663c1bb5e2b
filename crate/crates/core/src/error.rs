//! Error taxonomy shared across the simulation crates.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated an operation precondition (bad lengths, ranges, ids).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A derivative or state component became non-finite.
    #[error("non-finite value in component {component} at step {step}")]
    Numeric { component: usize, step: usize },

    /// A state variable blew past its plausibility bound; usually dt is too large.
    #[error("numeric instability at t={t_ms} ms (|{var}|={value} with dt={dt_ms} ms){}", neuron.map(|n| format!(" in neuron {n}")).unwrap_or_default())]
    Instability {
        var: &'static str,
        value: f64,
        dt_ms: f64,
        t_ms: f64,
        neuron: Option<usize>,
    },

    /// Topology or engine construction failed validation.
    #[error("invalid topology: {0}")]
    Topology(String),

    /// A state record violated a documented contract on entry.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A scenario or data file failed to parse.
    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    /// A serialized artifact (CSV, model file, image) is malformed.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub fn topology(msg: impl Into<String>) -> Self {
        Error::Topology(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub fn config(line: usize, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: message.into(),
        }
    }
}
