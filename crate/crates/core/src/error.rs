use thiserror::Error;

use crate::model::{LinkState, Tier};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function it was passed to.
    #[error("input out of domain: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// The requested (tier, state) class has zero probability of containing a base station.
    #[error("no {state} {tier} base station can exist under this configuration")]
    NoBaseStation { tier: Tier, state: LinkState },

    #[error("quadrature did not converge ({context}): estimate {estimate:e}, error bound {error:e}")]
    Quadrature { context: String, estimate: f64, error: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Prefixes the context of a quadrature failure; other variants pass through.
    pub(crate) fn within(self, outer: impl FnOnce() -> String) -> Self {
        match self {
            Error::Quadrature {
                context,
                estimate,
                error,
            } => Error::Quadrature {
                context: format!("{} / {}", outer(), context),
                estimate,
                error,
            },
            other => other,
        }
    }
}
