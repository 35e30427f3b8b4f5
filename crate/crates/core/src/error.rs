use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("vanishing derivative at {} node(s), first at index {}", .nodes.len(), .nodes.first().copied().unwrap_or(0))]
    SingularNodes { nodes: Vec<usize> },

    #[error("inverse evaluation failed for target {target} (residual {residual:.3e})")]
    InverseFailure { target: String, residual: f64 },

    #[error("barycenter iteration failed at z = {z} (residual {residual:.3e})")]
    BarycenterFailure { z: String, residual: f64 },

    #[error("reflected coefficient does not preserve the unit circle (residual {residual:.3e})")]
    ExtensionRule { residual: f64 },

    #[error("degenerate normalizing triple at parameter {0}")]
    DegenerateTriple(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("component {component}: {source}")]
    Component {
        component: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of a numerical procedure (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::SolverFailure { .. }
            | Error::SingularNodes { .. }
            | Error::InverseFailure { .. }
            | Error::BarycenterFailure { .. }
            | Error::ExtensionRule { .. }
            | Error::DegenerateTriple(_)
            | Error::Construction(_) => true,
            Error::Component { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
