use thiserror::Error;

/// Failures raised by the discretization, the solver, and the energy auditor.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {constraint}")]
    InvalidParameter { name: String, constraint: String },

    #[error("unsupported SBP interior order {0} (supported: 2, 4, 6)")]
    UnsupportedOrder(usize),

    #[error("order-{order} SBP operator needs at least {min} points, got {got}")]
    TooFewPoints { order: usize, min: usize, got: usize },

    #[error("shape mismatch in {context}: expected length {expected}, got {got}")]
    Shape {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("phase depletion: {phase} phase collapsed (interface at {x_delta})")]
    PhaseDepletion { phase: &'static str, x_delta: f64 },

    #[error("numerical failure in {term} at node {node} of the {phase} phase")]
    NumericalFailure {
        term: &'static str,
        phase: &'static str,
        node: usize,
    },

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, constraint: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            constraint: constraint.into(),
        }
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }
}

pub(crate) fn check_len(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Shape {
            context,
            expected,
            got,
        })
    }
}
