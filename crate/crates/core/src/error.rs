use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("{function} has a pole at {at}")]
    Pole { function: &'static str, at: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("{what} did not converge within {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("fractional order alpha = {0} must lie strictly inside (1, 2)")]
    InvalidOrder(f64),

    #[error("spline degree {0} is not supported (expected 2 or 3)")]
    InvalidDegree(usize),

    #[error("step h = {h} does not divide L = {length} into at least {min} intervals")]
    InvalidStep { h: f64, length: f64, min: usize },

    #[error("basis index {index} out of range for {count} functions")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("x = {x} lies outside [0, {length}]")]
    OutOfInterval { x: f64, length: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("boundary condition of order {order} has a + b = 0")]
    DegenerateBoundary { order: usize },

    #[error("Jacobian is singular at Newton iteration {iteration}")]
    SingularJacobian { iteration: usize },

    #[error("quadrature rule exponents ({rule_right}, {rule_left}) do not match required ({right}, {left})")]
    RuleMismatch {
        rule_right: f64,
        rule_left: f64,
        right: f64,
        left: f64,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
