use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("{name} = {value} must lie in {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    /// A size or index argument violates a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// No branch of the Mittag-Leffler evaluator reached the requested accuracy.
    #[error("Mittag-Leffler evaluation did not converge for lambda = {lambda}, z = {z}: {reason}")]
    Convergence { lambda: f64, z: f64, reason: String },

    /// Quadrature refinement stopped before successive estimates agreed.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// The circulant embedding stayed indefinite up to the ladder cap.
    #[error("no valid embedding length for T = {requested} up to cap {cap} (last min eigenvalue {min_eigenvalue:e})")]
    NoValidLength {
        requested: usize,
        cap: usize,
        min_eigenvalue: f64,
    },

    /// FFT entry points only accept power-of-two lengths.
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, range: &'static str) -> Self {
        Error::Domain { name, value, range }
    }
}
