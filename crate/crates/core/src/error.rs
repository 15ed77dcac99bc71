use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature hit its subdivision cap before reaching the
    /// requested tolerance.
    #[error("quadrature did not converge: estimated error {achieved:.3e} > requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    /// Grid refinement ran out of levels before two successive estimates agreed.
    #[error(
        "measure did not converge after {levels} refinement levels \
         (last estimates {last:?}, previous {previous:?})"
    )]
    NotConverged {
        levels: u32,
        /// `(n_blp, n_bcm)` at the finest level.
        last: (f64, f64),
        /// `(n_blp, n_bcm)` one level coarser.
        previous: (f64, f64),
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
