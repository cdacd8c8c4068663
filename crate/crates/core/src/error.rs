use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition of the operation is violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// `e^{ixh}` is not 2π-periodic for this `(x, k)` pair, so its norm is infinite.
    #[error(
        "x = {x} with winding number k = {k}: x*k is not an integer, so exp(i x h(t)) \
         has a jump after periodic extension and its Fourier series is not absolutely convergent"
    )]
    NonPeriodic { x: f64, k: i64 },

    /// An iterative routine ran out of budget before reaching the requested tolerance.
    #[error("{what}: tolerance not reached within budget (estimate {estimate:e}, error {error:e})")]
    Budget {
        what: &'static str,
        estimate: f64,
        error: f64,
    },

    /// The sampling grid does not resolve the spectrum.
    #[error("under-resolved grid (grid_pow = {grid_pow}): {detail}; increase grid_pow")]
    UnderResolved { grid_pow: u32, detail: String },

    /// A function returned a non-finite value where a finite one was required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Unparseable phase specification or similar textual input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
