use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine did not reach its tolerance.
    #[error("numerical failure in {context}: estimate {estimate:e}, error bound {error_bound:e}")]
    Numerical {
        context: String,
        estimate: f64,
        error_bound: f64,
    },

    /// The model cannot be expressed in the requested parameterisation.
    #[error("unsupported parameterisation: {0}")]
    Unsupported(String),

    /// The requested conditioning is not available for this model.
    #[error("unsupported conditioning: {0}")]
    UnsupportedConditioning(String),

    /// A conditioning value (for example the scaled population `x`) was not supplied.
    #[error("missing conditioning: {0}")]
    MissingConditioning(&'static str),

    /// Super-critical Poisson-sampled Feller process with `alpha >= nu` has no
    /// sub-critical partner.
    #[error("no symmetric partner exists for alpha = {alpha}, nu = {nu} (requires nu > alpha)")]
    NoPartner { alpha: f64, nu: f64 },

    /// Two coalescent times are too close for the partial-fraction form.
    #[error("degenerate partial fraction: ratios {0:e} and {1:e} coincide; perturb the times or use the quadrature route")]
    DegeneratePole(f64, f64),

    /// Malformed text input.
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    /// Forward simulation exceeded its population cap.
    #[error("population exceeded cap of {cap} individuals")]
    CapExceeded { cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
