use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("state is not purifiable: fidelity {0} must exceed 1/2")]
    NotPurifiable(f64),

    #[error("degenerate protocol: {0}")]
    DegenerateProtocol(String),

    #[error("degenerate system: {0}")]
    DegenerateSystem(String),

    /// Closed-form analytics assume a success probability that does not
    /// depend on the stored fidelity.
    #[error("success probability depends on the stored fidelity; use the simulator")]
    NonConstantSuccess,

    #[error(
        "only {nonempty} of {samples} samples hold a link (availability estimate {availability}); \
         at least 2 are needed for a fidelity standard error"
    )]
    InsufficientSamples {
        nonempty: usize,
        samples: usize,
        availability: f64,
    },

    #[error("unknown protocol `{0}`")]
    UnknownProtocol(String),

    #[error("protocol `{name}`: {reason}")]
    ProtocolArgs { name: String, reason: String },
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
