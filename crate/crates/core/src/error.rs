use thiserror::Error;

/// Errors raised by the vortex laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum VortexError {
    /// An argument lies outside the domain of a kernel or operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two vortices coincide while the interaction kernel is singular at zero.
    /// Holds 0-based indices; the message counts from 1.
    #[error("singular interaction: vortices {} and {} coincide", .0 + 1, .1 + 1)]
    Singularity(usize, usize),

    /// A parameter violates its documented constraints.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Exhaustive enumeration was requested for a system that is too large.
    #[error("system too large for exhaustive subset enumeration: N = {0} > {max}", max = crate::conserved::MAX_ENUMERATION_SIZE)]
    TooLarge(usize),

    /// A randomized search exhausted its budget.
    #[error("not found: {0}")]
    NotFound(String),

    /// The center of vorticity is undefined for a neutral system.
    #[error("neutral system: total intensity is zero")]
    NeutralSystem,

    /// A user-supplied kernel failed its derivative consistency check.
    #[error("inconsistent custom kernel at r = {r}: derivative {derivative} vs finite difference {finite_difference}")]
    InconsistentKernel {
        r: f64,
        derivative: f64,
        finite_difference: f64,
    },
}

pub type Result<T> = std::result::Result<T, VortexError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> VortexError {
    VortexError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
