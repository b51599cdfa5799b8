use thiserror::Error;

/// Errors raised by the monitoring and key-rate computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LsmError {
    /// A numeric argument lies outside the domain of the operation.
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// A record failed construction-time validation.
    #[error("invalid {what}: {reason}")]
    Validation { what: &'static str, reason: String },

    /// A measured zero-click probability cannot be explained by the configured dark count.
    #[error(
        "zero-click probability {p} at eta = {eta} exceeds 1 - lambda = {max}; \
         dark count estimate or measurement is inconsistent"
    )]
    InconsistentMeasurement { eta: f64, p: f64, max: f64 },

    /// The decoy-state estimate has a non-positive denominator.
    #[error("degenerate decoy configuration: {0}")]
    Degenerate(&'static str),

    /// The single-photon error rate is undefined because no single-photon fraction is certified.
    #[error("single-photon error rate undefined for delta1 = {0}")]
    UndefinedRate(f64),
}

pub type Result<T> = std::result::Result<T, LsmError>;

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(LsmError::Domain {
            name,
            value,
            expected: "[0, 1]",
        })
    }
}
