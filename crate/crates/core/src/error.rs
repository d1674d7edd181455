use thiserror::Error;

/// Errors raised by the analytic evaluators and the simulators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The auxiliary function was requested at an order above the configured cap.
    #[error("auxiliary function order {order} exceeds the supported maximum {max}")]
    UnsupportedOrder { order: usize, max: usize },

    /// An exact evaluator would need more work than its budget allows.
    #[error("capacity exceeded: {what} needs {needed} evaluations, limit is {limit}")]
    Capacity {
        what: &'static str,
        needed: u128,
        limit: u128,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        domain(format!("{name} = {p} is not a probability"))
    }
}
