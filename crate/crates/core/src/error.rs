use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{function}: argument {value} outside the domain ({reason})")]
    Domain {
        function: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("truncation distance {x_max:e} exceeds the cap {cap:e}; epsilon or t_min too small")]
    Truncation { x_max: f64, cap: f64 },

    #[error("realization has no buildings")]
    EmptyRealization,

    #[error("observer at x = {observer_x} is not behind every building")]
    ObserverPlacement { observer_x: f64 },

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (estimate {estimate}, error bound {error_bound:e})"
    )]
    Quadrature {
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },

    #[error("integrand returned a non-finite value at x = {at}")]
    NonFiniteIntegrand { at: f64 },

    #[error("product truncation needs more than {cap} factors")]
    ProductTruncation { cap: usize },

    #[error("sample size {n} is below the minimum {min}")]
    SampleSize { n: usize, min: usize },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(function: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            function,
            value,
            reason,
        }
    }
}
