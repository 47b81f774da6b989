use thiserror::Error;

/// Errors raised by the numerical kernels, evaluators and optimizer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: argument {value} is outside the domain")]
    Domain { what: &'static str, value: f64 },

    #[error("hypoexponential sum over an empty rate set")]
    DegenerateSum,

    #[error("root not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// The adaptive quadrature ran out of subdivisions. `estimate` is the
    /// best value reached and `error` its estimated absolute error.
    #[error("quadrature accuracy not reached: estimate {estimate}, error estimate {error}")]
    Accuracy { estimate: f64, error: f64 },

    #[error("outage target {target} is infeasible; the lowest achievable outage is {min_outage}")]
    Infeasible { target: f64, min_outage: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
