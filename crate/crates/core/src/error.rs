use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{func}: argument {arg} outside its domain ({expected})")]
    Domain {
        func: &'static str,
        arg: f64,
        expected: &'static str,
    },

    #[error("invalid parameter {name} = {value}: must satisfy {range}")]
    InvalidParam {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("quadrature did not converge: value {value:e}, error estimate {error:e}, worst panel [{worst_lo:e}, {worst_hi:e}]")]
    QuadratureFailed {
        value: f64,
        error: f64,
        worst_lo: f64,
        worst_hi: f64,
    },

    #[error("root bracket [{lo:e}, {hi:e}] has no sign change (g = {g_lo:e}, {g_hi:e})")]
    NoBracket { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    #[error("{what} did not converge after {terms} terms (last term {last:e})")]
    SeriesFailed {
        what: &'static str,
        terms: usize,
        last: f64,
    },

    #[error("probability {value} from {what} leaves [0, 1] by more than rounding")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("{0}")]
    Degenerate(String),

    #[error("only {events} outage events at a stencil point; at least {required} are needed")]
    InsufficientSamples { events: u64, required: u64 },
}
