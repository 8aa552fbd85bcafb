use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("r = {r} lies outside the problem domain ({lo}, {hi})")]
    Domain { r: f64, lo: f64, hi: f64 },

    #[error("trajectory left the domain at t = {t}")]
    DomainExit { t: f64 },

    #[error("step size collapsed to {h:e} at t = {t}")]
    StepCollapse { t: f64, h: f64 },

    #[error("initial state is not on an abnormal geodesic (D'' = {d_second:e})")]
    NotAbnormal { d_second: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
