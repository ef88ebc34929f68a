use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimensions {width}x{height}: both must be at least 1")]
    Dimension { width: usize, height: usize },

    #[error("data length {len} does not match {width}x{height}")]
    DataLength { width: usize, height: usize, len: usize },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("periodic window of radius {radius} does not fit a {width}x{height} image")]
    Window { radius: usize, width: usize, height: usize },

    #[error("window boundary must be periodic for {0}")]
    BoundaryRequired(&'static str),

    #[error("invalid parameter {name} = {value}: {reason}")]
    Parameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("iteration count must be at least 1")]
    Iterations,

    #[error("image too small for {what}: need at least {min} pixels per side")]
    TooSmall { what: &'static str, min: usize },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),
}

pub(crate) fn check_eps(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn check_nonneg(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter {
            name,
            value,
            reason: "must be finite and >= 0",
        })
    }
}

pub(crate) fn check_iters(iters: usize) -> Result<()> {
    if iters >= 1 {
        Ok(())
    } else {
        Err(Error::Iterations)
    }
}
