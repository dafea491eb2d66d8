use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(&'static str),

    #[error("degenerate critical point at (theta={theta}, phi={phi}): |det H| = {det:e}")]
    DegenerateCritical { theta: f64, phi: f64, det: f64 },

    #[error("Morse relation violated: {n_min} - {n_saddle} + {n_max} != 2")]
    IncompleteMorse {
        n_min: usize,
        n_saddle: usize,
        n_max: usize,
    },

    #[error("unsupported Hermite pattern {0:?}")]
    UnsupportedPattern([u8; 5]),

    #[error("quadrature did not converge (achieved error estimate {achieved:e})")]
    Convergence { achieved: f64 },

    #[error("grid resolves polynomial order {have}, order {need} requested")]
    GridTooSmall { have: u32, need: u32 },

    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),
}
