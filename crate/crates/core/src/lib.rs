//! Numerical core for experiments on random spherical harmonics.
//!
//! Everything here is `no_std` with `alloc`: Legendre evaluation and
//! quadrature, sampling and exact differentiation of degree-ℓ eigenfunctions,
//! sample polyspectra, critical-point and level-set geometry, and the
//! closed-form quantities the simulations are checked against.
//!
//! Longitude synthesis goes through the [`RingSynth`] trait. The crate ships a
//! direct-summation backend; the `harmcrit` crate plugs in an FFT.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod crit;
pub mod field;
pub mod legendre;
pub mod linalg;
pub mod poly;
pub mod quad;
pub mod rng;
pub mod sphere;
pub mod synth;
pub mod theory;

pub use crate::crit::{
    count_in_interval, euler_characteristic, excursion_area, find_critical_points,
    find_critical_points_with, level_length, CritKind, CritOptions, CritSummary, CriticalPoint,
    Interval,
};
pub use crate::error::{Error, Result};
pub use crate::field::{
    covariance_fn, empirical_jet_covariance, eval_jet, sample_field, sigma_and_cholesky,
    HarmonicField, Jet2, JetCovariance, Mat5,
};
pub use crate::legendre::{
    assoc_legendre_norm, gauss_legendre, hilb_approx, legendre_eval, HilbTerm, LegendreTriple,
    QuadratureRule1D,
};
pub use crate::poly::{
    build_grid, hermite, polyspectrum_variance_exact, sample_polyspectrum, SphereGrid,
};
pub use crate::sphere::SpherePoint;
pub use crate::synth::{DirectSynth, RingSynth};
