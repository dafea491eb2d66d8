//! Closed-form and semi-analytic reference values: critical-value densities,
//! leading moments, projection coefficients and quartic Legendre integrals.

mod appendix;
mod coeffs;
mod densities;
mod liwei;

pub use appendix::{
    dominant_covariance_terms, mixed_derivative_ratio, lemma_integral, whitened_cross_covariance,
    DominantTerms, LemmaIntegral,
};
pub use coeffs::{
    coeff_report, finish, h25_closed, k2_closed, k5_closed, moment_ir, moment_ir_chunk,
    moment_ir_closed, moment_ir_mc, odd_patterns, projection_chunk, projection_coefficient,
    projection_coefficients_mc, CoeffReport, Method, OddFamily, OddPattern, Pattern, Valued, H25,
    K2, K5,
};
pub use densities::{
    density_p3c, density_pi1c, expected_crit_count, nu_c, p3c_mass, pi1c_mass, predicted_moments,
    trispectrum_proxy, trispectrum_proxy_standardized, PredictedStats,
};
pub use liwei::{liwei_expectation, liwei_hessian_closed, A_Z, SIGMA_Z};
