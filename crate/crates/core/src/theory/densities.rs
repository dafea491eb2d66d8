use core::f64::consts::PI;

#[allow(unused_imports)] // core has inherent float math only on newer toolchains
use num_traits::Float;

use crate::crit::Interval;
use crate::quad::integrate_range;
use crate::{Error, Result};

/// Density of critical values, `π₁ᶜ(t) = √3/√(8π)·(2e^{−t²} + t² − 1)e^{−t²/2}`.
pub fn density_pi1c(t: f64) -> f64 {
    let t2 = t * t;
    3f64.sqrt() / (8.0 * PI).sqrt() * (2.0 * (-t2).exp() + t2 - 1.0) * (-0.5 * t2).exp()
}

/// Second-chaos density `p₃ᶜ(t) = e^{−3t²/2}[2 − 6t² − e^{t²}(1 − 4t² + t⁴)]/√(8π)`.
///
/// Evaluated with the `e^{t²}` folded into the exponentials so large `|t|`
/// does not overflow.
pub fn density_p3c(t: f64) -> f64 {
    let t2 = t * t;
    let a = (2.0 - 6.0 * t2) * (-1.5 * t2).exp();
    let b = (1.0 - 4.0 * t2 + t2 * t2) * (-0.5 * t2).exp();
    (a - b) / (8.0 * PI).sqrt()
}

pub fn pi1c_mass(interval: Interval) -> Result<f64> {
    Ok(integrate_range(density_pi1c, interval.lo, interval.hi, 1e-13, 1e-12)?.value)
}

pub fn p3c_mass(interval: Interval) -> Result<f64> {
    Ok(integrate_range(density_p3c, interval.lo, interval.hi, 1e-13, 1e-12)?.value)
}

/// `ν^c(I) = (∫_I p₃ᶜ)²`; nonzero exactly for nondegenerate intervals.
pub fn nu_c(interval: Interval) -> Result<f64> {
    Ok(p3c_mass(interval)?.powi(2))
}

/// Leading-order moments of the critical-point count and the trispectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedStats {
    pub ell: u32,
    /// `(2/√3)λ`.
    pub mean_crit: f64,
    /// `ℓ²·logℓ/(27π²)`.
    pub var_crit_leading: f64,
    /// `576·logℓ/ℓ²`.
    pub var_h4_leading: f64,
    /// `scale_A²·var_h4_leading`, equal to `var_crit_leading` up to `λ²/ℓ⁴`;
    /// reported at the same leading order.
    pub var_a_leading: f64,
    pub cov_crit_a_leading: f64,
    /// `A_ℓ = scale_A·h_{ℓ;4}` with `scale_A = −λ/(72√3π)`.
    pub scale_a: f64,
}

pub fn predicted_moments(ell: u32) -> Result<PredictedStats> {
    if ell < 2 {
        return Err(Error::Domain("predicted_moments requires ell >= 2"));
    }
    let l = f64::from(ell);
    let lam = l * (l + 1.0);
    let lead = l * l * l.ln() / (27.0 * PI * PI);
    Ok(PredictedStats {
        ell,
        mean_crit: 2.0 / 3f64.sqrt() * lam,
        var_crit_leading: lead,
        var_h4_leading: 576.0 * l.ln() / (l * l),
        var_a_leading: lead,
        cov_crit_a_leading: lead,
        scale_a: scale_a(ell),
    })
}

/// Leading expectation `(2/√3)λ·∫_I π₁ᶜ` of the count with values in `I`.
pub fn expected_crit_count(ell: u32, interval: Interval) -> Result<f64> {
    let l = f64::from(ell);
    Ok(2.0 / 3f64.sqrt() * l * (l + 1.0) * pi1c_mass(interval)?)
}

fn scale_a(ell: u32) -> f64 {
    let l = f64::from(ell);
    -l * (l + 1.0) / (72.0 * 3f64.sqrt() * PI)
}

/// `A_ℓ = −λ/(72√3π)·h_{ℓ;4}`.
pub fn trispectrum_proxy(h4: f64, ell: u32) -> f64 {
    scale_a(ell) * h4
}

/// `A_ℓ/√(ℓ²logℓ/(27π²))`.
pub fn trispectrum_proxy_standardized(h4: f64, ell: u32) -> Result<f64> {
    let p = predicted_moments(ell)?;
    Ok(trispectrum_proxy(h4, ell) / p.var_a_leading.sqrt())
}
