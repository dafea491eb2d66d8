use core::f64::consts::{FRAC_PI_2, PI, TAU};

#[allow(unused_imports)] // core has inherent float math only on newer toolchains
use num_traits::Float;

use crate::field::{jet_cross_covariance, taus};
use crate::legendre::{gauss_legendre, legendre_eval};
use crate::quad::integrate_panels;
use crate::sphere::SpherePoint;
use crate::{Error, Result};

const REL_TOL: f64 = 1e-10;
// The absolute values put kinks in the integrand, which caps the panel
// rule's convergence rate.
const MIXED_TOL: f64 = 1e-6;

fn derivative(t: &crate::legendre::LegendreTriple, r: u8) -> f64 {
    match r {
        0 => t.p,
        1 => t.dp,
        _ => t.ddp,
    }
}

/// Value of a quartic Legendre integral with its leading asymptotic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaIntegral {
    pub value: f64,
    /// Error estimate of the adaptive panel quadrature.
    pub error: f64,
    /// Gauss–Legendre value in `u = cos φ`, exact for the polynomial integrand.
    pub exact: f64,
    /// `(2 + (−1)^{r₁+r₂})·ℓ^{2(r₁+r₂)}·logℓ/(2π²ℓ²)`.
    pub asymptotic: f64,
}

/// `∫₀^{π/2}[P^{(r₁)}(cos φ)sin^{r₁}φ]²[P^{(r₂)}(cos φ)sin^{r₂}φ]² sin φ dφ`.
pub fn lemma_integral(ell: u32, r1: u8, r2: u8) -> Result<LemmaIntegral> {
    if ell < 2 {
        return Err(Error::Domain("lemma_integral requires ell >= 2"));
    }
    if r1 > 2 || r2 > 2 {
        return Err(Error::Domain("derivative orders must be 0, 1 or 2"));
    }
    let term = |x: f64, s: f64| -> f64 {
        let t = legendre_eval(ell, x.clamp(-1.0, 1.0)).expect("clamped");
        let a = derivative(&t, r1) * s.powi(i32::from(r1));
        let b = derivative(&t, r2) * s.powi(i32::from(r2));
        a * a * b * b
    };
    let panels = integrate_panels(
        |phi: f64| {
            let (s, c) = phi.sin_cos();
            term(c, s) * s
        },
        0.0,
        FRAC_PI_2,
        TAU / f64::from(ell),
        REL_TOL,
    )?;
    // degree 4ℓ in u, so 2ℓ + 1 nodes are exact
    let rule = gauss_legendre(2 * ell as usize + 1);
    let exact = rule.integrate(0.0, 1.0, |u| term(u, (1.0 - u * u).max(0.0).sqrt()));
    let l = f64::from(ell);
    let sign = if (r1 + r2) % 2 == 0 { 1.0 } else { -1.0 };
    let asymptotic = (2.0 + sign) * l.powi(2 * i32::from(r1 + r2)) * l.ln() / (2.0 * PI * PI * l * l);
    Ok(LemmaIntegral {
        value: panels.value,
        error: panels.error,
        exact,
        asymptotic,
    })
}

/// `∫₀^{π/2}|P′(cos φ)|^k |P″(cos φ)sin²φ|^{4−k} sin φ dφ / ℓ⁶`, bounded in ℓ
/// for `k = 1..4`.
pub fn mixed_derivative_ratio(ell: u32, k: u8) -> Result<f64> {
    if ell < 2 {
        return Err(Error::Domain("mixed_derivative_ratio requires ell >= 2"));
    }
    if !(1..=4).contains(&k) {
        return Err(Error::Domain("k must be in 1..=4"));
    }
    let v = integrate_panels(
        |phi: f64| {
            let (s, c) = phi.sin_cos();
            let t = legendre_eval(ell, c).expect("in range");
            t.dp.abs().powi(i32::from(k)) * (t.ddp * s * s).abs().powi(4 - i32::from(k)) * s
        },
        0.0,
        FRAC_PI_2,
        TAU / f64::from(ell),
        MIXED_TOL,
    )?;
    Ok(v.value / f64::from(ell).powi(6))
}

/// Correlations `ρ_a(φ) = E[Y_a(x̄)·f(y(φ))]` of the whitened jet at
/// `x̄ = (π/2, 0)` with the field along the equator.
pub fn whitened_cross_covariance(ell: u32, phi: f64) -> Result<[f64; 5]> {
    let [t1, t2, t3, t4, t5] = taus(ell)?;
    let x = SpherePoint::new(FRAC_PI_2, 0.0);
    let y = SpherePoint::new(FRAC_PI_2, phi);
    let [e1, e2, e11, e12, e22] = jet_cross_covariance(ell, x, y);
    Ok([e1 / t1, e2 / t1, e11 / t3, e12 / t4, (e22 - t2 / t3 * e11) / t5])
}

/// The dominant terms of `Cov(N_ℓ^c, h_{ℓ;4})` and their asymptotic targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominantTerms {
    pub ell: u32,
    /// `∫₀^{π/2} E[H₄(Y₂(x̄))H₄(f(y))] sin φ dφ = ∫ 4!ρ₂⁴ sin φ dφ`.
    pub t1: f64,
    /// The same with `Y₅`.
    pub t2: f64,
    /// `∫ E[H₂(Y₂)H₂(Y₅)H₄(f)] sin φ dφ = ∫ 4!ρ₂²ρ₅² sin φ dφ`.
    pub t3: f64,
    /// `4!·6/π²·logℓ/ℓ²`, the limit of `t1`.
    pub target1: f64,
    /// `4!·12/π²·logℓ/ℓ²`, the constant as printed for `t1`.
    pub target1_printed: f64,
    /// `4!·27/(2π²)·logℓ/ℓ²`.
    pub target2: f64,
    /// `4!·3/π²·logℓ/ℓ²`.
    pub target3: f64,
    /// `∫ E[H₃(Y₃)H₁(Y₅)H₄(f)] sin φ dφ = ∫ 4!ρ₃³ρ₅ sin φ dφ`.
    pub odd: f64,
    /// `max |E[Y₁(x̄)f(y)]|, |E[Y₄(x̄)f(y)]|` over the quadrature nodes.
    pub subdominant_max: f64,
}

pub fn dominant_covariance_terms(ell: u32) -> Result<DominantTerms> {
    if ell < 2 {
        return Err(Error::Domain("dominant_covariance_terms requires ell >= 2"));
    }
    let period = TAU / f64::from(ell);
    let mut sub = 0.0f64;
    let mut integral = |g: &dyn Fn(&[f64; 5]) -> f64, track: bool| -> Result<f64> {
        let e = integrate_panels(
            |phi: f64| {
                let rho = whitened_cross_covariance(ell, phi).expect("ell checked");
                if track {
                    sub = sub.max(rho[0].abs()).max(rho[3].abs());
                }
                24.0 * g(&rho) * phi.sin()
            },
            0.0,
            FRAC_PI_2,
            period,
            REL_TOL,
        )?;
        Ok(e.value)
    };
    let t1 = integral(&|r| r[1].powi(4), true)?;
    let t2 = integral(&|r| r[4].powi(4), false)?;
    let t3 = integral(&|r| r[1] * r[1] * r[4] * r[4], false)?;
    let odd = integral(&|r| r[2].powi(3) * r[4], false)?;
    let l = f64::from(ell);
    let base = 24.0 * l.ln() / (PI * PI * l * l);
    Ok(DominantTerms {
        ell,
        t1,
        t2,
        t3,
        target1: 6.0 * base,
        target1_printed: 12.0 * base,
        target2: 13.5 * base,
        target3: 3.0 * base,
        odd,
        subdominant_max: sub,
    })
}
