use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // core has inherent float math only on newer toolchains
use num_traits::Float;

use crate::linalg::{matmul, sym_eigen, sym_sqrt, Mat3};
use crate::quad::{integrate, Estimate};
use crate::{Error, Result};

/// Covariance of `(Z₁, Z₂, Z₃)` in the Hessian change of variables.
pub const SIGMA_Z: Mat3 = [[3.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 3.0]];
/// `ZᵀAZ = Z₁Z₃ − Z₂²`.
pub const A_Z: Mat3 = [[0.0, 0.0, 0.5], [0.0, -1.0, 0.0], [0.5, 0.0, 0.0]];

const TOL: f64 = 1e-11;

/// `E|ZᵀAZ|` for `Z ~ N(0, Σ)` through the Li–Wei integral
/// `(2/π)∫₀^∞ t⁻²(1 − Re det(I − 2itΣA)^{−1/2}) dt`.
///
/// The determinant factors over the eigenvalues `μ` of `Σ^{1/2}AΣ^{1/2}`,
/// which keeps every square root on its principal branch.
pub fn liwei_expectation(a: &Mat3, sigma: &Mat3) -> Result<Estimate> {
    for i in 0..3 {
        for j in 0..3 {
            if (a[i][j] - a[j][i]).abs() > 1e-12 || (sigma[i][j] - sigma[j][i]).abs() > 1e-12 {
                return Err(Error::Domain("liwei_expectation needs symmetric A and sigma"));
            }
        }
    }
    let (ev, _) = sym_eigen(sigma);
    if ev.iter().any(|&w| w < -1e-12 * ev.iter().fold(0.0f64, |m, &v| m.max(v.abs()))) {
        return Err(Error::Domain("sigma must be positive semidefinite"));
    }
    let root = sym_sqrt(sigma);
    let m = matmul(&root, &matmul(a, &root));
    let (mu, _) = sym_eigen(&m);
    integrate_split(|t| liwei_kernel(&mu, t))
}

/// `1 − Re Π(1 − 2itμ_k)^{−1/2}`, written as `2sin²(b/2) − cos b·expm1(a)`
/// with `a` the log-modulus and `b` the phase, so it stays accurate as `t → 0`.
fn liwei_kernel(mu: &[f64; 3], t: f64) -> f64 {
    let mut a = 0.0;
    let mut b = 0.0;
    for &m in mu {
        let x = 2.0 * t * m;
        a -= 0.25 * (x * x).ln_1p();
        b += 0.5 * x.atan();
    }
    let s = (0.5 * b).sin();
    2.0 * s * s - b.cos() * a.exp_m1()
}

// (2/π)∫₀^∞ g(t)/t² dt split at 1, the tail mapped by t = 1/s. Kronrod
// nodes are interior, so neither endpoint is evaluated.
fn integrate_split<G: FnMut(f64) -> f64>(mut g: G) -> Result<Estimate> {
    let head = integrate(|t| g(t) / (t * t), 0.0, 1.0, TOL, TOL)?;
    let tail = integrate(|s| g(1.0 / s), 0.0, 1.0, TOL, TOL)?;
    let k = 2.0 / PI;
    Ok(Estimate {
        value: k * (head.value + tail.value),
        error: k * (head.error + tail.error),
    })
}

/// The same integral for `(A_Z, SIGMA_Z)` using the closed determinant
/// `det(I − 2itΣA) = 1 + 12t² + 16it³`.
pub fn liwei_hessian_closed() -> Result<Estimate> {
    integrate_split(|t| {
        let d = Complex64::new(1.0 + 12.0 * t * t, 16.0 * t * t * t);
        1.0 - d.powf(-0.5).re
    })
}
