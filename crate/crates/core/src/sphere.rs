use core::f64::consts::{PI, TAU};

#[allow(unused_imports)] // core has inherent float math only on newer toolchains
use num_traits::Float;

/// Point on the unit sphere in colatitude/longitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    pub theta: f64,
    pub phi: f64,
}

impl SpherePoint {
    /// Builds a point, wrapping `phi` into `[0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Self {
        debug_assert!((0.0..=PI).contains(&theta));
        SpherePoint {
            theta,
            phi: wrap_phi(phi),
        }
    }

    pub fn to_xyz(self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn from_xyz(v: [f64; 3]) -> Self {
        let rho = v[0].hypot(v[1]);
        SpherePoint {
            theta: rho.atan2(v[2]),
            phi: if rho == 0.0 { 0.0 } else { wrap_phi(v[1].atan2(v[0])) },
        }
    }

    /// Great-circle distance.
    pub fn distance(self, other: SpherePoint) -> f64 {
        let a = self.to_xyz();
        let b = other.to_xyz();
        chord_to_arc(sub_norm(a, b))
    }
}

pub(crate) fn wrap_phi(phi: f64) -> f64 {
    let p = phi.rem_euclid(TAU);
    if p >= TAU {
        0.0
    } else {
        p
    }
}

pub(crate) fn sub_norm(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Arc length subtended by a chord of length `c`.
pub(crate) fn chord_to_arc(c: f64) -> f64 {
    2.0 * (0.5 * c).min(1.0).asin()
}

/// Chart B sees the sphere rotated by 90° about the y axis:
/// `f_B(y) = f_A(R y)` with `R(X, Y, Z) = (Z, Y, −X)`.
pub(crate) fn rot_b_to_a(v: [f64; 3]) -> [f64; 3] {
    [v[2], v[1], -v[0]]
}

pub(crate) fn rot_a_to_b(v: [f64; 3]) -> [f64; 3] {
    [-v[2], v[1], v[0]]
}

/// Orthonormal frame `(e_θ, e_φ)` at `(θ, φ)`; at the poles this is the
/// limit along the meridian `φ`.
pub(crate) fn frame(theta: f64, phi: f64) -> ([f64; 3], [f64; 3]) {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    ([ct * cp, ct * sp, -st], [-sp, cp, 0.0])
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
