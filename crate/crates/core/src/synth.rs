//! Longitude synthesis on uniform rings.

use core::f64::consts::TAU;

use num_complex::Complex64;
#[allow(unused_imports)] // core has inherent float math only on newer toolchains
use num_traits::Float;

/// Evaluates a real trigonometric polynomial on `n` equispaced longitudes:
/// `out[j] = Σ_m Re(spec[m]·e^{i m φ_j})` with `φ_j = 2πj/n`.
///
/// `spec` may be longer than `n`: terms with `m ≥ n` alias onto `m mod n`,
/// which is exact at the sample points.
pub trait RingSynth {
    fn synth(&mut self, spec: &[Complex64], out: &mut [f64]);
}

/// `O(n·M)` Horner evaluation; no setup, no allocation.
#[derive(Debug, Clone, Copy, Default)]
pub struct DirectSynth;

impl RingSynth for DirectSynth {
    fn synth(&mut self, spec: &[Complex64], out: &mut [f64]) {
        let n = out.len();
        for (j, o) in out.iter_mut().enumerate() {
            let (s, c) = (TAU * j as f64 / n as f64).sin_cos();
            let z = Complex64::new(c, s);
            let mut acc = Complex64::new(0.0, 0.0);
            for a in spec.iter().rev() {
                acc = acc * z + a;
            }
            *o = acc.re;
        }
    }
}

impl<T: RingSynth + ?Sized> RingSynth for &mut T {
    fn synth(&mut self, spec: &[Complex64], out: &mut [f64]) {
        (**self).synth(spec, out)
    }
}
