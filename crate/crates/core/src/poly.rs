//! Hermite polynomials, band-limit-exact sphere grids and sample polyspectra.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

#[allow(unused_imports)] // core has inherent float math only on newer toolchains
use num_traits::Float;

use crate::field::{Chart, HarmonicField};
use crate::legendre::{gauss_legendre, legendre_eval};
use crate::synth::{DirectSynth, RingSynth};
use crate::{Error, Result};

/// Probabilists' Hermite polynomial `H_q(u)`.
pub fn hermite(q: u32, u: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, u);
    if q == 0 {
        return h0;
    }
    for k in 1..q {
        let h2 = u * h1 - f64::from(k) * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Gauss–Legendre nodes in `cos θ` times a uniform longitude ring. Integrates
/// every spherical polynomial of degree `≤ qmax·ℓ` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    pub ell: u32,
    pub qmax: u32,
    /// Nodes in `cos θ`, ascending.
    pub cos_theta: Vec<f64>,
    pub theta_weights: Vec<f64>,
    pub n_phi: usize,
}

impl SphereGrid {
    pub fn n_theta(&self) -> usize {
        self.cos_theta.len()
    }

    pub fn len(&self) -> usize {
        self.n_theta() * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight of every node in row `i`.
    pub fn weight(&self, i: usize) -> f64 {
        self.theta_weights[i] * TAU / self.n_phi as f64
    }

    /// `∫_{S²} g` for a function of `(cos θ, φ)`.
    pub fn integrate<F: FnMut(f64, f64) -> f64>(&self, mut g: F) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n_theta() {
            let mut row = 0.0;
            for j in 0..self.n_phi {
                row += g(self.cos_theta[i], TAU * j as f64 / self.n_phi as f64);
            }
            total += self.weight(i) * row;
        }
        total
    }

    /// Field values at all nodes, row-major in `θ`.
    pub fn values<S: RingSynth>(&self, field: &HarmonicField, synth: &mut S) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        let mut ev = field.evaluator();
        for (i, &x) in self.cos_theta.iter().enumerate() {
            let s = (1.0 - x * x).max(0.0).sqrt();
            let row = &mut out[i * self.n_phi..(i + 1) * self.n_phi];
            ev.ring_values(Chart::A, x, s, synth, row);
        }
        out
    }

    /// `Σ w_ij g(v_ij)` over precomputed node values, reduced row by row.
    pub fn integrate_values<F: FnMut(f64) -> f64>(&self, values: &[f64], mut g: F) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        let mut total = 0.0;
        for (i, row) in values.chunks_exact(self.n_phi).enumerate() {
            let mut acc = 0.0;
            for &v in row {
                acc += g(v);
            }
            total += self.weight(i) * acc;
        }
        total
    }
}

/// Smallest grid exact for degree `qmax·ℓ`: `⌊qmax·ℓ/2⌋ + 1` latitudes and
/// `qmax·ℓ + 1` longitudes.
pub fn build_grid(ell: u32, qmax: u32) -> Result<SphereGrid> {
    if ell == 0 || qmax == 0 {
        return Err(Error::Domain("build_grid requires ell >= 1 and qmax >= 1"));
    }
    let deg = (qmax * ell) as usize;
    let rule = gauss_legendre(deg / 2 + 1);
    Ok(SphereGrid {
        ell,
        qmax,
        cos_theta: rule.nodes,
        theta_weights: rule.weights,
        n_phi: deg + 1,
    })
}

/// `h_{ℓ;q} = ∫ H_q(f)`, exact up to roundoff when `q ≤ grid.qmax`.
pub fn sample_polyspectrum(field: &HarmonicField, q: u32, grid: &SphereGrid) -> Result<f64> {
    let values = grid.values(field, &mut DirectSynth);
    polyspectrum_from_values(&values, q, grid)
}

pub fn polyspectrum_from_values(values: &[f64], q: u32, grid: &SphereGrid) -> Result<f64> {
    if q > grid.qmax {
        return Err(Error::GridTooSmall {
            have: grid.qmax,
            need: q,
        });
    }
    Ok(grid.integrate_values(values, |v| hermite(q, v)))
}

/// Exact finite-ℓ variance `q!·8π²·∫_{−1}^{1} P_ℓ(u)^q du`.
pub fn polyspectrum_variance_exact(ell: u32, q: u32) -> Result<f64> {
    if ell == 0 || q == 0 {
        return Err(Error::Domain("variance oracle requires ell >= 1 and q >= 1"));
    }
    let rule = gauss_legendre((q * ell) as usize / 2 + 1);
    let mut acc = 0.0;
    for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
        acc += w * legendre_eval(ell, u)?.p.powi(q as i32);
    }
    let fact: f64 = (1..=q).map(f64::from).product();
    Ok(fact * 8.0 * PI * PI * acc)
}
