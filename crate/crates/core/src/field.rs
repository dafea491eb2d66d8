//! Random degree-ℓ eigenfunctions and their exact two-jets.
//!
//! The real orthonormal basis is `Y_ℓ0 = P̄_ℓ0`, `Y_ℓm = √2 P̄_ℓm cos mφ` and
//! `Y_ℓ,−m = √2 P̄_ℓm sin mφ` for `m > 0`; the field is
//! `f = √(4π/(2ℓ+1)) Σ_m a_m Y_ℓm` with i.i.d. standard Gaussian `a_m`, so
//! `Var f(x) = 1`.
//!
//! Two charts cover the sphere. Chart A is the usual one; chart B is the same
//! field seen through a 90° rotation about the y axis. A point is evaluated in
//! chart A when `|cos θ| ≤ 1/√2` and in chart B otherwise, so the `1/sin θ`
//! factors never exceed `√2`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2, TAU};

use num_complex::Complex64;
#[allow(unused_imports)] // core has inherent float math only on newer toolchains
use num_traits::Float;

use crate::legendre::{gauss_legendre, legendre_eval, LegendreRow};
use crate::rng::{normal, split_seed, stream};
use crate::sphere::{dot, frame, rot_a_to_b, rot_b_to_a, SpherePoint};
use crate::synth::RingSynth;
use crate::{Error, Result};

pub type Mat5 = [[f64; 5]; 5];

/// Value, covariant gradient and covariant Hessian in the orthonormal frame
/// `(e_θ, e_φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub f: f64,
    pub g1: f64,
    pub g2: f64,
    pub h11: f64,
    pub h12: f64,
    pub h22: f64,
}

impl Jet2 {
    pub fn grad_norm(&self) -> f64 {
        self.g1.hypot(self.g2)
    }

    pub fn hess_det(&self) -> f64 {
        self.h11 * self.h22 - self.h12 * self.h12
    }

    pub fn hess_trace(&self) -> f64 {
        self.h11 + self.h22
    }

    /// `(∇f, vec ∇²f)` as `(g1, g2, h11, h12, h22)`.
    pub fn vec5(&self) -> [f64; 5] {
        [self.g1, self.g2, self.h11, self.h12, self.h22]
    }
}

/// Which coordinate chart a computation runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    A,
    B,
}

impl Chart {
    /// Maps chart-local Cartesian coordinates to chart-A coordinates.
    pub(crate) fn to_a(self, v: [f64; 3]) -> [f64; 3] {
        match self {
            Chart::A => v,
            Chart::B => rot_b_to_a(v),
        }
    }
}

/// Chart that owns a point given in chart-A coordinates.
pub(crate) fn owner(z_a: f64) -> Chart {
    if z_a.abs() <= FRAC_1_SQRT_2 {
        Chart::A
    } else {
        Chart::B
    }
}

#[derive(Debug, Clone, PartialEq)]
struct ChartCoeffs {
    // f = Σ_m P̄_m (c_m cos mφ + s_m sin mφ)
    c: Vec<f64>,
    s: Vec<f64>,
}

impl ChartCoeffs {
    fn from_real_basis(ell: u32, a: &[f64]) -> Self {
        let l = ell as usize;
        let k = (4.0 * PI / (2.0 * f64::from(ell) + 1.0)).sqrt();
        let mut c = vec![0.0; l + 1];
        let mut s = vec![0.0; l + 1];
        c[0] = k * a[l];
        for m in 1..=l {
            c[m] = k * SQRT_2 * a[l + m];
            s[m] = k * SQRT_2 * a[l - m];
        }
        ChartCoeffs { c, s }
    }
}

/// One sampled eigenfunction together with its chart-B representation.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicField {
    pub ell: u32,
    pub seed: u64,
    /// Real-basis coefficients, index `m + ℓ` for `m = −ℓ..=ℓ`.
    pub coeffs_a: Vec<f64>,
    /// The same field in chart B.
    pub coeffs_b: Vec<f64>,
    chart_a: ChartCoeffs,
    chart_b: ChartCoeffs,
    row: LegendreRow,
}

impl HarmonicField {
    /// Builds a field from chart-A coefficients and projects it onto chart B.
    pub fn from_coeffs(ell: u32, seed: u64, coeffs_a: Vec<f64>) -> Result<Self> {
        if ell == 0 {
            return Err(Error::Domain("field degree must be >= 1"));
        }
        if coeffs_a.len() != 2 * ell as usize + 1 {
            return Err(Error::Domain("coefficient vector must have 2*ell+1 entries"));
        }
        let row = LegendreRow::new(ell);
        let chart_a = ChartCoeffs::from_real_basis(ell, &coeffs_a);
        let coeffs_b = project_to_b(ell, &row, &chart_a);
        let chart_b = ChartCoeffs::from_real_basis(ell, &coeffs_b);
        Ok(HarmonicField {
            ell,
            seed,
            coeffs_a,
            coeffs_b,
            chart_a,
            chart_b,
            row,
        })
    }

    pub fn lambda(&self) -> f64 {
        let l = f64::from(self.ell);
        l * (l + 1.0)
    }

    /// The field `−f`.
    pub fn negated(&self) -> HarmonicField {
        let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();
        let mut out = self.clone();
        out.coeffs_a = neg(&self.coeffs_a);
        out.coeffs_b = neg(&self.coeffs_b);
        out.chart_a = ChartCoeffs::from_real_basis(self.ell, &out.coeffs_a);
        out.chart_b = ChartCoeffs::from_real_basis(self.ell, &out.coeffs_b);
        out
    }

    pub fn evaluator(&self) -> Evaluator<'_> {
        Evaluator::new(self)
    }

    pub fn value(&self, x: SpherePoint) -> f64 {
        self.evaluator().value(x)
    }

    /// Value through chart B at the chart-B point `y`, i.e. `f_A(R y)`.
    pub fn value_in_b(&self, y: SpherePoint) -> f64 {
        self.evaluator().value_local(Chart::B, y.theta, y.phi)
    }

    fn chart(&self, c: Chart) -> &ChartCoeffs {
        match c {
            Chart::A => &self.chart_a,
            Chart::B => &self.chart_b,
        }
    }
}

/// Draws `a_m` i.i.d. standard normal from the stream of `seed`.
pub fn sample_field(ell: u32, seed: u64) -> Result<HarmonicField> {
    let mut rng = stream(seed);
    let a = (0..2 * ell as usize + 1).map(|_| normal(&mut rng)).collect();
    HarmonicField::from_coeffs(ell, seed, a)
}

/// Evaluates the jet at `x`, choosing the chart that owns it.
pub fn eval_jet(field: &HarmonicField, x: SpherePoint) -> Jet2 {
    field.evaluator().jet(x)
}

// Exact projection onto chart-B basis functions. The rotated field is still
// of degree ℓ, so GL in cos θ with ℓ+1 nodes and 2ℓ+2 longitudes integrate
// products of two degree-ℓ harmonics without error.
fn project_to_b(ell: u32, row: &LegendreRow, a: &ChartCoeffs) -> Vec<f64> {
    let l = ell as usize;
    let rule = gauss_legendre(l + 1);
    let np = 2 * l + 2;
    let dphi = TAU / np as f64;
    let mut cos_t = vec![0.0; (l + 1) * np];
    let mut sin_t = vec![0.0; (l + 1) * np];
    for j in 0..np {
        for m in 0..=l {
            let (s, c) = ((m * j) as f64 * dphi).sin_cos();
            cos_t[m * np + j] = c;
            sin_t[m * np + j] = s;
        }
    }
    let mut p = vec![0.0; l + 2];
    let mut vals = vec![0.0; np];
    let mut out = vec![0.0; 2 * l + 1];
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let s = (1.0 - x * x).max(0.0).sqrt();
        for (j, v) in vals.iter_mut().enumerate() {
            let (sp, cp) = (j as f64 * dphi).sin_cos();
            let pa = SpherePoint::from_xyz(rot_b_to_a([s * cp, s * sp, x]));
            *v = value_with(row, a, &mut p, pa.theta, pa.phi);
        }
        row.values(x, s, &mut p);
        let wq = w * dphi;
        let c0: f64 = vals.iter().sum();
        out[l] += wq * p[0] * c0;
        for m in 1..=l {
            let (mut cm, mut sm) = (0.0, 0.0);
            for (j, v) in vals.iter().enumerate() {
                cm += v * cos_t[m * np + j];
                sm += v * sin_t[m * np + j];
            }
            out[l + m] += wq * SQRT_2 * p[m] * cm;
            out[l - m] += wq * SQRT_2 * p[m] * sm;
        }
    }
    let k = (4.0 * PI / (2.0 * f64::from(ell) + 1.0)).sqrt();
    out.iter_mut().for_each(|v| *v /= k);
    out
}

fn value_with(row: &LegendreRow, co: &ChartCoeffs, p: &mut [f64], theta: f64, phi: f64) -> f64 {
    let (s, x) = theta.sin_cos();
    row.values(x, s, p);
    let (s1, c1) = phi.sin_cos();
    let (mut cm, mut sm) = (1.0, 0.0);
    let mut f = p[0] * co.c[0];
    for m in 1..co.c.len() {
        let t = cm * c1 - sm * s1;
        sm = sm * c1 + cm * s1;
        cm = t;
        f += p[m] * (co.c[m] * cm + co.s[m] * sm);
    }
    f
}

/// Partial derivatives in chart coordinates.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct LocalJet {
    pub f: f64,
    pub ft: f64,
    pub fp: f64,
    pub ftt: f64,
    pub ftp: f64,
    pub fpp: f64,
}

impl LocalJet {
    /// Covariant jet in the chart frame; requires `sin θ > 0`.
    pub fn covariant(&self, theta: f64) -> Jet2 {
        let (s, x) = theta.sin_cos();
        Jet2 {
            f: self.f,
            g1: self.ft,
            g2: self.fp / s,
            h11: self.ftt,
            h12: self.ftp / s - x * self.fp / (s * s),
            h22: self.fpp / (s * s) + x / s * self.ft,
        }
    }
}

/// Reusable buffers for repeated evaluation of one field.
pub struct Evaluator<'a> {
    field: &'a HarmonicField,
    p: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    spec_a: Vec<Complex64>,
    spec_b: Vec<Complex64>,
}

impl<'a> Evaluator<'a> {
    pub fn new(field: &'a HarmonicField) -> Self {
        let n = field.ell as usize + 2;
        Evaluator {
            field,
            p: vec![0.0; n],
            d1: vec![0.0; n],
            d2: vec![0.0; n],
            spec_a: vec![Complex64::new(0.0, 0.0); n - 1],
            spec_b: vec![Complex64::new(0.0, 0.0); n - 1],
        }
    }

    pub fn field(&self) -> &'a HarmonicField {
        self.field
    }

    pub fn value(&mut self, x: SpherePoint) -> f64 {
        self.value_local(Chart::A, x.theta, x.phi)
    }

    pub(crate) fn value_local(&mut self, chart: Chart, theta: f64, phi: f64) -> f64 {
        let co = self.field.chart(chart);
        value_with(&self.field.row, co, &mut self.p, theta, phi)
    }

    pub(crate) fn local(&mut self, chart: Chart, theta: f64, phi: f64) -> LocalJet {
        let co = self.field.chart(chart);
        let (s, x) = theta.sin_cos();
        self.field
            .row
            .with_derivs(x, s, &mut self.p, &mut self.d1, &mut self.d2);
        let (s1, c1) = phi.sin_cos();
        let (p, d1, d2) = (&self.p, &self.d1, &self.d2);
        let mut j = LocalJet {
            f: p[0] * co.c[0],
            ft: d1[0] * co.c[0],
            ftt: d2[0] * co.c[0],
            ..LocalJet::default()
        };
        let (mut cm, mut sm) = (1.0, 0.0);
        for m in 1..co.c.len() {
            let t = cm * c1 - sm * s1;
            sm = sm * c1 + cm * s1;
            cm = t;
            let mf = m as f64;
            let even = co.c[m] * cm + co.s[m] * sm;
            let odd = mf * (co.s[m] * cm - co.c[m] * sm);
            j.f += p[m] * even;
            j.ft += d1[m] * even;
            j.ftt += d2[m] * even;
            j.fp += p[m] * odd;
            j.ftp += d1[m] * odd;
            j.fpp -= mf * mf * p[m] * even;
        }
        j
    }

    /// Covariant jet in the frame of `chart` at chart-local `(θ, φ)`.
    pub(crate) fn chart_jet(&mut self, chart: Chart, theta: f64, phi: f64) -> Jet2 {
        self.local(chart, theta, phi).covariant(theta)
    }

    /// Covariant jet at `x` in the chart-A frame `(e_θ, e_φ)`.
    pub fn jet(&mut self, x: SpherePoint) -> Jet2 {
        let xa = x.to_xyz();
        match owner(xa[2]) {
            Chart::A => self.chart_jet(Chart::A, x.theta, x.phi),
            Chart::B => {
                let y = SpherePoint::from_xyz(rot_a_to_b(xa));
                let jb = self.chart_jet(Chart::B, y.theta, y.phi);
                let (ea1, ea2) = frame(x.theta, x.phi);
                let (eb1, eb2) = frame(y.theta, y.phi);
                let (rb1, rb2) = (rot_b_to_a(eb1), rot_b_to_a(eb2));
                let q = [[dot(ea1, rb1), dot(ea1, rb2)], [dot(ea2, rb1), dot(ea2, rb2)]];
                rotate_jet(&jb, &q)
            }
        }
    }

    /// Spectrum of `f` along the chart latitude with `cos θ = x`.
    pub(crate) fn value_spectrum(&mut self, chart: Chart, x: f64, s: f64) -> &[Complex64] {
        let co = self.field.chart(chart);
        self.field.row.values(x, s, &mut self.p);
        for m in 0..co.c.len() {
            self.spec_a[m] = Complex64::new(co.c[m], -co.s[m]) * self.p[m];
        }
        &self.spec_a
    }

    /// Spectra of `∂_θ f` and `∂_φ f` along a chart latitude.
    pub(crate) fn gradient_spectra(&mut self, chart: Chart, x: f64, s: f64) -> (&[Complex64], &[Complex64]) {
        let co = self.field.chart(chart);
        self.field.row.with_d1(x, s, &mut self.p, &mut self.d1);
        for m in 0..co.c.len() {
            let z = Complex64::new(co.c[m], -co.s[m]);
            self.spec_a[m] = z * self.d1[m];
            self.spec_b[m] = z * Complex64::new(0.0, m as f64) * self.p[m];
        }
        (&self.spec_a, &self.spec_b)
    }

    /// `f` on the ring `cos θ = x` of chart `chart`, `out.len()` longitudes.
    pub fn ring_values<S: RingSynth>(&mut self, chart: Chart, x: f64, s: f64, synth: &mut S, out: &mut [f64]) {
        let spec = self.value_spectrum(chart, x, s);
        synth.synth(spec, out);
    }
}

fn rotate_jet(j: &Jet2, q: &[[f64; 2]; 2]) -> Jet2 {
    let g = [j.g1, j.g2];
    let h = [[j.h11, j.h12], [j.h12, j.h22]];
    let mut ga = [0.0; 2];
    let mut ha = [[0.0; 2]; 2];
    for i in 0..2 {
        ga[i] = q[i][0] * g[0] + q[i][1] * g[1];
        for k in 0..2 {
            let mut acc = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    acc += q[i][a] * h[a][b] * q[k][b];
                }
            }
            ha[i][k] = acc;
        }
    }
    Jet2 {
        f: j.f,
        g1: ga[0],
        g2: ga[1],
        h11: ha[0][0],
        h12: 0.5 * (ha[0][1] + ha[1][0]),
        h22: ha[1][1],
    }
}

/// `E[f(x) f(y)] = P_ℓ(cos d(x, y))`.
pub fn covariance_fn(ell: u32, x: SpherePoint, y: SpherePoint) -> f64 {
    legendre_eval(ell, cos_distance(x, y)).expect("clamped").p
}

fn cos_distance(x: SpherePoint, y: SpherePoint) -> f64 {
    let c = x.theta.cos() * y.theta.cos() + x.theta.sin() * y.theta.sin() * (x.phi - y.phi).cos();
    c.clamp(-1.0, 1.0)
}

/// `E[(∇f, vec ∇²f)(x) · f(y)]` in the chart-A frame at `x`, obtained by
/// differentiating `P_ℓ(cos d(x, y))` in `x`. Requires `sin θ_x > 0`.
pub fn jet_cross_covariance(ell: u32, x: SpherePoint, y: SpherePoint) -> [f64; 5] {
    let (st, ct) = x.theta.sin_cos();
    let (sy, cy) = y.theta.sin_cos();
    let (sd, cd) = (x.phi - y.phi).sin_cos();
    let g = cos_distance(x, y);
    let gt = -st * cy + ct * sy * cd;
    let gp = -st * sy * sd;
    let gtt = -ct * cy - st * sy * cd;
    let gtp = -ct * sy * sd;
    let gpp = -st * sy * cd;
    let t = legendre_eval(ell, g).expect("clamped");
    let (p1, p2) = (t.dp, t.ddp);
    let e1 = p1 * gt;
    let e2 = p1 * gp / st;
    let e11 = p2 * gt * gt + p1 * gtt;
    let e12 = (p2 * gt * gp + p1 * gtp) / st - ct / (st * st) * p1 * gp;
    let e22 = (p2 * gp * gp + p1 * gpp) / (st * st) + ct / st * p1 * gt;
    [e1, e2, e11, e12, e22]
}

/// Closed-form `τ₁..τ₅` of the Cholesky factor of `σ_ℓ`.
pub fn taus(ell: u32) -> Result<[f64; 5]> {
    if ell < 2 {
        return Err(Error::Domain("sigma_and_cholesky requires ell >= 2"));
    }
    let l = f64::from(ell);
    let lam = l * (l + 1.0);
    let r8 = 8f64.sqrt();
    let t1 = (lam / 2.0).sqrt();
    let t3 = lam.sqrt() * (3.0 * lam - 2.0).sqrt() / r8;
    let t4 = lam.sqrt() * (lam - 2.0).sqrt() / r8;
    let t2 = lam.sqrt() * (lam + 2.0) / (r8 * (3.0 * lam - 2.0).sqrt());
    let t5 = lam * (lam - 2.0).sqrt() / (3.0 * lam - 2.0).sqrt();
    Ok([t1, t2, t3, t4, t5])
}

/// Covariance `σ_ℓ` of `(∇f, vec ∇²f)` and its lower Cholesky factor.
pub fn sigma_and_cholesky(ell: u32) -> Result<(Mat5, Mat5)> {
    let [t1, t2, t3, t4, t5] = taus(ell)?;
    let l = f64::from(ell);
    let lam = l * (l + 1.0);
    let k = lam * lam / 8.0;
    let mut sigma = [[0.0; 5]; 5];
    sigma[0][0] = lam / 2.0;
    sigma[1][1] = lam / 2.0;
    sigma[2][2] = k * (3.0 - 2.0 / lam);
    sigma[4][4] = k * (3.0 - 2.0 / lam);
    sigma[3][3] = k * (1.0 - 2.0 / lam);
    sigma[2][4] = k * (1.0 + 2.0 / lam);
    sigma[4][2] = sigma[2][4];
    let mut lower = [[0.0; 5]; 5];
    lower[0][0] = t1;
    lower[1][1] = t1;
    lower[2][2] = t3;
    lower[3][3] = t4;
    lower[4][2] = t2;
    lower[4][4] = t5;
    Ok((sigma, lower))
}

/// `Y = Λ⁻¹ (∇f, vec ∇²f)`, standard normal under the field law.
pub fn whiten(jet: &Jet2, tau: &[f64; 5]) -> [f64; 5] {
    let [t1, t2, t3, t4, t5] = *tau;
    let y3 = jet.h11 / t3;
    [jet.g1 / t1, jet.g2 / t1, y3, jet.h12 / t4, (jet.h22 - t2 * y3) / t5]
}

/// Sample moments of jets at a fixed point over independent fields.
#[derive(Debug, Clone, PartialEq)]
pub struct JetCovariance {
    pub n: usize,
    pub point: SpherePoint,
    pub sigma: Mat5,
    /// Standard errors of the entries of `sigma`.
    pub sigma_stderr: Mat5,
    /// Sample covariance of the whitened vector `Λ⁻¹·jet`.
    pub whitened: Mat5,
}

/// Empirical covariance of the jet at a fixed generic point.
pub fn empirical_jet_covariance(ell: u32, n: usize, seed: u64) -> Result<JetCovariance> {
    empirical_jet_covariance_at(ell, n, seed, SpherePoint::new(1.0, 0.5))
}

pub fn empirical_jet_covariance_at(ell: u32, n: usize, seed: u64, x: SpherePoint) -> Result<JetCovariance> {
    if n < 2 {
        return Err(Error::Domain("need at least two replicates"));
    }
    let tau = taus(ell)?;
    let mut rows = Vec::with_capacity(n);
    let mut white = Vec::with_capacity(n);
    for r in 0..n {
        let field = sample_field(ell, split_seed(seed, ell, r as u64))?;
        let j = eval_jet(&field, x);
        rows.push(j.vec5());
        white.push(whiten(&j, &tau));
    }
    let (sigma, sigma_stderr) = covariance5(&rows);
    let (whitened, _) = covariance5(&white);
    Ok(JetCovariance {
        n,
        point: x,
        sigma,
        sigma_stderr,
        whitened,
    })
}

// Raw second moments (the mean is known to be zero) and their standard errors.
fn covariance5(rows: &[[f64; 5]]) -> (Mat5, Mat5) {
    let n = rows.len() as f64;
    let mut m = [[0.0; 5]; 5];
    let mut se = [[0.0; 5]; 5];
    for i in 0..5 {
        for k in 0..5 {
            let mean = rows.iter().map(|r| r[i] * r[k]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[i] * r[k] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            m[i][k] = mean;
            se[i][k] = (var / n).sqrt();
        }
    }
    (m, se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand_chacha::rand_core::RngCore;

    fn uniform(rng: &mut impl RngCore) -> f64 {
        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn random_point(rng: &mut impl RngCore) -> SpherePoint {
        let z = 2.0 * uniform(rng) - 1.0;
        SpherePoint::new(z.acos(), TAU * uniform(rng))
    }

    #[test]
    fn determinism() {
        let a = sample_field(2, 99).unwrap();
        let b = sample_field(2, 99).unwrap();
        assert_eq!(a.coeffs_a, b.coeffs_a);
        assert_eq!(a.coeffs_b, b.coeffs_b);
        assert_ne!(a.coeffs_a, sample_field(2, 100).unwrap().coeffs_a);
    }

    #[test]
    fn zonal_p2() {
        let mut a = vec![0.0; 5];
        a[2] = 1.0;
        let f = HarmonicField::from_coeffs(2, 0, a).unwrap();
        let j = eval_jet(&f, SpherePoint::new(PI / 2.0, 0.0));
        assert!((j.f + 0.5).abs() < 1e-14);
        assert!(j.g1.abs() < 1e-14 && j.g2.abs() < 1e-14);
        assert!((j.h11 - 3.0).abs() < 1e-13);
        assert!(j.h22.abs() < 1e-13);
        assert!((j.hess_trace() + 6.0 * j.f).abs() < 1e-13);
        // at the pole (chart B) f = P₂(1) = 1, h11 = h22 = −λ/2
        let j = eval_jet(&f, SpherePoint::new(0.0, 0.7));
        assert!((j.f - 1.0).abs() < 1e-13);
        assert!((j.h11 + 3.0).abs() < 1e-12 && (j.h22 + 3.0).abs() < 1e-12 && j.h12.abs() < 1e-12);
    }

    #[test]
    fn chart_consistency() {
        let mut rng = stream(1);
        for &l in &[1u32, 2, 5, 17, 60] {
            let f = sample_field(l, 1234 + u64::from(l)).unwrap();
            for _ in 0..100 {
                let x = random_point(&mut rng);
                let y = SpherePoint::from_xyz(rot_a_to_b(x.to_xyz()));
                let d = (f.value(x) - f.value_in_b(y)).abs();
                assert!(d <= 1e-9, "l={l}: {d}");
            }
        }
    }

    #[test]
    fn trace_identity_random_points() {
        let mut rng = stream(2);
        for &l in &[2u32, 9, 50, 120] {
            let f = sample_field(l, 77).unwrap();
            let lam = f.lambda();
            let mut ev = f.evaluator();
            for _ in 0..100 {
                let j = ev.jet(random_point(&mut rng));
                let scale = lam * (1.0 + j.f.abs()).max(j.h11.abs() / lam);
                assert!((j.hess_trace() + lam * j.f).abs() <= 1e-8 * scale, "l={l}");
            }
        }
    }

    #[test]
    fn gradient_and_hessian_match_finite_differences() {
        let f = sample_field(12, 5).unwrap();
        let mut ev = f.evaluator();
        let h = 1e-4;
        // both a chart-A and a chart-B point
        for &(t, p) in &[(1.2, 0.4), (0.3, 2.0), (2.9, 5.5)] {
            let x = SpherePoint::new(t, p);
            let j = ev.jet(x);
            let s = t.sin();
            let ft = (f.value(SpherePoint::new(t + h, p)) - f.value(SpherePoint::new(t - h, p))) / (2.0 * h);
            let fp = (f.value(SpherePoint::new(t, p + h)) - f.value(SpherePoint::new(t, p - h))) / (2.0 * h);
            let scale = j.grad_norm().max(1.0);
            assert!((ft - j.g1).abs() <= 1e-5 * scale, "g1 at {t}: {ft} vs {}", j.g1);
            assert!((fp / s - j.g2).abs() <= 1e-5 * scale, "g2 at {t}: {} vs {}", fp / s, j.g2);
            // Hessian through differences of the covariant gradient along θ
            let jp = ev.jet(SpherePoint::new(t + h, p));
            let jm = ev.jet(SpherePoint::new(t - h, p));
            let h11 = (jp.g1 - jm.g1) / (2.0 * h);
            assert!((h11 - j.h11).abs() <= 1e-4 * j.h11.abs().max(f.lambda()));
        }
    }

    #[test]
    fn pole_jet_is_continuous() {
        let f = sample_field(50, 8).unwrap();
        let mut ev = f.evaluator();
        let phi = 0.9;
        let pole = ev.jet(SpherePoint::new(0.0, phi));
        assert!(pole.f.is_finite() && pole.h22.is_finite());
        // Quadratic extrapolation of chart-A jets from θ = 1e-4, 2e-4, 3e-4.
        let a: Vec<Jet2> = (1..=3).map(|k| ev.chart_jet(Chart::A, 1e-4 * k as f64, phi)).collect();
        let ex = |k: usize| 3.0 * a[0].vec5()[k] - 3.0 * a[1].vec5()[k] + a[2].vec5()[k];
        let (_, lower) = sigma_and_cholesky(50).unwrap();
        let scale = [lower[0][0], lower[1][1], lower[2][2], lower[3][3], lower[4][4]];
        for k in 0..5 {
            let d = (pole.vec5()[k] - ex(k)).abs() / scale[k];
            assert!(d <= 1e-4, "component {k}: {} vs {} ({d})", pole.vec5()[k], ex(k));
        }
        assert!((pole.f - (3.0 * a[0].f - 3.0 * a[1].f + a[2].f)).abs() < 1e-4);
    }

    #[test]
    fn covariance_examples() {
        let x = SpherePoint::new(0.8, 1.0);
        assert!((covariance_fn(7, x, x) - 1.0).abs() < 1e-12);
        let y = SpherePoint::new(PI / 2.0, 0.0);
        let z = SpherePoint::new(PI / 2.0, PI / 2.0);
        assert!((covariance_fn(2, y, z) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn empirical_covariance_matches_legendre() {
        let l = 10;
        let x = SpherePoint::new(1.0, 0.2);
        let y = SpherePoint::new(1.3, 0.5);
        let n = 10_000;
        let prods: Vec<f64> = (0..n)
            .map(|r| {
                let f = sample_field(l, split_seed(3, l, r)).unwrap();
                f.value(x) * f.value(y)
            })
            .collect();
        let mean = prods.iter().sum::<f64>() / n as f64;
        let var = prods.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let se = (var / n as f64).sqrt();
        let want = covariance_fn(l, x, y);
        assert!((mean - want).abs() <= 3.0 * se, "{mean} vs {want} (se {se})");
    }

    #[test]
    fn cross_covariance_matches_monte_carlo_sign() {
        // E[∂₁f(x) f(y)] from the closed form vs a direct field average
        let l = 6;
        let x = SpherePoint::new(1.1, 0.3);
        let y = SpherePoint::new(1.4, 0.9);
        let want = jet_cross_covariance(l, x, y);
        let n = 20_000;
        let mut acc = [0.0; 5];
        for r in 0..n {
            let f = sample_field(l, split_seed(4, l, r)).unwrap();
            let j = eval_jet(&f, x).vec5();
            let fy = f.value(y);
            for k in 0..5 {
                acc[k] += j[k] * fy / n as f64;
            }
        }
        let (sigma, _) = sigma_and_cholesky(l).unwrap();
        for k in 0..5 {
            let se = sigma[k][k].sqrt() / (n as f64).sqrt();
            assert!((acc[k] - want[k]).abs() <= 4.0 * se, "k={k}: {} vs {}", acc[k], want[k]);
        }
    }

    #[test]
    fn sigma_l2_exact() {
        let (s, lo) = sigma_and_cholesky(2).unwrap();
        let c = [[12.0, 0.0, 6.0], [0.0, 3.0, 0.0], [6.0, 0.0, 12.0]];
        for i in 0..3 {
            for k in 0..3 {
                assert!((s[2 + i][2 + k] - c[i][k]).abs() < 1e-12);
            }
        }
        let t = taus(2).unwrap();
        let r3 = 3f64.sqrt();
        let want = [r3, r3, 2.0 * r3, r3, 3.0];
        for k in 0..5 {
            assert!((t[k] - want[k]).abs() < 1e-14, "tau{}", k + 1);
        }
        assert_eq!(lo[0][1], 0.0);
        for i in 0..2 {
            for k in 2..5 {
                assert_eq!(s[i][k], 0.0);
                assert_eq!(s[k][i], 0.0);
            }
        }
    }

    #[test]
    fn cholesky_product_identity() {
        for &l in &[2u32, 3, 10, 100, 10_000] {
            let (s, lo) = sigma_and_cholesky(l).unwrap();
            for i in 0..5 {
                for k in 0..5 {
                    let v: f64 = (0..5).map(|j| lo[i][j] * lo[k][j]).sum();
                    let scale = s[i][i].abs().max(s[k][k].abs());
                    assert!((v - s[i][k]).abs() <= 1e-12 * scale, "l={l} ({i},{k})");
                }
            }
        }
        assert!(sigma_and_cholesky(1).is_err());
    }

    #[test]
    fn tau_asymptotics() {
        let l = 10_000u32;
        let t = taus(l).unwrap();
        let lf = f64::from(l);
        let lam = lf * (lf + 1.0);
        assert!((t[2] * t[4] / (lam * lam) - 1.0 / 8f64.sqrt()).abs() <= 1e-3);
        let ratios = [
            t[0] / (lf / SQRT_2),
            t[1] / (lf * lf / 24f64.sqrt()),
            t[2] / ((3.0f64 / 8.0).sqrt() * lf * lf),
            t[3] / (lf * lf / 8f64.sqrt()),
            t[4] / (lf * lf / 3f64.sqrt()),
        ];
        for r in ratios {
            assert!((r - 1.0).abs() < 1e-3, "{r}");
        }
    }

    #[test]
    fn pointwise_variance_is_one() {
        // One (field, point) pair per draw: E f(x)² = 1 for every x.
        let mut rng = stream(9);
        let n = 100_000u64;
        let m: f64 = (0..n)
            .map(|r| {
                let f = sample_field(10, split_seed(2024, 10, r)).unwrap();
                f.value(random_point(&mut rng)).powi(2)
            })
            .sum::<f64>()
            / n as f64;
        assert!((m - 1.0).abs() < 0.02, "{m}");
    }

    #[test]
    fn spatial_mean_of_square_is_coefficient_norm() {
        let f = sample_field(10, 2024).unwrap();
        let rule = gauss_legendre(11);
        let np = 22;
        let mut acc = 0.0;
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            for j in 0..np {
                let v = f.value(SpherePoint::new(x.acos(), TAU * j as f64 / np as f64));
                acc += w * TAU / np as f64 * v * v;
            }
        }
        let norm2: f64 = f.coeffs_a.iter().map(|a| a * a).sum::<f64>() / 21.0;
        assert!((acc / (4.0 * PI) - norm2).abs() < 1e-12);
    }

    #[test]
    fn negation() {
        let f = sample_field(7, 3).unwrap();
        let g = f.negated();
        let x = SpherePoint::new(0.2, 0.2);
        assert_eq!(eval_jet(&f, x).h12, -eval_jet(&g, x).h12);
    }
}
