//! Legendre polynomials, normalized associated Legendre functions and
//! Gauss–Legendre rules.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

#[allow(unused_imports)] // core has inherent float math only on newer toolchains
use num_traits::Float;

use crate::{Error, Result};

/// `P_ℓ(x)` together with its first two derivatives in `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreTriple {
    pub p: f64,
    pub dp: f64,
    pub ddp: f64,
}

impl LegendreTriple {
    /// Residual of `(1−x²)P″ − 2xP′ + ℓ(ℓ+1)P`, divided by the largest of
    /// the three terms.
    pub fn ode_residual(&self, ell: u32, x: f64) -> f64 {
        let lam = f64::from(ell) * f64::from(ell + 1);
        let a = (1.0 - x * x) * self.ddp;
        let b = 2.0 * x * self.dp;
        let c = lam * self.p;
        let scale = a.abs().max(b.abs()).max(c.abs());
        if scale == 0.0 {
            0.0
        } else {
            (a - b + c).abs() / scale
        }
    }
}

/// Evaluates `P_ℓ`, `P_ℓ′`, `P_ℓ″` at `x ∈ [−1, 1]`.
///
/// Values come from the three-term recurrence. Away from the endpoints the
/// derivatives use `P′ = ℓ(xP_ℓ − P_{ℓ−1})/(x²−1)` and the Legendre equation;
/// for `1 − x² < 0.1` they switch to `P′_{k+1} = P′_{k−1} + (2k+1)P_k` and its
/// derivative, which never divide by `1 − x²`. At `x = ±1` closed forms are
/// used.
pub fn legendre_eval(ell: u32, x: f64) -> Result<LegendreTriple> {
    if !(x.abs() <= 1.0) {
        return Err(Error::Domain("legendre_eval requires |x| <= 1"));
    }
    let l = f64::from(ell);
    if x.abs() == 1.0 {
        let sign = if x < 0.0 && ell % 2 == 1 { -1.0 } else { 1.0 };
        let dp = l * (l + 1.0) / 2.0;
        let ddp = (l - 1.0) * l * (l + 1.0) * (l + 2.0) / 8.0;
        return Ok(LegendreTriple {
            p: sign,
            dp: if x < 0.0 { -sign * dp } else { dp },
            ddp: sign * ddp,
        });
    }
    Ok(legendre_interior(ell, x))
}

pub(crate) fn legendre_interior(ell: u32, x: f64) -> LegendreTriple {
    if ell == 0 {
        return LegendreTriple {
            p: 1.0,
            dp: 0.0,
            ddp: 0.0,
        };
    }
    if 1.0 - x * x >= 0.1 {
        by_division(ell, x)
    } else {
        by_sums(ell, x)
    }
}

fn by_division(ell: u32, x: f64) -> LegendreTriple {
    let (mut p0, mut p1) = (1.0, x);
    for k in 1..ell {
        let kf = f64::from(k);
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let l = f64::from(ell);
    let w = 1.0 - x * x;
    let dp = l * (p0 - x * p1) / w;
    let ddp = (2.0 * x * dp - l * (l + 1.0) * p1) / w;
    LegendreTriple { p: p1, dp, ddp }
}

fn by_sums(ell: u32, x: f64) -> LegendreTriple {
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    let (mut e0, mut e1) = (0.0, 0.0);
    for k in 1..ell {
        let kf = f64::from(k);
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        let d2 = d0 + (2.0 * kf + 1.0) * p1;
        let e2 = e0 + (2.0 * kf + 1.0) * d1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
        e0 = e1;
        e1 = e2;
    }
    LegendreTriple {
        p: p1,
        dp: d1,
        ddp: e1,
    }
}

const RESCALE: f64 = 1.0e150;
const LN_RESCALE: f64 = 150.0 * core::f64::consts::LN_10;

fn ln_diag(m: u32) -> f64 {
    // ln of N_mm·(2m−1)!!, the coefficient of sin^m θ in P̄_mm.
    let mut acc = -0.5 * (4.0 * PI).ln();
    for k in 1..=m {
        let k = f64::from(k);
        acc += 0.5 * (1.0 / (2.0 * k)).ln_1p();
    }
    acc
}

/// Fully normalized associated Legendre function `N_ℓm·P_ℓ^m(x)` without the
/// Condon–Shortley phase, so that `∫ P̄_ℓm² dx · 2π = 1` for every `m`.
pub fn assoc_legendre_norm(ell: u32, m: u32, x: f64) -> Result<f64> {
    if m > ell {
        return Err(Error::Domain("assoc_legendre_norm requires m <= ell"));
    }
    if !(x.abs() <= 1.0) {
        return Err(Error::Domain("assoc_legendre_norm requires |x| <= 1"));
    }
    let s = (1.0 - x * x).max(0.0).sqrt();
    if m > 0 && s == 0.0 {
        return Ok(0.0);
    }
    let mut scale = ln_diag(m) + if m > 0 { f64::from(m) * s.ln() } else { 0.0 };
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mf = f64::from(m);
    for l in (m + 1)..=ell {
        let lf = f64::from(l);
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = if l == m + 1 {
            0.0
        } else {
            let k = lf - 1.0;
            ((k * k - mf * mf) / (4.0 * k * k - 1.0)).sqrt()
        };
        let next = a * (x * cur - b * prev);
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            scale += LN_RESCALE;
        }
    }
    Ok(cur * scale.exp())
}

/// Per-degree table driving the fixed-θ downward recurrence in `m`.
///
/// Evaluating a whole row `P̄_ℓm(cos θ)`, `m = 0..=ℓ`, costs `O(ℓ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreRow {
    ell: u32,
    /// `α_m = √((ℓ+m)(ℓ−m+1))` for `m = 0..=ℓ+1`.
    alpha: Vec<f64>,
    /// `2m/α_m`, zero where `α_m = 0`.
    two_m_over_alpha: Vec<f64>,
    /// `1/α_m`, zero where `α_m = 0`.
    inv_alpha: Vec<f64>,
    ln_top: f64,
    n0: f64,
}

impl LegendreRow {
    pub fn new(ell: u32) -> Self {
        let l = f64::from(ell);
        let alpha: Vec<f64> = (0..=ell + 1)
            .map(|m| {
                let m = f64::from(m);
                ((l + m) * (l - m + 1.0)).max(0.0).sqrt()
            })
            .collect();
        let inv_alpha: Vec<f64> = alpha.iter().map(|&a| if a > 0.0 { 1.0 / a } else { 0.0 }).collect();
        let two_m_over_alpha = inv_alpha.iter().enumerate().map(|(m, &r)| 2.0 * m as f64 * r).collect();
        LegendreRow {
            ell,
            alpha,
            two_m_over_alpha,
            inv_alpha,
            ln_top: ln_diag(ell),
            n0: ((2.0 * l + 1.0) / (4.0 * PI)).sqrt(),
        }
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// Fills `p[m] = P̄_ℓm(cos θ)` given `x = cos θ`, `s = sin θ ≥ 0`.
    pub fn values(&self, x: f64, s: f64, p: &mut [f64]) {
        let l = self.ell as usize;
        debug_assert!(p.len() > l);
        if s < 1e-150 {
            p[..=l].fill(0.0);
            let sign = if x < 0.0 && self.ell % 2 == 1 { -1.0 } else { 1.0 };
            p[0] = sign * self.n0;
            return;
        }
        let cot = x / s;
        let mut ln_scale = self.ln_top + f64::from(self.ell) * s.ln();
        let mut factor = ln_scale.exp();
        let mut hi = 0.0;
        let mut cur = 1.0;
        p[l] = factor;
        for m in (1..=l).rev() {
            let next = self.two_m_over_alpha[m] * cot * cur - self.alpha[m + 1] * self.inv_alpha[m] * hi;
            hi = cur;
            cur = next;
            if cur.abs() > RESCALE {
                cur /= RESCALE;
                hi /= RESCALE;
                ln_scale += LN_RESCALE;
                factor = ln_scale.exp();
            }
            p[m - 1] = cur * factor;
        }
    }

    /// Row values plus first and second θ-derivatives.
    pub fn with_derivs(&self, x: f64, s: f64, p: &mut [f64], d1: &mut [f64], d2: &mut [f64]) {
        self.values(x, s, p);
        self.derive(p, d1);
        self.derive(d1, d2);
    }

    /// Row values plus the first θ-derivative.
    pub fn with_d1(&self, x: f64, s: f64, p: &mut [f64], d1: &mut [f64]) {
        self.values(x, s, p);
        self.derive(p, d1);
    }

    // d/dθ P̄_m = ½(α_m P̄_{m−1} − α_{m+1} P̄_{m+1}); m = 0 is −α_1 P̄_1.
    fn derive(&self, v: &[f64], out: &mut [f64]) {
        let l = self.ell as usize;
        if l == 0 {
            out[0] = 0.0;
            return;
        }
        let a = &self.alpha;
        out[0] = -a[1] * v[1];
        for m in 1..=l {
            let up = if m < l { v[m + 1] } else { 0.0 };
            out[m] = 0.5 * (a[m] * v[m - 1] - a[m + 1] * up);
        }
    }
}

/// Main term and error envelope of the Hilb-type approximation to
/// `P_ℓ^{(r)}(cos φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HilbTerm {
    pub approx: f64,
    pub envelope: f64,
    /// Phase offset added to `(ℓ+½)φ`.
    pub phase: f64,
    /// Sign prefactor of the cosine.
    pub sign: f64,
}

/// Constants of the Hilb approximation: lower cutoff `φ ≥ c/ℓ` and the
/// multiplier applied to the remainder orders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HilbParams {
    pub c: f64,
    pub envelope_const: f64,
}

impl Default for HilbParams {
    fn default() -> Self {
        HilbParams {
            c: 1.0,
            envelope_const: 5.0,
        }
    }
}

/// High-degree approximation of the `r`-th derivative of `P_ℓ` at `cos φ`.
///
/// Valid (and tested) on `c/ℓ ≤ φ ≤ π/2`. The amplitude grows like
/// `ℓ^{r−1/2}`; remainder orders are `(ℓφ)^{−1/2}`, `ℓ^{−1/2}φ^{−5/2}` and
/// `ℓ^{1/2}φ^{−7/2}` for `r = 0, 1, 2`.
pub fn hilb_approx(ell: u32, r: u8, phi: f64) -> Result<HilbTerm> {
    hilb_approx_with(ell, r, phi, HilbParams::default())
}

pub fn hilb_approx_with(ell: u32, r: u8, phi: f64, params: HilbParams) -> Result<HilbTerm> {
    if ell == 0 {
        return Err(Error::Domain("hilb_approx requires ell >= 1"));
    }
    if r > 2 {
        return Err(Error::Domain("hilb_approx supports r in {0, 1, 2}"));
    }
    let l = f64::from(ell);
    if !(phi >= params.c / l) || phi > FRAC_PI_2 + 1e-12 {
        return Err(Error::Domain("hilb_approx requires c/ell <= phi <= pi/2"));
    }
    let rf = f64::from(r);
    let (sign, phase) = match r {
        0 => (1.0, -FRAC_PI_4),
        1 => (-1.0, FRAC_PI_4),
        _ => (-1.0, -FRAC_PI_4),
    };
    let psi = (l + 0.5) * phi + phase;
    let approx = (2.0 / PI).sqrt() * l.powf(rf - 0.5) / phi.sin().powf(rf + 0.5) * sign * psi.cos();
    let order = match r {
        0 => 1.0 / (l * phi).sqrt(),
        1 => 1.0 / (l.sqrt() * phi.powf(2.5)),
        _ => l.sqrt() / phi.powf(3.5),
    };
    Ok(HilbTerm {
        approx,
        envelope: params.envelope_const * order,
        phase,
        sign,
    })
}

/// Nodes and weights of an `N`-point rule on `[−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_a^b g` using the rule mapped affinely onto `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut g: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * g(mid + half * x);
        }
        acc * half
    }
}

/// Gauss–Legendre rule by Newton iteration on `P_N`, nodes ascending.
pub fn gauss_legendre(n: usize) -> QuadratureRule1D {
    assert!(n >= 1, "gauss_legendre requires N >= 1");
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi's initial guess for the i-th largest root.
        let theta = PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut x = theta.cos() * (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = p_and_dp(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1e-3) {
                break;
            }
        }
        let (_, d) = p_and_dp(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    QuadratureRule1D { nodes, weights }
}

fn p_and_dp(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn p2_closed_form() {
        let t = legendre_eval(2, 0.5).unwrap();
        assert!(close(t.p, -0.125, 1e-15));
        assert!(close(t.dp, 1.5, 1e-15));
        assert!(close(t.ddp, 3.0, 1e-15));
    }

    #[test]
    fn endpoints() {
        for l in 0..40 {
            assert_eq!(legendre_eval(l, 1.0).unwrap().p, 1.0);
            let t = legendre_eval(l, -1.0).unwrap();
            assert_eq!(t.p, if l % 2 == 0 { 1.0 } else { -1.0 });
        }
        assert_eq!(legendre_eval(3, 1.0).unwrap().dp, 6.0);
        // endpoint closed forms agree with the interior recurrence nearby
        for &l in &[5u32, 17, 60] {
            let e = legendre_eval(l, 1.0).unwrap();
            let i = legendre_interior(l, 1.0 - 1e-13);
            assert!(close(i.dp, e.dp, 1e-6), "{l}");
            assert!(close(i.ddp, e.ddp, 1e-6), "{l}");
            let e = legendre_eval(l, -1.0).unwrap();
            let i = legendre_interior(l, -1.0 + 1e-13);
            assert!(close(i.dp, e.dp, 1e-6), "{l}");
            assert!(close(i.ddp, e.ddp, 1e-6), "{l}");
        }
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(legendre_eval(3, 1.0000001).is_err());
        assert!(legendre_eval(3, f64::NAN).is_err());
        assert!(assoc_legendre_norm(3, 4, 0.1).is_err());
    }

    #[test]
    fn assoc_small_cases() {
        let c = 1.0 / (4.0 * PI).sqrt();
        assert!(close(assoc_legendre_norm(0, 0, 0.3).unwrap(), c, 1e-15));
        assert!(close(assoc_legendre_norm(1, 0, 1.0).unwrap(), 0.488_602_511_902_919_9, 1e-14));
        // P̄_11 = √(3/8π) sin θ without the Condon–Shortley sign
        let x: f64 = 0.6;
        let v = assoc_legendre_norm(1, 1, x).unwrap();
        assert!(close(v, (3.0 / (8.0 * PI)).sqrt() * 0.8, 1e-14));
    }

    #[test]
    fn addition_theorem_l50() {
        let l = 50u32;
        let x = 0.3;
        let top = assoc_legendre_norm(l, l, x).unwrap();
        assert!(top.is_finite() && top != 0.0);
        let mut sum = assoc_legendre_norm(l, 0, x).unwrap().powi(2);
        for m in 1..=l {
            sum += 2.0 * assoc_legendre_norm(l, m, x).unwrap().powi(2);
        }
        let want = (2.0 * f64::from(l) + 1.0) / (4.0 * PI);
        assert!((sum - want).abs() <= 1e-10 * want, "{sum} vs {want}");
    }

    #[test]
    fn high_degree_no_overflow() {
        for &x in &[0.0, 0.3, 0.99, 0.999_999] {
            for &m in &[0u32, 1, 1000, 1999, 2000] {
                let v = assoc_legendre_norm(2000, m, x).unwrap();
                assert!(v.is_finite());
            }
        }
    }

    #[test]
    fn row_matches_fixed_m_recurrence() {
        for &l in &[1u32, 2, 7, 40, 300, 2000] {
            let row = LegendreRow::new(l);
            let mut p = vec![0.0; l as usize + 2];
            for &theta in &[1e-3, 0.05, 0.4, 1.0, 1.57, 2.2, 3.1] {
                let (s, x) = f64::sin_cos(theta);
                row.values(x, s, &mut p);
                let peak = ((2.0 * f64::from(l) + 1.0) / (4.0 * PI)).sqrt();
                for m in 0..=l {
                    let want = assoc_legendre_norm(l, m, x).unwrap();
                    let got = p[m as usize];
                    assert!(
                        (got - want).abs() <= 1e-10 * peak,
                        "l={l} m={m} theta={theta}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn row_derivatives_match_finite_differences() {
        let l = 23u32;
        let row = LegendreRow::new(l);
        let n = l as usize + 2;
        let (mut p, mut d1, mut d2) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let (mut pp, mut pm) = (vec![0.0; n], vec![0.0; n]);
        let (mut qp, mut qm) = (vec![0.0; n], vec![0.0; n]);
        let h = 1e-5;
        for &theta in &[0.3, 1.1, 2.0] {
            let (s, x) = f64::sin_cos(theta);
            row.with_derivs(x, s, &mut p, &mut d1, &mut d2);
            let (sp, xp) = f64::sin_cos(theta + h);
            let (sm, xm) = f64::sin_cos(theta - h);
            row.with_d1(xp, sp, &mut pp, &mut qp);
            row.with_d1(xm, sm, &mut pm, &mut qm);
            for m in 0..=l as usize {
                let fd1 = (pp[m] - pm[m]) / (2.0 * h);
                let fd2 = (qp[m] - qm[m]) / (2.0 * h);
                assert!((fd1 - d1[m]).abs() < 1e-6 * (1.0 + d1[m].abs()), "d1 m={m}");
                assert!((fd2 - d2[m]).abs() < 1e-5 * (1.0 + d2[m].abs()), "d2 m={m}");
            }
        }
    }

    #[test]
    fn row_at_pole() {
        let row = LegendreRow::new(6);
        let mut p = vec![0.0; 8];
        let (mut d1, mut d2) = (vec![0.0; 8], vec![0.0; 8]);
        row.with_derivs(1.0, 0.0, &mut p, &mut d1, &mut d2);
        let n0 = (13.0 / (4.0 * PI)).sqrt();
        assert!(close(p[0], n0, 1e-15));
        // d²P_ℓ(cos θ)/dθ² at θ = 0 equals −P′(1) = −λ/2
        assert!(close(d2[0], -21.0 * n0, 1e-12));
    }

    #[test]
    fn gauss_textbook_rules() {
        let r = gauss_legendre(1);
        assert_eq!(r.nodes, vec![0.0]);
        assert!(close(r.weights[0], 2.0, 1e-15));
        let r = gauss_legendre(2);
        let a = 1.0 / 3f64.sqrt();
        assert!(close(r.nodes[0], -a, 1e-15) && close(r.nodes[1], a, 1e-15));
        assert!(close(r.weights[0], 1.0, 1e-15) && close(r.weights[1], 1.0, 1e-15));
        let r = gauss_legendre(3);
        let b = (0.6f64).sqrt();
        assert!(close(r.nodes[0], -b, 1e-15) && r.nodes[1] == 0.0 && close(r.nodes[2], b, 1e-15));
        assert!(close(r.weights[1], 8.0 / 9.0, 1e-15));
        assert!(close(r.weights[0], 5.0 / 9.0, 1e-15));
    }

    #[test]
    fn gauss_x60() {
        let r = gauss_legendre(64);
        let v = r.integrate(-1.0, 1.0, |x| x.powi(60));
        assert!((v - 2.0 / 61.0).abs() < 1e-13, "{v}");
    }

    #[test]
    fn gauss_monomial_exactness() {
        for n in [1usize, 2, 5, 16, 33, 100] {
            let r = gauss_legendre(n);
            for k in 0..2 * n {
                let v = r.integrate(-1.0, 1.0, |x| x.powi(k as i32));
                let want = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((v - want).abs() < 1e-12, "n={n} k={k}: {v}");
            }
        }
    }

    #[test]
    fn gauss_weights_sum_and_symmetry() {
        for n in [1usize, 4, 9, 64, 257, 1000, 4097] {
            let r = gauss_legendre(n);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "n={n}: {s}");
            assert!(r.weights.iter().all(|&w| w > 0.0));
            for i in 0..n {
                assert_eq!(r.nodes[i], -r.nodes[n - 1 - i]);
            }
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn hilb_examples() {
        let t = hilb_approx(100, 0, 0.5).unwrap();
        let exact = legendre_eval(100, 0.5f64.cos()).unwrap().p;
        assert!((t.approx - exact).abs() <= t.envelope);
        let t = hilb_approx(200, 1, 0.8).unwrap();
        assert_eq!(t.phase, FRAC_PI_4);
        let t = hilb_approx(100, 2, 1.0).unwrap();
        assert_eq!(t.sign, -1.0);
        assert!(hilb_approx(100, 0, 0.5 / 100.0).is_err());
        assert!(hilb_approx(100, 3, 0.5).is_err());
    }

    #[test]
    fn hilb_within_envelope_on_operational_range() {
        for &l in &[50u32, 100, 400] {
            let lf = f64::from(l);
            let n = 4000;
            for r in 0..=2u8 {
                for k in 0..=n {
                    let phi = 1.0 / lf + (FRAC_PI_2 - 1.0 / lf) * k as f64 / n as f64;
                    let t = hilb_approx(l, r, phi).unwrap();
                    let e = legendre_eval(l, phi.cos()).unwrap();
                    let exact = [e.p, e.dp, e.ddp][r as usize];
                    assert!(
                        (t.approx - exact).abs() <= t.envelope,
                        "l={l} r={r} phi={phi}: {} vs {} env {}",
                        t.approx,
                        exact,
                        t.envelope
                    );
                }
            }
        }
    }

    proptest! {
        #[test]
        fn ode_residual_small(l in 0u32..=2000, x in -1.0f64..=1.0) {
            prop_assume!(x.abs() <= 1.0 - 1e-8);
            let t = legendre_eval(l, x).unwrap();
            prop_assert!(t.ode_residual(l, x) <= 1e-10, "residual {}", t.ode_residual(l, x));
        }

        #[test]
        fn second_derivative_matches_central_difference(l in 1u32..=300, x in -0.99f64..0.99) {
            let h = 1e-6;
            let t = legendre_eval(l, x).unwrap();
            let fd = (legendre_eval(l, x + h).unwrap().dp - legendre_eval(l, x - h).unwrap().dp) / (2.0 * h);
            let scale = f64::from(l).powi(4);
            prop_assert!((fd - t.ddp).abs() <= 1e-6 * t.ddp.abs().max(scale * 1e-3), "{fd} vs {}", t.ddp);
        }

        #[test]
        fn branches_agree_near_switch(l in 2u32..=2000, x in 0.9f64..0.97) {
            let a = by_division(l, x);
            let b = by_sums(l, x);
            let dscale = f64::from(l).powf(1.5);
            prop_assert!((a.dp - b.dp).abs() <= 1e-9 * dscale);
            prop_assert!((a.ddp - b.ddp).abs() <= 1e-9 * dscale * f64::from(l));
        }

        #[test]
        fn bounded_by_one(l in 0u32..=2000, x in -1.0f64..=1.0) {
            prop_assert!(legendre_eval(l, x).unwrap().p.abs() <= 1.0 + 1e-13);
        }

        #[test]
        fn derivative_matches_central_difference(l in 1u32..=300, x in -0.95f64..0.95) {
            let h = 1e-6;
            let t = legendre_eval(l, x).unwrap();
            let fd = (legendre_eval(l, x + h).unwrap().p - legendre_eval(l, x - h).unwrap().p) / (2.0 * h);
            let scale = f64::from(l) * f64::from(l + 1);
            prop_assert!((fd - t.dp).abs() <= 1e-6 * t.dp.abs().max(scale * 1e-3), "{fd} vs {}", t.dp);
        }
    }
}
