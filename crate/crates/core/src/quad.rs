//! Adaptive quadrature: Gauss–Kronrod 7/15 with a max-error heap, infinite
//! range transforms, and panel-doubling Gauss for oscillatory integrands.

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

#[allow(unused_imports)] // core has inherent float math only on newer toolchains
use num_traits::Float;

use crate::legendre::{gauss_legendre, QuadratureRule1D};
use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Value and error estimate of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Adaptive G7/K15 on a finite interval, bisecting the worst piece until the
/// summed error estimate is below `max(abs_tol, rel_tol·|value|)`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Estimate> {
    const MAX_PIECES: usize = 4000;
    let (v, e) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece {
        a,
        b,
        value: v,
        error: e,
    });
    let (mut value, mut error) = (v, e);
    loop {
        if !value.is_finite() || !error.is_finite() || heap.len() >= MAX_PIECES {
            return Err(Error::Convergence { achieved: error });
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(Error::Convergence { achieved: error });
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed the drift of the running updates.
    let mut total = 0.0;
    let mut err = 0.0;
    for p in heap.iter() {
        total += p.value;
        err += p.error;
    }
    Ok(Estimate {
        value: total,
        error: err,
    })
}

/// `∫_a^∞ f` through `t = a + s/(1−s)`.
pub fn integrate_to_inf<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Estimate> {
    integrate(
        |s| {
            let u = 1.0 - s;
            f(a + s / u) / (u * u)
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

/// `∫_{lo}^{hi} f` where either end may be infinite.
pub fn integrate_range<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Estimate> {
    if !(lo < hi) {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => integrate(f, lo, hi, abs_tol, rel_tol),
        (true, false) => integrate_to_inf(f, lo, abs_tol, rel_tol),
        (false, true) => integrate_to_inf(|t| f(-t), -hi, abs_tol, rel_tol),
        (false, false) => {
            let right = integrate_to_inf(&mut f, 0.0, 0.5 * abs_tol, rel_tol)?;
            let left = integrate_to_inf(|t| f(-t), 0.0, 0.5 * abs_tol, rel_tol)?;
            Ok(Estimate {
                value: left.value + right.value,
                error: left.error + right.error,
            })
        }
    }
}

/// Composite Gauss on `[a, b]` for integrands oscillating with `period`.
///
/// Starts with panels no wider than one period, each carrying a 10-point
/// rule, and doubles the panel count until two successive sums agree to
/// `rel_tol`.
pub fn integrate_panels<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    period: f64,
    rel_tol: f64,
) -> Result<Estimate> {
    let rule = gauss_legendre(10);
    let mut panels = (((b - a) / period).ceil() as usize).max(1);
    let mut prev = panel_sum(&rule, &mut f, a, b, panels);
    for _ in 0..12 {
        panels *= 2;
        let cur = panel_sum(&rule, &mut f, a, b, panels);
        let diff = (cur - prev).abs();
        if diff <= rel_tol * cur.abs() || diff == 0.0 {
            return Ok(Estimate {
                value: cur,
                error: diff,
            });
        }
        prev = cur;
    }
    Err(Error::Convergence {
        achieved: (prev.abs() * rel_tol).max(f64::EPSILON),
    })
}

fn panel_sum<F: FnMut(f64) -> f64>(
    rule: &QuadratureRule1D,
    f: &mut F,
    a: f64,
    b: f64,
    panels: usize,
) -> f64 {
    let w = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + w * k as f64;
        total += rule.integrate(lo, lo + w, &mut *f);
    }
    total
}
