use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // core has inherent float math only on newer toolchains
use num_traits::Float;

use crate::poly::hermite;
use crate::rng::{chunk_len, chunk_stream, chunks, normal, Moments};
use crate::theory::liwei::{liwei_expectation, A_Z, SIGMA_Z};
use crate::{Error, Result};

/// Hermite indices `(q₁..q₅)` on `(Y₁..Y₅)`.
pub type Pattern = [u8; 5];

pub const K2: Pattern = [0, 4, 0, 0, 0];
pub const K5: Pattern = [0, 0, 0, 0, 4];
pub const H25: Pattern = [0, 2, 0, 0, 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Closed,
    MonteCarlo,
    LiWei,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Closed => "closed",
            Method::MonteCarlo => "montecarlo",
            Method::LiWei => "liwei",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Valued {
    pub value: f64,
    /// Zero for closed forms and for patterns that vanish identically.
    pub stderr: f64,
}

impl Valued {
    pub const fn exact(value: f64) -> Self {
        Valued { value, stderr: 0.0 }
    }

    /// `|value − target| ≤ k·stderr`, or exact agreement to `1e−12` when
    /// the estimate carries no sampling error.
    pub fn agrees(&self, target: f64, k: f64) -> bool {
        let d = (self.value - target).abs();
        d <= k * self.stderr || d <= 1e-12 * (1.0 + target.abs())
    }
}

pub fn k2_closed() -> f64 {
    3f64.sqrt() / (2.0 * PI)
}

pub fn k5_closed() -> f64 {
    -7.0 / (27.0 * 3f64.sqrt() * PI)
}

pub fn h25_closed() -> f64 {
    -1.0 / (3.0 * 3f64.sqrt() * PI)
}

/// Closed `I₀, I₂, I₄` where `I_r = E[|Z₁Z₃ − Z₂²|(Z₁ − 3Z₃)^r]`.
pub fn moment_ir_closed(r: u8) -> Result<f64> {
    let s3 = 3f64.sqrt();
    match r {
        0 => Ok(4.0 / s3),
        2 => Ok(32.0 * 5.0 / s3),
        4 => Ok(256.0 * 25.0 * 7.0 / (3.0 * s3)),
        _ => Err(Error::Domain("moment index must be 0, 2 or 4")),
    }
}

/// `E[|Q|·H_a(Y₅)]` for `a ∈ {0, 2, 4}` through `Y₅ = −(Z₁ − 3Z₃)/(2√6)` and
/// `Q = (Z₁Z₃ − Z₂²)/8`.
fn q_moment_from_ir(a: u8, i: [f64; 3]) -> Option<f64> {
    let [i0, i2, i4] = i;
    match a {
        0 => Some(i0 / 8.0),
        2 => Some((i2 / 24.0 - i0) / 8.0),
        4 => Some((i4 / 576.0 - i2 / 4.0 + 3.0 * i0) / 8.0),
        _ => None,
    }
}

fn check_pattern(p: Pattern) -> Result<()> {
    if p.iter().map(|&q| u32::from(q)).sum::<u32>() != 4 {
        return Err(Error::UnsupportedPattern(p));
    }
    Ok(())
}

// Limits of E[δ_ε(τ₁Y₁, τ₁Y₂)H_a(Y₁)H_b(Y₂)] times λ fold into
// H_a(0)H_b(0)/π, the weights (1, 0, −1, 0, 3) on indices 0..4.
fn gradient_weight(p: Pattern) -> f64 {
    hermite(u32::from(p[0]), 0.0) * hermite(u32::from(p[1]), 0.0) / PI
}

/// Projection coefficient for `pattern` with `Σqᵢ = 4`.
///
/// `Closed` and `LiWei` reduce the pattern to the moments `I₀, I₂, I₄`
/// (closed values, or `I₀` from the Li–Wei integral with `I₂, I₄` sampled
/// from `n_samples` draws); they support patterns that vanish through the
/// gradient weights or have `q₃ = q₄ = 0`. `MonteCarlo` handles every pattern.
pub fn projection_coefficient(pattern: Pattern, method: Method, n_samples: u64, seed: u64) -> Result<Valued> {
    check_pattern(pattern)?;
    let w = gradient_weight(pattern);
    if w == 0.0 {
        return Ok(Valued::exact(0.0));
    }
    match method {
        Method::MonteCarlo => Ok(projection_coefficients_mc(&[pattern], n_samples, seed)?[0]),
        Method::Closed | Method::LiWei => {
            if pattern[2] != 0 || pattern[3] != 0 {
                return Err(Error::UnsupportedPattern(pattern));
            }
            let (ir, se) = if method == Method::Closed {
                let ir = [moment_ir_closed(0)?, moment_ir_closed(2)?, moment_ir_closed(4)?];
                (ir, [0.0; 3])
            } else {
                let i0 = liwei_expectation(&A_Z, &SIGMA_Z)?.value;
                if pattern[4] == 0 {
                    ([i0, 0.0, 0.0], [0.0; 3])
                } else {
                    let m = moment_ir_mc(&[2, 4], n_samples, seed)?;
                    ([i0, m[0].value, m[1].value], [0.0, m[0].stderr, m[1].stderr])
                }
            };
            let v = q_moment_from_ir(pattern[4], ir).ok_or(Error::UnsupportedPattern(pattern))?;
            // the map from (I₂, I₄) is linear, so errors propagate by its coefficients
            let (c2, c4) = match pattern[4] {
                2 => (1.0 / 192.0, 0.0),
                4 => (1.0 / 32.0, 1.0 / 4608.0),
                _ => (0.0, 0.0),
            };
            let stderr = w.abs() * ((c2 * se[1]).powi(2) + (c4 * se[2]).powi(2)).sqrt();
            Ok(Valued { value: w * v, stderr })
        }
    }
}

/// Per-chunk sums for [`projection_coefficients_mc`]; chunk `k` of `n`
/// samples draws from stream `k` under `seed`.
pub fn projection_chunk(patterns: &[Pattern], n: u64, seed: u64, k: u64) -> Vec<Moments> {
    let mut rng = chunk_stream(seed, k);
    let mut acc = vec![Moments::default(); patterns.len()];
    let weights: Vec<f64> = patterns.iter().map(|&p| gradient_weight(p)).collect();
    let r8 = 8f64.sqrt();
    for _ in 0..chunk_len(n, k) {
        let y3 = normal(&mut rng);
        let y4 = normal(&mut rng);
        let y5 = normal(&mut rng);
        let q = (y3 * y5 / r8 + (y3 * y3 - y4 * y4) / 8.0).abs();
        let mut h = [[0.0; 5]; 3];
        for (row, y) in h.iter_mut().zip([y3, y4, y5]) {
            row[0] = 1.0;
            row[1] = y;
            row[2] = y * y - 1.0;
            row[3] = y * y * y - 3.0 * y;
            row[4] = y * y * y * y - 6.0 * y * y + 3.0;
        }
        for ((m, p), &w) in acc.iter_mut().zip(patterns).zip(&weights) {
            let x = w * q * h[0][p[2] as usize] * h[1][p[3] as usize] * h[2][p[4] as usize];
            m.push(x);
        }
    }
    acc
}

/// Monte Carlo estimates of several coefficients from shared draws of
/// `(Y₃, Y₄, Y₅)`; the gradient weights are applied exactly.
pub fn projection_coefficients_mc(patterns: &[Pattern], n: u64, seed: u64) -> Result<Vec<Valued>> {
    for &p in patterns {
        check_pattern(p)?;
    }
    if n < 2 {
        return Err(Error::Domain("need at least two samples"));
    }
    let mut acc = vec![Moments::default(); patterns.len()];
    for k in 0..chunks(n) {
        for (a, c) in acc.iter_mut().zip(projection_chunk(patterns, n, seed, k)) {
            a.merge(&c);
        }
    }
    Ok(finish(&acc))
}

pub fn finish(acc: &[Moments]) -> Vec<Valued> {
    acc.iter()
        .map(|m| Valued {
            value: m.mean,
            stderr: m.stderr(),
        })
        .collect()
}

/// Per-chunk sums for [`moment_ir_mc`].
pub fn moment_ir_chunk(rs: &[u8], n: u64, seed: u64, k: u64) -> Vec<Moments> {
    let mut rng = chunk_stream(seed, k);
    let mut acc = vec![Moments::default(); rs.len()];
    // Cholesky factor of SIGMA_Z
    let l11 = 3f64.sqrt();
    let l31 = 1.0 / l11;
    let l33 = (3.0 - l31 * l31).sqrt();
    for _ in 0..chunk_len(n, k) {
        let x1 = normal(&mut rng);
        let x2 = normal(&mut rng);
        let x3 = normal(&mut rng);
        let z1 = l11 * x1;
        let z3 = l31 * x1 + l33 * x3;
        let base = (z1 * z3 - x2 * x2).abs();
        let d = z1 - 3.0 * z3;
        for (m, &r) in acc.iter_mut().zip(rs) {
            m.push(base * d.powi(i32::from(r)));
        }
    }
    acc
}

/// Monte Carlo `I_r` for each `r` in `rs`.
pub fn moment_ir_mc(rs: &[u8], n: u64, seed: u64) -> Result<Vec<Valued>> {
    if rs.iter().any(|&r| !matches!(r, 0 | 2 | 4)) {
        return Err(Error::Domain("moment index must be 0, 2 or 4"));
    }
    if n < 2 {
        return Err(Error::Domain("need at least two samples"));
    }
    let mut acc = vec![Moments::default(); rs.len()];
    for k in 0..chunks(n) {
        for (a, c) in acc.iter_mut().zip(moment_ir_chunk(rs, n, seed, k)) {
            a.merge(&c);
        }
    }
    Ok(finish(&acc))
}

/// `I_r` by `method`; the Li–Wei integral covers `r = 0` only.
pub fn moment_ir(r: u8, method: Method, n_samples: u64, seed: u64) -> Result<Valued> {
    match (method, r) {
        (Method::Closed, _) => Ok(Valued::exact(moment_ir_closed(r)?)),
        (Method::LiWei, 0) => {
            let e = liwei_expectation(&A_Z, &SIGMA_Z)?;
            Ok(Valued {
                value: e.value,
                stderr: 0.0,
            })
        }
        (Method::LiWei, _) => Err(Error::Domain("the Li-Wei integral gives I_0 only")),
        (Method::MonteCarlo, _) => Ok(moment_ir_mc(&[r], n_samples, seed)?[0]),
    }
}

/// Projection coefficients and moments by one method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffReport {
    pub method: Method,
    pub k2: Valued,
    pub k5: Valued,
    pub h25: Valued,
    pub i0: Valued,
    pub i2: Valued,
    pub i4: Valued,
}

impl CoeffReport {
    /// `k₅ − (1/π)[I₄/(2⁹3²) − I₂/2⁵ + 3I₀/2³]`.
    pub fn k5_identity_gap(&self) -> f64 {
        self.k5.value - (self.i4.value / 4608.0 - self.i2.value / 32.0 + 3.0 * self.i0.value / 8.0) / PI
    }

    /// `h₂₅ − (1/π)[−I₂/(3·2⁶) + I₀/2³]`.
    pub fn h25_identity_gap(&self) -> f64 {
        self.h25.value - (-self.i2.value / 192.0 + self.i0.value / 8.0) / PI
    }

    /// `k₂ − 3I₀/(8π)`.
    pub fn k2_identity_gap(&self) -> f64 {
        self.k2.value - 3.0 * self.i0.value / (8.0 * PI)
    }
}

/// Coefficients `k₂, k₅, h₂₅` and moments `I₀, I₂, I₄` by `method`.
///
/// Monte Carlo uses `n_samples` draws for the coefficients and the moments.
pub fn coeff_report(method: Method, n_samples: u64, seed: u64) -> Result<CoeffReport> {
    match method {
        Method::Closed => Ok(CoeffReport {
            method,
            k2: Valued::exact(k2_closed()),
            k5: Valued::exact(k5_closed()),
            h25: Valued::exact(h25_closed()),
            i0: Valued::exact(moment_ir_closed(0)?),
            i2: Valued::exact(moment_ir_closed(2)?),
            i4: Valued::exact(moment_ir_closed(4)?),
        }),
        Method::MonteCarlo => {
            let c = projection_coefficients_mc(&[K2, K5, H25], n_samples, seed)?;
            let m = moment_ir_mc(&[0, 2, 4], n_samples, seed ^ 0x5EED)?;
            Ok(CoeffReport {
                method,
                k2: c[0],
                k5: c[1],
                h25: c[2],
                i0: m[0],
                i2: m[1],
                i4: m[2],
            })
        }
        Method::LiWei => {
            let m = moment_ir_mc(&[2, 4], n_samples, seed ^ 0x5EED)?;
            let i0 = moment_ir(0, Method::LiWei, 0, 0)?;
            let (i2, i4) = (m[0], m[1]);
            let k2 = Valued::exact(3.0 * i0.value / (8.0 * PI));
            let k5 = Valued {
                value: (i4.value / 4608.0 - i2.value / 32.0 + 3.0 * i0.value / 8.0) / PI,
                stderr: ((i4.stderr / 4608.0).powi(2) + (i2.stderr / 32.0).powi(2)).sqrt() / PI,
            };
            let h25 = Valued {
                value: (-i2.value / 192.0 + i0.value / 8.0) / PI,
                stderr: i2.stderr / (192.0 * PI),
            };
            Ok(CoeffReport {
                method,
                k2,
                k5,
                h25,
                i0,
                i2,
                i4,
            })
        }
    }
}

/// Kind of an odd-index pattern in the fourth chaos.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OddFamily {
    /// `H₃(Y_i)H₁(Y_j)`.
    G,
    /// `H₂(Y_i)H₁(Y_j)H₁(Y_k)`.
    P,
    /// `H₁H₁H₁H₁` on four distinct variables.
    Q,
}

/// A labelled odd-index pattern and whether its coefficient vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OddPattern {
    pub family: OddFamily,
    /// 1-based variable indices as in `g_ij`, `p_ijk`, `q_ijkl`.
    pub indices: [u8; 4],
    pub pattern: Pattern,
    pub vanishes: bool,
}

/// All `g_ij` (ordered, `i ≠ j`), `p_ijk` (`j < k`, all distinct) and
/// `q_ijkl` (`i < j < k < l`) patterns.
///
/// A coefficient vanishes when a gradient variable carries an odd index or
/// `Y₄` appears to an odd total power. The survivors are `g₃₅, g₅₃` and
/// `p_i35` for `i ∈ {1, 2, 4}`.
pub fn odd_patterns() -> Vec<OddPattern> {
    let mut out = Vec::new();
    let vanishes = |p: &Pattern| p[0] % 2 == 1 || p[1] % 2 == 1 || p[3] % 2 == 1;
    for i in 0..5u8 {
        for j in 0..5u8 {
            if i != j {
                let mut p = [0u8; 5];
                p[i as usize] = 3;
                p[j as usize] = 1;
                out.push(OddPattern {
                    family: OddFamily::G,
                    indices: [i + 1, j + 1, 0, 0],
                    pattern: p,
                    vanishes: vanishes(&p),
                });
            }
        }
    }
    for i in 0..5u8 {
        for j in 0..5u8 {
            for k in j + 1..5 {
                if i != j && i != k {
                    let mut p = [0u8; 5];
                    p[i as usize] = 2;
                    p[j as usize] = 1;
                    p[k as usize] = 1;
                    out.push(OddPattern {
                        family: OddFamily::P,
                        indices: [i + 1, j + 1, k + 1, 0],
                        pattern: p,
                        vanishes: vanishes(&p),
                    });
                }
            }
        }
    }
    for skip in (0..5u8).rev() {
        let mut p = [1u8; 5];
        p[skip as usize] = 0;
        let mut idx = [0u8; 4];
        let mut n = 0;
        for v in 0..5u8 {
            if v != skip {
                idx[n] = v + 1;
                n += 1;
            }
        }
        out.push(OddPattern {
            family: OddFamily::Q,
            indices: idx,
            pattern: p,
            vanishes: true,
        });
    }
    out
}
