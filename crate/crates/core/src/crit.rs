//! Critical points, level-set length, excursion area and Euler
//! characteristic.
//!
//! Critical points are seeded on a two-chart grid, refined by Newton's method
//! in chart coordinates, then merged across charts.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, PI, TAU};

#[allow(unused_imports)] // core has inherent float math only on newer toolchains
use num_traits::Float;

use crate::field::{owner, Chart, HarmonicField, Jet2};
use crate::poly::SphereGrid;
use crate::sphere::{chord_to_arc, sub_norm, SpherePoint};
use crate::synth::{DirectSynth, RingSynth};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CritKind {
    Minimum,
    Saddle,
    Maximum,
}

impl CritKind {
    pub fn from_hessian(j: &Jet2) -> CritKind {
        if j.hess_det() < 0.0 {
            CritKind::Saddle
        } else if j.hess_trace() < 0.0 {
            CritKind::Maximum
        } else {
            CritKind::Minimum
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CritKind::Minimum => "min",
            CritKind::Saddle => "saddle",
            CritKind::Maximum => "max",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub point: SpherePoint,
    pub value: f64,
    pub kind: CritKind,
    /// `|∇f|` at the refined point.
    pub residual: f64,
    pub hess_det: f64,
}

/// Closed value interval; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    /// `[u, ∞)`.
    pub fn above(u: f64) -> Self {
        Interval {
            lo: u,
            hi: f64::INFINITY,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CritSummary {
    pub n_min: usize,
    pub n_saddle: usize,
    pub n_max: usize,
    pub per_interval: Vec<usize>,
}

impl CritSummary {
    pub fn from_points(points: &[CriticalPoint], intervals: &[Interval]) -> Self {
        let mut s = CritSummary {
            per_interval: intervals.iter().map(|i| count_in_interval(points, *i)).collect(),
            ..CritSummary::default()
        };
        for p in points {
            match p.kind {
                CritKind::Minimum => s.n_min += 1,
                CritKind::Saddle => s.n_saddle += 1,
                CritKind::Maximum => s.n_max += 1,
            }
        }
        s
    }

    pub fn total(&self) -> usize {
        self.n_min + self.n_saddle + self.n_max
    }

    pub fn morse_ok(&self) -> bool {
        self.n_min + self.n_max == self.n_saddle + 2
    }
}

/// Tuning of [`find_critical_points_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CritOptions {
    /// Cells per half wavelength scale: the seed grid has `κℓ × 2κℓ` cells.
    pub grid_factor: u32,
    /// Merge radius in units of `1/ℓ`.
    pub dedup_radius: f64,
    /// Small-gradient seed threshold in units of `cell·λ`.
    pub seed_threshold: f64,
    pub max_iter: u32,
    /// Newton stops once `|∇f| ≤ tol·λ`.
    pub tol: f64,
}

impl Default for CritOptions {
    fn default() -> Self {
        CritOptions {
            grid_factor: 8,
            dedup_radius: 0.3,
            seed_threshold: 0.5,
            max_iter: 30,
            tol: 1e-10,
        }
    }
}

impl CritOptions {
    pub fn with_grid_factor(grid_factor: u32) -> Self {
        CritOptions {
            grid_factor,
            ..CritOptions::default()
        }
    }
}

/// All critical points of `field`, sorted by `(θ, φ)`.
pub fn find_critical_points(field: &HarmonicField, grid_factor: u32) -> Result<Vec<CriticalPoint>> {
    find_critical_points_with(field, &CritOptions::with_grid_factor(grid_factor), &mut DirectSynth)
}

pub fn find_critical_points_with<S: RingSynth>(
    field: &HarmonicField,
    opts: &CritOptions,
    synth: &mut S,
) -> Result<Vec<CriticalPoint>> {
    let n = opts.grid_factor as usize * field.ell as usize;
    if n < 16 {
        return Err(Error::Domain("grid_factor * ell must be at least 16"));
    }
    let mut found = Vec::new();
    for chart in [Chart::A, Chart::B] {
        let seeds = seed_cells(field, chart, n, opts.seed_threshold, synth);
        refine(field, chart, &seeds, opts, &mut found);
    }
    let points = dedup(field, found, opts.dedup_radius / f64::from(field.ell));
    let lam = field.lambda();
    for p in &points {
        if p.hess_det.abs() < 1e-10 * lam * lam {
            return Err(Error::DegenerateCritical {
                theta: p.point.theta,
                phi: p.point.phi,
                det: p.hess_det,
            });
        }
    }
    let s = CritSummary::from_points(&points, &[]);
    if !s.morse_ok() {
        return Err(Error::IncompleteMorse {
            n_min: s.n_min,
            n_saddle: s.n_saddle,
            n_max: s.n_max,
        });
    }
    Ok(points)
}

// Latitude rows of a chart grid with spacing `h` that cover the chart's band
// |cos θ| ≤ 1/√2 plus a two-cell margin.
fn band_rows(h: f64) -> core::ops::RangeInclusive<usize> {
    let lo = ((FRAC_PI_4 - 2.0 * h) / h).floor().max(1.0) as usize;
    let hi = ((3.0 * FRAC_PI_4 + 2.0 * h) / h).ceil() as usize;
    let hi = hi.min((PI / h).floor() as usize - 1);
    lo..=hi
}

fn straddles(v: [f64; 4]) -> bool {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    lo <= 0.0 && hi >= 0.0
}

fn seed_cells<S: RingSynth>(
    field: &HarmonicField,
    chart: Chart,
    n: usize,
    threshold: f64,
    synth: &mut S,
) -> Vec<(f64, f64)> {
    let h = PI / n as f64;
    let nphi = 2 * n;
    let thr = threshold * h * field.lambda();
    let mut ev = field.evaluator();
    let mut prev_g1 = vec![0.0; nphi];
    let mut prev_g2 = vec![0.0; nphi];
    let mut g1 = vec![0.0; nphi];
    let mut g2 = vec![0.0; nphi];
    let mut seeds = Vec::new();
    for (k, i) in band_rows(h).enumerate() {
        let theta = i as f64 * h;
        let (s, x) = theta.sin_cos();
        {
            let (st, sp) = ev.gradient_spectra(chart, x, s);
            synth.synth(st, &mut g1);
            synth.synth(sp, &mut g2);
        }
        g2.iter_mut().for_each(|v| *v /= s);
        if k > 0 {
            for j in 0..nphi {
                let jn = (j + 1) % nphi;
                let c1 = [prev_g1[j], prev_g1[jn], g1[j], g1[jn]];
                let c2 = [prev_g2[j], prev_g2[jn], g2[j], g2[jn]];
                let (a, b) = (straddles(c1), straddles(c2));
                let seed = (a && b)
                    || ((a || b) && (0..4).map(|q| c1[q].hypot(c2[q])).fold(f64::INFINITY, f64::min) < thr);
                if seed {
                    seeds.push((theta - 0.5 * h, (j as f64 + 0.5) * h));
                }
            }
        }
        core::mem::swap(&mut prev_g1, &mut g1);
        core::mem::swap(&mut prev_g2, &mut g2);
    }
    seeds
}

fn refine(field: &HarmonicField, chart: Chart, seeds: &[(f64, f64)], opts: &CritOptions, out: &mut Vec<CriticalPoint>) {
    let lam = field.lambda();
    let cap = 1.0 / f64::from(field.ell);
    let mut ev = field.evaluator();
    // Most seeds near a critical point run into the same one. Once an iterate
    // is in the quadratic regime and sits on a point already found, stop.
    let near = 2e-3 * cap;
    let key = |t: f64, p: f64| ((t / near).floor() as i64, (p.rem_euclid(TAU) / near).floor() as i64);
    let mut seen: BTreeMap<(i64, i64), Vec<(f64, f64)>> = BTreeMap::new();
    let known = |seen: &BTreeMap<(i64, i64), Vec<(f64, f64)>>, t: f64, p: f64| -> bool {
        let (kt, kp) = key(t, p);
        let p = p.rem_euclid(TAU);
        (-1..=1).any(|a| {
            (-1..=1).any(|b| {
                seen.get(&(kt + a, kp + b)).is_some_and(|v| {
                    v.iter()
                        .any(|&(u, q)| (u - t).hypot((q - p) * t.sin()) < near)
                })
            })
        })
    };
    for &(t0, p0) in seeds {
        let (mut t, mut p) = (t0, p0);
        let mut converged = false;
        let mut duplicate = false;
        for _ in 0..opts.max_iter {
            let j = ev.chart_jet(chart, t, p);
            if j.grad_norm() <= opts.tol * lam {
                converged = true;
                break;
            }
            let det = j.hess_det();
            if det == 0.0 || !det.is_finite() {
                break;
            }
            let mut d1 = -(j.h22 * j.g1 - j.h12 * j.g2) / det;
            let mut d2 = -(j.h11 * j.g2 - j.h12 * j.g1) / det;
            let norm = d1.hypot(d2);
            if norm > cap {
                d1 *= cap / norm;
                d2 *= cap / norm;
            }
            let s = t.sin();
            t += d1;
            p += d2 / s;
            if !(0.35..=PI - 0.35).contains(&t) {
                break;
            }
            if norm < 1e-3 * cap && known(&seen, t, p) {
                duplicate = true;
                break;
            }
        }
        if !converged || duplicate {
            continue;
        }
        seen.entry(key(t, p)).or_default().push((t, p.rem_euclid(TAU)));
        let st = t.sin();
        let local = [st * p.cos(), st * p.sin(), t.cos()];
        let point = SpherePoint::from_xyz(chart.to_a(local));
        let jet = ev.jet(point);
        out.push(CriticalPoint {
            point,
            value: jet.f,
            kind: CritKind::from_hessian(&jet),
            residual: jet.grad_norm(),
            hess_det: jet.hess_det(),
        });
    }
}

fn dedup(_field: &HarmonicField, mut found: Vec<CriticalPoint>, radius: f64) -> Vec<CriticalPoint> {
    found.sort_by(|a, b| {
        a.point
            .theta
            .total_cmp(&b.point.theta)
            .then(a.point.phi.total_cmp(&b.point.phi))
            .then(a.residual.total_cmp(&b.residual))
    });
    let key = |v: [f64; 3]| -> (i64, i64, i64) {
        (
            (v[0] / radius).floor() as i64,
            (v[1] / radius).floor() as i64,
            (v[2] / radius).floor() as i64,
        )
    };
    let mut kept: Vec<(CriticalPoint, [f64; 3])> = Vec::with_capacity(found.len() / 2);
    let mut buckets: BTreeMap<(i64, i64, i64), Vec<usize>> = BTreeMap::new();
    for c in found {
        let v = c.point.to_xyz();
        let k = key(v);
        let mut hit = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = buckets.get(&(k.0 + dx, k.1 + dy, k.2 + dz)) {
                        for &id in ids {
                            let (q, w) = &kept[id];
                            // Distinct critical points closer than the radius
                            // do occur, so a merge also needs the same kind
                            // and the same critical value.
                            if q.kind == c.kind
                                && (q.value - c.value).abs() <= 1e-7 * (1.0 + c.value.abs())
                                && chord_to_arc(sub_norm(v, *w)) <= radius
                            {
                                hit = Some(id);
                                break 'search;
                            }
                        }
                    }
                }
            }
        }
        match hit {
            Some(id) => {
                if c.residual < kept[id].0.residual {
                    kept[id].0 = c;
                }
            }
            None => {
                buckets.entry(k).or_default().push(kept.len());
                kept.push((c, v));
            }
        }
    }
    let mut out: Vec<CriticalPoint> = kept.into_iter().map(|(c, _)| c).collect();
    out.sort_by(|a, b| a.point.theta.total_cmp(&b.point.theta).then(a.point.phi.total_cmp(&b.point.phi)));
    out
}

/// Number of points whose value lies in `interval`.
pub fn count_in_interval(points: &[CriticalPoint], interval: Interval) -> usize {
    points.iter().filter(|p| interval.contains(p.value)).count()
}

/// `χ({f ≥ u}) = #max − #saddle + #min` over critical points with `f ≥ u`.
pub fn euler_characteristic(points: &[CriticalPoint], u: f64) -> Result<i64> {
    let s = CritSummary::from_points(points, &[]);
    if !s.morse_ok() {
        return Err(Error::IncompleteMorse {
            n_min: s.n_min,
            n_saddle: s.n_saddle,
            n_max: s.n_max,
        });
    }
    let mut chi = 0i64;
    for p in points.iter().filter(|p| p.value >= u) {
        chi += match p.kind {
            CritKind::Saddle => -1,
            _ => 1,
        };
    }
    Ok(chi)
}

/// Default cells per great circle, in units of `ℓ`.
pub const LEVEL_RESOLUTION: u32 = 32;

/// Length of `{f = u}` by marching squares on both charts.
///
/// Each chart is sampled with `resolution_factor·ℓ` cells per great circle;
/// a segment counts for the chart owning its midpoint.
pub fn level_length<S: RingSynth>(field: &HarmonicField, u: f64, resolution_factor: u32, synth: &mut S) -> Result<f64> {
    if resolution_factor < 8 {
        return Err(Error::Domain("level_length needs at least 8*ell cells per great circle"));
    }
    let nphi = resolution_factor as usize * field.ell as usize;
    let h = TAU / nphi as f64;
    let rows: Vec<usize> = band_rows(h).collect();
    let mut ev = field.evaluator();
    let mut total = 0.0;
    let cphi: Vec<(f64, f64)> = (0..nphi).map(|j| (j as f64 * h).sin_cos()).collect();
    for chart in [Chart::A, Chart::B] {
        let mut lower = vec![0.0; nphi];
        let mut upper = vec![0.0; nphi];
        let mut prev_theta = 0.0;
        for (k, &i) in rows.iter().enumerate() {
            let theta = i as f64 * h;
            let (s, x) = theta.sin_cos();
            ev.ring_values(chart, x, s, synth, &mut upper);
            if k > 0 {
                total += row_length(&lower, &upper, prev_theta, h, u, &cphi, chart);
            }
            core::mem::swap(&mut lower, &mut upper);
            prev_theta = theta;
        }
    }
    Ok(total)
}

fn row_length(lower: &[f64], upper: &[f64], theta0: f64, h: f64, u: f64, cphi: &[(f64, f64)], chart: Chart) -> f64 {
    let nphi = lower.len();
    let (s0, c0) = theta0.sin_cos();
    let (s1, c1) = (theta0 + h).sin_cos();
    let point = |theta: f64, phi: f64| -> [f64; 3] {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        [st * cp, st * sp, ct]
    };
    let at_row = |s: f64, c: f64, j: usize, t: f64| -> [f64; 3] {
        // crossing on a constant-θ edge between columns j and j+1
        let (sp, cp) = cphi[j];
        if t == 0.0 {
            return [s * cp, s * sp, c];
        }
        let phi = (j as f64 + t) * h;
        let (sp, cp) = phi.sin_cos();
        [s * cp, s * sp, c]
    };
    let mut total = 0.0;
    for j in 0..nphi {
        let jn = (j + 1) % nphi;
        let v = [lower[j] - u, lower[jn] - u, upper[jn] - u, upper[j] - u];
        let inside = v.map(|x| x >= 0.0);
        let mask = inside.iter().enumerate().fold(0u8, |m, (q, &b)| m | (u8::from(b) << q));
        if mask == 0 || mask == 15 {
            continue;
        }
        let cross = |a: f64, b: f64| a / (a - b);
        // edges: 0 lower (c0→c1), 1 right (c1→c2), 2 upper (c3→c2), 3 left (c0→c3)
        let edge = |e: usize| -> [f64; 3] {
            match e {
                0 => at_row(s0, c0, j, cross(v[0], v[1])),
                1 => point(theta0 + h * cross(v[1], v[2]), (j + 1) as f64 * h),
                2 => at_row(s1, c1, j, cross(v[3], v[2])),
                _ => point(theta0 + h * cross(v[0], v[3]), j as f64 * h),
            }
        };
        let crosses = [inside[0] != inside[1], inside[1] != inside[2], inside[3] != inside[2], inside[0] != inside[3]];
        let mut segs: [(usize, usize); 2] = [(0, 0); 2];
        let nseg;
        if mask == 5 || mask == 10 {
            // saddle cell: decide by the mean of the corners
            let centre_in = v.iter().sum::<f64>() >= 0.0;
            let diag02 = mask == 5;
            // isolate the corners whose status differs from the centre
            let iso = if diag02 == centre_in { [1usize, 3] } else { [0usize, 2] };
            let adj = |c: usize| -> (usize, usize) {
                match c {
                    0 => (0, 3),
                    1 => (0, 1),
                    2 => (1, 2),
                    _ => (2, 3),
                }
            };
            segs[0] = adj(iso[0]);
            segs[1] = adj(iso[1]);
            nseg = 2;
        } else {
            let mut es = [0usize; 2];
            let mut m = 0;
            for (e, &c) in crosses.iter().enumerate() {
                if c {
                    es[m] = e;
                    m += 1;
                }
            }
            segs[0] = (es[0], es[1]);
            nseg = 1;
        }
        for &(ea, eb) in &segs[..nseg] {
            let a = edge(ea);
            let b = edge(eb);
            let mid = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
            let norm = sub_norm(mid, [0.0; 3]);
            let za = match chart {
                Chart::A => mid[2] / norm,
                Chart::B => -mid[0] / norm,
            };
            if owner(za) == chart {
                total += chord_to_arc(sub_norm(a, b));
            }
        }
    }
    total
}

/// `∫ 1{f ≥ u}` on a sphere grid.
pub fn excursion_area(field: &HarmonicField, u: f64, grid: &SphereGrid) -> f64 {
    let values = grid.values(field, &mut DirectSynth);
    excursion_area_from_values(&values, u, grid)
}

pub fn excursion_area_from_values(values: &[f64], u: f64, grid: &SphereGrid) -> f64 {
    grid.integrate_values(values, |v| if v >= u { 1.0 } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{eval_jet, sample_field};
    use crate::linalg::sym_eigen;
    use crate::poly::build_grid;

    // ℓ = 2 fields are traceless quadratic forms xᵀQx restricted to S².
    fn quadratic_form(f: &HarmonicField) -> [[f64; 3]; 3] {
        // Recover Q from field values: f(x) = xᵀQx with tr Q = 0.
        let e = |v: [f64; 3]| f.value(SpherePoint::from_xyz(v));
        let r = core::f64::consts::FRAC_1_SQRT_2;
        let mut q = [[0.0; 3]; 3];
        let diag = [e([1.0, 0.0, 0.0]), e([0.0, 1.0, 0.0]), e([0.0, 0.0, 1.0])];
        for i in 0..3 {
            q[i][i] = diag[i];
        }
        let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
        for &(i, k) in &pairs {
            let mut v = [0.0; 3];
            v[i] = r;
            v[k] = r;
            let off = e(v) - 0.5 * (diag[i] + diag[k]);
            q[i][k] = off;
            q[k][i] = off;
        }
        q
    }

    #[test]
    fn degree_two_matches_eigenvectors() {
        for seed in 0..20u64 {
            let f = sample_field(2, seed).unwrap();
            let pts = find_critical_points(&f, 8).unwrap();
            assert_eq!(pts.len(), 6, "seed {seed}");
            let s = CritSummary::from_points(&pts, &[]);
            assert_eq!((s.n_min, s.n_saddle, s.n_max), (2, 2, 2));
            let (w, v) = sym_eigen(&quadratic_form(&f));
            let mut order = [0usize, 1, 2];
            order.sort_by(|&a, &b| w[a].total_cmp(&w[b]));
            for (rank, &k) in order.iter().enumerate() {
                let dir = [v[0][k], v[1][k], v[2][k]];
                for sign in [1.0, -1.0] {
                    let target = SpherePoint::from_xyz(dir.map(|c| sign * c));
                    let near = pts
                        .iter()
                        .min_by(|a, b| a.point.distance(target).total_cmp(&b.point.distance(target)))
                        .unwrap();
                    assert!(near.point.distance(target) < 1e-8);
                    assert!((near.value - w[k]).abs() < 1e-10);
                    let want = [CritKind::Minimum, CritKind::Saddle, CritKind::Maximum][rank];
                    assert_eq!(near.kind, want);
                }
            }
        }
    }

    #[test]
    fn morse_and_invariants_moderate_degree() {
        for seed in 0..6u64 {
            let f = sample_field(13, 100 + seed).unwrap();
            let pts = find_critical_points(&f, 8).unwrap();
            let lam = f.lambda();
            for p in &pts {
                assert!(p.residual <= 1e-8 * lam);
                let j = eval_jet(&f, p.point);
                assert_eq!(CritKind::from_hessian(&j), p.kind);
                match p.kind {
                    CritKind::Saddle => assert!(p.hess_det < 0.0),
                    CritKind::Maximum => assert!(p.hess_det > 0.0 && j.hess_trace() < 0.0),
                    CritKind::Minimum => assert!(p.hess_det > 0.0 && j.hess_trace() > 0.0),
                }
            }
            let s = CritSummary::from_points(&pts, &[Interval::REAL_LINE]);
            assert!(s.morse_ok());
            assert_eq!(s.per_interval[0], s.total());
            assert_eq!(euler_characteristic(&pts, f64::NEG_INFINITY).unwrap(), 2);
            // counts agree at doubled resolution
            let fine = find_critical_points(&f, 16).unwrap();
            assert_eq!(fine.len(), pts.len());
        }
    }

    #[test]
    fn negation_swaps_extrema() {
        let f = sample_field(11, 3).unwrap();
        let a = CritSummary::from_points(&find_critical_points(&f, 8).unwrap(), &[]);
        let b = CritSummary::from_points(&find_critical_points(&f.negated(), 8).unwrap(), &[]);
        assert_eq!((a.n_min, a.n_saddle, a.n_max), (b.n_max, b.n_saddle, b.n_min));
    }

    #[test]
    fn intervals_and_euler_edges() {
        let f = sample_field(9, 12).unwrap();
        let pts = find_critical_points(&f, 8).unwrap();
        let top = pts.iter().map(|p| p.value).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(count_in_interval(&pts, Interval::above(top + 1e-9)), 0);
        assert_eq!(euler_characteristic(&pts, top - 1e-9).unwrap(), 1);
        assert_eq!(euler_characteristic(&pts, top + 1e-9).unwrap(), 0);
        let broken = &pts[1..];
        assert!(matches!(euler_characteristic(broken, 0.0), Err(Error::IncompleteMorse { .. })));
    }

    #[test]
    fn rejects_coarse_grid() {
        let f = sample_field(2, 1).unwrap();
        assert!(find_critical_points(&f, 4).is_err());
    }

    #[test]
    fn zonal_field_is_degenerate() {
        let mut a = vec![0.0; 7];
        a[3] = 1.0;
        let f = HarmonicField::from_coeffs(3, 0, a).unwrap();
        assert!(find_critical_points(&f, 8).is_err());
    }

    #[test]
    fn level_length_basics() {
        let f = sample_field(6, 2).unwrap();
        assert_eq!(level_length(&f, 100.0, 32, &mut DirectSynth).unwrap(), 0.0);
        assert!(level_length(&f, 0.0, 4, &mut DirectSynth).is_err());
        let a = level_length(&f, 0.0, 32, &mut DirectSynth).unwrap();
        let b = level_length(&f, 0.0, 64, &mut DirectSynth).unwrap();
        assert!(a > 0.0 && ((a - b) / b).abs() < 0.005, "{a} {b}");
    }

    #[test]
    fn level_length_of_zonal_p1_is_equator() {
        // f = cos θ (up to scale): the zero set is the equator, length 2π,
        // and {f = u} is a circle of colatitude acos(u/c).
        let mut a = vec![0.0; 3];
        a[1] = 1.0;
        let f = HarmonicField::from_coeffs(1, 0, a).unwrap();
        let len = level_length(&f, 0.0, 64, &mut DirectSynth).unwrap();
        assert!((len - TAU).abs() < 1e-3, "{len}");
        let u = 0.9;
        let len = level_length(&f, u, 512, &mut DirectSynth).unwrap();
        let want = TAU * (1.0 - u * u).sqrt();
        assert!((len - want).abs() < 1e-3 * want, "{len} vs {want}");
    }

    #[test]
    fn excursion_area_edges() {
        let f = sample_field(8, 5).unwrap();
        let g = build_grid(8, 4).unwrap();
        assert!((excursion_area(&f, f64::NEG_INFINITY, &g) - 4.0 * PI).abs() < 1e-12);
        assert_eq!(excursion_area(&f, 100.0, &g), 0.0);
        let up = excursion_area(&f, 0.0, &g);
        let down = excursion_area(&f.negated(), 0.0, &g);
        assert!((up + down - 4.0 * PI).abs() < 0.2);
    }
}
