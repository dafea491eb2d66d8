//! Pass/fail suites over the closed-form identities and oracles.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use harmcrit_core::crit::Interval;
use harmcrit_core::poly::polyspectrum_from_values;
use harmcrit_core::rng::{normal, split_seed, stream};
use harmcrit_core::theory::{
    coeff_report, density_pi1c, dominant_covariance_terms, expected_crit_count, h25_closed, k2_closed, k5_closed,
    mixed_derivative_ratio, lemma_integral, liwei_expectation, liwei_hessian_closed, moment_ir_closed, nu_c, odd_patterns,
    p3c_mass, pi1c_mass, predicted_moments, projection_coefficients_mc, trispectrum_proxy, Method, OddFamily, A_Z,
    SIGMA_Z,
};
use harmcrit_core::{build_grid, sample_field, sigma_and_cholesky, CritSummary, SpherePoint};

use crate::error::{HarnessError, Result};
use crate::fft::FftSynth;
use crate::runner::critical_points_with_retry;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Sigma,
    Densities,
    Coeffs,
    Integrals,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Sigma, Suite::Densities, Suite::Coeffs, Suite::Integrals];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Sigma => "sigma",
            Suite::Densities => "densities",
            Suite::Coeffs => "coeffs",
            Suite::Integrals => "integrals",
        }
    }

    pub fn parse(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Draws for the projection coefficients.
    pub mc_samples: u64,
    /// Draws for the `I_r` moments.
    pub moment_samples: u64,
    /// Acceptance band of Monte Carlo checks, in standard errors.
    pub n_stderr: f64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            mc_samples: 10_000_000,
            moment_samples: 100_000_000,
            n_stderr: 3.0,
            seed: 20_240_611,
        }
    }
}

/// One line of the verification table.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub target: f64,
    /// Human-readable acceptance rule.
    pub rule: String,
    pub pass: bool,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4} {:<10} {:<54} {:>+16.9e} {:>+16.9e}  {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.value,
            self.target,
            self.rule
        )
    }
}

struct Checks {
    suite: &'static str,
    out: Vec<Check>,
}

impl Checks {
    fn new(suite: Suite) -> Self {
        Checks {
            suite: suite.name(),
            out: Vec::new(),
        }
    }

    fn push(&mut self, name: impl Into<String>, value: f64, target: f64, rule: String, pass: bool) {
        self.out.push(Check {
            suite: self.suite,
            name: name.into(),
            value,
            target,
            rule,
            pass,
        });
    }

    fn abs(&mut self, name: impl Into<String>, value: f64, target: f64, tol: f64) {
        let pass = (value - target).abs() <= tol;
        self.push(name, value, target, format!("|diff| <= {tol:e}"), pass);
    }

    fn rel(&mut self, name: impl Into<String>, value: f64, target: f64, tol: f64) {
        let pass = (value - target).abs() <= tol * target.abs();
        self.push(name, value, target, format!("rel <= {tol:e}"), pass);
    }

    fn stderr(&mut self, name: impl Into<String>, value: f64, se: f64, target: f64, k: f64) {
        let pass = (value - target).abs() <= k * se;
        self.push(name, value, target, format!("{k} x stderr {se:.3e}"), pass);
    }

    fn at_most(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        let pass = value <= bound;
        self.push(name, value, bound, format!("<= {bound:e}"), pass);
    }

    fn range(&mut self, name: impl Into<String>, value: f64, lo: f64, hi: f64) {
        let pass = (lo..=hi).contains(&value);
        self.push(name, value, (lo + hi) / 2.0, format!("in [{lo}, {hi}]"), pass);
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut c = Checks::new(suite);
    match suite {
        Suite::Sigma => sigma_suite(&mut c, opts)?,
        Suite::Densities => densities_suite(&mut c)?,
        Suite::Coeffs => coeffs_suite(&mut c, opts)?,
        Suite::Integrals => integrals_suite(&mut c)?,
    }
    Ok(c.out)
}

pub fn print_table<W: Write>(checks: &[Check], mut w: W) -> std::io::Result<()> {
    writeln!(
        w,
        "{:<4} {:<10} {:<54} {:>16} {:>16}  rule",
        "", "suite", "check", "value", "target"
    )?;
    for ch in checks {
        writeln!(w, "{ch}")?;
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    writeln!(w, "{} checks, {failed} failed", checks.len())
}

fn sigma_suite(c: &mut Checks, opts: &VerifyOptions) -> Result<()> {
    for l in [2u32, 3, 10, 100, 10_000] {
        let (s, lo) = sigma_and_cholesky(l)?;
        let mut worst = 0.0f64;
        for i in 0..5 {
            for k in 0..5 {
                let v: f64 = (0..5).map(|j| lo[i][j] * lo[k][j]).sum();
                let scale = s[i][i].abs().max(s[k][k].abs());
                worst = worst.max((v - s[i][k]).abs() / scale);
            }
        }
        c.at_most(format!("Lambda Lambda^T = sigma, ell={l} (max rel)"), worst, 1e-12);
    }
    let mut synth = FftSynth::new();
    let mut rng = stream(opts.seed);
    for l in [2u32, 10, 50, 100] {
        let grid = build_grid(l, 4)?;
        let (mut h0, mut h1, mut trace) = (0.0f64, 0.0f64, 0.0f64);
        for r in 0..3 {
            let f = sample_field(l, split_seed(opts.seed, l, r))?;
            let values = grid.values(&f, &mut synth);
            h0 = h0.max((polyspectrum_from_values(&values, 0, &grid)? - 4.0 * PI).abs());
            h1 = h1.max(polyspectrum_from_values(&values, 1, &grid)?.abs());
            let lam = f.lambda();
            let mut ev = f.evaluator();
            for _ in 0..100 {
                // a normalized Gaussian vector is uniform on the sphere
                let x = SpherePoint::from_xyz([normal(&mut rng), normal(&mut rng), normal(&mut rng)]);
                let j = ev.jet(x);
                let scale = lam * (1.0 + j.f.abs()).max(j.h11.abs() / lam);
                trace = trace.max((j.hess_trace() + lam * j.f).abs() / scale);
            }
        }
        c.at_most(format!("|h_0 - 4 pi|, ell={l}"), h0, 1e-10);
        c.at_most(format!("|h_1|, ell={l}"), h1, 1e-10);
        c.at_most(format!("trace H + lambda f, ell={l}, 300 points"), trace, 1e-8);
    }
    let mut bad = 0.0;
    let mut fields = 0;
    for l in [2u32, 5, 10, 20] {
        for r in 0..5 {
            let f = sample_field(l, split_seed(opts.seed, l, r))?;
            fields += 1;
            match critical_points_with_retry(&f, 8, &mut synth)? {
                Some(p) if CritSummary::from_points(&p, &[]).morse_ok() => {}
                _ => bad += 1.0,
            }
        }
    }
    c.abs(format!("Morse relation violations in {fields} fields"), bad, 0.0, 0.0);
    Ok(())
}

fn densities_suite(c: &mut Checks) -> Result<()> {
    c.abs("pi1c(0) vs sqrt(3)/sqrt(8 pi)", density_pi1c(0.0), 3f64.sqrt() / (8.0 * PI).sqrt(), 1e-15);
    c.abs("pi1c(0) vs 0.345496", density_pi1c(0.0), 0.345_496, 5e-6);
    c.abs("integral of pi1c over R", pi1c_mass(Interval::REAL_LINE)?, 1.0, 1e-8);
    c.abs("integral of p3c over R", p3c_mass(Interval::REAL_LINE)?, 0.0, 1e-8);
    c.abs("integral of p3c over [0, inf)", p3c_mass(Interval::above(0.0))?, 0.0, 1e-8);
    let nu = nu_c(Interval::above(1.0))?;
    c.push("nu_c([1, inf)) > 0", nu, 0.0, "> 0".into(), nu > 0.0);
    let p10 = predicted_moments(10)?;
    c.abs("mean_crit, ell=10", p10.mean_crit, 220.0 / 3f64.sqrt(), 1e-12);
    let p100 = predicted_moments(100)?;
    c.abs("var_crit_leading, ell=100", p100.var_crit_leading, 172.8, 0.05);
    c.abs("var_A_leading - var_crit_leading", p100.var_a_leading - p100.var_crit_leading, 0.0, 0.0);
    c.abs("cov_crit_A_leading - var_crit_leading", p100.cov_crit_a_leading - p100.var_crit_leading, 0.0, 0.0);
    c.abs("A_ell(h4=1), ell=100", trispectrum_proxy(1.0, 100), -25.78, 0.01);
    c.abs("expected count, ell=50", expected_crit_count(50, Interval::REAL_LINE)?, 2944.5, 0.05);
    Ok(())
}

fn coeffs_suite(c: &mut Checks, opts: &VerifyOptions) -> Result<()> {
    let k = opts.n_stderr;
    c.abs("k2 closed vs sqrt(3)/(2 pi)", k2_closed(), 3f64.sqrt() / (2.0 * PI), 1e-15);
    c.abs("k2 closed vs 0.2756644", k2_closed(), 0.275_664_4, 5e-8);
    c.abs("h25 closed vs -0.0612558", h25_closed(), -0.061_255_8, 5e-6);
    let closed = coeff_report(Method::Closed, 0, 0)?;
    c.abs("k5 identity (closed)", closed.k5_identity_gap(), 0.0, 1e-12);
    c.abs("h25 identity (closed)", closed.h25_identity_gap(), 0.0, 1e-12);
    c.abs("k2 = 3 I0/(8 pi) (closed)", closed.k2_identity_gap(), 0.0, 1e-12);

    let lw = liwei_expectation(&A_Z, &SIGMA_Z)?;
    c.abs("Li-Wei E|Z^T A Z| vs 4/sqrt(3)", lw.value, 4.0 / 3f64.sqrt(), 1e-6);
    let lwp = liwei_hessian_closed()?;
    c.abs("Li-Wei via 1+12t^2+16it^3 vs 4/sqrt(3)", lwp.value, 4.0 / 3f64.sqrt(), 1e-6);

    let mc = coeff_report(Method::MonteCarlo, opts.mc_samples, opts.seed)?;
    c.stderr("k2 Monte Carlo", mc.k2.value, mc.k2.stderr, k2_closed(), k);
    c.stderr("k5 Monte Carlo", mc.k5.value, mc.k5.stderr, k5_closed(), k);
    c.stderr("h25 Monte Carlo", mc.h25.value, mc.h25.stderr, h25_closed(), k);
    let mom = harmcrit_core::theory::moment_ir_mc(&[0, 2, 4], opts.moment_samples, opts.seed ^ 0x1)?;
    for (i, r) in [0u8, 2, 4].into_iter().enumerate() {
        c.stderr(format!("I{r} Monte Carlo"), mom[i].value, mom[i].stderr, moment_ir_closed(r)?, k);
    }
    let k5_se = (mc.k5.stderr.powi(2)
        + ((mc.i4.stderr / 4608.0).powi(2) + (mc.i2.stderr / 32.0).powi(2) + (3.0 * mc.i0.stderr / 8.0).powi(2))
            / (PI * PI))
        .sqrt();
    c.stderr("k5 identity (Monte Carlo)", mc.k5_identity_gap(), k5_se, 0.0, k);
    let h25_se = (mc.h25.stderr.powi(2)
        + ((mc.i2.stderr / 192.0).powi(2) + (mc.i0.stderr / 8.0).powi(2)) / (PI * PI))
        .sqrt();
    c.stderr("h25 identity (Monte Carlo)", mc.h25_identity_gap(), h25_se, 0.0, k);

    let pats = odd_patterns();
    let list: Vec<_> = pats.iter().map(|p| p.pattern).collect();
    let est = projection_coefficients_mc(&list, opts.mc_samples, opts.seed ^ 0x2)?;
    for fam in [OddFamily::G, OddFamily::P, OddFamily::Q] {
        let mut worst = 0.0f64;
        let mut n = 0;
        for (p, v) in pats.iter().zip(&est) {
            if p.family != fam || !p.vanishes {
                continue;
            }
            n += 1;
            let z = if v.stderr > 0.0 {
                v.value.abs() / v.stderr
            } else if v.value == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(z);
        }
        let label = match fam {
            OddFamily::G => "g_ij",
            OddFamily::P => "p_ijk",
            OddFamily::Q => "q_ijkl",
        };
        c.at_most(format!("{n} vanishing {label}: max |value|/stderr"), worst, k);
    }
    Ok(())
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub const LADDER: [u32; 6] = [64, 128, 256, 512, 1024, 2048];

/// Least-squares slope of `value·ℓ²/ℓ^{2(r₁+r₂)}` against `log ℓ`.
pub fn lemma_slope(r1: u8, r2: u8) -> Result<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &l in &LADDER {
        let v = lemma_integral(l, r1, r2)?.value;
        let lf = f64::from(l);
        xs.push(lf.ln());
        ys.push(v * lf * lf / lf.powi(2 * i32::from(r1 + r2)));
    }
    Ok(slope(&xs, &ys))
}

fn integrals_suite(c: &mut Checks) -> Result<()> {
    let v = lemma_integral(2, 0, 0)?;
    c.abs("lemma integral ell=2, r=(0,0)", v.value, 3.0 / 35.0, 1e-12);
    let v = lemma_integral(129, 2, 1)?;
    c.rel("adaptive vs exact rule, ell=129, r=(2,1)", v.value, v.exact, 1e-8);
    let three = 3.0 / (2.0 * PI * PI);
    for r in 0..=2u8 {
        c.rel(format!("slope r=({r},{r}) vs 3/(2 pi^2)"), lemma_slope(r, r)?, three, 0.1);
    }
    c.rel("slope r=(0,1) vs 1/(2 pi^2)", lemma_slope(0, 1)?, 1.0 / (2.0 * PI * PI), 0.1);
    for k in 1..=4u8 {
        let v: Vec<f64> = LADDER.iter().map(|&l| mixed_derivative_ratio(l, k)).collect::<std::result::Result<_, _>>()?;
        // bounded: the last ratio is no larger than the first
        c.at_most(format!("mixed derivative ratio k={k}: ratio at 2048 / ratio at 64"), v[5] / v[0], 1.0);
    }
    let d = dominant_covariance_terms(512)?;
    c.range("first dominant term / (4!*6/pi^2 logl/l^2), ell=512", d.t1 / d.target1, 0.5, 1.5);
    c.range("first dominant term / (4!*12/pi^2 logl/l^2), ell=512", d.t1 / d.target1_printed, 0.5, 1.5);
    c.at_most("max |E[Y1 f]|, |E[Y4 f]| on the equator, ell=512", d.subdominant_max, 1e-12);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for l in [64u32, 128, 256, 512, 1024] {
        let d = dominant_covariance_terms(l)?;
        let lf = f64::from(l);
        xs.push(lf.ln());
        ys.push(d.odd.abs() * lf * lf / lf.ln());
    }
    c.at_most("odd term |value| l^2/log l: slope vs log l", slope(&xs, &ys), 0.0);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        for s in Suite::ALL {
            assert_eq!(Suite::parse(s.name()).unwrap(), s);
        }
        assert!(Suite::parse("nope").is_err());
    }

    #[test]
    fn fast_suites_pass() {
        for s in [Suite::Sigma, Suite::Densities] {
            let checks = run_suite(s, &VerifyOptions::default()).unwrap();
            assert!(!checks.is_empty());
            for ch in &checks {
                assert!(ch.pass, "{ch}");
            }
        }
    }

    #[test]
    fn small_coeffs_suite_passes() {
        let opts = VerifyOptions {
            mc_samples: 400_000,
            moment_samples: 400_000,
            ..VerifyOptions::default()
        };
        for ch in run_suite(Suite::Coeffs, &opts).unwrap() {
            assert!(ch.pass, "{ch}");
        }
    }

    #[test]
    fn failing_check_renders() {
        let mut c = Checks::new(Suite::Densities);
        c.abs("x", 1.0, 0.0, 0.5);
        assert!(!c.out[0].pass);
        let mut buf = Vec::new();
        print_table(&c.out, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains("FAIL") && s.contains("1 failed"));
    }
}
