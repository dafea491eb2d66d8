//! Correlations with jackknife errors, the KS normality surrogate, and the
//! per-degree summary of a rows table.

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::table::Table;

/// Minimum sample size for a jackknife standard error.
pub const MIN_JACKKNIFE: usize = 10;
/// Minimum sample size for [`clt_check`].
pub const MIN_KS: usize = 50;

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Pearson correlation. Zero variance in either input is an error.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    assert_eq!(x.len(), y.len());
    if x.len() < 2 {
        return Err(HarnessError::TooFewSamples { need: 2, have: x.len() });
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(HarnessError::Degenerate("x".into()));
    }
    if syy == 0.0 {
        return Err(HarnessError::Degenerate("y".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Leave-one-out jackknife standard error of the Pearson correlation.
pub fn jackknife_se(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len();
    if n < MIN_JACKKNIFE {
        return Err(HarnessError::TooFewSamples { need: MIN_JACKKNIFE, have: n });
    }
    let mut xs = Vec::with_capacity(n - 1);
    let mut ys = Vec::with_capacity(n - 1);
    let mut loo = Vec::with_capacity(n);
    for i in 0..n {
        xs.clear();
        ys.clear();
        xs.extend(x.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, v)| *v));
        ys.extend(y.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, v)| *v));
        loo.push(pearson(&xs, &ys)?);
    }
    let m = mean(&loo);
    let ss: f64 = loo.iter().map(|r| (r - m) * (r - m)).sum();
    Ok(((n as f64 - 1.0) / n as f64 * ss).sqrt())
}

/// One entry of a correlation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub a: String,
    pub b: String,
    pub n: usize,
    pub rho: Option<f64>,
    pub rho2: Option<f64>,
    /// Jackknife standard error, present when `n ≥ 10`.
    pub stderr: Option<f64>,
    /// `ρ ± 1.96·stderr`.
    pub ci95: Option<[f64; 2]>,
    /// Why `rho` is missing.
    pub error: Option<String>,
}

impl Correlation {
    /// True when the 95% interval lies strictly on one side of zero.
    pub fn excludes_zero(&self) -> bool {
        self.ci95.is_some_and(|[lo, hi]| lo > 0.0 || hi < 0.0)
    }
}

/// Complete cases of two columns.
fn paired(t: &Table, a: &str, b: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let (ca, cb) = (t.column(a)?, t.column(b)?);
    Ok(ca.iter().zip(&cb).filter_map(|(x, y)| Some(((*x)?, (*y)?))).unzip())
}

pub fn correlate(t: &Table, a: &str, b: &str) -> Result<Correlation> {
    let (x, y) = paired(t, a, b)?;
    let n = x.len();
    let mut c = Correlation {
        a: a.to_string(),
        b: b.to_string(),
        n,
        rho: None,
        rho2: None,
        stderr: None,
        ci95: None,
        error: None,
    };
    match pearson(&x, &y) {
        Ok(r) => {
            c.rho = Some(r);
            c.rho2 = Some(r * r);
            if n >= MIN_JACKKNIFE {
                let se = jackknife_se(&x, &y)?;
                c.stderr = Some(se);
                c.ci95 = Some([r - 1.96 * se, r + 1.96 * se]);
            }
        }
        Err(HarnessError::Degenerate(which)) => {
            let col = if which == "x" { a } else { b };
            c.error = Some(format!("zero variance in {col}"));
        }
        Err(HarnessError::TooFewSamples { have, .. }) => {
            c.error = Some(format!("only {have} complete rows"));
        }
        Err(e) => return Err(e),
    }
    Ok(c)
}

/// Correlations of the given column pairs.
pub fn correlation_summary(t: &Table, pairs: &[(String, String)]) -> Result<Vec<Correlation>> {
    pairs.iter().map(|(a, b)| correlate(t, a, b)).collect()
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub ks_stat: f64,
    pub n: usize,
}

/// Kolmogorov–Smirnov distance between the standardized sample and `N(0,1)`.
pub fn clt_check(samples: &[f64]) -> Result<KsResult> {
    let n = samples.len();
    if n < MIN_KS {
        return Err(HarnessError::TooFewSamples { need: MIN_KS, have: n });
    }
    let m = mean(samples);
    let var = samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n as f64 - 1.0);
    if var == 0.0 {
        return Err(HarnessError::Degenerate("samples".into()));
    }
    let sd = var.sqrt();
    let mut z: Vec<f64> = samples.iter().map(|x| (x - m) / sd).collect();
    z.sort_by(f64::total_cmp);
    let nf = n as f64;
    let d = z.iter().enumerate().fold(0.0f64, |d, (i, &v)| {
        let f = normal_cdf(v);
        d.max((i as f64 + 1.0) / nf - f).max(f - i as f64 / nf)
    });
    Ok(KsResult { ks_stat: d, n })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub name: String,
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllSummary {
    pub ell: u32,
    pub rows: usize,
    /// Rows whose critical-point columns are empty although others are not.
    pub failed: usize,
    pub columns: Vec<ColumnStats>,
    /// Upper triangle of the correlation matrix of the statistic columns.
    pub correlations: Vec<Correlation>,
    /// KS distance of standardized `n_crit`, when there are enough rows.
    pub ks_n_crit: Option<KsResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub per_ell: Vec<EllSummary>,
}

const ID_COLUMNS: [&str; 3] = ["ell", "replicate", "seed"];

/// Summary of every degree in the table; a pure function of the table.
pub fn summarize(t: &Table) -> Result<Summary> {
    let per_ell = t.ells()?.into_iter().map(|l| summarize_ell(t, l)).collect::<Result<_>>()?;
    Ok(Summary { per_ell })
}

fn summarize_ell(all: &Table, ell: u32) -> Result<EllSummary> {
    let t = all.at_ell(ell)?;
    let mut columns = Vec::new();
    let mut present = Vec::new();
    for name in t.header.iter().filter(|h| !ID_COLUMNS.contains(&h.as_str())) {
        let v: Vec<f64> = t.column(name)?.into_iter().flatten().collect();
        if v.is_empty() {
            continue;
        }
        let m = mean(&v);
        let var = if v.len() > 1 {
            v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
        } else {
            0.0
        };
        columns.push(ColumnStats {
            name: name.clone(),
            n: v.len(),
            mean: m,
            variance: var,
        });
        present.push(name.clone());
    }
    let mut correlations = Vec::new();
    for (i, a) in present.iter().enumerate() {
        for b in &present[i + 1..] {
            correlations.push(correlate(&t, a, b)?);
        }
    }
    let (failed, ks_n_crit) = if present.iter().any(|c| c == "n_crit") {
        let ncrit = t.column("n_crit")?;
        let failed = ncrit.iter().filter(|v| v.is_none()).count();
        let v: Vec<f64> = ncrit.into_iter().flatten().collect();
        (failed, clt_check(&v).ok())
    } else {
        (0, None)
    };
    Ok(EllSummary {
        ell,
        rows: t.rows.len(),
        failed,
        columns,
        correlations,
        ks_n_crit,
    })
}
