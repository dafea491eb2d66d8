//! Experiment configuration. The JSON file mirrors the `simulate` flags.

use std::fmt;
use std::path::{Path, PathBuf};

use harmcrit_core::Interval;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Which per-replicate statistics to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct StatToggles {
    pub crit: bool,
    pub h2: bool,
    pub h3: bool,
    pub h4: bool,
    pub nodal: bool,
    pub area: bool,
    pub euler: bool,
}

impl StatToggles {
    pub const ALL: StatToggles = StatToggles {
        crit: true,
        h2: true,
        h3: true,
        h4: true,
        nodal: true,
        area: true,
        euler: true,
    };
    const NAMES: [&'static str; 7] = ["crit", "h2", "h3", "h4", "nodal", "area", "euler"];

    fn flags(&self) -> [bool; 7] {
        [self.crit, self.h2, self.h3, self.h4, self.nodal, self.area, self.euler]
    }

    pub fn any_poly(&self) -> bool {
        self.h2 || self.h3 || self.h4 || self.area
    }

    /// Parses a comma-separated list such as `crit,h2,h4,nodal`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut t = StatToggles {
            crit: false,
            h2: false,
            h3: false,
            h4: false,
            nodal: false,
            area: false,
            euler: false,
        };
        for name in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            match name {
                "crit" => t.crit = true,
                "h2" => t.h2 = true,
                "h3" => t.h3 = true,
                "h4" => t.h4 = true,
                "nodal" => t.nodal = true,
                "area" => t.area = true,
                "euler" => t.euler = true,
                other => return Err(HarnessError::Config(format!("unknown statistic `{other}`"))),
            }
        }
        Ok(t)
    }
}

impl Default for StatToggles {
    fn default() -> Self {
        StatToggles::ALL
    }
}

impl fmt::Display for StatToggles {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = Self::NAMES
            .iter()
            .zip(self.flags())
            .filter(|(_, on)| *on)
            .map(|(n, _)| *n)
            .collect();
        f.write_str(&names.join(","))
    }
}

impl TryFrom<String> for StatToggles {
    type Error = HarnessError;
    fn try_from(s: String) -> Result<Self> {
        StatToggles::parse(&s)
    }
}

impl From<StatToggles> for String {
    fn from(t: StatToggles) -> String {
        t.to_string()
    }
}

/// Parses `lo,hi` pairs separated by `;`, e.g. `1,inf;0.5,inf`.
pub fn parse_intervals(s: &str) -> Result<Vec<Interval>> {
    let mut out = Vec::new();
    for part in s.split(';').map(str::trim).filter(|x| !x.is_empty()) {
        let (lo, hi) = part
            .split_once(',')
            .ok_or_else(|| HarnessError::Config(format!("interval `{part}` is not `lo,hi`")))?;
        let lo = parse_bound(lo)?;
        let hi = parse_bound(hi)?;
        if lo > hi {
            return Err(HarnessError::Config(format!("interval `{part}` has lo > hi")));
        }
        out.push(Interval::new(lo, hi));
    }
    Ok(out)
}

fn parse_bound(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| HarnessError::Config(format!("bad interval bound `{s}`")))?;
    if v.is_nan() {
        return Err(HarnessError::Config("interval bound is NaN".into()));
    }
    Ok(v)
}

pub fn format_intervals(v: &[Interval]) -> String {
    v.iter()
        .map(|i| format!("{},{}", i.lo, i.hi))
        .collect::<Vec<_>>()
        .join(";")
}

/// Parses a comma-separated list of finite reals.
pub fn parse_thresholds(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| match x.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(HarnessError::Config(format!("bad threshold `{x}`"))),
        })
        .collect()
}

pub fn parse_ells(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| HarnessError::Config(format!("bad degree `{x}`"))))
        .collect()
}

mod interval_list {
    use harmcrit_core::Interval;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Interval], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_intervals(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Interval>, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_intervals(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub ells: Vec<u32>,
    pub replicates: u64,
    pub master_seed: u64,
    /// Critical-point grid factor κ.
    pub grid_factor: u32,
    /// Value intervals for `n_crit_I1, n_crit_I2, ...`.
    #[serde(with = "interval_list")]
    pub intervals: Vec<Interval>,
    /// Thresholds for `area_u1, ...` and `euler_u1, ...`.
    pub thresholds: Vec<f64>,
    pub out: PathBuf,
    pub stats: StatToggles,
    /// Marching-squares cells per great circle, in units of ℓ.
    pub level_resolution: u32,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            ells: vec![10],
            replicates: 100,
            master_seed: 0,
            grid_factor: 8,
            intervals: vec![Interval::above(1.0)],
            thresholds: vec![1.0],
            out: PathBuf::from("out"),
            stats: StatToggles::ALL,
            level_resolution: harmcrit_core::crit::LEVEL_RESOLUTION,
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.replicates < 2 {
            return bad(format!("replicates must be >= 2, got {}", self.replicates));
        }
        if self.ells.is_empty() {
            return bad("no degrees given".into());
        }
        if let Some(l) = self.ells.iter().find(|&&l| l < 2) {
            return bad(format!("degree {l} < 2"));
        }
        let mut sorted = self.ells.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.ells.len() {
            return bad("duplicate degrees".into());
        }
        if self.stats.crit {
            if let Some(l) = self.ells.iter().find(|&&l| self.grid_factor * l < 16) {
                return bad(format!("grid_factor * ell must be >= 16 (ell = {l})"));
            }
        }
        if self.stats.euler && !self.stats.crit {
            return bad("euler needs crit".into());
        }
        if self.stats.nodal && self.level_resolution < 8 {
            return bad("level_resolution must be >= 8".into());
        }
        Ok(())
    }

    /// CSV column names, in order.
    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["ell", "replicate", "seed", "n_crit", "n_min", "n_saddle", "n_max"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        h.extend((1..=self.intervals.len()).map(|k| format!("n_crit_I{k}")));
        h.extend(["h2", "h3", "h4", "A_ell", "nodal_len"].iter().map(|s| s.to_string()));
        h.extend((1..=self.thresholds.len()).map(|k| format!("area_u{k}")));
        h.extend((1..=self.thresholds.len()).map(|k| format!("euler_u{k}")));
        h
    }
}
