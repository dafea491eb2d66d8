//! Per-replicate rows and their CSV form.
//!
//! Floats are written with `Display`, which is the shortest string that
//! parses back to the same bits, so anything computed from a re-read table
//! matches what was computed in memory.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use crate::error::{HarnessError, Result};

/// Critical-point counts of one field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CritCounts {
    pub n_min: usize,
    pub n_saddle: usize,
    pub n_max: usize,
    pub per_interval: Vec<usize>,
}

impl CritCounts {
    pub fn total(&self) -> usize {
        self.n_min + self.n_saddle + self.n_max
    }
}

/// One replicate. `None` marks a statistic that was switched off or, for the
/// critical-point columns, a replicate whose detection failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub ell: u32,
    pub replicate: u64,
    pub seed: u64,
    pub crit: Option<CritCounts>,
    pub h2: Option<f64>,
    pub h3: Option<f64>,
    pub h4: Option<f64>,
    pub a_ell: Option<f64>,
    pub nodal_len: Option<f64>,
    pub areas: Vec<Option<f64>>,
    pub eulers: Vec<Option<i64>>,
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

impl Row {
    /// Fields in header order for `n_intervals` intervals and `n_thresholds`
    /// thresholds.
    pub fn record(&self, n_intervals: usize, n_thresholds: usize) -> Vec<String> {
        let mut r = vec![self.ell.to_string(), self.replicate.to_string(), self.seed.to_string()];
        match &self.crit {
            Some(c) => {
                r.extend([c.total(), c.n_min, c.n_saddle, c.n_max].iter().map(ToString::to_string));
                r.extend(c.per_interval.iter().map(ToString::to_string));
            }
            None => r.extend(std::iter::repeat(String::new()).take(4 + n_intervals)),
        }
        r.extend([&self.h2, &self.h3, &self.h4, &self.a_ell, &self.nodal_len].into_iter().map(opt));
        let pad = |v: Vec<String>| v.into_iter().chain(std::iter::repeat(String::new())).take(n_thresholds);
        r.extend(pad(self.areas.iter().map(opt).collect()));
        r.extend(pad(self.eulers.iter().map(opt).collect()));
        r
    }
}

/// A rows file read back as numbers; empty cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Table> {
        let mut text = String::new();
        BufReader::new(File::open(path)?).read_to_string(&mut text)?;
        Table::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Table> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|c| {
                    if c.is_empty() {
                        Ok(None)
                    } else {
                        c.parse::<f64>()
                            .map(Some)
                            .map_err(|_| HarnessError::Rows(format!("cell `{c}` is not a number")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Table { header, rows })
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| HarnessError::MissingColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let i = self.index(name)?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Degrees in order of first appearance.
    pub fn ells(&self) -> Result<Vec<u32>> {
        let i = self.index("ell")?;
        let mut out: Vec<u32> = Vec::new();
        for r in &self.rows {
            let l = r[i].ok_or_else(|| HarnessError::Rows("missing ell".into()))? as u32;
            if !out.contains(&l) {
                out.push(l);
            }
        }
        Ok(out)
    }

    /// The rows at degree `ell`.
    pub fn at_ell(&self, ell: u32) -> Result<Table> {
        let i = self.index("ell")?;
        Ok(Table {
            header: self.header.clone(),
            rows: self.rows.iter().filter(|r| r[i] == Some(f64::from(ell))).cloned().collect(),
        })
    }

    /// The first `n` rows.
    pub fn head(&self, n: usize) -> Table {
        Table {
            header: self.header.clone(),
            rows: self.rows.iter().take(n).cloned().collect(),
        }
    }
}
