//! Long-format export of a rows table for plotting tools.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LongRow {
    pub ell: u32,
    pub replicate: u64,
    pub stat: String,
    pub value: f64,
}

/// One `(ell, replicate, stat, value)` record per non-empty statistic cell.
pub fn long_rows(t: &Table) -> Result<Vec<LongRow>> {
    let (ie, ir) = (t.index("ell")?, t.index("replicate")?);
    let seed = t.index("seed").ok();
    let mut out = Vec::new();
    for row in &t.rows {
        let (Some(ell), Some(rep)) = (row[ie], row[ir]) else {
            continue;
        };
        for (k, cell) in row.iter().enumerate() {
            if k == ie || k == ir || Some(k) == seed {
                continue;
            }
            if let Some(v) = cell {
                out.push(LongRow {
                    ell: ell as u32,
                    replicate: rep as u64,
                    stat: t.header[k].clone(),
                    value: *v,
                });
            }
        }
    }
    Ok(out)
}

pub fn write_report<W: Write>(t: &Table, format: Format, out: W) -> Result<()> {
    let rows = long_rows(t)?;
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, &rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}
