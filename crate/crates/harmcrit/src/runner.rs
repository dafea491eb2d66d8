//! Replicate runner.
//!
//! Work items are `(ℓ, r)` pairs, each with its own field seed
//! `split_seed(master, ℓ, r)`. Workers send finished rows to a single sink
//! that writes them in item order and flushes after each one, so the rows
//! file is always a prefix of the final output and a rerun can resume from
//! it.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;

use harmcrit_core::crit::{euler_characteristic, excursion_area_from_values, level_length};
use harmcrit_core::poly::polyspectrum_from_values;
use harmcrit_core::rng::split_seed;
use harmcrit_core::theory::trispectrum_proxy;
use harmcrit_core::{
    build_grid, find_critical_points_with, sample_field, CritOptions, CritSummary, CriticalPoint, Error as CoreError,
    HarmonicField, SphereGrid,
};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::fft::FftSynth;
use crate::stats::{summarize, Summary};
use crate::table::{CritCounts, Row, Table};

pub const ROWS_FILE: &str = "rows.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CONFIG_FILE: &str = "config.json";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` reads `HC_THREADS`, then falls back to rayon's
    /// default.
    pub threads: Option<usize>,
    /// Continue from an existing rows file written by the same configuration.
    pub resume: bool,
    /// Progress lines on stderr.
    pub progress: bool,
}

/// Rows and summary of a finished run.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub rows: Table,
    pub summary: Summary,
    pub rows_path: PathBuf,
    pub summary_path: PathBuf,
}

/// Worker count from `HC_THREADS`, if set to a positive integer.
pub fn env_threads() -> Option<usize> {
    std::env::var("HC_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Critical points at κ, retried once at 2κ when detection is incomplete.
pub fn critical_points_with_retry(
    field: &HarmonicField,
    grid_factor: u32,
    synth: &mut FftSynth,
) -> Result<Option<Vec<CriticalPoint>>> {
    for k in [grid_factor, 2 * grid_factor] {
        let opts = CritOptions::with_grid_factor(k);
        match find_critical_points_with(field, &opts, synth) {
            Ok(p) => return Ok(Some(p)),
            Err(CoreError::IncompleteMorse { .. } | CoreError::DegenerateCritical { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(None)
}

/// All toggled statistics of replicate `r` at degree `ell`.
pub fn compute_row(
    cfg: &ExperimentConfig,
    ell: u32,
    r: u64,
    grid: Option<&SphereGrid>,
    synth: &mut FftSynth,
) -> Result<Row> {
    let seed = split_seed(cfg.master_seed, ell, r);
    let field = sample_field(ell, seed)?;
    let st = cfg.stats;
    let mut row = Row {
        ell,
        replicate: r,
        seed,
        crit: None,
        h2: None,
        h3: None,
        h4: None,
        a_ell: None,
        nodal_len: None,
        areas: Vec::new(),
        eulers: Vec::new(),
    };
    if st.crit {
        if let Some(points) = critical_points_with_retry(&field, cfg.grid_factor, synth)? {
            let s = CritSummary::from_points(&points, &cfg.intervals);
            row.crit = Some(CritCounts {
                n_min: s.n_min,
                n_saddle: s.n_saddle,
                n_max: s.n_max,
                per_interval: s.per_interval.clone(),
            });
            if st.euler {
                row.eulers = cfg
                    .thresholds
                    .iter()
                    .map(|&u| euler_characteristic(&points, u).map(Some))
                    .collect::<std::result::Result<_, _>>()?;
            }
        }
    }
    if let Some(grid) = grid {
        let values = grid.values(&field, synth);
        let h = |q: u32, on: bool| -> Result<Option<f64>> {
            Ok(if on { Some(polyspectrum_from_values(&values, q, grid)?) } else { None })
        };
        row.h2 = h(2, st.h2)?;
        row.h3 = h(3, st.h3)?;
        row.h4 = h(4, st.h4)?;
        row.a_ell = row.h4.map(|v| trispectrum_proxy(v, ell));
        if st.area {
            row.areas = cfg
                .thresholds
                .iter()
                .map(|&u| Some(excursion_area_from_values(&values, u, grid)))
                .collect();
        }
    }
    if st.nodal {
        row.nodal_len = Some(level_length(&field, 0.0, cfg.level_resolution, synth)?);
    }
    Ok(row)
}

fn jobs(cfg: &ExperimentConfig) -> Vec<(u32, u64)> {
    cfg.ells.iter().flat_map(|&l| (0..cfg.replicates).map(move |r| (l, r))).collect()
}

// Number of complete rows already on disk; a torn last line is cut off.
fn prepare_resume(path: &Path, header: &str, jobs: &[(u32, u64)]) -> Result<usize> {
    let text = fs::read_to_string(path)?;
    let end = text.rfind('\n').map_or(0, |i| i + 1);
    let complete = &text[..end];
    let mut lines = complete.lines();
    match lines.next() {
        None => {
            fs::write(path, format!("{header}\n"))?;
            return Ok(0);
        }
        Some(h) if h == header => {}
        Some(_) => return Err(HarnessError::ResumeMismatch(path.to_path_buf())),
    }
    let mut n = 0;
    for (line, job) in lines.zip(jobs) {
        let mut it = line.split(',');
        let ell = it.next().and_then(|s| s.parse::<u32>().ok());
        let rep = it.next().and_then(|s| s.parse::<u64>().ok());
        if (ell, rep) != (Some(job.0), Some(job.1)) {
            return Err(HarnessError::Rows(format!("row {n} is not replicate {} at ell {}", job.1, job.0)));
        }
        n += 1;
    }
    if complete.lines().count() > jobs.len() + 1 {
        return Err(HarnessError::Rows("more rows than the configuration produces".into()));
    }
    let f = OpenOptions::new().write(true).open(path)?;
    f.set_len(end as u64)?;
    Ok(n)
}

fn write_record(w: &mut csv::Writer<BufWriter<File>>, rec: &[String]) -> Result<()> {
    w.write_record(rec)?;
    w.flush()?;
    Ok(())
}

/// Runs the experiment, writing `rows.csv`, `summary.json` and `config.json`
/// under `cfg.out`.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentResult> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out)?;
    let rows_path = cfg.out.join(ROWS_FILE);
    let config_path = cfg.out.join(CONFIG_FILE);
    let header = cfg.header();
    let header_line = header.join(",");
    let all_jobs = jobs(cfg);

    let done = if opts.resume && rows_path.exists() {
        let same = config_path.exists() && ExperimentConfig::from_file(&config_path).ok().as_ref() == Some(cfg);
        if !same {
            return Err(HarnessError::ResumeMismatch(cfg.out.clone()));
        }
        prepare_resume(&rows_path, &header_line, &all_jobs)?
    } else {
        fs::write(&rows_path, format!("{header_line}\n"))?;
        0
    };
    fs::write(&config_path, serde_json::to_string_pretty(cfg)? + "\n")?;

    let total = all_jobs.len();
    let todo = &all_jobs[done..];
    // rows already on disk count against the failure budget too
    let mut failed = if done > 0 && cfg.stats.crit {
        Table::read(&rows_path)?.column("n_crit")?.iter().filter(|v| v.is_none()).count()
    } else {
        0
    };
    let grids: HashMap<u32, SphereGrid> = if cfg.stats.any_poly() {
        cfg.ells.iter().map(|&l| Ok((l, build_grid(l, 4)?))).collect::<Result<_>>()?
    } else {
        HashMap::new()
    };

    let threads = opts.threads.or_else(env_threads).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;

    let file = OpenOptions::new().append(true).open(&rows_path)?;
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(BufWriter::new(file));
    let cancel = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<(usize, Result<Row>)>();
    let (ni, nt) = (cfg.intervals.len(), cfg.thresholds.len());

    let outcome: Result<()> = std::thread::scope(|s| {
        let cancel = &cancel;
        let grids = &grids;
        let pool = &pool;
        s.spawn(move || {
            pool.install(|| {
                todo.par_iter().enumerate().for_each_init(
                    || (tx.clone(), FftSynth::new()),
                    |(tx, synth), (i, &(ell, r))| {
                        if cancel.load(Ordering::Relaxed) {
                            return;
                        }
                        let row = compute_row(cfg, ell, r, grids.get(&ell), synth);
                        let _ = tx.send((i, row));
                    },
                );
            });
            drop(tx);
        });
        let mut pending = BTreeMap::new();
        let mut next = 0usize;
        let result = (|| {
            for (i, row) in rx.iter() {
                pending.insert(i, row);
                while let Some(row) = pending.remove(&next) {
                    let row = row?;
                    if cfg.stats.crit && row.crit.is_none() {
                        failed += 1;
                        eprintln!("replicate {} at ell {} failed critical-point detection", row.replicate, row.ell);
                        if failed * 100 > total {
                            return Err(HarnessError::FailureBudget { failed, total });
                        }
                    }
                    write_record(&mut writer, &row.record(ni, nt))?;
                    next += 1;
                    if opts.progress && (next % 50 == 0 || next == todo.len()) {
                        eprintln!("{}/{} replicates", done + next, total);
                    }
                }
            }
            Ok(())
        })();
        if result.is_err() {
            cancel.store(true, Ordering::Relaxed);
        }
        // drain so the workers finish
        for _ in rx.iter() {}
        result
    });
    outcome?;
    drop(writer);

    let rows = Table::read(&rows_path)?;
    let summary = summarize(&rows)?;
    let summary_path = cfg.out.join(SUMMARY_FILE);
    fs::write(&summary_path, serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(ExperimentResult {
        rows,
        summary,
        rows_path,
        summary_path,
    })
}
