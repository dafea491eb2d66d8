use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use harmcrit::config::{parse_ells, parse_intervals, parse_thresholds, ExperimentConfig, StatToggles};
use harmcrit::error::{HarnessError, Result};
use harmcrit::report::{write_report, Format};
use harmcrit::runner::{critical_points_with_retry, run_experiment, RunOptions, ROWS_FILE};
use harmcrit::stats::correlation_summary;
use harmcrit::table::Table;
use harmcrit::verify::{print_table, run_suite, Suite, VerifyOptions};
use harmcrit::FftSynth;
use harmcrit_core::{sample_field, CritSummary, HarmonicField};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "harmcrit", version, about = "Critical points and polyspectra of random spherical harmonics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run seeded replicates and write rows.csv and summary.json.
    Simulate(SimulateArgs),
    /// List the critical points of one field.
    Critpoints(CritArgs),
    /// Check closed-form identities and oracles.
    Verify(VerifyArgs),
    /// Correlations between columns of a finished run.
    Correlate(CorrelateArgs),
    /// Long-format export of a finished run.
    Report(ReportArgs),
}

#[derive(clap::Args)]
struct SimulateArgs {
    /// JSON config; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Degrees, comma separated.
    #[arg(long)]
    ell: Option<String>,
    #[arg(long)]
    replicates: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    grid_factor: Option<u32>,
    /// Value intervals, e.g. "1,inf;0.5,inf".
    #[arg(long)]
    intervals: Option<String>,
    /// Thresholds for area and Euler characteristic, e.g. "0,1".
    #[arg(long)]
    thresholds: Option<String>,
    /// Statistics, e.g. "crit,h2,h4,nodal,area,euler".
    #[arg(long)]
    stats: Option<String>,
    /// Level-set cells per great circle in units of ell.
    #[arg(long)]
    level_resolution: Option<u32>,
    /// Worker threads (default: HC_THREADS, then all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Continue an interrupted run in the same output directory.
    #[arg(long)]
    resume: bool,
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum DumpFormat {
    Csv,
}

#[derive(clap::Args)]
struct CritArgs {
    #[arg(long, required_unless_present = "load_field")]
    ell: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    grid_factor: u32,
    /// Print every point as theta,phi,value,kind,residual.
    #[arg(long, value_enum)]
    dump: Option<DumpFormat>,
    /// Write the field coefficients as JSON.
    #[arg(long)]
    save_field: Option<PathBuf>,
    /// Read the field from JSON instead of sampling it.
    #[arg(long, conflicts_with_all = ["ell", "seed"])]
    load_field: Option<PathBuf>,
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// Suites to run: coeffs, integrals, sigma, densities or all.
    #[arg(required = true)]
    suites: Vec<String>,
    /// Draws for projection coefficients; moments use ten times as many.
    #[arg(long, default_value_t = 10_000_000)]
    mc_samples: u64,
    /// Monte Carlo acceptance band in standard errors.
    #[arg(long, default_value_t = 3.0)]
    tol: f64,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorrFormat {
    Text,
    Json,
}

#[derive(clap::Args)]
struct CorrelateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Column pairs, e.g. "ncrit:h4,ncrit:nodal,ncrit_I1:h2".
    #[arg(long, default_value = "ncrit:A_ell,ncrit:h4,nodal:h4")]
    pairs: String,
    #[arg(long, value_enum, default_value_t = CorrFormat::Text)]
    format: CorrFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
}

#[derive(clap::Args)]
struct ReportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
    format: ReportFormat,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Field coefficients on disk.
#[derive(Serialize, Deserialize)]
struct FieldFile {
    ell: u32,
    seed: u64,
    coeffs: Vec<f64>,
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = &a.ell {
        cfg.ells = parse_ells(v)?;
    }
    if let Some(v) = a.replicates {
        cfg.replicates = v;
    }
    if let Some(v) = a.seed {
        cfg.master_seed = v;
    }
    if let Some(v) = a.out {
        cfg.out = v;
    }
    if let Some(v) = a.grid_factor {
        cfg.grid_factor = v;
    }
    if let Some(v) = &a.intervals {
        cfg.intervals = parse_intervals(v)?;
    }
    if let Some(v) = &a.thresholds {
        cfg.thresholds = parse_thresholds(v)?;
    }
    if let Some(v) = &a.stats {
        cfg.stats = StatToggles::parse(v)?;
    }
    if let Some(v) = a.level_resolution {
        cfg.level_resolution = v;
    }
    let opts = RunOptions {
        threads: a.threads,
        resume: a.resume,
        progress: !a.quiet,
    };
    let res = run_experiment(&cfg, &opts)?;
    if !a.quiet {
        for e in &res.summary.per_ell {
            let mean = |name: &str| e.columns.iter().find(|c| c.name == name).map(|c| c.mean);
            eprintln!(
                "ell {}: {} rows, {} failed, mean n_crit {}",
                e.ell,
                e.rows,
                e.failed,
                mean("n_crit").map_or("-".into(), |v| format!("{v:.2}"))
            );
        }
        eprintln!("wrote {} and {}", res.rows_path.display(), res.summary_path.display());
    }
    Ok(())
}

fn critpoints(a: CritArgs) -> Result<()> {
    let field = match &a.load_field {
        Some(p) => {
            let f: FieldFile = serde_json::from_str(&fs::read_to_string(p)?)?;
            HarmonicField::from_coeffs(f.ell, f.seed, f.coeffs)?
        }
        None => sample_field(a.ell.expect("required by clap"), a.seed)?,
    };
    if let Some(p) = &a.save_field {
        let f = FieldFile {
            ell: field.ell,
            seed: field.seed,
            coeffs: field.coeffs_a.clone(),
        };
        fs::write(p, serde_json::to_string_pretty(&f)? + "\n")?;
    }
    let points = critical_points_with_retry(&field, a.grid_factor, &mut FftSynth::new())?.ok_or(
        HarnessError::Core(harmcrit_core::Error::Domain("critical-point detection failed at grid factors k and 2k")),
    )?;
    let s = CritSummary::from_points(&points, &[]);
    let line = format!(
        "ell {} seed {}: {} critical points ({} min, {} saddle, {} max)",
        field.ell,
        field.seed,
        s.total(),
        s.n_min,
        s.n_saddle,
        s.n_max
    );
    match a.dump {
        Some(DumpFormat::Csv) => {
            eprintln!("{line}");
            let mut w = csv::Writer::from_writer(io::stdout().lock());
            w.write_record(["theta", "phi", "value", "kind", "residual"])?;
            for p in &points {
                w.write_record([
                    p.point.theta.to_string(),
                    p.point.phi.to_string(),
                    p.value.to_string(),
                    p.kind.as_str().to_string(),
                    p.residual.to_string(),
                ])?;
            }
            w.flush()?;
        }
        None => println!("{line}"),
    }
    Ok(())
}

fn verify(a: VerifyArgs) -> Result<bool> {
    let mut suites = Vec::new();
    for s in &a.suites {
        if s == "all" {
            suites.extend(Suite::ALL);
        } else {
            suites.push(Suite::parse(s)?);
        }
    }
    let mut opts = VerifyOptions {
        mc_samples: a.mc_samples,
        moment_samples: a.mc_samples.saturating_mul(10),
        n_stderr: a.tol,
        ..VerifyOptions::default()
    };
    if let Some(s) = a.seed {
        opts.seed = s;
    }
    let mut checks = Vec::new();
    for s in suites {
        checks.extend(run_suite(s, &opts)?);
    }
    print_table(&checks, io::stdout().lock())?;
    Ok(checks.iter().all(|c| c.pass))
}

/// Short names accepted in `--pairs`.
fn column_name(s: &str) -> String {
    match s {
        "ncrit" => "n_crit".into(),
        "nodal" => "nodal_len".into(),
        "A" | "a_ell" => "A_ell".into(),
        _ => match s.strip_prefix("ncrit_") {
            Some(rest) => format!("n_crit_{rest}"),
            None => s.into(),
        },
    }
}

fn correlate(a: CorrelateArgs) -> Result<()> {
    let table = Table::read(&a.input.join(ROWS_FILE))?;
    let pairs = a
        .pairs
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|p| {
            p.split_once(':')
                .map(|(x, y)| (column_name(x), column_name(y)))
                .ok_or_else(|| HarnessError::Config(format!("pair `{p}` is not `a:b`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut all = Vec::new();
    for ell in table.ells()? {
        let t = table.at_ell(ell)?;
        for c in correlation_summary(&t, &pairs)? {
            all.push((ell, c));
        }
    }
    let mut out = io::stdout().lock();
    match a.format {
        CorrFormat::Json => {
            let v: Vec<_> = all
                .iter()
                .map(|(ell, c)| serde_json::json!({ "ell": ell, "correlation": c }))
                .collect();
            serde_json::to_writer_pretty(&mut out, &v)?;
            writeln!(out)?;
        }
        CorrFormat::Text => {
            writeln!(
                out,
                "{:>6} {:>12} {:>12} {:>6} {:>9} {:>9} {:>9}  95% interval",
                "ell", "a", "b", "n", "rho", "rho^2", "stderr"
            )?;
            let f = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
            for (ell, c) in &all {
                let ci = match (c.ci95, &c.error) {
                    (Some([lo, hi]), _) => format!("[{lo:.4}, {hi:.4}]"),
                    (None, Some(e)) => e.clone(),
                    (None, None) => "-".into(),
                };
                writeln!(
                    out,
                    "{:>6} {:>12} {:>12} {:>6} {:>9} {:>9} {:>9}  {ci}",
                    ell,
                    c.a,
                    c.b,
                    c.n,
                    f(c.rho),
                    f(c.rho2),
                    f(c.stderr)
                )?;
            }
        }
    }
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    let table = Table::read(&a.input.join(ROWS_FILE))?;
    let format = match a.format {
        ReportFormat::Csv => Format::Csv,
        ReportFormat::Json => Format::Json,
    };
    match &a.out {
        Some(p) => write_report(&table, format, io::BufWriter::new(fs::File::create(p)?)),
        None => write_report(&table, format, io::stdout().lock()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Simulate(a) => simulate(a).map(|_| true),
        Cmd::Critpoints(a) => critpoints(a).map(|_| true),
        Cmd::Verify(a) => verify(a),
        Cmd::Correlate(a) => correlate(a).map(|_| true),
        Cmd::Report(a) => report(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) if e.is_broken_pipe() => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
