//! `curext`: batch verification runner.
//!
//! Exit status: 0 when every check passes, 1 when any check fails, 2 on a
//! configuration or I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use curext::suite::{dump_field, run_suite, SuiteConfig, SUITES};

#[derive(Parser, Debug)]
#[command(name = "curext", version, about = "Numerical verification of abelian extensions of Map(S3, SU(n))")]
struct Cli {
    /// Suite to run (see --list).
    #[arg(long)]
    suite: Option<String>,
    /// List the available suites and exit.
    #[arg(long)]
    list: bool,
    /// Plain-text key=value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    rank: Option<usize>,
    /// S³ grid as NψxNθxNφ.
    #[arg(long)]
    grid: Option<String>,
    /// Nodes on the interval of T = S³×[0,1].
    #[arg(long = "time-grid")]
    time_grid: Option<usize>,
    /// Disk grid of Q = S³×D² as NrxNα.
    #[arg(long = "disk-grid")]
    disk_grid: Option<String>,
    /// Tolerance override name=value (repeatable).
    #[arg(long)]
    tol: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of seeded cases for sampling suites.
    #[arg(long)]
    cases: Option<usize>,
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the convergence table here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write a field dump (JSON) here.
    #[arg(long)]
    dump: Option<PathBuf>,
}

fn build_config(cli: &Cli) -> Result<SuiteConfig, String> {
    let mut cfg = SuiteConfig::default();
    if let Some(p) = &cli.config {
        let text = std::fs::read_to_string(p).map_err(|e| format!("reading {}: {e}", p.display()))?;
        cfg.apply_kv(&text).map_err(|e| e.to_string())?;
    }
    let mut set = |k: &str, v: String| cfg.set(k, &v).map_err(|e| e.to_string());
    if let Some(s) = &cli.suite {
        set("suite", s.clone())?;
    }
    if let Some(r) = cli.rank {
        set("rank", r.to_string())?;
    }
    if let Some(g) = &cli.grid {
        set("grid", g.clone())?;
    }
    if let Some(n) = cli.time_grid {
        set("time-grid", n.to_string())?;
    }
    if let Some(d) = &cli.disk_grid {
        set("disk-grid", d.clone())?;
    }
    for t in &cli.tol {
        set("tol", t.clone())?;
    }
    if let Some(s) = cli.seed {
        set("seed", s.to_string())?;
    }
    if let Some(c) = cli.cases {
        set("cases", c.to_string())?;
    }
    cfg.json = cli.json.clone().or(cfg.json);
    cfg.csv = cli.csv.clone().or(cfg.csv);
    cfg.dump = cli.dump.clone().or(cfg.dump);
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.list {
        for s in SUITES {
            println!("{s}");
        }
        return ExitCode::SUCCESS;
    }
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match run_suite(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    for c in &report.checks {
        println!(
            "{} {:<60} value {:>12.6e}  residual {:.3e} ({} {:.1e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.residual,
            if matches!(c.bound, curext::suite::Bound::Max) { "<=" } else { ">=" },
            c.tolerance
        );
    }
    for (k, v) in &report.normalization {
        println!("normalization {k}: {v}");
    }
    println!("suite {}: {} in {:.1}s", report.suite, if report.pass { "PASS" } else { "FAIL" }, report.wall_time_s);
    let dump = if cfg.dump.is_some() {
        match dump_field(&cfg) {
            Ok(f) => Some(f),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
    } else {
        None
    };
    if let Err(e) = report.write_outputs(dump.as_ref()) {
        eprintln!("error writing outputs: {e}");
        return ExitCode::from(2);
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
