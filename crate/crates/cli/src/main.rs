//! `olb`: build tables, iterate the map, find periodic orbits, scan for
//! invariant curves, run the verification suite and draw figures.

mod commands;
mod svg;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "olb", version, about = "Outer length billiard laboratory")]
pub struct Cli {
    /// Worker threads for scans and multi-start searches (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct a table from a spec file and write it with its validation report.
    Forge(ForgeArgs),
    /// Iterate the map and write the orbit as CSV.
    Iterate(IterateArgs),
    /// Find an (n, m) periodic orbit of extremal perimeter.
    FindPeriodic(PeriodicArgs),
    /// Scan first angles for closing (n, m) orbits.
    Scan(ScanArgs),
    /// Run the invariant checks on a table.
    Verify(VerifyArgs),
    /// Draw a table with an optional orbit overlay.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct ForgeArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Resampling size; replaces any `samples` given in --spec.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct IterateArgs {
    #[arg(long)]
    pub table: PathBuf,
    /// Initial tangent line angles `a1,a2`.
    #[arg(long, value_parser = parse_pair, conflicts_with = "point", allow_hyphen_values = true)]
    pub state: Option<(f64, f64)>,
    /// Initial exterior point `x,y`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub point: Option<(f64, f64)>,
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Draw the auxiliary circles in the figure.
    #[arg(long)]
    pub circles: bool,
}

#[derive(Debug, Args)]
pub struct PeriodicArgs {
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long, value_parser = parse_n)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Seed of the multi-start search used when the regular start fails.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random starts of the multi-start search.
    #[arg(long, default_value_t = 32)]
    pub samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long, value_parser = parse_n)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-8, value_parser = parse_tol)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long)]
    pub svg: PathBuf,
    /// Overlay the orbit of these tangent line angles `a1,a2`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub state: Option<(f64, f64)>,
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    /// Overlay the (n, m) periodic orbit instead.
    #[arg(long, value_parser = parse_n, conflicts_with = "state")]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long)]
    pub circles: bool,
    /// Figure width in pixels.
    #[arg(long, default_value_t = 600.0)]
    pub size: f64,
    #[arg(long, default_value_t = 1.5)]
    pub stroke: f64,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected two comma separated numbers, got {s:?}"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

fn parse_n(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n < 3 {
        return Err(format!("n must be at least 3, got {n}"));
    }
    Ok(n)
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(t > 0.0 && t <= 1e-2) {
        return Err(format!("tolerance must lie in (0, 1e-2], got {t}"));
    }
    Ok(t)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build_global() {
            eprintln!("error: worker pool: {e}");
            return ExitCode::from(commands::EXIT_NUMERIC);
        }
    }
    match commands::run(&cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
