use crate::svg::Figure;
use crate::{Command, ForgeArgs, IterateArgs, PeriodicArgs, RenderArgs, ScanArgs, VerifyArgs};
use anyhow::{Context, Result};
use olb_core::billiard::{self, OrbitRow};
use olb_core::forge::{self, TableSpec};
use olb_core::genfun::ChordConfig;
use olb_core::periodic::{self, PeriodicOrbit};
use olb_core::verify::{self, VerifyOptions};
use olb_core::{Error, PlanePoint, SupportOval, ValidationReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const EXIT_IO: u8 = 4;

/// Bad or missing command input.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(c) = cause.downcast_ref::<Error>() {
            return match c {
                Error::TangencyRoot(_)
                | Error::StepFailure { .. }
                | Error::OrbitStep { .. }
                | Error::NonConvergence { .. }
                | Error::CollapsedGaps => EXIT_NUMERIC,
                _ => EXIT_VALIDATION,
            };
        }
        if cause.downcast_ref::<io::Error>().is_some() {
            return EXIT_IO;
        }
        if cause.downcast_ref::<Usage>().is_some() {
            return EXIT_VALIDATION;
        }
    }
    EXIT_NUMERIC
}

pub fn run(cmd: &Command) -> Result<u8> {
    match cmd {
        Command::Forge(a) => forge_cmd(a),
        Command::Iterate(a) => iterate(a),
        Command::FindPeriodic(a) => find_periodic(a),
        Command::Scan(a) => scan(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Render(a) => render(a),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn write_or_stdout(path: Option<&PathBuf>, body: &str) -> Result<()> {
    match path {
        Some(p) => write(p, body),
        None => io::stdout().write_all(body.as_bytes()).context("writing to stdout"),
    }
}

fn load_raw(path: &Path) -> Result<SupportOval> {
    let text = read(path)?;
    SupportOval::from_json(&text).with_context(|| format!("loading table {}", path.display()))
}

/// Loads and validates a table.
fn load_table(path: &Path) -> Result<SupportOval> {
    let oval = load_raw(path)?;
    oval.validated().with_context(|| format!("validating table {}", path.display()))
}

/// Largest and smallest support numbers with their normal angles; for an
/// ellipse about its center these are the semi-axes.
#[derive(Debug, Serialize)]
struct Extent {
    max_p: f64,
    max_at: f64,
    min_p: f64,
    min_at: f64,
}

fn extent(oval: &SupportOval) -> Extent {
    const GRID: usize = 1 << 14;
    let mut e = Extent {
        max_p: f64::NEG_INFINITY,
        max_at: 0.0,
        min_p: f64::INFINITY,
        min_at: 0.0,
    };
    for k in 0..GRID {
        let a = TAU * k as f64 / GRID as f64;
        let p = oval.p(a);
        if p > e.max_p {
            e.max_p = p;
            e.max_at = a;
        }
        if p < e.min_p {
            e.min_p = p;
            e.min_at = a;
        }
    }
    e
}

#[derive(Debug, Serialize)]
struct ForgeReport<'a> {
    kind: &'a str,
    notes: Vec<(String, f64)>,
    perimeter: f64,
    extent: Extent,
    validation: ValidationReport,
}

fn report_path(out: &Path) -> PathBuf {
    out.with_extension("report.json")
}

fn forge_cmd(a: &ForgeArgs) -> Result<u8> {
    let mut spec = TableSpec::from_json(&read(&a.spec)?).with_context(|| format!("parsing {}", a.spec.display()))?;
    if let Some(n) = a.samples {
        match &mut spec {
            TableSpec::FourPeriodic { samples, .. }
            | TableSpec::EllipseFamily { samples, .. }
            | TableSpec::RadonArc { samples, .. } => *samples = Some(n),
        }
    }
    let forged = forge::forge(&spec)?;
    let report = ForgeReport {
        kind: forged.kind,
        notes: forged.notes.clone(),
        perimeter: forged.oval.perimeter(),
        extent: extent(&forged.oval),
        validation: forged.oval.validate(),
    };
    write(&a.out, &forged.oval.to_json())?;
    let body = serde_json::to_string_pretty(&report)?;
    write(&report_path(&a.out), &body)?;
    write_or_stdout(None, &(body + "\n"))?;
    Ok(if report.validation.passed { EXIT_OK } else { EXIT_VALIDATION })
}

fn initial_state(oval: &SupportOval, state: Option<(f64, f64)>, point: Option<(f64, f64)>) -> Result<ChordConfig> {
    match (state, point) {
        (Some((a1, a2)), _) => Ok(ChordConfig::new(a1, a2)?),
        (None, Some((x, y))) => Ok(billiard::state_from_point(oval, PlanePoint::new(x, y))?),
        (None, None) => Err(Usage("give an initial --state a1,a2 or --point x,y".into()).into()),
    }
}

fn orbit_csv(rows: &[OrbitRow]) -> Result<String> {
    let mut buf = Vec::new();
    billiard::write_orbit_csv(rows, &mut buf)?;
    writeln!(buf, "# closure_residual,{:.6e}", billiard::closure_residual(rows))?;
    Ok(String::from_utf8(buf)?)
}

fn iterate(a: &IterateArgs) -> Result<u8> {
    let oval = load_table(&a.table)?;
    let start = initial_state(&oval, a.state, a.point)?;
    let rows = billiard::orbit(&oval, &start, a.steps)?;
    write_or_stdout(a.out.as_ref(), &orbit_csv(&rows)?)?;
    if let Some(svg) = &a.svg {
        write(svg, &Figure::new(&oval).with_orbit(&oval, &rows, a.circles).to_svg(600.0, 1.5))?;
    }
    Ok(EXIT_OK)
}

/// The regular start first; on failure, randomly rotated and jittered starts
/// in parallel, keeping the converged orbit of least perimeter.
fn search_periodic(oval: &SupportOval, n: usize, m: usize, seed: u64, starts: usize) -> Result<PeriodicOrbit> {
    let first = match periodic::find_periodic(oval, n, m, None) {
        Ok(o) => return Ok(o),
        Err(e) => e,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gap = TAU * m as f64 / n as f64;
    let seeds: Vec<Vec<f64>> = (0..starts)
        .map(|_| {
            let a1 = rng.random_range(0.0..TAU);
            periodic::regular_seed(n, m, a1)
                .into_iter()
                .enumerate()
                .map(|(i, v)| if i == 0 { v } else { v + 0.1 * gap * rng.random_range(-1.0..1.0) })
                .collect()
        })
        .collect();
    let found: Vec<PeriodicOrbit> = seeds
        .par_iter()
        .filter_map(|s| periodic::find_periodic(oval, n, m, Some(s)).ok())
        .collect();
    found
        .into_iter()
        .min_by(|x, y| x.perimeter.total_cmp(&y.perimeter).then(x.angles[0].total_cmp(&y.angles[0])))
        .ok_or_else(|| first.into())
}

fn find_periodic(a: &PeriodicArgs) -> Result<u8> {
    let oval = load_table(&a.table)?;
    let orbit = search_periodic(&oval, a.n, a.m, a.seed, a.samples)?;
    write_or_stdout(a.out.as_ref(), &(orbit.to_json() + "\n"))?;
    if let Some(svg) = &a.svg {
        write(svg, &Figure::new(&oval).with_polygon(&oval, &orbit.angles).to_svg(600.0, 1.5))?;
    }
    Ok(EXIT_OK)
}

fn scan(a: &ScanArgs) -> Result<u8> {
    let oval = load_table(&a.table)?;
    let rep = periodic::invariant_curve_scan(&oval, a.n, a.m, a.samples, a.tol)?;
    let mut buf = Vec::new();
    rep.write_csv(&mut buf)?;
    write_or_stdout(a.out.as_ref(), &String::from_utf8(buf)?)?;
    eprintln!(
        "{} of {} first angles close (longest run {}), max residual {:.3e}, max closure {:.3e}",
        rep.closed,
        rep.samples.len(),
        rep.longest_closed_run,
        rep.max_residual,
        rep.max_closure
    );
    Ok(EXIT_OK)
}

fn verify_cmd(a: &VerifyArgs) -> Result<u8> {
    let oval = load_raw(&a.table)?;
    let rep = verify::verify_table(
        &oval,
        &VerifyOptions {
            samples: a.samples,
            seed: a.seed,
        },
    );
    write_or_stdout(a.out.as_ref(), &(rep.to_json() + "\n"))?;
    for c in &rep.checks {
        eprintln!(
            "{} {}: {}",
            if c.skipped {
                "SKIP"
            } else if c.passed {
                "PASS"
            } else {
                "FAIL"
            },
            c.name,
            c.detail
        );
    }
    Ok(if rep.passed() {
        EXIT_OK
    } else if rep.get("table.validation").is_some_and(|c| !c.passed) {
        EXIT_VALIDATION
    } else {
        EXIT_NUMERIC
    })
}

fn render(a: &RenderArgs) -> Result<u8> {
    let oval = load_table(&a.table)?;
    let mut fig = Figure::new(&oval);
    if let Some((a1, a2)) = a.state {
        let rows = billiard::orbit(&oval, &ChordConfig::new(a1, a2)?, a.steps)?;
        fig = fig.with_orbit(&oval, &rows, a.circles);
    } else if let Some(n) = a.n {
        let o = search_periodic(&oval, n, a.m, 0, 32)?;
        fig = fig.with_polygon(&oval, &o.angles);
    }
    write(&a.svg, &fig.to_svg(a.size, a.stroke))?;
    Ok(EXIT_OK)
}
