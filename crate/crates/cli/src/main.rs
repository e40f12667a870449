//! `slitcap`: conformal module and capacity of two-slit domains.

mod input;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;
use slitcap_core::diagnostics::{kernel_checks, reference_checks};
use slitcap_core::pipeline::{extrema, sweep_point};
use slitcap_core::reference::{
    sliding_segment, CAPACITY_TOLERANCE, LATTICE_CASES, MODULE_TOLERANCE, SLIDING_SEGMENT_CASES,
};
use slitcap_core::{
    compute, solve, ComputeOptions, PipelineError, SlidingFamily, Stage, Tolerances,
};

use input::{parse_complex, parse_line, FileConfig, Line};
use output::{
    sig9, sign_check, sink, write_report, write_sweep, write_sweep_summary, Format, SweepRow,
};

const EXIT_GEOMETRY: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_TOLERANCE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "slitcap",
    version,
    about = "Conformal module and capacity of the exterior of two slits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration.
    Compute(ComputeArgs),
    /// Slide one slit along a line and tabulate the module.
    Sweep(SweepArgs),
    /// Recompute the built-in reference values.
    Tables(CommonArgs),
    /// Run the kernel property checks and the reference capacities.
    Selftest,
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
}

#[derive(Args)]
struct ComputeArgs {
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    a1: Option<Complex64>,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    a2: Option<Complex64>,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    a3: Option<Complex64>,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    a4: Option<Complex64>,
    /// TOML file with `a1..a4 = [re, im]` and optional tolerances.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Boundary samples per line for the reconstruction check (0 skips it).
    #[arg(long, default_value_t = 128)]
    trace_samples: usize,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Line carrying the moving slit, `x0,y0,dx,dy`; the slit is centred at
    /// `(x0,y0) + a·(dx,dy)/|(dx,dy)|`.
    #[arg(long, value_parser = parse_line, allow_hyphen_values = true)]
    line: Line,
    #[arg(long)]
    length: f64,
    #[arg(long, allow_hyphen_values = true)]
    from: f64,
    #[arg(long, allow_hyphen_values = true)]
    to: f64,
    /// Number of sample points, endpoints included.
    #[arg(long)]
    steps: usize,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    a3: Complex64,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    a4: Complex64,
    /// Concurrent solves (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    common: CommonArgs,
}

/// Error carrying its own exit status.
#[derive(Debug)]
struct Exit(u8, anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Exit {
    fn from(e: E) -> Self {
        Exit(1, e.into())
    }
}

fn pipeline_exit(e: PipelineError) -> Exit {
    let code = if e.stage == Stage::Geometry {
        EXIT_GEOMETRY
    } else {
        EXIT_SOLVER
    };
    Exit(code, e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compute(args) => run_compute(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Tables(args) => run_tables(args),
        Command::Selftest => run_selftest(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn run_compute(args: ComputeArgs) -> Result<(), Exit> {
    let file = match &args.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let cfg = input::endpoints([args.a1, args.a2, args.a3, args.a4], &file)?;
    let tol = input::tolerances(args.common.rel_tol, args.common.abs_tol, &file)?;
    let opts = ComputeOptions {
        tol,
        trace_samples: args.trace_samples,
    };
    let report = compute(&cfg, &opts).map_err(pipeline_exit)?;
    let mut out = sink(args.common.out.as_deref())?;
    write_report(&mut out, &report, args.common.format)?;
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<(), Exit> {
    let tol = input::tolerances(
        args.common.rel_tol,
        args.common.abs_tol,
        &FileConfig::default(),
    )?;
    if args.steps < 2 {
        return Err(anyhow!("a sweep needs at least 2 steps").into());
    }
    let family = SlidingFamily::new(
        args.line.origin,
        args.line.direction,
        args.length,
        args.a3,
        args.a4,
    )
    .map_err(|e| Exit(EXIT_GEOMETRY, e.into()))?;
    let grid: Vec<f64> = (0..args.steps)
        .map(|k| args.from + (args.to - args.from) * k as f64 / (args.steps - 1) as f64)
        .collect();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = args.workers {
        pool = pool.num_threads(w.max(1));
    }
    let pool = pool.build().context("starting worker pool")?;
    let rows: Vec<SweepRow> = pool.install(|| {
        grid.par_iter()
            .map(|&a| (a, sweep_point(&family, a, tol).map_err(|e| e.to_string())))
            .collect()
    });

    let solved: Vec<_> = rows
        .iter()
        .filter_map(|(_, r)| r.as_ref().ok().copied())
        .collect();
    let samples: Vec<(f64, f64)> = solved.iter().map(|p| (p.a, p.module)).collect();
    let ext = extrema(&samples);
    let signs = sign_check(&solved);
    for (a, r) in &rows {
        if let Err(e) = r {
            eprintln!("a = {}: {e}", sig9(*a));
        }
    }

    let mut out = sink(args.common.out.as_deref())?;
    write_sweep(&mut out, &rows, &ext, &signs, args.common.format)?;
    if args.common.format == Format::Csv {
        write_sweep_summary(&mut std::io::stderr(), &ext, &signs)?;
    }
    if solved.is_empty() {
        return Err(Exit(EXIT_SOLVER, anyhow!("every sweep point failed")));
    }
    Ok(())
}

struct TableRow {
    label: String,
    quantity: &'static str,
    computed: f64,
    reference: f64,
    limit: f64,
}

impl TableRow {
    fn delta(&self) -> f64 {
        (self.computed - self.reference).abs()
    }

    fn ok(&self) -> bool {
        self.delta() <= self.limit
    }
}

fn run_tables(args: CommonArgs) -> Result<(), Exit> {
    let tol = input::tolerances(args.rel_tol, args.abs_tol, &FileConfig::default())?;
    let mut rows = Vec::new();
    for &(a, m, _) in &SLIDING_SEGMENT_CASES {
        let sol = solve(&sliding_segment(a), tol).map_err(pipeline_exit)?;
        rows.push(TableRow {
            label: format!("sliding a={a}"),
            quantity: "m",
            computed: sol.state.m,
            reference: m,
            limit: MODULE_TOLERANCE,
        });
    }
    for (i, case) in LATTICE_CASES.iter().enumerate() {
        let sol = solve(&case.config(), tol).map_err(pipeline_exit)?;
        rows.push(TableRow {
            label: format!("lattice #{}", i + 1),
            quantity: "cap",
            computed: 1.0 / sol.state.m,
            reference: case.capacity,
            limit: CAPACITY_TOLERANCE,
        });
    }

    let mut out = sink(args.out.as_deref())?;
    match args.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["case", "quantity", "computed", "reference", "delta"])?;
            for r in &rows {
                w.write_record([
                    r.label.clone(),
                    r.quantity.to_string(),
                    sig9(r.computed),
                    sig9(r.reference),
                    sig9(r.delta()),
                ])?;
            }
            w.flush()?;
        }
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|r| {
                    json!({"case": r.label, "quantity": r.quantity, "computed": r.computed,
                           "reference": r.reference, "delta": r.delta(), "ok": r.ok()})
                })
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
        }
        Format::Text => {
            for r in &rows {
                writeln!(
                    out,
                    "{:<14} {:<4} {:>12} {:>12} {:>10.2e} {}",
                    r.label,
                    r.quantity,
                    sig9(r.computed),
                    sig9(r.reference),
                    r.delta(),
                    if r.ok() { "ok" } else { "FAIL" }
                )?;
            }
        }
    }
    let failed = rows.iter().filter(|r| !r.ok()).count();
    if failed > 0 {
        return Err(Exit(
            EXIT_TOLERANCE,
            anyhow!("{failed} values outside tolerance"),
        ));
    }
    Ok(())
}

fn run_selftest() -> Result<(), Exit> {
    let mut checks = kernel_checks().map_err(|e| Exit(EXIT_SOLVER, e.into()))?;
    checks.extend(reference_checks(Tolerances::default()));
    let mut failed = 0;
    for c in &checks {
        if !c.passed() {
            failed += 1;
        }
        println!(
            "{} {:<22} {:.2e} (limit {:.0e})",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.limit
        );
    }
    println!(
        "{} of {} checks passed",
        checks.len() - failed,
        checks.len()
    );
    if failed > 0 {
        return Err(Exit(
            EXIT_TOLERANCE,
            anyhow!("{failed} self-test checks failed"),
        ));
    }
    Ok(())
}
