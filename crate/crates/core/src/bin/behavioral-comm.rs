use std::path::PathBuf;
use std::process::ExitCode;

use behavioral_comm::sweep::{self, SweepConfig, VerifyHooks};
use behavioral_comm::Error;
use clap::Parser;

/// Sweep transmit power, write the distortion table and plot data, and
/// optionally run the full verification suite.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Args {
    /// TOML config file; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Monte Carlo seed (overrides `mc_seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo samples per point (overrides `mc_samples`).
    #[arg(long)]
    samples: Option<usize>,
    /// Skip the Monte Carlo columns.
    #[arg(long)]
    no_mc: bool,
    /// Also run every verifier and write `verification.txt`.
    #[arg(long)]
    verify: bool,
}

fn run(args: Args) -> Result<bool, Error> {
    let mut cfg = match &args.config {
        Some(path) => SweepConfig::load(path).map_err(|e| match e {
            Error::Io(io) => {
                Error::Validation(vec![format!("cannot read config {}: {io}", path.display())])
            }
            other => other,
        })?,
        None => SweepConfig::default(),
    };
    if let Some(out) = args.out {
        cfg.output_dir = out;
    }
    if let Some(seed) = args.seed {
        cfg.mc_seed = seed;
    }
    if let Some(samples) = args.samples {
        cfg.mc_samples = samples;
    }
    if args.no_mc {
        cfg.mc = false;
    }
    let plan = cfg.validate()?;

    let (records, paths) = sweep::emit_figure3(&plan)?;
    let mut ok = true;
    for r in records.iter().filter(|r| !r.quad_ok()) {
        eprintln!(
            "quadrature mismatch at alpha={} P={}: relative error {:e} > {:e}",
            r.alpha,
            r.p,
            r.rel_err_quad,
            sweep::QUAD_REL_TOLERANCE
        );
        ok = false;
    }
    println!("wrote {} rows to {}", records.len(), paths.csv.display());
    println!("wrote plot data to {}", paths.figure.display());

    if args.verify {
        let report = sweep::verify(&plan, VerifyHooks::default())?;
        let path = plan.output_dir.join("verification.txt");
        std::fs::write(&path, report.to_text())?;
        for c in report.failures() {
            eprintln!("FAIL {} {:e} {}", c.name, c.metric, c.tolerance);
        }
        println!(
            "verification: {}/{} checks passed, report at {}",
            report.checks.iter().filter(|c| c.passed).count(),
            report.checks.len(),
            path.display()
        );
        ok &= report.passed();
    }
    Ok(ok)
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(sweep::exit_code(&e) as u8)
        }
    }
}
