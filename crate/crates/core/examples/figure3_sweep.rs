//! Distortion against transmit power for several weighting exponents,
//! written as CSV and gnuplot blocks under `target/figure3/`.
//!
//! Plot with `plot for [i=0:3] 'figure3.dat' index i with lines`.

use std::path::PathBuf;

use behavioral_comm::sweep::{emit_figure3, SweepConfig};

fn main() -> behavioral_comm::Result<()> {
    let cfg = SweepConfig {
        mc_samples: 20_000,
        output_dir: PathBuf::from("target/figure3"),
        ..SweepConfig::default()
    };
    let (records, paths) = emit_figure3(&cfg.validate()?)?;
    for r in records.iter().filter(|r| r.p == 1.0 || r.p == 20.0) {
        println!(
            "alpha={:<5} P={:<5} D={:.5} quad rel err {:.1e} mc {:.5}",
            r.alpha,
            r.p,
            r.d_closed,
            r.rel_err_quad,
            r.d_mc.unwrap_or(f64::NAN)
        );
    }
    println!(
        "wrote {} and {}",
        paths.csv.display(),
        paths.figure.display()
    );
    Ok(())
}
