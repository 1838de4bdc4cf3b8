//! Normalized discrete utility of a lattice-discretized N(0,1) with a
//! squared-error value, against its continuous limit E[x^2] = 1/alpha.
//!
//! The Karmarkar weight converges slowly: its denominator carries an
//! O(p^alpha) correction that only fades like n^(-alpha). The pure power
//! tail has no such term and is accurate at every lattice.

use behavioral_comm::prospect::{continuous_pt, convergence_study};
use behavioral_comm::{Alpha, GaussianDensity, WeightFunction};

fn main() -> behavioral_comm::Result<()> {
    let p = GaussianDensity::standard();
    let sq = |x: f64| x * x;
    let lattice = [4, 16, 64, 256, 1024];

    for alpha in [0.25, 0.5, 0.75, 1.0] {
        let limit = continuous_pt(&p, sq, Alpha::new(alpha)?);
        println!("alpha = {alpha}: limit {limit:.6}");
        let weights = [
            ("karmarkar", WeightFunction::karmarkar(alpha)?),
            ("power tail", WeightFunction::power_tail(alpha, 1.0)?),
        ];
        for (name, w) in weights {
            let study = convergence_study(&p, sq, &w, &lattice)?;
            let errors: Vec<String> = study.iter().map(|c| format!("{:.2e}", c.error)).collect();
            println!("  {name:>10}: {}", errors.join("  "));
        }
    }
    Ok(())
}
