//! Probability weighting: the Karmarkar curve against a pure power tail, and
//! the log-log fit that recovers the tail exponent from small probabilities.

use behavioral_comm::prospect::tail_exponent;
use behavioral_comm::WeightFunction;

fn main() -> behavioral_comm::Result<()> {
    let alpha = 0.5;
    let karmarkar = WeightFunction::karmarkar(alpha)?;
    let tail = WeightFunction::power_tail(alpha, 1.0)?;

    println!("{:>8} {:>12} {:>12}", "p", "karmarkar", "power tail");
    for p in [1e-6, 1e-3, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0] {
        println!(
            "{p:>8} {:>12.6} {:>12.6}",
            karmarkar.eval(p)?,
            tail.eval(p)?
        );
    }

    // the fit only sees the tail, so push the grid far into it
    let grid: Vec<f64> = (8..=14).map(|e| 10f64.powi(-e)).collect();
    let fit = tail_exponent(&karmarkar, &grid)?;
    println!("\nfitted tail: alpha = {:.6}, k = {:.6}", fit.alpha, fit.k);
    Ok(())
}
