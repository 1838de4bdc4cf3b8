//! Leader-follower equilibrium with biased agents, checked by a gain grid
//! search and a decoder perturbation stencil.

use behavioral_comm::equilibrium::stackelberg_solve_verified;
use behavioral_comm::{GameSpec, QuadratureSpec};

fn main() -> behavioral_comm::Result<()> {
    let quad = QuadratureSpec::default();
    for (at, ar) in [(1.0, 1.0), (0.5, 0.25), (0.25, 0.75)] {
        let game = GameSpec::new(1.0, 1.0, 1.0, at, ar)?;
        let eq = stackelberg_solve_verified(&game, &quad)?;
        let diag = eq
            .diagnostics
            .as_ref()
            .expect("verified solve reports diagnostics");
        println!(
            "alpha_T={at:<4} alpha_R={ar:<4} k1={} a={} D_T={:.4} D_R={:.4} D_T/D_R={:.4}",
            eq.encoder.k1,
            eq.decoder.a,
            eq.d_t,
            eq.d_r,
            eq.d_t / eq.d_r
        );
        println!(
            "    grid margin {:.2e}, argmin at boundary: {}, min decoder excess {:.3e}, verified: {}",
            diag.encoder.worst_margin,
            diag.encoder.argmin_at_boundary,
            diag.decoder.min_excess_nonzero.unwrap_or(f64::NAN),
            eq.verified
        );
    }

    match stackelberg_solve_verified(&GameSpec::new(1.0, 1.0, 0.0, 0.5, 0.5)?, &quad) {
        Err(behavioral_comm::Error::DegenerateGame(rep)) => {
            println!("P=0: nothing is sent, D_T = D_R = {}", rep.d_t)
        }
        other => println!("P=0: unexpected {other:?}"),
    }
    Ok(())
}
