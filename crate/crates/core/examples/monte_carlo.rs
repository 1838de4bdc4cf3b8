//! Both Monte Carlo estimators at the equilibrium, with their standard
//! errors, next to the closed form.

use behavioral_comm::equilibrium::stackelberg_solve;
use behavioral_comm::mc::{mc_distortion, mc_distortion_importance};
use behavioral_comm::{GameSpec, McConfig};

fn main() -> behavioral_comm::Result<()> {
    let cfg = McConfig::new(200_000, 20_180_514)?;
    for alpha in [1.0, 0.75, 0.5, 0.25] {
        let game = GameSpec::new(1.0, 1.0, 1.0, alpha, alpha)?;
        let eq = stackelberg_solve(&game)?;
        let direct = mc_distortion(&game.channel, &eq.encoder, &eq.decoder, &game.tx, &cfg);
        let weighted =
            mc_distortion_importance(&game.channel, &eq.encoder, &eq.decoder, &game.tx, &cfg);
        println!(
            "alpha={alpha:<5} closed {:.5}  direct {:.5} ± {:.5}  importance {:.5} ± {:.5}",
            eq.d_t, direct.value, direct.std_err, weighted.value, weighted.std_err
        );
    }
    Ok(())
}
