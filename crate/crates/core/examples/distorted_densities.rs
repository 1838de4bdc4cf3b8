//! The tilted densities of the Gaussian test channel: centers are kept,
//! variances are divided by alpha, and the tilted joint mass does not depend
//! on the encoder.

use behavioral_comm::distortion::tilted_joint_mass;
use behavioral_comm::{Alpha, GaussianTestChannel, LinearEncoder, QuadratureSpec};

fn main() -> behavioral_comm::Result<()> {
    let ch = GaussianTestChannel::new(1.0, 1.0)?;
    let enc = LinearEncoder::new(0.0, 1.0);
    let r = 1.2;

    for a in [1.0, 0.75, 0.5, 0.25] {
        let alpha = Alpha::new(a)?;
        let post = ch.distorted_posterior(&enc, alpha, r);
        let marg = ch.distorted_marginal(&enc, alpha);
        println!(
            "alpha={a:<5} posterior N({:.3}, {:.3})  marginal N({:.3}, {:.3})",
            post.mean(),
            post.variance(),
            marg.mean(),
            marg.variance()
        );
    }

    let alpha = Alpha::new(0.5)?;
    println!(
        "\nnormalizer closed form: {:.8}",
        ch.alpha_normalizer(alpha)
    );
    for k1 in [0.1, 1.0, 10.0] {
        let mass = tilted_joint_mass(
            &ch,
            &LinearEncoder::new(0.0, k1),
            alpha,
            &QuadratureSpec::default(),
        )?;
        println!("  quadrature at k1={k1:<4}: {mass:.8}");
    }
    Ok(())
}
