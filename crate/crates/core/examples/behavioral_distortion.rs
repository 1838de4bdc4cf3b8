//! One linear encoder/decoder pair scored three ways: closed form, raw 2-D
//! quadrature of p(s,r)^alpha, and nested Gauss-Hermite under the tilted laws.

use behavioral_comm::distortion::{
    distortion_closed, distortion_distorted_expectation, distortion_quadrature,
};
use behavioral_comm::{
    AgentProfile, GaussianTestChannel, LinearDecoder, LinearEncoder, QuadratureSpec,
};

fn main() -> behavioral_comm::Result<()> {
    let ch = GaussianTestChannel::new(2.0, 0.5)?;
    let enc = LinearEncoder::new(0.3, 1.5);
    let dec = LinearDecoder::new(0.4, -0.1);
    let quad = QuadratureSpec::default();

    println!(
        "{:>6} {:>14} {:>14} {:>14}",
        "alpha", "closed", "raw 2-D", "tilted GH"
    );
    for a in [1.0, 0.75, 0.5, 0.25, 0.1] {
        let agent = AgentProfile::new(a)?;
        println!(
            "{a:>6} {:>14.10} {:>14.10} {:>14.10}",
            distortion_closed(&ch, &enc, &dec, &agent),
            distortion_quadrature(&ch, &enc, &dec, &agent, &quad)?,
            distortion_distorted_expectation(&ch, &enc, &dec, &agent, &quad)?
        );
    }
    Ok(())
}
