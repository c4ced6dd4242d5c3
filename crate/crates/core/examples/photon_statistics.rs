// Photon statistics of the two-photon family cos θ|20⟩ + e^{iφ} sin θ|02⟩.

use coupled_cavities::coherent::{InitialAngles, TwoPhotonKet, TwoPhotonState};
use coupled_cavities::fock::Cavity;
use coupled_cavities::metrics::{concurrence, g2_zero, probabilities};
use coupled_cavities::Result;

pub fn run_example() -> Result<Vec<f64>> {
    let mut g2 = Vec::new();
    for theta in [0.0, 0.3, std::f64::consts::FRAC_PI_4, 1.2] {
        let state = InitialAngles::new(theta, 0.5)?.state();
        let value = g2_zero(&state, Cavity::First)?;
        let report = probabilities(&state);
        println!(
            "θ = {theta:.3}: g2(0) = {value:.6}, C = {:.6}, P20 = {:.3}, P02 = {:.3}",
            concurrence(theta),
            report.p20,
            report.p02
        );
        g2.push(value);
    }
    let one_each = TwoPhotonState::basis(TwoPhotonKet::OneOne);
    println!("|11⟩: g2(0) = {}", g2_zero(&one_each, Cavity::First)?);
    match g2_zero(&TwoPhotonState::basis(TwoPhotonKet::TwoZero), Cavity::Second) {
        Err(e) => println!("|20⟩, cavity 2: {e}"),
        Ok(v) => println!("|20⟩, cavity 2: {v}"),
    }
    Ok(g2)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
