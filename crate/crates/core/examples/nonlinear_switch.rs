// Intensity-dependent coupling: detuning to Δ = −2ω₁k makes |20⟩ → |11⟩
// resonant while the onward step to |02⟩ stays blocked.

use coupled_cavities::coherent::{
    average_energy, max_population, resonance_detuning, ResonanceMode, TwoPhotonKet, TwoPhotonState,
};
use coupled_cavities::fock::SystemParams;
use coupled_cavities::Result;

pub fn run_example() -> Result<(f64, f64)> {
    let (omega1, k, coupling) = (1.0, 0.5, 0.05);
    let probe = SystemParams::deformed_detuned(omega1, 0.0, k, coupling);
    let delta = resonance_detuning(TwoPhotonKet::TwoZero, &probe, ResonanceMode::Deformed)?;
    let p = SystemParams::deformed_detuned(omega1, delta, k, coupling);
    for ket in [TwoPhotonKet::TwoZero, TwoPhotonKet::OneOne, TwoPhotonKet::ZeroTwo] {
        println!("⟨{}|H|{}⟩ = {:.3}", ket.basis(), ket.basis(), average_energy(&p, ket)?);
    }
    let s0 = TwoPhotonState::basis(TwoPhotonKet::TwoZero);
    let p11 = max_population(&p, &s0, TwoPhotonKet::OneOne)?.value;
    let p02 = max_population(&p, &s0, TwoPhotonKet::ZeroTwo)?.value;
    println!("Δ = {delta:+.3}: max P11 = {p11:.6}, max P02 = {p02:.2e}");
    Ok((p11, p02))
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
