// Two photons in two coupled cavities without loss: the |+⟩ and |−⟩
// superpositions at resonance, checked against the matrix exponential.

use coupled_cavities::coherent::{evolve_closed, evolve_expm, max_delocalisation, TwoPhotonState};
use coupled_cavities::fock::SystemParams;
use coupled_cavities::Result;

pub fn run_example() -> Result<Vec<(f64, f64, f64)>> {
    let p = SystemParams::deformed_detuned(1.0, 0.0, 0.0, 0.05);
    let mut rows = Vec::new();
    println!("{:>8} {:>12} {:>12} {:>12}", "t", "P11(+)", "P11(-)", "|closed-expm|");
    for i in 0..=10 {
        let t = i as f64 * 6.0;
        let plus = evolve_closed(&p, &TwoPhotonState::plus(), t)?;
        let minus = evolve_closed(&p, &TwoPhotonState::minus(), t)?;
        let oracle = evolve_expm(&p, &TwoPhotonState::plus(), t)?;
        let diff = (plus.c11 - oracle.c11).norm();
        println!("{t:>8.1} {:>12.6} {:>12.2e} {diff:>12.2e}", plus.c11.norm_sqr(), minus.c11.norm_sqr());
        rows.push((t, plus.c11.norm_sqr(), minus.c11.norm_sqr()));
    }
    let best = max_delocalisation(&p, &TwoPhotonState::plus())?;
    println!("max P11 for |+⟩: {:.9} at t = {:.3}", best.value, best.time);
    Ok(rows)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
