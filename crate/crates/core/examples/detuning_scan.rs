// Maximum delocalisation probability of |−⟩ as a function of detuning:
// complete delocalisation appears at |Δ| = 2J.

use coupled_cavities::coherent::{max_delocalisation, TwoPhotonState};
use coupled_cavities::fock::SystemParams;
use coupled_cavities::Result;

pub fn run_example() -> Result<Vec<(f64, f64)>> {
    let coupling = 0.1;
    let mut curve = Vec::new();
    for i in 0..=16 {
        let delta = -0.4 + 0.05 * i as f64;
        let p = SystemParams::deformed_detuned(1.0, delta, 0.0, coupling);
        let m = max_delocalisation(&p, &TwoPhotonState::minus())?;
        let analytic = (4.0 * coupling * delta / (4.0 * coupling * coupling + delta * delta)).powi(2);
        println!("Δ = {delta:+.2}  max P11 = {:.6}  (analytic {analytic:.6})", m.value);
        curve.push((delta, m.value));
    }
    Ok(curve)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
