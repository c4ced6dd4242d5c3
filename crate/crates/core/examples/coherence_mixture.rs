// Partial coherence between |20⟩ and |02⟩: the peak delocalisation grows
// with ε for φ = 0 and vanishes at ε = 1 for φ = π.

use std::f64::consts::{FRAC_PI_4, PI};

use coupled_cavities::coherent::{max_scan_window, InitialAngles};
use coupled_cavities::experiments::{summarize, Scenario};
use coupled_cavities::fock::SystemParams;
use coupled_cavities::open_system::DecayRates;
use coupled_cavities::Result;

pub fn run_example() -> Result<Vec<(f64, f64, f64)>> {
    let p = SystemParams::deformed_detuned(1.0, 0.0, 0.0, 0.05);
    let window = max_scan_window(&p);
    let mut rows = Vec::new();
    for i in 0..=5 {
        let epsilon = i as f64 / 5.0;
        let peak = |phi: f64| -> Result<f64> {
            let sc = Scenario {
                params: p,
                rates: DecayRates::none(),
                angles: InitialAngles::new(FRAC_PI_4, phi)?,
                epsilon,
            };
            Ok(summarize(&sc, window, None)?.max_p11)
        };
        let (p0, ppi) = (peak(0.0)?, peak(PI)?);
        println!("ε = {epsilon:.1}  max ρ55: φ=0 {p0:.6}  φ=π {ppi:.6}");
        rows.push((epsilon, p0, ppi));
    }
    Ok(rows)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
