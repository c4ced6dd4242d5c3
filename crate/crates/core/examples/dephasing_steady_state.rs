// Pure dephasing drives any two-photon state to the uniform mixture over
// |20⟩, |11⟩, |02⟩; the kernel of the generator gives it directly.

use coupled_cavities::coherent::TwoPhotonState;
use coupled_cavities::fock::{BasisKet, SystemParams};
use coupled_cavities::open_system::{
    build_liouvillian, default_dt, propagate_density, steady_state, steady_state_in, DecayRates, DensityMatrix,
};
use coupled_cavities::{Error, Result};

pub fn run_example() -> Result<DensityMatrix> {
    let p = SystemParams::deformed_detuned(1.0, 0.0, 0.0, 0.05);
    let rates = DecayRates::dephasing(0.05);
    let lv = build_liouvillian(&p, &rates)?;
    let sector = [BasisKet::TwoZero, BasisKet::OneOne, BasisKet::ZeroTwo];
    let ss = steady_state_in(&lv, &sector)?;
    let late = propagate_density(&lv, &DensityMatrix::from_two_photon(&TwoPhotonState::minus()), 1500.0, default_dt(&p, &rates))?;
    for k in sector {
        println!("{k}: kernel {:.6}  t=1500 {:.6}", ss.population(k), late.population(k));
    }
    match steady_state(&lv) {
        Err(Error::DegenerateKernel { multiplicity }) => {
            println!("whole space: {multiplicity} independent stationary states")
        }
        other => println!("whole space: {other:?}"),
    }
    Ok(ss)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
