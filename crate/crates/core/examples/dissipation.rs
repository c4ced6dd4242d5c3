// Cavity decay with interference between the decay channels: the
// master-equation photon numbers follow the closed-form moment flow and the
// antisymmetric single-photon state stays dark.

use std::f64::consts::FRAC_PI_4;

use coupled_cavities::coherent::InitialAngles;
use coupled_cavities::fock::SystemParams;
use coupled_cavities::open_system::{
    build_liouvillian, coherence_state, default_dt, moment_flow_for, propagate_trajectory, DecayRates, MomentVector,
};
use coupled_cavities::Result;

pub fn run_example() -> Result<Vec<(f64, f64, f64)>> {
    let gamma = 0.005;
    let p = SystemParams::deformed_detuned(1.0, 0.0, 0.0, 0.05);
    let rates = DecayRates::maximal_interference(gamma, gamma);
    let lv = build_liouvillian(&p, &rates)?;
    let rho0 = coherence_state(&InitialAngles::new(FRAC_PI_4, 0.0)?, 1.0)?;
    let m0 = MomentVector::from_density(&rho0);
    let times: Vec<f64> = (0..=8).map(|i| i as f64 * 100.0).collect();
    let traj = propagate_trajectory(&lv, &rho0, &times, default_dt(&p, &rates))?;
    let mut rows = Vec::new();
    for (t, rho) in times.iter().zip(&traj) {
        let numeric = MomentVector::from_density(rho).n1;
        let closed = moment_flow_for(&p, &rates, &m0, *t)?.n1;
        println!("t = {t:>5.0}  ⟨n1⟩ master = {numeric:.9}  closed form = {closed:.9}");
        rows.push((*t, numeric, closed));
    }
    Ok(rows)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
