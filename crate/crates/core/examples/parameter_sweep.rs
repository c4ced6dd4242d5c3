// Sweep of the nonlinearity k under dephasing: larger k takes longer to
// settle to the uniform mixture.

use coupled_cavities::experiments::{run_sweep, to_csv, RunConfig, SweepRange, SweepSpec, SweepVariable};
use coupled_cavities::Result;

pub fn run_example() -> Result<Vec<f64>> {
    let base = RunConfig {
        coupling: Some(0.05),
        gamma_d: Some(0.05),
        theta: Some(std::f64::consts::FRAC_PI_4),
        phi: Some(std::f64::consts::PI),
        t_end: Some(1200.0),
        ..RunConfig::default()
    };
    let spec = SweepSpec {
        variable: SweepVariable::K,
        range: SweepRange::Values(vec![0.0, 0.1, 0.3]),
        base,
    };
    let ds = run_sweep(&spec)?;
    print!("{}", to_csv(&ds));
    Ok(ds.column("settle_time").unwrap_or_default())
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
