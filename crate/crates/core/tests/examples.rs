//! Runs every example and checks its headline numbers.

#![allow(dead_code)]

macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!("../examples/", stringify!($name), ".rs"));
        }
    };
}

example!(cavity_array);
example!(closed_dynamics);
example!(coherence_mixture);
example!(dephasing_steady_state);
example!(detuning_scan);
example!(dissipation);
example!(figure_export);
example!(nonlinear_switch);
example!(parameter_sweep);
example!(photon_statistics);

#[test]
fn cavity_array_orders_phases() {
    let (phi0, phipi) = cavity_array::run_example().unwrap();
    assert!(phi0 > phipi);
}

#[test]
fn closed_dynamics_minus_stays_localised() {
    let rows = closed_dynamics::run_example().unwrap();
    assert!(rows.iter().all(|r| r.2 < 1e-12));
    assert!(rows.iter().all(|r| (r.1 - (0.1 * r.0).sin().powi(2)).abs() < 1e-9));
}

#[test]
fn coherence_mixture_endpoints() {
    let rows = coherence_mixture::run_example().unwrap();
    let last = rows.last().unwrap();
    assert!((last.1 - 1.0).abs() < 1e-6 && last.2 < 1e-6);
}

#[test]
fn dephasing_example_is_uniform() {
    let ss = dephasing_steady_state::run_example().unwrap();
    assert!((ss.purity() - 1.0 / 3.0).abs() < 1e-10);
}

#[test]
fn detuning_scan_peaks_at_two_j() {
    let curve = detuning_scan::run_example().unwrap();
    for (delta, value) in curve {
        if (delta.abs() - 0.2).abs() < 1e-9 {
            assert!(value > 0.999);
        }
    }
}

#[test]
fn dissipation_matches_closed_form() {
    for (_, numeric, closed) in dissipation::run_example().unwrap() {
        assert!((numeric - closed).abs() < 1e-6);
    }
}

#[test]
fn figure_export_round_trips() {
    assert_eq!(figure_export::run_example().unwrap(), 29 * 29);
}

#[test]
fn nonlinear_switch_blocks_second_step() {
    let (p11, p02) = nonlinear_switch::run_example().unwrap();
    assert!(p11 > 0.95 && p02 < 0.05);
}

#[test]
fn sweep_settles_slower_with_k() {
    let settle = parameter_sweep::run_example().unwrap();
    assert!(settle.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn photon_statistics_values() {
    let g2 = photon_statistics::run_example().unwrap();
    assert!((g2[0] - 0.5).abs() < 1e-12);
}
