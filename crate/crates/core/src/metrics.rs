//! Photon statistics, entanglement and localisation diagnostics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coherent::TwoPhotonState;
use crate::error::{Error, Result};
use crate::fock::{self, BasisKet, Cavity};
use crate::numerics::ComplexMatrix;
use crate::open_system::DensityMatrix;

/// Smallest mean photon number for which g2 is reported.
pub const G2_DENOMINATOR_TOL: f64 = 1e-12;

/// Anything that assigns expectation values on the two-cavity space.
pub trait PhotonState {
    fn expectation(&self, op: &ComplexMatrix) -> Complex64;
    fn population(&self, ket: BasisKet) -> f64;
}

impl PhotonState for TwoPhotonState {
    fn expectation(&self, op: &ComplexMatrix) -> Complex64 {
        let v = self.to_full();
        (v.adjoint() * op * &v)[(0, 0)]
    }

    fn population(&self, ket: BasisKet) -> f64 {
        self.to_full()[ket.position()].norm_sqr()
    }
}

impl PhotonState for DensityMatrix {
    fn expectation(&self, op: &ComplexMatrix) -> Complex64 {
        DensityMatrix::expectation(self, op)
    }

    fn population(&self, ket: BasisKet) -> f64 {
        DensityMatrix::population(self, ket)
    }
}

pub fn mean_photon_number<S: PhotonState>(state: &S, cavity: Cavity) -> f64 {
    state.expectation(&fock::number(cavity)).re
}

/// `g²(0) = ⟨a†a†aa⟩ / ⟨a†a⟩²` for one cavity.
pub fn g2_zero<S: PhotonState>(state: &S, cavity: Cavity) -> Result<f64> {
    let mean = mean_photon_number(state, cavity);
    if mean.abs() < G2_DENOMINATOR_TOL {
        return Err(Error::UndefinedCorrelation {
            cavity: cavity.number(),
            mean,
        });
    }
    let a = fock::annihilate(cavity);
    let ad = a.adjoint();
    let pairs = state.expectation(&(&ad * &ad * &a * &a)).re;
    Ok(pairs / (mean * mean))
}

/// `C(θ) = √3 |sinθ cosθ|`.
pub fn concurrence(theta: f64) -> f64 {
    3f64.sqrt() * (theta.sin() * theta.cos()).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityReport {
    pub p20: f64,
    pub p11: f64,
    pub p02: f64,
    pub p_localised: f64,
}

impl ProbabilityReport {
    pub fn total(&self) -> f64 {
        self.p20 + self.p11 + self.p02
    }
}

pub fn probabilities<S: PhotonState>(state: &S) -> ProbabilityReport {
    let p20 = state.population(BasisKet::TwoZero);
    let p11 = state.population(BasisKet::OneOne);
    let p02 = state.population(BasisKet::ZeroTwo);
    ProbabilityReport {
        p20,
        p11,
        p02,
        p_localised: p20 + p02,
    }
}
