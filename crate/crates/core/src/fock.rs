//! Two-cavity Fock space truncated at two photons in total.
//!
//! Basis order: |00⟩, |10⟩, |01⟩, |20⟩, |11⟩, |02⟩ (indices 1..6). The
//! ordering matches the density-matrix labels used throughout the crate, so
//! `ρ_45` is ⟨20|ρ|11⟩.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{c64, ComplexMatrix};

pub const DIM: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BasisKet {
    Vacuum,
    OneZero,
    ZeroOne,
    TwoZero,
    OneOne,
    ZeroTwo,
}

impl BasisKet {
    pub const ALL: [BasisKet; DIM] = [
        BasisKet::Vacuum,
        BasisKet::OneZero,
        BasisKet::ZeroOne,
        BasisKet::TwoZero,
        BasisKet::OneOne,
        BasisKet::ZeroTwo,
    ];

    /// One-based label index (|00⟩ → 1, …, |02⟩ → 6).
    pub fn index(self) -> usize {
        self.position() + 1
    }

    /// Zero-based row/column in matrices.
    pub fn position(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Result<Self> {
        index
            .checked_sub(1)
            .and_then(|p| Self::ALL.get(p).copied())
            .ok_or_else(|| Error::validation(format!("basis index must be in 1..=6, got {index}")))
    }

    pub fn from_occupations(n1: usize, n2: usize) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.occupations() == (n1, n2))
    }

    pub fn occupations(self) -> (usize, usize) {
        match self {
            BasisKet::Vacuum => (0, 0),
            BasisKet::OneZero => (1, 0),
            BasisKet::ZeroOne => (0, 1),
            BasisKet::TwoZero => (2, 0),
            BasisKet::OneOne => (1, 1),
            BasisKet::ZeroTwo => (0, 2),
        }
    }

    pub fn photon_number(self) -> usize {
        let (a, b) = self.occupations();
        a + b
    }
}

impl fmt::Display for BasisKet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.occupations();
        write!(f, "|{a}{b}⟩")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cavity {
    First,
    Second,
}

impl Cavity {
    pub fn number(self) -> usize {
        match self {
            Cavity::First => 1,
            Cavity::Second => 2,
        }
    }

    fn occupation(self, ket: BasisKet) -> usize {
        let (a, b) = ket.occupations();
        match self {
            Cavity::First => a,
            Cavity::Second => b,
        }
    }

    fn lowered(self, ket: BasisKet) -> Option<BasisKet> {
        let (a, b) = ket.occupations();
        match self {
            Cavity::First if a > 0 => BasisKet::from_occupations(a - 1, b),
            Cavity::Second if b > 0 => BasisKet::from_occupations(a, b - 1),
            _ => None,
        }
    }
}

impl TryFrom<usize> for Cavity {
    type Error = Error;

    fn try_from(value: usize) -> Result<Self> {
        match value {
            1 => Ok(Cavity::First),
            2 => Ok(Cavity::Second),
            other => Err(Error::validation(format!("cavity index must be 1 or 2, got {other}"))),
        }
    }
}

/// Parameters of the two-cavity Hamiltonian (ħ = 1).
///
/// `chi1`/`chi2` are independent of `k`; the deformed-operator form of the
/// Hamiltonian only holds when `chi_m = omega_m * k`, see
/// [`SystemParams::is_deformed_consistent`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega1: f64,
    pub omega2: f64,
    pub chi1: f64,
    pub chi2: f64,
    pub k: f64,
    /// Inter-cavity coupling J.
    pub coupling: f64,
}

impl SystemParams {
    /// Kerr strengths tied to the deformation, `chi_m = omega_m k`.
    pub fn deformed(omega1: f64, omega2: f64, k: f64, coupling: f64) -> Self {
        SystemParams {
            omega1,
            omega2,
            chi1: omega1 * k,
            chi2: omega2 * k,
            k,
            coupling,
        }
    }

    /// Kerr cavities with linear (k = 0) coupling.
    pub fn kerr(omega1: f64, omega2: f64, chi1: f64, chi2: f64, coupling: f64) -> Self {
        SystemParams {
            omega1,
            omega2,
            chi1,
            chi2,
            k: 0.0,
            coupling,
        }
    }

    pub fn linear(omega1: f64, omega2: f64, coupling: f64) -> Self {
        Self::deformed(omega1, omega2, 0.0, coupling)
    }

    /// Deformed-consistent parameters with `omega2 = omega1 - detuning`.
    pub fn deformed_detuned(omega1: f64, detuning: f64, k: f64, coupling: f64) -> Self {
        Self::deformed(omega1, omega1 - detuning, k, coupling)
    }

    /// Δ = ω₁ − ω₂.
    pub fn detuning(&self) -> f64 {
        self.omega1 - self.omega2
    }

    pub fn is_deformed_consistent(&self) -> bool {
        let tol = 1e-12 * (1.0 + self.omega1.abs().max(self.omega2.abs()));
        (self.chi1 - self.omega1 * self.k).abs() <= tol && (self.chi2 - self.omega2 * self.k).abs() <= tol
    }

    /// Effective two-photon hopping J√(2(1+k)).
    pub fn effective_coupling(&self) -> f64 {
        self.coupling * (2.0 * (1.0 + self.k)).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [self.omega1, self.omega2, self.chi1, self.chi2, self.k, self.coupling];
        if fields.iter().any(|x| !x.is_finite()) {
            return Err(Error::validation("system parameters must be finite"));
        }
        if self.k < 0.0 {
            return Err(Error::validation(format!("deformation k must be >= 0, got {}", self.k)));
        }
        Ok(())
    }

    pub(crate) fn require_deformed_consistent(&self) -> Result<()> {
        if self.is_deformed_consistent() {
            Ok(())
        } else {
            Err(Error::validation(format!(
                "closed form requires chi_m = omega_m k (chi1={}, chi2={}, k={})",
                self.chi1, self.chi2, self.k
            )))
        }
    }
}

fn ladder(cavity: Cavity, element: impl Fn(usize) -> f64) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(DIM, DIM);
    for ket in BasisKet::ALL {
        if let Some(lower) = cavity.lowered(ket) {
            m[(lower.position(), ket.position())] = c64(element(cavity.occupation(ket)), 0.0);
        }
    }
    m
}

/// Bosonic annihilation operator `a_m`; ⟨n−1|a|n⟩ = √n.
pub fn annihilate(cavity: Cavity) -> ComplexMatrix {
    ladder(cavity, |n| (n as f64).sqrt())
}

pub fn create(cavity: Cavity) -> ComplexMatrix {
    annihilate(cavity).adjoint()
}

/// Deformed operator `K_m = √(1 + k a†a) a`, with
/// `K|n⟩ = √n √(1 + k(n−1)) |n−1⟩`.
pub fn deformed_annihilate(cavity: Cavity, k: f64) -> Result<ComplexMatrix> {
    if !(k >= 0.0) {
        return Err(Error::validation(format!("deformation k must be >= 0, got {k}")));
    }
    Ok(ladder(cavity, |n| {
        let n = n as f64;
        (n * (1.0 + k * (n - 1.0))).sqrt()
    }))
}

pub fn number(cavity: Cavity) -> ComplexMatrix {
    let mut n = ComplexMatrix::zeros(DIM, DIM);
    for ket in BasisKet::ALL {
        let (n1, n2) = ket.occupations();
        let count = match cavity {
            Cavity::First => n1,
            Cavity::Second => n2,
        };
        n[(ket.position(), ket.position())] = Complex64::new(count as f64, 0.0);
    }
    n
}

/// `N = a₁†a₁ + a₂†a₂`.
pub fn total_number() -> ComplexMatrix {
    number(Cavity::First) + number(Cavity::Second)
}

/// Full 6×6 Hamiltonian
/// `ω₁n₁ + ω₂n₂ + χ₁a₁†²a₁² + χ₂a₂†²a₂² + J(K₂†K₁ + K₁†K₂)`.
///
/// Products are formed with the lowering operator on the right so that no
/// intermediate state leaves the two-photon truncation.
pub fn hamiltonian(p: &SystemParams) -> ComplexMatrix {
    let a1 = annihilate(Cavity::First);
    let a2 = annihilate(Cavity::Second);
    // k is validated by callers; clamp so a stray negative never produces NaN here.
    let k = p.k.max(0.0);
    let k1 = ladder(Cavity::First, |n| (n as f64 * (1.0 + k * (n as f64 - 1.0))).sqrt());
    let k2 = ladder(Cavity::Second, |n| (n as f64 * (1.0 + k * (n as f64 - 1.0))).sqrt());

    let pair1 = a1.adjoint() * a1.adjoint() * &a1 * &a1;
    let pair2 = a2.adjoint() * a2.adjoint() * &a2 * &a2;
    let hop = k2.adjoint() * &k1 + k1.adjoint() * &k2;

    number(Cavity::First).scale(p.omega1)
        + number(Cavity::Second).scale(p.omega2)
        + pair1.scale(p.chi1)
        + pair2.scale(p.chi2)
        + hop.scale(p.coupling)
}

/// Hamiltonian written with deformed operators,
/// `ω₁K₁†K₁ + ω₂K₂†K₂ + J(K₂†K₁ + K₁†K₂)`; equals [`hamiltonian`] when
/// `chi_m = omega_m k`.
pub fn deformed_hamiltonian(omega1: f64, omega2: f64, k: f64, coupling: f64) -> Result<ComplexMatrix> {
    let k1 = deformed_annihilate(Cavity::First, k)?;
    let k2 = deformed_annihilate(Cavity::Second, k)?;
    Ok((k1.adjoint() * &k1).scale(omega1)
        + (k2.adjoint() * &k2).scale(omega2)
        + (k2.adjoint() * &k1 + k1.adjoint() * &k2).scale(coupling))
}

/// Real symmetric 3×3 block of H on {|20⟩, |11⟩, |02⟩}.
pub fn two_photon_block(p: &SystemParams) -> [[f64; 3]; 3] {
    let h = hamiltonian(p);
    let offset = BasisKet::TwoZero.position();
    let mut block = [[0.0; 3]; 3];
    for (i, row) in block.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = h[(offset + i, offset + j)].re;
        }
    }
    block
}

pub(crate) fn block_to_matrix(block: &[[f64; 3]; 3]) -> ComplexMatrix {
    ComplexMatrix::from_fn(3, 3, |i, j| Complex64::new(block[i][j], 0.0))
}
