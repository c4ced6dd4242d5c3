//! Closed-system dynamics in the two-photon sector {|20⟩, |11⟩, |02⟩}.
//!
//! Because `[H, N] = 0`, a two-photon state stays in this three-dimensional
//! subspace. The propagator `exp(Mt)` with `M = −iH₂` is available in three
//! forms:
//!
//! * [`ClosedFormPropagator`]: the partial-fraction expansion
//!   `exp(Mt) = L₁M² − L₂M + L₃` with the `L` sums built from the
//!   eigenvalues of `M`. Needs a non-degenerate spectrum and the deformed
//!   tie `χ_m = ω_m k`.
//! * [`evolve_expm`]: a direct matrix exponential, valid for any parameters.
//! * [`TwoPhotonPropagator`]: the Hermitian eigen-decomposition, used for
//!   dense time scans.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, BasisKet, SystemParams};
use crate::numerics::{self, c64, eig_hermitian, ComplexMatrix, ComplexVector, SpectralDecomp};

const I: Complex64 = Complex64::new(0.0, 1.0);
const NORM_TOL: f64 = 1e-10;

/// Basis states of the two-photon sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TwoPhotonKet {
    TwoZero,
    OneOne,
    ZeroTwo,
}

impl TwoPhotonKet {
    pub const ALL: [TwoPhotonKet; 3] = [TwoPhotonKet::TwoZero, TwoPhotonKet::OneOne, TwoPhotonKet::ZeroTwo];

    pub fn basis(self) -> BasisKet {
        match self {
            TwoPhotonKet::TwoZero => BasisKet::TwoZero,
            TwoPhotonKet::OneOne => BasisKet::OneOne,
            TwoPhotonKet::ZeroTwo => BasisKet::ZeroTwo,
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// `c20|20⟩ + c11|11⟩ + c02|02⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPhotonState {
    pub c20: Complex64,
    pub c11: Complex64,
    pub c02: Complex64,
}

impl TwoPhotonState {
    pub fn new(c20: Complex64, c11: Complex64, c02: Complex64) -> Result<Self> {
        let s = TwoPhotonState { c20, c11, c02 };
        s.require_normalized()?;
        Ok(s)
    }

    pub fn basis(ket: TwoPhotonKet) -> Self {
        let mut amps = [Complex64::ZERO; 3];
        amps[ket.slot()] = Complex64::ONE;
        Self::from_array(amps)
    }

    /// `(|20⟩ + |02⟩)/√2`.
    pub fn plus() -> Self {
        InitialAngles::PLUS.state()
    }

    /// `(|20⟩ − |02⟩)/√2`.
    pub fn minus() -> Self {
        InitialAngles::MINUS.state()
    }

    pub fn from_array(a: [Complex64; 3]) -> Self {
        TwoPhotonState { c20: a[0], c11: a[1], c02: a[2] }
    }

    pub fn amplitudes(&self) -> [Complex64; 3] {
        [self.c20, self.c11, self.c02]
    }

    pub fn amplitude(&self, ket: TwoPhotonKet) -> Complex64 {
        self.amplitudes()[ket.slot()]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// |c20|², |c11|², |c02|².
    pub fn populations(&self) -> [f64; 3] {
        self.amplitudes().map(|z| z.norm_sqr())
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &TwoPhotonState) -> Complex64 {
        self.amplitudes()
            .iter()
            .zip(other.amplitudes())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |⟨self|other⟩|; insensitive to global phase.
    pub fn fidelity(&self, other: &TwoPhotonState) -> f64 {
        self.inner(other).norm()
    }

    /// Embedding into the six-dimensional truncated space.
    pub fn to_full(&self) -> ComplexVector {
        let mut v = ComplexVector::zeros(fock::DIM);
        for ket in TwoPhotonKet::ALL {
            v[ket.basis().position()] = self.amplitude(ket);
        }
        v
    }

    fn require_normalized(&self) -> Result<()> {
        let norm = self.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::validation(format!("two-photon state not normalised (norm {norm})")));
        }
        Ok(())
    }

    fn to_vector(self) -> ComplexVector {
        ComplexVector::from_vec(self.amplitudes().to_vec())
    }
}

/// `cos θ |20⟩ + e^{iφ} sin θ |02⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialAngles {
    pub theta: f64,
    pub phi: f64,
}

impl InitialAngles {
    pub const PLUS: InitialAngles = InitialAngles { theta: FRAC_PI_4, phi: 0.0 };
    pub const MINUS: InitialAngles = InitialAngles { theta: FRAC_PI_4, phi: PI };

    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        let angles = InitialAngles { theta, phi };
        angles.validate()?;
        Ok(angles)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=FRAC_PI_2 + 1e-15).contains(&self.theta) {
            return Err(Error::validation(format!("theta must lie in [0, pi/2], got {}", self.theta)));
        }
        if !(0.0..2.0 * PI).contains(&self.phi) {
            return Err(Error::validation(format!("phi must lie in [0, 2pi), got {}", self.phi)));
        }
        Ok(())
    }

    pub fn state(&self) -> TwoPhotonState {
        TwoPhotonState {
            c20: c64(self.theta.cos(), 0.0),
            c11: Complex64::ZERO,
            c02: Complex64::from_polar(self.theta.sin(), self.phi),
        }
    }
}

/// Entries of `M = −iH₂` in the deformed model:
/// `a = −2iω₁(1+k)`, `b = −i√(2(1+k))J`, `c = −i(ω₁+ω₂)`, `d = −2iω₂(1+k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSet {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl CoefficientSet {
    pub fn new(p: &SystemParams) -> Result<Self> {
        p.validate()?;
        p.require_deformed_consistent()?;
        let (w1, w2, k, j) = (p.omega1, p.omega2, p.k, p.coupling);
        Ok(CoefficientSet {
            a: c64(0.0, -2.0 * w1 * (1.0 + k)),
            b: c64(0.0, -(2.0 * (1.0 + k)).sqrt() * j),
            c: c64(0.0, -(w1 + w2)),
            d: c64(0.0, -2.0 * w2 * (1.0 + k)),
        })
    }

    /// `M = [[a, b, 0], [b, c, b], [0, b, d]]`.
    pub fn matrix(&self) -> ComplexMatrix {
        let z = Complex64::ZERO;
        ComplexMatrix::from_row_slice(3, 3, &[self.a, self.b, z, self.b, self.c, self.b, z, self.b, self.d])
    }
}

/// Partial-fraction weights of `exp(Mt) = L₁M² − L₂M + L₃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LCoefficients {
    pub l1: Complex64,
    pub l2: Complex64,
    pub l3: Complex64,
    /// Eigenvalues of `−iH` restricted to the two-photon block.
    pub lambdas: [Complex64; 3],
}

/// Propagator built from the printed closed-form amplitudes.
#[derive(Debug, Clone)]
pub struct ClosedFormPropagator {
    coeffs: CoefficientSet,
    lambdas: [Complex64; 3],
}

impl ClosedFormPropagator {
    pub fn new(p: &SystemParams) -> Result<Self> {
        let coeffs = CoefficientSet::new(p)?;
        let block = fock::two_photon_block(p);
        let spectrum = eig_hermitian(&fock::block_to_matrix(&block))?;
        let gap = spectrum.relative_gap();
        if gap < numerics::DEGENERACY_THRESHOLD {
            return Err(Error::Degenerate { gap });
        }
        let e = &spectrum.eigenvalues;
        let lambdas = [c64(0.0, -e[0]), c64(0.0, -e[1]), c64(0.0, -e[2])];
        Ok(ClosedFormPropagator { coeffs, lambdas })
    }

    pub fn coefficients(&self) -> &CoefficientSet {
        &self.coeffs
    }

    pub fn l_coefficients(&self, t: f64) -> LCoefficients {
        let [x1, x2, x3] = self.lambdas;
        let e1 = (x1 * t).exp() / ((x1 - x2) * (x1 - x3));
        let e2 = (x2 * t).exp() / ((x2 - x1) * (x2 - x3));
        let e3 = (x3 * t).exp() / ((x3 - x1) * (x3 - x2));
        LCoefficients {
            l1: e1 + e2 + e3,
            l2: e1 * (x2 + x3) + e2 * (x3 + x1) + e3 * (x2 + x1),
            l3: e1 * (x2 * x3) + e2 * (x3 * x1) + e3 * (x2 * x1),
            lambdas: self.lambdas,
        }
    }

    /// Amplitudes C₁(t), C₂(t), C₃(t) from the initial amplitudes.
    pub fn evolve(&self, s0: &TwoPhotonState, t: f64) -> TwoPhotonState {
        let CoefficientSet { a, b, c, d } = self.coeffs;
        let LCoefficients { l1, l2, l3, .. } = self.l_coefficients(t);
        let [c1, c2, c3] = s0.amplitudes();
        let to_11_from_20 = l1 * (a * b + b * c) - l2 * b;
        let to_11_from_02 = l1 * (b * c + b * d) - l2 * b;
        let cross = l1 * b * b;
        TwoPhotonState {
            c20: ((a * a + b * b) * l1 - l2 * a + l3) * c1 + to_11_from_20 * c2 + cross * c3,
            c11: to_11_from_20 * c1 + (l1 * (2.0 * b * b + c * c) - l2 * c + l3) * c2 + to_11_from_02 * c3,
            c02: cross * c1 + to_11_from_02 * c2 + (l1 * (b * b + d * d) - l2 * d + l3) * c3,
        }
    }

    /// (C_{20→11}, C_{02→11}) = (L₁(ab+bc) − L₂b, L₁(bd+bc) − L₂b).
    pub fn transition_amplitudes(&self, t: f64) -> (Complex64, Complex64) {
        let CoefficientSet { a, b, c, d } = self.coeffs;
        let l = self.l_coefficients(t);
        (l.l1 * (a * b + b * c) - l.l2 * b, l.l1 * (b * d + b * c) - l.l2 * b)
    }
}

pub fn l_coefficients(p: &SystemParams, t: f64) -> Result<LCoefficients> {
    Ok(ClosedFormPropagator::new(p)?.l_coefficients(t))
}

pub fn evolve_closed(p: &SystemParams, s0: &TwoPhotonState, t: f64) -> Result<TwoPhotonState> {
    s0.require_normalized()?;
    Ok(ClosedFormPropagator::new(p)?.evolve(s0, t))
}

/// `exp(−iH₂t)` applied directly; valid for any Kerr strengths and
/// deformation, including degenerate spectra.
pub fn evolve_expm(p: &SystemParams, s0: &TwoPhotonState, t: f64) -> Result<TwoPhotonState> {
    p.validate()?;
    s0.require_normalized()?;
    let h = fock::block_to_matrix(&fock::two_photon_block(p));
    let u = numerics::expm(&h.map(|z| z * c64(0.0, -t)))?;
    let v = u * s0.to_vector();
    Ok(TwoPhotonState::from_array([v[0], v[1], v[2]]))
}

pub fn transition_amplitudes(p: &SystemParams, t: f64) -> Result<(Complex64, Complex64)> {
    Ok(ClosedFormPropagator::new(p)?.transition_amplitudes(t))
}

/// Two-photon propagator from the Hermitian eigen-decomposition of H₂.
#[derive(Debug, Clone)]
pub struct TwoPhotonPropagator {
    spectrum: SpectralDecomp,
}

impl TwoPhotonPropagator {
    pub fn new(p: &SystemParams) -> Result<Self> {
        p.validate()?;
        let spectrum = eig_hermitian(&fock::block_to_matrix(&fock::two_photon_block(p)))?;
        Ok(TwoPhotonPropagator { spectrum })
    }

    pub fn energies(&self) -> &[f64] {
        &self.spectrum.eigenvalues
    }

    pub fn unitary(&self, t: f64) -> ComplexMatrix {
        self.spectrum.propagator(t)
    }

    pub fn evolve(&self, s0: &TwoPhotonState, t: f64) -> TwoPhotonState {
        let v = self.unitary(t) * s0.to_vector();
        TwoPhotonState::from_array([v[0], v[1], v[2]])
    }
}

/// P_{|11⟩}(t) for `cos θ|20⟩ + e^{iφ} sin θ|02⟩`. Uses the closed form when
/// it applies and the matrix exponential otherwise.
pub fn delocalisation_probability(p: &SystemParams, angles: &InitialAngles, t: f64) -> Result<f64> {
    angles.validate()?;
    let s0 = angles.state();
    let evolved = match ClosedFormPropagator::new(p) {
        Ok(prop) => prop.evolve(&s0, t),
        Err(Error::Degenerate { .. }) | Err(Error::Validation(_)) => evolve_expm(p, &s0, t)?,
        Err(other) => return Err(other),
    };
    Ok(evolved.c11.norm_sqr())
}

/// Equal-weight superposition (θ = π/4) delocalisation probability written
/// in terms of `L₁`, `L₂`, and the relative phase:
/// `|b|²/2 · |(1+e^{iφ})(L₂ + iL₁(ω₁+ω₂)) + 2iL₁(1+k)(ω₁ + e^{iφ}ω₂)|²`.
pub fn equal_weight_delocalisation(p: &SystemParams, phi: f64, t: f64) -> Result<f64> {
    let prop = ClosedFormPropagator::new(p)?;
    let l = prop.l_coefficients(t);
    let b = prop.coeffs.b;
    let phase = Complex64::from_polar(1.0, phi);
    let bracket = (1.0 + phase) * (l.l2 + I * l.l1 * (p.omega1 + p.omega2))
        + 2.0 * I * l.l1 * (1.0 + p.k) * (p.omega1 + phase * p.omega2);
    Ok(b.norm_sqr() / 2.0 * bracket.norm_sqr())
}

/// Product-state delocalisation probability,
/// `|b|² |iL₁(ω_m(3+2k) + ω_n) + L₂|²` where `m` is the initially occupied cavity.
pub fn product_state_delocalisation(p: &SystemParams, initial: TwoPhotonKet, t: f64) -> Result<f64> {
    let (wm, wn) = match initial {
        TwoPhotonKet::TwoZero => (p.omega1, p.omega2),
        TwoPhotonKet::ZeroTwo => (p.omega2, p.omega1),
        TwoPhotonKet::OneOne => {
            return Err(Error::validation("product-state formula applies to |20⟩ or |02⟩"));
        }
    };
    let prop = ClosedFormPropagator::new(p)?;
    let l = prop.l_coefficients(t);
    let inner = I * l.l1 * (wm * (3.0 + 2.0 * p.k) + wn) + l.l2;
    Ok(prop.coeffs.b.norm_sqr() * inner.norm_sqr())
}

/// ⟨ψ|H|ψ⟩ for a two-photon basis state in the deformed model:
/// 2ω₁(1+k), ω₁+ω₂, 2ω₂(1+k).
pub fn average_energy(p: &SystemParams, ket: TwoPhotonKet) -> Result<f64> {
    p.validate()?;
    p.require_deformed_consistent()?;
    Ok(match ket {
        TwoPhotonKet::TwoZero => 2.0 * p.omega1 * (1.0 + p.k),
        TwoPhotonKet::OneOne => p.omega1 + p.omega2,
        TwoPhotonKet::ZeroTwo => 2.0 * p.omega2 * (1.0 + p.k),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResonanceMode {
    /// Intensity-dependent coupling with χ_m = ω_m k.
    Deformed,
    /// Kerr cavities with linear coupling.
    KerrOnly,
}

/// Detuning Δ = ω₁ − ω₂ that makes the initial localised state degenerate
/// (in average energy) with |11⟩.
///
/// Deformed: −2ω₁k for |20⟩, +2ω₂k for |02⟩. Kerr-only: −2χ₁ for |20⟩,
/// +2χ₂ for |02⟩.
pub fn resonance_detuning(initial: TwoPhotonKet, p: &SystemParams, mode: ResonanceMode) -> Result<f64> {
    p.validate()?;
    if mode == ResonanceMode::Deformed {
        p.require_deformed_consistent()?;
    }
    match (initial, mode) {
        (TwoPhotonKet::OneOne, _) => Err(Error::validation("|11⟩ is already the delocalised state")),
        (TwoPhotonKet::TwoZero, ResonanceMode::Deformed) => Ok(-2.0 * p.omega1 * p.k),
        (TwoPhotonKet::ZeroTwo, ResonanceMode::Deformed) => Ok(2.0 * p.omega2 * p.k),
        (TwoPhotonKet::TwoZero, ResonanceMode::KerrOnly) => Ok(-2.0 * p.chi1),
        (TwoPhotonKet::ZeroTwo, ResonanceMode::KerrOnly) => Ok(2.0 * p.chi2),
    }
}

/// Grid points used for time maximisation.
pub const MAX_SCAN_POINTS: usize = 4001;

/// Upper end of the time-maximisation window, 20π/J_eff with
/// J_eff = J√(2(1+k)). Falls back to 1 for uncoupled cavities, whose
/// populations are constant.
pub fn max_scan_window(p: &SystemParams) -> f64 {
    let j_eff = p.effective_coupling().abs();
    if j_eff > 0.0 {
        20.0 * PI / j_eff
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeMax {
    pub time: f64,
    pub value: f64,
}

/// Maximum of `f` over `[0, t_max]`: uniform grid of `points` samples, then
/// golden-section refinement inside the bracket around the grid argmax.
pub fn maximize_over_time<F: Fn(f64) -> f64>(f: F, t_max: f64, points: usize) -> TimeMax {
    let points = points.max(2);
    let step = t_max / (points - 1) as f64;
    let mut best = TimeMax { time: 0.0, value: f(0.0) };
    let mut best_i = 0;
    for i in 1..points {
        let t = i as f64 * step;
        let v = f(t);
        if v > best.value {
            best = TimeMax { time: t, value: v };
            best_i = i;
        }
    }
    let lo = best_i.saturating_sub(1) as f64 * step;
    let hi = ((best_i + 1).min(points - 1)) as f64 * step;
    let refined = golden_section_max(&f, lo, hi);
    if refined.value > best.value {
        refined
    } else {
        best
    }
}

fn golden_section_max<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> TimeMax {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..100 {
        if hi - lo <= 1e-12 * hi.abs().max(1.0) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        TimeMax { time: x1, value: f1 }
    } else {
        TimeMax { time: x2, value: f2 }
    }
}

/// max_t |⟨ket|ψ(t)⟩|² over the standard scan window.
pub fn max_population(p: &SystemParams, s0: &TwoPhotonState, ket: TwoPhotonKet) -> Result<TimeMax> {
    s0.require_normalized()?;
    let prop = TwoPhotonPropagator::new(p)?;
    Ok(maximize_over_time(
        |t| prop.evolve(s0, t).amplitude(ket).norm_sqr(),
        max_scan_window(p),
        MAX_SCAN_POINTS,
    ))
}

pub fn max_delocalisation(p: &SystemParams, s0: &TwoPhotonState) -> Result<TimeMax> {
    max_population(p, s0, TwoPhotonKet::OneOne)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sup_diff(a: &TwoPhotonState, b: &TwoPhotonState) -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn l_coefficients_at_zero() {
        let p = SystemParams::deformed(1.0, 0.8, 0.2, 0.1);
        let l = l_coefficients(&p, 0.0).unwrap();
        assert!(l.l1.norm() < 1e-12);
        assert!(l.l2.norm() < 1e-12);
        assert!((l.l3 - 1.0).norm() < 1e-12);
    }

    #[test]
    fn resonant_linear_eigenvalues() {
        let (w, j) = (1.0, 0.3);
        let l = l_coefficients(&SystemParams::linear(w, w, j), 1.0).unwrap();
        let mut im: Vec<f64> = l.lambdas.iter().map(|z| z.im).collect();
        im.sort_by(f64::total_cmp);
        let expected = [-(2.0 * w + 2.0 * j), -2.0 * w, -(2.0 * w - 2.0 * j)];
        for (a, b) in im.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(l.lambdas.iter().all(|z| z.re == 0.0));
    }

    #[test]
    fn resonant_populations_periodic() {
        // With Δ = 0, k = 0 the block spectrum is 2ω + {−2J, 0, 2J}: every
        // population returns after π/J.
        let j = 0.3;
        let p = SystemParams::linear(1.0, 1.0, j);
        let prop = ClosedFormPropagator::new(&p).unwrap();
        let s0 = TwoPhotonState::basis(TwoPhotonKet::TwoZero);
        for t in [0.3, 1.7, 4.0] {
            let a = prop.evolve(&s0, t).populations();
            let b = prop.evolve(&s0, t + PI / j).populations();
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn closed_form_matches_expm_on_basis_states() {
        let p = SystemParams::deformed(1.1, 0.7, 0.35, 0.12);
        let prop = ClosedFormPropagator::new(&p).unwrap();
        for ket in TwoPhotonKet::ALL {
            let s0 = TwoPhotonState::basis(ket);
            for t in [0.0, 0.5, 13.0, 250.0] {
                let a = prop.evolve(&s0, t);
                let b = evolve_expm(&p, &s0, t).unwrap();
                assert!(sup_diff(&a, &b) < 1e-8);
            }
        }
    }

    #[test]
    fn coefficient_set_matches_block() {
        let p = SystemParams::deformed(1.3, 0.6, 0.4, 0.2);
        let cs = CoefficientSet::new(&p).unwrap();
        let block = fock::two_photon_block(&p);
        let m = cs.matrix();
        for i in 0..3 {
            for j in 0..3 {
                assert!((m[(i, j)] - c64(0.0, -block[i][j])).norm() < 1e-14);
                assert_eq!(m[(i, j)].re, 0.0);
            }
        }
        assert!(CoefficientSet::new(&SystemParams::kerr(1.0, 1.0, 0.3, 0.3, 0.1)).is_err());
    }

    #[test]
    fn minus_state_is_stationary_at_resonance() {
        let p = SystemParams::linear(1.0, 1.0, 0.4);
        let s0 = TwoPhotonState::minus();
        for t in [0.0, 0.7, 3.3, 100.0] {
            let s = evolve_closed(&p, &s0, t).unwrap();
            assert!(s.c11.norm() < 1e-12);
            assert!((s0.fidelity(&s) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn plus_state_full_delocalisation() {
        // |+⟩ with Δ = 0, k = 0: P11 = sin²(2Jt), complete at t = π/(4J).
        let j = 0.05;
        let p = SystemParams::linear(1.0, 1.0, j);
        for t in [0.0, 3.0, PI / (4.0 * j), 40.0] {
            let s = evolve_closed(&p, &TwoPhotonState::plus(), t).unwrap();
            assert!((s.c11.norm_sqr() - (2.0 * j * t).sin().powi(2)).abs() < 1e-10);
        }
        let peak = evolve_closed(&p, &TwoPhotonState::plus(), PI / (4.0 * j)).unwrap();
        assert!((peak.c11.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn uncoupled_populations_constant() {
        let p = SystemParams::deformed(1.0, 0.6, 0.3, 0.0);
        let s0 = InitialAngles::new(0.4, 1.0).unwrap().state();
        for t in [0.0, 2.0, 50.0] {
            let s = evolve_expm(&p, &s0, t).unwrap();
            for (a, b) in s.populations().iter().zip(s0.populations()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_spectrum_is_rejected() {
        // J = 0 with Δ = 0, k = 0 makes all three energies equal.
        let p = SystemParams::linear(1.0, 1.0, 0.0);
        assert!(matches!(ClosedFormPropagator::new(&p), Err(Error::Degenerate { .. })));
        assert!(matches!(evolve_closed(&p, &TwoPhotonState::plus(), 1.0), Err(Error::Degenerate { .. })));
        // the fallback still works
        let p11 = delocalisation_probability(&p, &InitialAngles::PLUS, 3.0).unwrap();
        assert!(p11.abs() < 1e-14);
    }

    #[test]
    fn non_normalised_input_rejected() {
        let p = SystemParams::linear(1.0, 0.9, 0.1);
        let bad = TwoPhotonState::from_array([c64(1.0, 0.0), c64(1.0, 0.0), Complex64::ZERO]);
        assert!(evolve_closed(&p, &bad, 1.0).is_err());
        assert!(evolve_expm(&p, &bad, 1.0).is_err());
        assert!(TwoPhotonState::new(c64(0.6, 0.0), Complex64::ZERO, c64(0.0, 0.8)).is_ok());
    }

    #[test]
    fn expm_identity_at_zero_time() {
        let p = SystemParams::kerr(1.0, 2.0, 0.4, 0.1, 0.2);
        let s0 = InitialAngles::new(0.3, 2.0).unwrap().state();
        assert!(sup_diff(&evolve_expm(&p, &s0, 0.0).unwrap(), &s0) < 1e-15);
    }

    #[test]
    fn kerr_only_resonance_transfers_pair() {
        let chi = 0.5;
        let mut p = SystemParams::kerr(1.0, 1.0, chi, chi, 0.05);
        let delta = resonance_detuning(TwoPhotonKet::TwoZero, &p, ResonanceMode::KerrOnly).unwrap();
        assert_eq!(delta, -2.0 * chi);
        p.omega2 = p.omega1 - delta;
        let s0 = TwoPhotonState::basis(TwoPhotonKet::TwoZero);
        let best = maximize_over_time(
            |t| evolve_expm(&p, &s0, t).unwrap().c11.norm_sqr(),
            max_scan_window(&p),
            401,
        );
        assert!(best.value > 0.99, "{}", best.value);
    }

    #[test]
    fn transition_amplitudes_properties() {
        let p = SystemParams::deformed(1.0, 1.0, 0.3, 0.2);
        for t in [0.4, 2.0, 9.0] {
            let (x, y) = transition_amplitudes(&p, t).unwrap();
            assert!((x.norm() - y.norm()).abs() < 1e-12);
        }
        let p0 = SystemParams::deformed(1.0, 0.7, 0.1, 0.0);
        let (x, y) = transition_amplitudes(&p0, 3.0).unwrap();
        assert!(x.norm() < 1e-14 && y.norm() < 1e-14);
    }

    #[test]
    fn interference_form_reproduces_direct_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let p = SystemParams::deformed(rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), rng.gen_range(0.0..1.0), rng.gen_range(0.05..0.5));
            let phi = rng.gen_range(0.0..2.0 * PI);
            let t = rng.gen_range(0.0..50.0);
            let prop = ClosedFormPropagator::new(&p).unwrap();
            let (x, y) = prop.transition_amplitudes(t);
            // θ = π/4 weights each amplitude by 1/√2
            let via_amplitudes = (x + Complex64::from_polar(1.0, phi) * y).norm_sqr() / 2.0;
            let direct = prop.evolve(&InitialAngles { theta: FRAC_PI_4, phi }.state(), t).c11.norm_sqr();
            assert!((via_amplitudes - direct).abs() < 1e-10);
            let printed = equal_weight_delocalisation(&p, phi, t).unwrap();
            assert!((printed - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn product_state_formulas_match() {
        let p = SystemParams::deformed(1.2, 0.9, 0.25, 0.15);
        let prop = ClosedFormPropagator::new(&p).unwrap();
        for t in [0.5, 4.0, 30.0] {
            for ket in [TwoPhotonKet::TwoZero, TwoPhotonKet::ZeroTwo] {
                let direct = prop.evolve(&TwoPhotonState::basis(ket), t).c11.norm_sqr();
                let printed = product_state_delocalisation(&p, ket, t).unwrap();
                assert!((direct - printed).abs() < 1e-10);
            }
        }
        assert!(product_state_delocalisation(&p, TwoPhotonKet::OneOne, 1.0).is_err());
    }

    #[test]
    fn linear_minus_state_formula() {
        // k = 0, φ = π: P11 = (2JΔ)²|L₁|²
        let (j, delta) = (0.2, 0.3);
        let p = SystemParams::deformed_detuned(1.0, delta, 0.0, j);
        for t in [1.0, 7.5] {
            let l = l_coefficients(&p, t).unwrap();
            let expected = (2.0 * j * delta).powi(2) * l.l1.norm_sqr();
            let got = delocalisation_probability(&p, &InitialAngles::MINUS, t).unwrap();
            assert!((got - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn delocalisation_documented_limits() {
        // φ = π at resonance: identically zero
        let p = SystemParams::linear(1.0, 1.0, 0.3);
        for t in [0.0, 1.0, 10.0, 77.0] {
            assert!(delocalisation_probability(&p, &InitialAngles::MINUS, t).unwrap() < 1e-24);
        }
        // |Δ| = 2J: complete delocalisation
        let j = 0.3;
        let p = SystemParams::deformed_detuned(1.0, 2.0 * j, 0.0, j);
        let best = max_delocalisation(&p, &TwoPhotonState::minus()).unwrap();
        assert!((best.value - 1.0).abs() < 1e-9);
        // |20⟩ at resonance: never above 1/2
        let p = SystemParams::linear(1.0, 1.0, j);
        let best = max_delocalisation(&p, &TwoPhotonState::basis(TwoPhotonKet::TwoZero)).unwrap();
        assert!((best.value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn average_energies() {
        let p = SystemParams::linear(1.0, 1.0, 0.1);
        let e: Vec<f64> = TwoPhotonKet::ALL.iter().map(|&k| average_energy(&p, k).unwrap()).collect();
        assert!(e.iter().all(|x| (x - e[0]).abs() < 1e-15));

        let p = SystemParams::deformed(1.0, 0.8, 0.2, 0.1);
        assert!((average_energy(&p, TwoPhotonKet::TwoZero).unwrap() - 2.4).abs() < 1e-14);
        let shift = average_energy(&p, TwoPhotonKet::TwoZero).unwrap() - average_energy(&p, TwoPhotonKet::OneOne).unwrap();
        assert!((shift - (p.detuning() + 2.0 * p.k * p.omega1)).abs() < 1e-14);
        let shift2 = average_energy(&p, TwoPhotonKet::ZeroTwo).unwrap() - average_energy(&p, TwoPhotonKet::OneOne).unwrap();
        assert!((shift2 - (-p.detuning() + 2.0 * p.k * p.omega2)).abs() < 1e-14);
    }

    #[test]
    fn resonance_detuning_cases() {
        let p = SystemParams::deformed(1.0, 1.0, 0.5, 0.05);
        assert_eq!(resonance_detuning(TwoPhotonKet::TwoZero, &p, ResonanceMode::Deformed).unwrap(), -1.0);
        let kerr = SystemParams::kerr(1.0, 1.0, 0.1, 0.3, 0.05);
        let d = resonance_detuning(TwoPhotonKet::ZeroTwo, &kerr, ResonanceMode::KerrOnly).unwrap();
        assert!((d - 0.6).abs() < 1e-15);
        let lin = SystemParams::linear(1.0, 1.0, 0.05);
        for mode in [ResonanceMode::Deformed, ResonanceMode::KerrOnly] {
            assert_eq!(resonance_detuning(TwoPhotonKet::TwoZero, &lin, mode).unwrap(), 0.0);
        }
        assert!(resonance_detuning(TwoPhotonKet::OneOne, &p, ResonanceMode::Deformed).is_err());
        // |02⟩: detuning equalises 2ω₂(1+k) and ω₁+ω₂ at fixed ω₂
        let p = SystemParams::deformed(1.0, 1.0, 0.2, 0.05);
        let d = resonance_detuning(TwoPhotonKet::ZeroTwo, &p, ResonanceMode::Deformed).unwrap();
        let tuned = SystemParams::deformed(p.omega2 + d, p.omega2, p.k, p.coupling);
        let gap = average_energy(&tuned, TwoPhotonKet::ZeroTwo).unwrap() - average_energy(&tuned, TwoPhotonKet::OneOne).unwrap();
        assert!(gap.abs() < 1e-14);
    }

    #[test]
    fn angles_validation() {
        assert!(InitialAngles::new(-0.1, 0.0).is_err());
        assert!(InitialAngles::new(2.0, 0.0).is_err());
        assert!(InitialAngles::new(0.5, 2.0 * PI).is_err());
        let s = InitialAngles::new(0.0, 0.0).unwrap().state();
        assert_eq!(s, TwoPhotonState::basis(TwoPhotonKet::TwoZero));
    }

    #[test]
    fn golden_section_refines_grid_maximum() {
        let f = |t: f64| -(t - 1.234_567).powi(2);
        let best = maximize_over_time(f, 10.0, 11);
        assert!((best.time - 1.234_567).abs() < 1e-6);
    }
}
