//! Dissipation and dephasing on the six-dimensional truncated space.
//!
//! The generator is
//!
//! ```text
//! L[ρ] = −i[H, ρ] + Σ_ij (γ_ij/2)(2 a_j ρ a_i† − a_i†a_j ρ − ρ a_i†a_j)
//!        + (γ_d/2)(D[n₁]ρ + D[n₂]ρ),   D[o]ρ = 2oρo† − o†oρ − ρo†o
//! ```
//!
//! and acts on column-stacked density matrices, so `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.
//! Dissipation only lowers the photon number, so the truncation at two
//! photons is exact for initial states inside it.

use nalgebra::SVD;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coherent::{InitialAngles, TwoPhotonState};
use crate::error::{Error, Result};
use crate::fock::{self, BasisKet, Cavity, SystemParams, DIM};
use crate::numerics::{
    self, c64, eig_hermitian, hermiticity_defect, kron, ComplexMatrix, ComplexVector, InvariantCheck,
};

const TRACE_TOL: f64 = 1e-9;
const HERMITIAN_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = 1e-9;

/// Cavity decay, cross-damping and dephasing rates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DecayRates {
    pub gamma11: f64,
    pub gamma22: f64,
    pub gamma12: f64,
    pub gamma21: f64,
    pub gamma_d: f64,
}

impl DecayRates {
    pub fn none() -> Self {
        Self::default()
    }

    /// Equal cavity decay without cross-damping.
    pub fn independent(gamma: f64) -> Self {
        DecayRates {
            gamma11: gamma,
            gamma22: gamma,
            ..Self::default()
        }
    }

    /// Cross-damping tied to γ₁₂ = γ₂₁ = √(γ₁₁γ₂₂).
    pub fn maximal_interference(gamma11: f64, gamma22: f64) -> Self {
        let cross = (gamma11 * gamma22).sqrt();
        DecayRates {
            gamma11,
            gamma22,
            gamma12: cross,
            gamma21: cross,
            gamma_d: 0.0,
        }
    }

    pub fn dephasing(gamma_d: f64) -> Self {
        DecayRates {
            gamma_d,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.gamma11, self.gamma22, self.gamma12, self.gamma21, self.gamma_d];
        if all.iter().any(|g| !g.is_finite()) {
            return Err(Error::validation("decay rates must be finite"));
        }
        if self.gamma11 < 0.0 || self.gamma22 < 0.0 || self.gamma_d < 0.0 {
            return Err(Error::validation(format!(
                "decay rates must be non-negative (gamma11={}, gamma22={}, gamma_d={})",
                self.gamma11, self.gamma22, self.gamma_d
            )));
        }
        let bound = self.gamma11 * self.gamma22;
        if (self.gamma12 * self.gamma21).abs() > bound * (1.0 + 1e-12) {
            return Err(Error::validation(format!(
                "cross-damping |gamma12 gamma21| = {} exceeds gamma11 gamma22 = {bound}",
                (self.gamma12 * self.gamma21).abs()
            )));
        }
        Ok(())
    }

    pub fn max_rate(&self) -> f64 {
        [self.gamma11, self.gamma22, self.gamma12.abs(), self.gamma21.abs(), self.gamma_d]
            .into_iter()
            .fold(0.0, f64::max)
    }

    fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.gamma11, self.gamma12], [self.gamma21, self.gamma22]]
    }
}

/// Density operator on the ≤2-photon space, basis order |00⟩…|02⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.shape() != (DIM, DIM) {
            return Err(Error::validation(format!("density matrix must be 6x6, got {:?}", m.shape())));
        }
        let rho = DensityMatrix(m);
        rho.check().map_err(Error::Validation)?;
        Ok(rho)
    }

    /// `|v⟩⟨v|` for a normalised six-component vector.
    pub fn pure(v: &ComplexVector) -> Result<Self> {
        if v.len() != DIM {
            return Err(Error::validation(format!("state vector must have 6 components, got {}", v.len())));
        }
        Self::new(v * v.adjoint())
    }

    pub fn from_two_photon(s: &TwoPhotonState) -> Self {
        let v = s.to_full();
        DensityMatrix(&v * v.adjoint())
    }

    pub fn basis(ket: BasisKet) -> Self {
        let mut m = ComplexMatrix::zeros(DIM, DIM);
        m[(ket.position(), ket.position())] = Complex64::ONE;
        DensityMatrix(m)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// ρ_ij = ⟨i|ρ|j⟩.
    pub fn get(&self, row: BasisKet, col: BasisKet) -> Complex64 {
        self.0[(row.position(), col.position())]
    }

    pub fn population(&self, ket: BasisKet) -> f64 {
        self.get(ket, ket).re
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.0 * &self.0).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.0 + self.0.adjoint()).scale(0.5);
        eig_hermitian(&herm).map(|d| d.eigenvalues[0]).unwrap_or(f64::NAN)
    }

    /// tr(ρ O).
    pub fn expectation(&self, op: &ComplexMatrix) -> Complex64 {
        (&self.0 * op).trace()
    }

    fn check(&self) -> std::result::Result<(), String> {
        let herm = hermiticity_defect(&self.0);
        if !(herm <= HERMITIAN_TOL) {
            return Err(format!("density matrix not Hermitian (defect {herm:.3e})"));
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > TRACE_TOL {
            return Err(format!("density matrix trace {tr} differs from 1"));
        }
        let min = self.min_eigenvalue();
        if !(min >= -POSITIVITY_TOL) {
            return Err(format!("density matrix has negative eigenvalue {min:.3e}"));
        }
        Ok(())
    }
}

/// Superoperator acting on column-stacked 6×6 matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    matrix: ComplexMatrix,
}

impl Liouvillian {
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.shape() != (DIM * DIM, DIM * DIM) {
            return Err(Error::validation(format!("superoperator must be 36x36, got {:?}", matrix.shape())));
        }
        Ok(Liouvillian { matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        unvec(&(&self.matrix * vec(rho)))
    }

    /// Largest entry of `vec(I)† L`; zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let id = vec(&ComplexMatrix::identity(DIM, DIM));
        let row = id.adjoint() * &self.matrix;
        row.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }
}

pub fn vec(m: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &ComplexVector) -> ComplexMatrix {
    let n = (v.len() as f64).sqrt().round() as usize;
    ComplexMatrix::from_column_slice(n, n, v.as_slice())
}

/// `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`.
fn sandwich(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    kron(&b.transpose(), a)
}

/// Superoperator of `D[o]ρ = 2oρo† − o†oρ − ρo†o`.
fn lindblad_dissipator(o: &ComplexMatrix) -> ComplexMatrix {
    let id = ComplexMatrix::identity(DIM, DIM);
    let oo = o.adjoint() * o;
    sandwich(o, &o.adjoint()).scale(2.0) - sandwich(&oo, &id) - sandwich(&id, &oo)
}

pub fn build_liouvillian(p: &SystemParams, rates: &DecayRates) -> Result<Liouvillian> {
    p.validate()?;
    rates.validate()?;
    let id = ComplexMatrix::identity(DIM, DIM);
    let h = fock::hamiltonian(p);
    let minus_i = c64(0.0, -1.0);
    let mut l = (sandwich(&h, &id) - sandwich(&id, &h)).map(|z| z * minus_i);

    let ops = [fock::annihilate(Cavity::First), fock::annihilate(Cavity::Second)];
    let gamma = rates.matrix();
    for (i, ai) in ops.iter().enumerate() {
        for (j, aj) in ops.iter().enumerate() {
            let g = gamma[i][j];
            if g == 0.0 {
                continue;
            }
            let ai_dag = ai.adjoint();
            let hop = &ai_dag * aj;
            let term = sandwich(aj, &ai_dag).scale(2.0) - sandwich(&hop, &id) - sandwich(&id, &hop);
            l += term.scale(g / 2.0);
        }
    }
    if rates.gamma_d != 0.0 {
        for c in [Cavity::First, Cavity::Second] {
            l += lindblad_dissipator(&fock::number(c)).scale(rates.gamma_d / 2.0);
        }
    }
    Ok(Liouvillian { matrix: l })
}

/// Default step `1e-2 / s` where `s` is the fastest of J, the largest
/// decay rate, γ_d, and the energy spread inside the one- and two-photon
/// sectors.
pub fn default_dt(p: &SystemParams, rates: &DecayRates) -> f64 {
    let one_photon_spread = (p.detuning().powi(2) + 4.0 * p.coupling.powi(2)).sqrt();
    let two_photon_spread = crate::coherent::TwoPhotonPropagator::new(p)
        .map(|prop| {
            let e = prop.energies();
            e[e.len() - 1] - e[0]
        })
        .unwrap_or(0.0);
    let fastest = [p.coupling.abs(), rates.max_rate(), one_photon_spread, two_photon_spread]
        .into_iter()
        .fold(0.0, f64::max);
    if fastest > 0.0 {
        1e-2 / fastest
    } else {
        1e-2
    }
}

fn physical_check(rho: ComplexMatrix, t: f64) -> Result<DensityMatrix> {
    let rho = DensityMatrix(rho);
    let herm = hermiticity_defect(&rho.0);
    if herm > HERMITIAN_TOL {
        return Err(Error::Invariant(format!("Hermiticity lost at t = {t} (defect {herm:.3e})")));
    }
    let min = rho.min_eigenvalue();
    if !(min >= -POSITIVITY_TOL) {
        return Err(Error::Invariant(format!("positivity lost at t = {t} (eigenvalue {min:.3e})")));
    }
    Ok(rho)
}

fn trace_drift(_: f64, y: &ComplexMatrix) -> f64 {
    (y.trace() - 1.0).norm()
}

fn trace_tolerance(t: f64) -> f64 {
    TRACE_TOL * t.max(1.0)
}

/// RK4 propagation of `rho0` to time `t`. Trace drift is supervised at
/// every step (at most 1e-9 per unit time); Hermiticity and positivity are
/// checked on the result.
pub fn propagate_density(lv: &Liouvillian, rho0: &DensityMatrix, t: f64, dt: f64) -> Result<DensityMatrix> {
    let check = InvariantCheck {
        name: "trace",
        drift: &trace_drift,
        tolerance: &trace_tolerance,
    };
    let sol = numerics::integrate_ode(|_, y| lv.apply(y), &rho0.0, t, dt, Some(&check))?;
    physical_check(sol.y, t)
}

/// Propagation sampled at each of `times`.
pub fn propagate_trajectory(
    lv: &Liouvillian,
    rho0: &DensityMatrix,
    times: &[f64],
    dt: f64,
) -> Result<Vec<DensityMatrix>> {
    let check = InvariantCheck {
        name: "trace",
        drift: &trace_drift,
        tolerance: &trace_tolerance,
    };
    let states = numerics::integrate_sampled(|_, y| lv.apply(y), &rho0.0, times, dt, Some(&check))?;
    states
        .into_iter()
        .zip(times)
        .map(|(rho, &t)| physical_check(rho, t))
        .collect()
}

/// `unvec(exp(L t) vec(ρ₀))`.
pub fn propagate_expm(lv: &Liouvillian, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    let u = numerics::expm(&lv.matrix.scale(t))?;
    physical_check(unvec(&(u * vec(&rho0.0))), t)
}

/// First moments (⟨a₁†a₁⟩, ⟨a₁†a₂⟩, ⟨a₁a₂†⟩, ⟨a₂†a₂⟩).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    pub n1: f64,
    pub x12: Complex64,
    pub x21: Complex64,
    pub n2: f64,
}

impl MomentVector {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let a1 = fock::annihilate(Cavity::First);
        let a2 = fock::annihilate(Cavity::Second);
        MomentVector {
            n1: rho.expectation(&fock::number(Cavity::First)).re,
            x12: rho.expectation(&(a1.adjoint() * &a2)),
            // a₁a₂† = a₂†a₁; lowering first keeps the product inside the truncation
            x21: rho.expectation(&(a2.adjoint() * &a1)),
            n2: rho.expectation(&fock::number(Cavity::Second)).re,
        }
    }

    fn as_array(&self) -> [Complex64; 4] {
        [c64(self.n1, 0.0), self.x12, self.x21, c64(self.n2, 0.0)]
    }
}

/// Closed-form moment flow for equal decay with full cross-damping
/// (γ₁₁ = γ₂₂ = γ₁₂ = γ₂₁ = γ) at resonance in the linear model.
///
/// The 4×4 flow matrix has eigenvalues λ = (2iJ−γ, −2iJ−γ, 0, −2γ) with
/// mutually orthogonal ±1 eigenvectors, so
/// `m(t) = ¼ Σ_k e^{λ_k t} v_k (v_k · m₀)`. The first row reproduces
/// `⟨a₁†a₁⟩_t = ¼[X₁n₁ + X₂x₁₂ + X₃x₂₁ + X₄n₂]`.
pub fn moment_flow_closed(coupling: f64, gamma: f64, m0: &MomentVector, t: f64) -> Result<MomentVector> {
    if !(gamma >= 0.0) || !coupling.is_finite() {
        return Err(Error::validation(format!("need gamma >= 0 and finite J (gamma={gamma}, J={coupling})")));
    }
    let lambdas = [
        c64(-gamma, 2.0 * coupling),
        c64(-gamma, -2.0 * coupling),
        Complex64::ZERO,
        c64(-2.0 * gamma, 0.0),
    ];
    const MODES: [[f64; 4]; 4] = [
        [1.0, -1.0, 1.0, -1.0],
        [1.0, 1.0, -1.0, -1.0],
        [1.0, -1.0, -1.0, 1.0],
        [1.0, 1.0, 1.0, 1.0],
    ];
    let m = m0.as_array();
    let mut out = [Complex64::ZERO; 4];
    for (lambda, v) in lambdas.iter().zip(MODES) {
        let weight = (lambda * t).exp() * v.iter().zip(&m).map(|(vi, mi)| mi * *vi).sum::<Complex64>() * 0.25;
        for (o, vi) in out.iter_mut().zip(v) {
            *o += weight * vi;
        }
    }
    Ok(MomentVector {
        n1: out[0].re,
        x12: out[1],
        x21: out[2],
        n2: out[3].re,
    })
}

/// [`moment_flow_closed`] guarded by a check that `p` and `rates` lie in its
/// regime.
pub fn moment_flow_for(p: &SystemParams, rates: &DecayRates, m0: &MomentVector, t: f64) -> Result<MomentVector> {
    p.validate()?;
    rates.validate()?;
    let g = rates.gamma11;
    let tol = 1e-12 * g.max(1.0);
    let symmetric = [rates.gamma22, rates.gamma12, rates.gamma21].iter().all(|x| (x - g).abs() <= tol);
    if !symmetric || rates.gamma_d != 0.0 {
        return Err(Error::UnsupportedRegime(
            "closed moment flow needs gamma11 = gamma22 = gamma12 = gamma21 and no dephasing".into(),
        ));
    }
    if p.k != 0.0 || p.chi1 != 0.0 || p.chi2 != 0.0 || p.detuning().abs() > 1e-12 {
        return Err(Error::UnsupportedRegime(
            "closed moment flow needs linear, resonant cavities (k = chi = 0, detuning 0)".into(),
        ));
    }
    moment_flow_closed(p.coupling, g, m0, t)
}

/// `ε|ψ⟩⟨ψ| + (1−ε)(cos²θ|20⟩⟨20| + sin²θ|02⟩⟨02|)`.
pub fn coherence_state(angles: &InitialAngles, epsilon: f64) -> Result<DensityMatrix> {
    angles.validate()?;
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::validation(format!("epsilon must lie in [0, 1], got {epsilon}")));
    }
    let pure = DensityMatrix::from_two_photon(&angles.state());
    let mut mixture = ComplexMatrix::zeros(DIM, DIM);
    mixture[(BasisKet::TwoZero.position(), BasisKet::TwoZero.position())] = c64(angles.theta.cos().powi(2), 0.0);
    mixture[(BasisKet::ZeroTwo.position(), BasisKet::ZeroTwo.position())] = c64(angles.theta.sin().powi(2), 0.0);
    DensityMatrix::new(pure.0.scale(epsilon) + mixture.scale(1.0 - epsilon))
}

/// Relative singular-value threshold for kernel membership.
const KERNEL_TOL: f64 = 1e-9;

/// Unique trace-one stationary state of `lv` on the whole space.
pub fn steady_state(lv: &Liouvillian) -> Result<DensityMatrix> {
    steady_state_in(lv, &BasisKet::ALL)
}

/// Stationary state of `lv` compressed to operators supported on
/// `sector × sector`. The kernel of the compressed generator must be
/// one-dimensional; otherwise its multiplicity is reported.
pub fn steady_state_in(lv: &Liouvillian, sector: &[BasisKet]) -> Result<DensityMatrix> {
    let mut kets = sector.to_vec();
    kets.sort();
    kets.dedup();
    if kets.is_empty() {
        return Err(Error::validation("steady-state sector is empty"));
    }
    let n = kets.len();
    // column-stacked index of ρ_ij is i + DIM j
    let slots: Vec<usize> = (0..n * n)
        .map(|s| kets[s % n].position() + DIM * kets[s / n].position())
        .collect();
    let block = ComplexMatrix::from_fn(n * n, n * n, |r, c| lv.matrix[(slots[r], slots[c])]);

    let svd = SVD::new(block.clone(), false, true);
    let v_t = svd.v_t.as_ref().ok_or_else(|| Error::Invariant("SVD did not return right vectors".into()))?;
    let sigma_max = svd.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    let scale = sigma_max.max(1e-300);
    let kernel: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= KERNEL_TOL * scale)
        .collect();
    if kernel.len() != 1 {
        return Err(Error::DegenerateKernel { multiplicity: kernel.len() });
    }
    let null = v_t.row(kernel[0]).adjoint();
    let x = ComplexMatrix::from_column_slice(n, n, null.as_slice());
    let tr = x.trace();
    if tr.norm() < 1e-12 {
        return Err(Error::Invariant("kernel element of the generator is traceless".into()));
    }
    let x = x.map(|z| z / tr);
    let x = (&x + x.adjoint()).scale(0.5);

    let residual = (&block * ComplexVector::from_column_slice(x.as_slice()))
        .iter()
        .fold(0.0_f64, |acc, z| acc.max(z.norm()));
    if residual > 1e-10 * scale.max(1.0) {
        return Err(Error::Invariant(format!("steady-state residual {residual:.3e} too large")));
    }
    let mut rho = ComplexMatrix::zeros(DIM, DIM);
    for (i, ki) in kets.iter().enumerate() {
        for (j, kj) in kets.iter().enumerate() {
            rho[(ki.position(), kj.position())] = x[(i, j)];
        }
    }
    DensityMatrix::new(rho).map_err(|e| Error::Invariant(e.to_string()))
}
