//! Two photons in an open chain of N identical, linearly coupled cavities.
//!
//! The Hamiltonian is quadratic, so every creation operator evolves as
//! `a_q†(t) = Σ_m G_mq(t) a_m†` with the single-particle propagator
//! `G_jl(t) = Σ_k e^{−iΩ_k t} S(j,k) S(l,k)`,
//! `S(j,k) = √(2/(N+1)) sin(jπk/(N+1))`, `Ω_k = ω + 2J cos(πk/(N+1))`.
//! A source `Σ_q c_q |2⟩_q` then gives the coincidence matrix
//! `P_mn = 2|Σ_q c_q G_mq G_nq|²` (ordered detection, `Σ P_mn = 2`).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{c64, unitarity_defect, ComplexMatrix};

pub type RealMatrix = DMatrix<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub n: usize,
    pub omega: f64,
    pub coupling: f64,
}

impl ArrayConfig {
    pub fn new(n: usize, omega: f64, coupling: f64) -> Result<Self> {
        let cfg = ArrayConfig { n, omega, coupling };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::validation(format!("array needs at least 2 cavities, got {}", self.n)));
        }
        if !self.omega.is_finite() || !self.coupling.is_finite() {
            return Err(Error::validation("array frequency and coupling must be finite"));
        }
        Ok(())
    }

    /// Tridiagonal single-excitation Hamiltonian (ω on the diagonal, J off it).
    pub fn single_particle_hamiltonian(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.n, self.n, |i, j| {
            if i == j {
                c64(self.omega, 0.0)
            } else if i.abs_diff(j) == 1 {
                c64(self.coupling, 0.0)
            } else {
                Complex64::ZERO
            }
        })
    }
}

/// `cosθ|2⟩_r|0⟩_s + e^{iφ} sinθ|0⟩_r|2⟩_s`, cavities numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayInitialState {
    pub r: usize,
    pub s: usize,
    pub theta: f64,
    pub phi: f64,
}

impl ArrayInitialState {
    pub fn new(r: usize, s: usize, theta: f64, phi: f64) -> Result<Self> {
        if r == s || r == 0 || s == 0 {
            return Err(Error::validation(format!("need distinct cavity indices >= 1, got r={r}, s={s}")));
        }
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::validation("theta and phi must be finite"));
        }
        Ok(ArrayInitialState { r, s, theta, phi })
    }

    fn check_fits(&self, n: usize) -> Result<()> {
        if self.r > n || self.s > n {
            return Err(Error::validation(format!(
                "cavity indices r={}, s={} exceed array size {n}",
                self.r, self.s
            )));
        }
        Ok(())
    }

    /// Pair amplitudes `c_q` over the N cavities.
    pub fn source(&self, n: usize) -> Result<PairSource> {
        self.check_fits(n)?;
        let mut c = vec![Complex64::ZERO; n];
        c[self.r - 1] = c64(self.theta.cos(), 0.0);
        c[self.s - 1] = Complex64::from_polar(self.theta.sin(), self.phi);
        PairSource::new(c)
    }
}

/// `Σ_q c_q |2⟩_q`: both photons in cavity q with amplitude `c_q`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSource(Vec<Complex64>);

impl PairSource {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if amplitudes.len() < 2 || (norm - 1.0).abs() > 1e-10 {
            return Err(Error::validation(format!(
                "pair source needs >= 2 cavities and unit norm (len {}, norm² {norm})",
                amplitudes.len()
            )));
        }
        Ok(PairSource(amplitudes))
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `(1/√N) Σ_n (−1)^{n+1} |2⟩_n`.
pub fn trapped_state(n: usize) -> Result<PairSource> {
    if n < 2 {
        return Err(Error::validation(format!("array needs at least 2 cavities, got {n}")));
    }
    let a = 1.0 / (n as f64).sqrt();
    PairSource::new((0..n).map(|i| c64(if i % 2 == 0 { a } else { -a }, 0.0)).collect())
}

/// Ω_k for k = 1..N.
pub fn normal_modes(cfg: &ArrayConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let m = (cfg.n + 1) as f64;
    Ok((1..=cfg.n)
        .map(|k| cfg.omega + 2.0 * cfg.coupling * (PI * k as f64 / m).cos())
        .collect())
}

/// Mode functions and frequencies, reusable across many times.
#[derive(Debug, Clone)]
pub struct ArrayModes {
    cfg: ArrayConfig,
    frequencies: Vec<f64>,
    shape: RealMatrix,
}

impl ArrayModes {
    pub fn new(cfg: &ArrayConfig) -> Result<Self> {
        let frequencies = normal_modes(cfg)?;
        let m = (cfg.n + 1) as f64;
        let norm = (2.0 / m).sqrt();
        let shape = RealMatrix::from_fn(cfg.n, cfg.n, |j, k| norm * ((j + 1) as f64 * PI * (k + 1) as f64 / m).sin());
        Ok(ArrayModes {
            cfg: *cfg,
            frequencies,
            shape,
        })
    }

    pub fn config(&self) -> &ArrayConfig {
        &self.cfg
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn green(&self, t: f64) -> GreenPropagator {
        let n = self.cfg.n;
        let phases: Vec<Complex64> = self.frequencies.iter().map(|w| Complex64::from_polar(1.0, -w * t)).collect();
        let mut g = ComplexMatrix::zeros(n, n);
        for j in 0..n {
            for l in j..n {
                let v: Complex64 = (0..n).map(|k| phases[k] * (self.shape[(j, k)] * self.shape[(l, k)])).sum();
                g[(j, l)] = v;
                g[(l, j)] = v;
            }
        }
        GreenPropagator(g)
    }
}

/// Single-particle propagator `G(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenPropagator(ComplexMatrix);

impl GreenPropagator {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    /// `G_jl` with cavities numbered from 1.
    pub fn get(&self, j: usize, l: usize) -> Complex64 {
        self.0[(j - 1, l - 1)]
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.0)
    }
}

pub fn green(cfg: &ArrayConfig, t: f64) -> Result<GreenPropagator> {
    if !(t >= 0.0) {
        return Err(Error::validation(format!("time must be non-negative, got {t}")));
    }
    Ok(ArrayModes::new(cfg)?.green(t))
}

/// `P_mn = 2|Σ_q c_q G_mq G_nq|²`.
pub fn coincidence_matrix(g: &GreenPropagator, source: &PairSource) -> Result<RealMatrix> {
    let n = g.0.nrows();
    if source.len() != n {
        return Err(Error::validation(format!("source has {} cavities, array has {n}", source.len())));
    }
    let c = source.amplitudes();
    let mut p = RealMatrix::zeros(n, n);
    for m in 0..n {
        for k in m..n {
            let amp: Complex64 = c
                .iter()
                .enumerate()
                .filter(|(_, cq)| **cq != Complex64::ZERO)
                .map(|(q, cq)| cq * g.0[(m, q)] * g.0[(k, q)])
                .sum();
            let v = 2.0 * amp.norm_sqr();
            p[(m, k)] = v;
            p[(k, m)] = v;
        }
    }
    Ok(p)
}

pub fn joint_probability(cfg: &ArrayConfig, init: &ArrayInitialState, t: f64) -> Result<RealMatrix> {
    let source = init.source(cfg.n)?;
    coincidence_matrix(&green(cfg, t)?, &source)
}

pub fn joint_probability_from(cfg: &ArrayConfig, source: &PairSource, t: f64) -> Result<RealMatrix> {
    coincidence_matrix(&green(cfg, t)?, source)
}

/// `S = 1 − ½ Σ_n P_nn`.
pub fn delocalisation_degree(p: &RealMatrix) -> f64 {
    1.0 - 0.5 * p.diagonal().sum()
}

/// `⟨n_m⟩ = Σ_n P_mn` (exact for two photons).
pub fn mean_occupations(p: &RealMatrix) -> Vec<f64> {
    p.row_iter().map(|row| row.sum()).collect()
}

/// `⟨n_m⟩(t) = Σ_q 2|c_q|² |G_mq|²` from the first moments of the source.
pub fn first_moment_occupations(g: &GreenPropagator, source: &PairSource) -> Result<Vec<f64>> {
    let n = g.0.nrows();
    if source.len() != n {
        return Err(Error::validation(format!("source has {} cavities, array has {n}", source.len())));
    }
    let c = source.amplitudes();
    Ok((0..n)
        .map(|m| (0..n).map(|q| 2.0 * c[q].norm_sqr() * g.0[(m, q)].norm_sqr()).sum())
        .collect())
}
