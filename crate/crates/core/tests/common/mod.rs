//! Independent two-photon array dynamics in the occupation-number basis.

#![allow(dead_code)]

use std::collections::HashMap;

use coupled_cavities::cavity_array::{ArrayConfig, RealMatrix};
use coupled_cavities::numerics::{c64, expm, ComplexMatrix, ComplexVector};
use num_complex::Complex64;

/// Two bosons on N sites: basis |1_i 1_j⟩ (i < j) and |2_i⟩, dimension N(N+1)/2.
pub struct PairBasis {
    pub n: usize,
    pub states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

impl PairBasis {
    pub fn new(n: usize) -> Self {
        let mut states = Vec::new();
        for i in 0..n {
            for j in i..n {
                let mut occ = vec![0u8; n];
                occ[i] += 1;
                occ[j] += 1;
                states.push(occ);
            }
        }
        let index = states.iter().cloned().enumerate().map(|(k, s)| (s, k)).collect();
        PairBasis { n, states, index }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index_of(&self, occ: &[u8]) -> usize {
        self.index[occ]
    }

    /// Matrix of ω Σ n_i + J Σ_i (a_i†a_{i+1} + a_{i+1}†a_i).
    pub fn hamiltonian(&self, cfg: &ArrayConfig) -> ComplexMatrix {
        let d = self.dim();
        let mut h = ComplexMatrix::zeros(d, d);
        for (col, occ) in self.states.iter().enumerate() {
            h[(col, col)] += c64(2.0 * cfg.omega, 0.0);
            for i in 0..self.n - 1 {
                for (from, to) in [(i + 1, i), (i, i + 1)] {
                    if occ[from] == 0 {
                        continue;
                    }
                    let mut next = occ.clone();
                    let lower = (next[from] as f64).sqrt();
                    next[from] -= 1;
                    let raise = (next[to] as f64 + 1.0).sqrt();
                    next[to] += 1;
                    h[(self.index_of(&next), col)] += c64(cfg.coupling * lower * raise, 0.0);
                }
            }
        }
        h
    }

    /// Σ_q c_q |2_q⟩.
    pub fn pair_state(&self, c: &[Complex64]) -> ComplexVector {
        let mut v = ComplexVector::zeros(self.dim());
        for (q, cq) in c.iter().enumerate() {
            let mut occ = vec![0u8; self.n];
            occ[q] = 2;
            v[self.index_of(&occ)] = *cq;
        }
        v
    }

    /// Ordered coincidence matrix ⟨a_m†a_n†a_n a_m⟩.
    pub fn coincidences(&self, psi: &ComplexVector) -> RealMatrix {
        let mut p = RealMatrix::zeros(self.n, self.n);
        for (k, occ) in self.states.iter().enumerate() {
            let w = psi[k].norm_sqr();
            let sites: Vec<usize> = (0..self.n).filter(|&i| occ[i] > 0).collect();
            match sites.as_slice() {
                [m] => p[(*m, *m)] += 2.0 * w,
                [m, n] => {
                    p[(*m, *n)] += w;
                    p[(*n, *m)] += w;
                }
                _ => unreachable!(),
            }
        }
        p
    }
}

pub fn fock_joint_probability(cfg: &ArrayConfig, c: &[Complex64], t: f64) -> RealMatrix {
    let basis = PairBasis::new(cfg.n);
    let h = basis.hamiltonian(cfg);
    let u = expm(&h.map(|z| z * c64(0.0, -t))).expect("square matrix");
    basis.coincidences(&(u * basis.pair_state(c)))
}

pub fn max_abs_real(a: &RealMatrix, b: &RealMatrix) -> f64 {
    (a - b).iter().fold(0.0, |m, x| m.max(x.abs()))
}
