use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::code::check_spins;
use crate::{Error, Result};

/// Doubled Ising configuration `{σ_{r,n}, τ_{r,n}}` over `N` cycles; `τ` are
/// the bra-side variables. Both arrays are stored cycle-major: `n * M + r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinHistory {
    n_qubits: usize,
    n_cycles: usize,
    sigma: Vec<i8>,
    tau: Vec<i8>,
}

impl SpinHistory {
    pub fn new(n_qubits: usize, n_cycles: usize, sigma: Vec<i8>, tau: Vec<i8>) -> Result<Self> {
        let expected = n_qubits * n_cycles;
        for (what, v) in [("sigma history", &sigma), ("tau history", &tau)] {
            if v.len() != expected {
                return Err(Error::DimensionMismatch { what, expected, got: v.len() });
            }
        }
        check_spins(&sigma)?;
        check_spins(&tau)?;
        Ok(Self { n_qubits, n_cycles, sigma, tau })
    }

    /// Builds a history from per-cycle slices.
    pub fn from_slices(sigma: &[Vec<i8>], tau: &[Vec<i8>]) -> Result<Self> {
        if sigma.len() != tau.len() {
            return Err(Error::DimensionMismatch { what: "tau cycles", expected: sigma.len(), got: tau.len() });
        }
        let m = sigma.first().map_or(0, Vec::len);
        Self::new(m, sigma.len(), sigma.concat(), tau.concat())
    }

    /// σ = τ = +1 everywhere.
    pub fn uniform(n_qubits: usize, n_cycles: usize) -> Self {
        let len = n_qubits * n_cycles;
        Self { n_qubits, n_cycles, sigma: vec![1; len], tau: vec![1; len] }
    }

    pub fn random<R: Rng + ?Sized>(n_qubits: usize, n_cycles: usize, rng: &mut R) -> Self {
        let len = n_qubits * n_cycles;
        let mut draw = || (0..len).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect::<Vec<i8>>();
        let sigma = draw();
        let tau = draw();
        Self { n_qubits, n_cycles, sigma, tau }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_cycles(&self) -> usize {
        self.n_cycles
    }

    #[inline]
    pub fn sigma(&self, r: usize, n: usize) -> i8 {
        self.sigma[n * self.n_qubits + r]
    }

    #[inline]
    pub fn tau(&self, r: usize, n: usize) -> i8 {
        self.tau[n * self.n_qubits + r]
    }

    /// `S = (τ − σ)/2 ∈ {−1, 0, 1}`.
    #[inline]
    pub fn spin1(&self, r: usize, n: usize) -> i8 {
        (self.tau(r, n) - self.sigma(r, n)) / 2
    }

    pub fn sigma_slice(&self, n: usize) -> &[i8] {
        &self.sigma[n * self.n_qubits..(n + 1) * self.n_qubits]
    }

    pub fn tau_slice(&self, n: usize) -> &[i8] {
        &self.tau[n * self.n_qubits..(n + 1) * self.n_qubits]
    }

    pub fn flip_sigma(&mut self, r: usize, n: usize) {
        self.sigma[n * self.n_qubits + r] *= -1;
    }

    pub fn flip_tau(&mut self, r: usize, n: usize) {
        self.tau[n * self.n_qubits + r] *= -1;
    }

    /// The σ ↔ τ exchanged history.
    pub fn swapped(&self) -> Self {
        Self { sigma: self.tau.clone(), tau: self.sigma.clone(), ..*self }
    }
}
