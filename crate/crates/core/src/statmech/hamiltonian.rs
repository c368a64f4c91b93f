use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{coupling_j, SpinHistory};
use crate::code::CodeLattice;
use crate::env::{CorrelatorKind, CorrelatorTable, EnvironmentSpec};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianForm {
    /// All five correlator channels, coupled across space and cycles.
    General,
    /// Decoupled spin-1 chains: `J Σ (S² + ½ S S')`, open in time.
    Spin1Chain,
    /// On-site term only: `J Σ S²`; cycles decouple completely.
    SingleSlice,
}

impl HamiltonianForm {
    pub fn name(self) -> &'static str {
        match self {
            Self::General => "general",
            Self::Spin1Chain => "spin1_chain",
            Self::SingleSlice => "single_slice",
        }
    }
}

/// Pair couplings laid out densely as `[sep][r * M + s]`.
#[derive(Debug, Clone)]
struct Couplings<T> {
    f1: Vec<Vec<T>>,
    f2: Vec<Vec<T>>,
    phi3: Vec<Vec<T>>,
    phi1: Vec<T>,
    phi2: Vec<T>,
}

/// Statistical-mechanics energy `ℋ(σ̄, τ̄)` of a spin history; the weight of
/// a history is `exp(−ℋ)`.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian<'a, T> {
    lattice: &'a CodeLattice,
    table: Option<&'a CorrelatorTable<T>>,
    n_cycles: usize,
    form: HamiltonianForm,
    coupling: T,
    couplings: Option<Couplings<T>>,
}

impl<'a, T: Real> EffectiveHamiltonian<'a, T> {
    /// Full Hamiltonian over `n_cycles`. Every correlator needed by the
    /// lattice is looked up once here, so a table gap fails at construction.
    pub fn general(lattice: &'a CodeLattice, table: &'a CorrelatorTable<T>, n_cycles: usize) -> Result<Self> {
        check_cycles(n_cycles)?;
        let sites = lattice.qubit_sites();
        let pair = |kind, n| -> Result<Vec<T>> {
            let mut out = Vec::with_capacity(sites.len() * sites.len());
            for &r in sites {
                for &s in sites {
                    out.push(table.require(kind, r - s, n)?);
                }
            }
            Ok(out)
        };
        let per_sep = |kind| (0..n_cycles).map(|n| pair(kind, n)).collect::<Result<Vec<_>>>();
        let couplings = Couplings {
            f1: per_sep(CorrelatorKind::F1)?,
            f2: per_sep(CorrelatorKind::F2)?,
            phi3: per_sep(CorrelatorKind::Phi3)?,
            phi1: pair(CorrelatorKind::Phi1, 0)?,
            phi2: pair(CorrelatorKind::Phi2, 0)?,
        };
        Ok(Self {
            lattice,
            table: Some(table),
            n_cycles,
            form: HamiltonianForm::General,
            coupling: T::zero(),
            couplings: Some(couplings),
        })
    }

    pub fn spin1_chain(lattice: &'a CodeLattice, env: &EnvironmentSpec<T>, n_cycles: usize) -> Result<Self> {
        Self::spin1_chain_with_coupling(lattice, coupling_j(env)?, n_cycles)
    }

    pub fn spin1_chain_with_coupling(lattice: &'a CodeLattice, j: T, n_cycles: usize) -> Result<Self> {
        Self::reduced(lattice, j, n_cycles, HamiltonianForm::Spin1Chain)
    }

    pub fn single_slice(lattice: &'a CodeLattice, env: &EnvironmentSpec<T>, n_cycles: usize) -> Result<Self> {
        Self::single_slice_with_coupling(lattice, coupling_j(env)?, n_cycles)
    }

    pub fn single_slice_with_coupling(lattice: &'a CodeLattice, j: T, n_cycles: usize) -> Result<Self> {
        Self::reduced(lattice, j, n_cycles, HamiltonianForm::SingleSlice)
    }

    fn reduced(lattice: &'a CodeLattice, j: T, n_cycles: usize, form: HamiltonianForm) -> Result<Self> {
        check_cycles(n_cycles)?;
        if !j.is_finite() {
            return Err(Error::invalid("J", format!("must be finite, got {j}")));
        }
        Ok(Self { lattice, table: None, n_cycles, form, coupling: j, couplings: None })
    }

    pub fn lattice(&self) -> &'a CodeLattice {
        self.lattice
    }

    pub fn table(&self) -> Option<&'a CorrelatorTable<T>> {
        self.table
    }

    pub fn n_cycles(&self) -> usize {
        self.n_cycles
    }

    pub fn form(&self) -> HamiltonianForm {
        self.form
    }

    /// `J` of the reduced forms; zero for the general form.
    pub fn coupling(&self) -> T {
        self.coupling
    }

    fn check_history(&self, hist: &SpinHistory) -> Result<()> {
        if hist.n_qubits() != self.lattice.n_qubits() {
            return Err(Error::DimensionMismatch {
                what: "history qubits",
                expected: self.lattice.n_qubits(),
                got: hist.n_qubits(),
            });
        }
        if hist.n_cycles() != self.n_cycles {
            return Err(Error::DimensionMismatch {
                what: "history cycles",
                expected: self.n_cycles,
                got: hist.n_cycles(),
            });
        }
        Ok(())
    }

    fn require_form(&self, expected: HamiltonianForm) -> Result<()> {
        if self.form != expected {
            return Err(Error::WrongForm { expected: expected.name(), got: self.form.name() });
        }
        Ok(())
    }

    /// Energy under whichever form this Hamiltonian carries.
    pub fn energy(&self, hist: &SpinHistory) -> Result<Complex<T>> {
        match self.form {
            HamiltonianForm::General => self.energy_general(hist),
            HamiltonianForm::Spin1Chain => self.energy_superohmic(hist).map(Complex::from),
            HamiltonianForm::SingleSlice => self.energy_single_slice(hist).map(Complex::from),
        }
    }

    /// Term-by-term sum over all five channels. Individual histories carry an
    /// imaginary part; it cancels against the σ ↔ τ exchanged history, whose
    /// energy is the complex conjugate.
    pub fn energy_general(&self, hist: &SpinHistory) -> Result<Complex<T>> {
        self.require_form(HamiltonianForm::General)?;
        self.check_history(hist)?;
        let c = self.couplings.as_ref().expect("general form carries couplings");
        let m = self.lattice.n_qubits();
        let diff = |r, n| T::from_i8(hist.tau(r, n) - hist.sigma(r, n)).unwrap();
        let sum = |r, n| T::from_i8(hist.tau(r, n) + hist.sigma(r, n)).unwrap();

        let mut re = T::zero();
        let mut im = T::zero();
        for n in 0..self.n_cycles {
            for r in 0..m {
                let (dr, pr) = (diff(r, n), sum(r, n));
                let (tr, sr) = (hist.tau(r, n), hist.sigma(r, n));
                for s in 0..m {
                    let rs = r * m + s;
                    let ds = diff(s, n);
                    let cross = T::from_i8(hist.tau(s, n) * sr - tr * hist.sigma(s, n)).unwrap();
                    re += c.f1[0][rs] * dr * ds;
                    im += c.phi1[rs] * ds * pr + c.phi2[rs] * cross;
                }
            }
            for mm in 0..n {
                let sep = n - mm;
                for r in 0..m {
                    let dr = diff(r, n);
                    if dr == T::zero() {
                        continue;
                    }
                    for s in 0..m {
                        let rs = r * m + s;
                        re -= (c.f1[sep][rs] - c.phi3[sep][rs]) * dr * diff(s, mm);
                        im += (c.f2[sep][rs] + c.phi3[sep][rs]) * dr * sum(s, mm);
                    }
                }
            }
        }
        Ok(Complex::new(re, im))
    }

    /// `J Σ_{r,n} [S²_{r,n} + ½ S_{r,n} S_{r,n+1}]`, no exchange past the last cycle.
    pub fn energy_superohmic(&self, hist: &SpinHistory) -> Result<T> {
        self.require_form(HamiltonianForm::Spin1Chain)?;
        self.check_history(hist)?;
        let mut onsite = 0i64;
        let mut exchange = 0i64;
        for n in 0..self.n_cycles {
            for r in 0..hist.n_qubits() {
                let s = hist.spin1(r, n) as i64;
                onsite += s * s;
                if n + 1 < self.n_cycles {
                    exchange += s * hist.spin1(r, n + 1) as i64;
                }
            }
        }
        let j = self.coupling;
        Ok(j * T::from_i64(onsite).unwrap() + j / T::lit(2.0) * T::from_i64(exchange).unwrap())
    }

    /// `J Σ_{r,n} S²_{r,n}`.
    pub fn energy_single_slice(&self, hist: &SpinHistory) -> Result<T> {
        self.require_form(HamiltonianForm::SingleSlice)?;
        self.check_history(hist)?;
        let mut onsite = 0i64;
        for n in 0..self.n_cycles {
            for r in 0..hist.n_qubits() {
                onsite += (hist.spin1(r, n) as i64).pow(2);
            }
        }
        Ok(self.coupling * T::from_i64(onsite).unwrap())
    }

    /// `exp(−ℋ(σ̄,τ̄)) + exp(−ℋ(τ̄,σ̄))`: the combination that enters every
    /// fidelity sum. Its imaginary part vanishes up to roundoff.
    pub fn exchange_symmetrized_weight(&self, hist: &SpinHistory) -> Result<Complex<T>> {
        let a = self.energy(hist)?;
        let b = self.energy(&hist.swapped())?;
        Ok((-a).exp() + (-b).exp())
    }
}

fn check_cycles(n_cycles: usize) -> Result<()> {
    if n_cycles == 0 {
        return Err(Error::invalid("n_cycles", "must be >= 1"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{CorrelatorMode, QuadratureOptions};

    fn history(m: usize, n: usize, flips: &[(usize, usize)]) -> SpinHistory {
        let mut h = SpinHistory::uniform(m, n);
        for &(r, c) in flips {
            h.flip_tau(r, c);
        }
        h
    }

    #[test]
    fn superohmic_examples() {
        let lat = CodeLattice::new(2).unwrap();
        let h = EffectiveHamiltonian::spin1_chain_with_coupling(&lat, 3.0, 3).unwrap();
        assert_eq!(h.energy_superohmic(&SpinHistory::uniform(5, 3)).unwrap(), 0.0);
        assert_eq!(h.energy_superohmic(&history(5, 3, &[(2, 1)])).unwrap(), 3.0);
        assert_eq!(h.energy_superohmic(&history(5, 3, &[(2, 1), (2, 2)])).unwrap(), 7.5);
    }

    #[test]
    fn wrong_form_is_rejected() {
        let lat = CodeLattice::new(2).unwrap();
        let h = EffectiveHamiltonian::single_slice_with_coupling(&lat, 1.0, 1).unwrap();
        assert!(matches!(h.energy_superohmic(&SpinHistory::uniform(5, 1)), Err(Error::WrongForm { .. })));
        assert!(h.energy_general(&SpinHistory::uniform(5, 1)).is_err());
        assert!(h.energy(&SpinHistory::uniform(4, 1)).is_err());
    }

    #[test]
    fn general_needs_full_table() {
        let lat = CodeLattice::new(2).unwrap();
        let env = EnvironmentSpec::superohmic(1.0, 1.0, 1.0, 3.0);
        let opts = QuadratureOptions::default();
        let table = CorrelatorTable::for_lattice(&env, &lat, 1, CorrelatorMode::Continuum, &opts).unwrap();
        assert!(EffectiveHamiltonian::general(&lat, &table, 1).is_ok());
        assert!(matches!(EffectiveHamiltonian::general(&lat, &table, 2), Err(Error::MissingCorrelator { n: 1, .. })));
    }

    #[test]
    fn general_vanishes_on_diagonal_histories() {
        let lat = CodeLattice::new(2).unwrap();
        let env = EnvironmentSpec::superohmic(1.0, 1.0, 1.0, 3.0);
        let opts = QuadratureOptions::default();
        let table = CorrelatorTable::for_lattice(&env, &lat, 2, CorrelatorMode::Continuum, &opts).unwrap();
        let h = EffectiveHamiltonian::general(&lat, &table, 2).unwrap();
        let mut hist = SpinHistory::uniform(5, 2);
        hist.flip_sigma(1, 0);
        hist.flip_tau(1, 0);
        let e = h.energy_general(&hist).unwrap();
        assert_eq!(e, Complex::new(0.0, 0.0));
    }
}
