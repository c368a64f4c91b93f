//! Effective statistical-mechanics models: the general space-time Hamiltonian,
//! its superohmic reductions, the boundary-field Ising slice, and tools to
//! analyse them (transfer matrix, Monte Carlo).

mod hamiltonian;
mod history;
pub mod mc;
mod transfer;

pub use hamiltonian::{EffectiveHamiltonian, HamiltonianForm};
pub use history::SpinHistory;
pub use mc::{mc_locate_critical, mc_run, CriticalEstimate, McCell, McOptions, UpdateScheme};
pub use transfer::{transfer_matrix_gap, TransferSpectrum};

use crate::code::{check_spins, CodeLattice};
use crate::env::{leading_divergence, Divergence, EnvironmentSpec};
use crate::scalar::ln_one_plus_sqrt2;
use crate::{Error, Real, Result};

/// `J = 2λ²vΛ/(πω₀³)`, four times the leading F₁(0,0) divergence.
pub fn coupling_j<T: Real>(env: &EnvironmentSpec<T>) -> Result<T> {
    Ok(T::lit(4.0) * leading_divergence(env, Divergence::F1Origin)?)
}

/// Square-lattice Ising critical point `J_c = 2 ln(1+√2)` for bonds `J/4`.
pub fn onsager_critical_coupling<T: Real>() -> T {
    T::lit(2.0) * ln_one_plus_sqrt2::<T>()
}

/// Energy of one dual-lattice (plaquette) slice,
/// `−(J/4)[Σ_{⟨p,p'⟩} s_p s_{p'} + Σ_{top} s_p + η Σ_{bottom} s_p]`.
///
/// The top boundary field is gauge-fixed to `+1`; `η` is the relative sign
/// of the bottom field.
pub fn ising_slice_energy<T: Real>(lattice: &CodeLattice, spins: &[i8], eta: i8, j: T) -> Result<T> {
    if spins.len() != lattice.n_plaquettes() {
        return Err(Error::DimensionMismatch {
            what: "dual spins",
            expected: lattice.n_plaquettes(),
            got: spins.len(),
        });
    }
    check_spins(spins)?;
    check_spins(&[eta])?;
    let bulk: i64 = lattice.dual_bonds().map(|(p, q)| (spins[p] * spins[q]) as i64).sum();
    let top: i64 = lattice.top_boundary_sites().map(|p| spins[p] as i64).sum();
    let bottom: i64 = lattice.bottom_boundary_sites().map(|p| spins[p] as i64).sum();
    let total = bulk + top + eta as i64 * bottom;
    Ok(-(j / T::lit(4.0)) * T::from_i64(total).unwrap())
}
