//! Surface-code quantum memory coupled to a bosonic bath, mapped onto classical
//! spin models.
//!
//! The crate evaluates the bath correlators that couple qubit Ising variables
//! across space and QEC cycles ([`env`]), builds the planar code lattice and its
//! mass-field parametrisation ([`code`]), assembles the effective spin
//! Hamiltonians together with transfer-matrix and Monte Carlo tools
//! ([`statmech`]), and computes the logical fidelity after `N` error-free
//! syndrome rounds and the coupling threshold ([`fidelity`]).
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod code;
pub mod env;
mod error;
pub mod fidelity;
mod scalar;
mod seed;
pub mod statmech;

pub use error::{Error, Result};
pub use scalar::Real;

pub use code::{CodeLattice, LatticeVector, MassFieldConfig, MassFieldSlice};
pub use env::{
    correlator, leading_divergence, spectral_density, CorrelatorKind, CorrelatorMode, CorrelatorTable, Divergence,
    EnvironmentSpec, QuadratureOptions,
};
pub use fidelity::{
    fidelity_exact, fidelity_slice_product, fidelity_slice_product_with_coupling, fidelity_sweep, threshold_lambda,
    FidelityEstimate, FidelityMethod, SliceProductOptions, SweepTable,
};
pub use statmech::{
    coupling_j, ising_slice_energy, mc_locate_critical, onsager_critical_coupling, transfer_matrix_gap,
    CriticalEstimate, EffectiveHamiltonian, HamiltonianForm, McOptions, SpinHistory, TransferSpectrum, UpdateScheme,
};

pub type EnvironmentSpec64 = EnvironmentSpec<f64>;
pub type CorrelatorTable64 = CorrelatorTable<f64>;
pub type EffectiveHamiltonian64<'a> = EffectiveHamiltonian<'a, f64>;
pub type FidelityEstimate64 = FidelityEstimate<f64>;
pub type CriticalEstimate64 = CriticalEstimate<f64>;
pub type TransferSpectrum64 = TransferSpectrum<f64>;

pub type EnvironmentSpec32 = EnvironmentSpec<f32>;
pub type CorrelatorTable32 = CorrelatorTable<f32>;
