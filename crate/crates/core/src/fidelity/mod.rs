//! Logical fidelity after `N` cycles with all-trivial syndromes, and the
//! coupling threshold.
//!
//! Three routes are provided. [`fidelity_exact`] sums over every doubled
//! history, so it works for any Hamiltonian form on small lattices. When the
//! cycles decouple, [`fidelity_slice_product`] rewrites each slice as an Ising
//! model on the plaquette lattice with boundary fields. It enumerates that
//! model exactly when small enough, and otherwise estimates the partition
//! function ratio by Monte Carlo.

mod exact;
mod slice;
mod sweep;

pub use exact::{fidelity_exact, EXACT_CYCLE_LIMIT};
pub use slice::{
    boundary_partition_functions, fidelity_slice_product, fidelity_slice_product_with_coupling, slice_ratio,
    BoundaryPartition, SliceProductOptions, SliceRatio,
};
pub use sweep::{fidelity_sweep, MonotonicityViolation, SweepRow, SweepTable};

use serde::{Deserialize, Serialize};

use crate::env::EnvironmentSpec;
use crate::scalar::ln_one_plus_sqrt2;
use crate::statmech::HamiltonianForm;
use crate::{Real, Result};

/// Slack above one tolerated for roundoff in a fidelity value.
pub const RANGE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityMethod {
    ExactEnumeration,
    SliceProduct,
    MonteCarlo,
}

impl FidelityMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::ExactEnumeration => "exact_enumeration",
            Self::SliceProduct => "slice_product",
            Self::MonteCarlo => "monte_carlo",
        }
    }

    pub fn is_exact(self) -> bool {
        !matches!(self, Self::MonteCarlo)
    }
}

/// Inputs that produced an estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityParams<T> {
    pub d: usize,
    pub n_cycles: usize,
    /// Spin-1 coupling `J`; absent for the general form.
    pub coupling_j: Option<T>,
    pub form: HamiltonianForm,
    pub env: Option<EnvironmentSpec<T>>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate<T> {
    pub value: T,
    /// Zero for exact methods.
    pub std_error: T,
    pub method: FidelityMethod,
    pub params: FidelityParams<T>,
    /// Unnormalized denominator (the weight of the trivial-syndrome branch)
    /// when the method computes it.
    pub raw_denominator: Option<T>,
}

impl<T: Real> FidelityEstimate<T> {
    pub fn in_range(&self) -> bool {
        self.value >= T::zero() && self.value <= T::one() + T::lit(RANGE_SLACK)
    }
}

/// Coupling at which `J` reaches the Onsager point:
/// `λ_c = √(πω₀³ ln(1+√2)/(vΛ))`.
pub fn threshold_lambda<T: Real>(env: &EnvironmentSpec<T>) -> Result<T> {
    env.validate()?;
    env.require_superohmic()?;
    Ok((T::PI() * env.omega0.powi(3) * ln_one_plus_sqrt2::<T>() / (env.v * env.cutoff)).sqrt())
}

/// The threshold with the alternative prefactor of 2, i.e. `2 λ_c`. Here
/// `J(2λ_c) = 4 J_c`, so this value does not solve `J = J_c`. It is kept so
/// that both conventions can be reported side by side.
pub fn threshold_lambda_doubled<T: Real>(env: &EnvironmentSpec<T>) -> Result<T> {
    Ok(T::lit(2.0) * threshold_lambda(env)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statmech::{coupling_j, onsager_critical_coupling};
    use approx::assert_relative_eq;

    #[test]
    fn threshold_examples() {
        let env = EnvironmentSpec::superohmic(1.0, 1.0, 1.0, 1.0);
        let lc = threshold_lambda(&env).unwrap();
        assert_relative_eq!(lc, (std::f64::consts::PI * 2f64.sqrt().ln_1p()).sqrt(), max_relative = 1e-15);
        assert!((lc - 1.66401).abs() < 1e-5);
        let quartered = threshold_lambda(&env.with_cutoff(4.0)).unwrap();
        assert_relative_eq!(quartered, lc / 2.0, max_relative = 1e-15);
        let j = coupling_j(&env.with_lambda(lc)).unwrap();
        assert!((j - onsager_critical_coupling::<f64>()).abs() < 1e-12);
        let j2 = coupling_j(&env.with_lambda(threshold_lambda_doubled(&env).unwrap())).unwrap();
        assert_relative_eq!(j2, 4.0 * onsager_critical_coupling::<f64>(), max_relative = 1e-12);
    }
}
