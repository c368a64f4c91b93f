//! Bath model: spectral density and the space-time correlators that set every
//! coupling of the effective spin Hamiltonian.
//!
//! Units follow ħ = 1. Lengths are measured in code-lattice spacings (the
//! distance between neighbouring star vertices), so `cutoff` is an inverse
//! length in the same units and `v * cutoff * delta` is dimensionless.

mod correlator;
pub mod quadrature;

pub use correlator::{correlator, CorrelatorKind, CorrelatorMode, CorrelatorTable};
pub use quadrature::QuadratureOptions;

use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

/// All bath and coupling parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec<T> {
    /// System-bath coupling strength λ.
    pub lambda: T,
    /// Excitation velocity `v` of the linear dispersion ω_k = v|k|.
    pub v: T,
    /// Characteristic frequency ω₀.
    pub omega0: T,
    /// Ultraviolet momentum cutoff Λ.
    pub cutoff: T,
    /// Spectral exponent `s`.
    pub s: T,
    /// Spatial dimension `D` of the bath.
    pub dim: usize,
    /// Duration Δ of one QEC cycle.
    pub delta: T,
    /// Box size `L` used by discrete momentum sums.
    pub box_len: T,
    /// Coordinate-coupling length scale q₀.
    pub q0: T,
}

impl<T: Real> EnvironmentSpec<T> {
    /// Superohmic bath (s = 1/2, D = 2) with unit Δ, q₀ and a box of 100 spacings.
    pub fn superohmic(lambda: T, v: T, omega0: T, cutoff: T) -> Self {
        Self {
            lambda,
            v,
            omega0,
            cutoff,
            s: T::lit(0.5),
            dim: 2,
            delta: T::one(),
            box_len: T::lit(100.0),
            q0: T::one(),
        }
    }

    pub fn with_lambda(mut self, lambda: T) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_delta(mut self, delta: T) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_box_len(mut self, box_len: T) -> Self {
        self.box_len = box_len;
        self
    }

    pub fn with_cutoff(mut self, cutoff: T) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("v", self.v),
            ("omega0", self.omega0),
            ("cutoff", self.cutoff),
            ("delta", self.delta),
            ("box_len", self.box_len),
            ("q0", self.q0),
        ];
        for (name, value) in positive {
            if !(value > T::zero()) || !value.is_finite() {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {value}")));
            }
        }
        if !self.lambda.is_finite() {
            return Err(Error::invalid("lambda", "must be finite"));
        }
        if !self.s.is_finite() {
            return Err(Error::invalid("s", "must be finite"));
        }
        if !(1..=3).contains(&self.dim) {
            return Err(Error::invalid("dim", format!("must be 1, 2 or 3, got {}", self.dim)));
        }
        Ok(())
    }

    pub fn is_superohmic(&self) -> bool {
        self.dim == 2 && (self.s - T::lit(0.5)).abs() <= T::lit(1e-12)
    }

    /// Errors unless (s, D) = (1/2, 2).
    pub fn require_superohmic(&self) -> Result<()> {
        if self.is_superohmic() {
            Ok(())
        } else {
            Err(Error::Regime { s: self.s.to_f64().unwrap_or(f64::NAN), dim: self.dim })
        }
    }
}

/// Two-dimensional spectral density J(ω) = 2λ²/(q₀² ω₀^{2+2s}) ω^{2s+1}.
pub fn spectral_density<T: Real>(env: &EnvironmentSpec<T>, omega: T) -> Result<T> {
    env.validate()?;
    if env.dim != 2 {
        return Err(Error::invalid("dim", format!("closed-form J(ω) needs D = 2, got {}", env.dim)));
    }
    if !(omega >= T::zero()) {
        return Err(Error::invalid("omega", format!("must be >= 0, got {omega}")));
    }
    let two = T::lit(2.0);
    let prefactor = two * env.lambda * env.lambda / (env.q0 * env.q0 * env.omega0.powf(two + two * env.s));
    Ok(prefactor * omega.powf(two * env.s + T::one()))
}

/// Which ultraviolet-divergent correlator to approximate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Divergence {
    /// F₁(0, 0): same site, same cycle.
    F1Origin,
    /// F₁(0, 1): same site, adjacent cycles.
    F1NextCycle,
}

/// Leading term, linear in the cutoff, of the divergent superohmic correlators.
pub fn leading_divergence<T: Real>(env: &EnvironmentSpec<T>, which: Divergence) -> Result<T> {
    env.validate()?;
    env.require_superohmic()?;
    let origin = env.lambda * env.lambda * env.v * env.cutoff / (T::lit(2.0) * T::PI() * env.omega0.powi(3));
    Ok(match which {
        Divergence::F1Origin => origin,
        Divergence::F1NextCycle => -origin / T::lit(2.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit() -> EnvironmentSpec<f64> {
        EnvironmentSpec::superohmic(1.0, 1.0, 1.0, 100.0)
    }

    #[test]
    fn spectral_density_examples() {
        assert_relative_eq!(spectral_density(&unit(), 2.0).unwrap(), 8.0, max_relative = 1e-15);
        assert_eq!(spectral_density(&unit(), 0.0).unwrap(), 0.0);
        assert_relative_eq!(spectral_density(&unit().with_lambda(2.0), 1.0).unwrap(), 8.0, max_relative = 1e-15);
    }

    #[test]
    fn spectral_density_rejects_other_dimensions() {
        let mut env = unit();
        env.dim = 3;
        assert!(matches!(spectral_density(&env, 1.0), Err(Error::InvalidParameter { name: "dim", .. })));
        assert!(spectral_density(&unit(), -1.0).is_err());
    }

    #[test]
    fn leading_divergence_examples() {
        let env = unit();
        assert_relative_eq!(
            leading_divergence(&env, Divergence::F1Origin).unwrap(),
            100.0 / (2.0 * std::f64::consts::PI),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            leading_divergence(&env, Divergence::F1NextCycle).unwrap(),
            -25.0 / std::f64::consts::PI,
            max_relative = 1e-14
        );
        assert_eq!(leading_divergence(&env.with_lambda(0.0), Divergence::F1Origin).unwrap(), 0.0);
    }

    #[test]
    fn leading_divergence_rejects_other_regimes() {
        let mut env = unit();
        env.s = 0.0;
        assert!(matches!(leading_divergence(&env, Divergence::F1Origin), Err(Error::Regime { .. })));
        let mut env = unit();
        env.dim = 3;
        assert!(leading_divergence(&env, Divergence::F1Origin).is_err());
    }

    #[test]
    fn validation_rejects_nonpositive_scales() {
        assert!(unit().with_cutoff(-1.0).validate().is_err());
        assert!(unit().with_delta(0.0).validate().is_err());
        let mut env = unit();
        env.dim = 4;
        assert!(env.validate().is_err());
    }
}
