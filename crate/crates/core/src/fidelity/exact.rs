use num_complex::Complex;
use rayon::prelude::*;

use super::{FidelityEstimate, FidelityMethod, FidelityParams};
use crate::code::{CodeLattice, LogicalInsertion};
use crate::statmech::{EffectiveHamiltonian, HamiltonianForm, SpinHistory};
use crate::{Error, Real, Result};

/// Largest number of cycles [`fidelity_exact`] will enumerate.
pub const EXACT_CYCLE_LIMIT: usize = 2;

/// Relative size of the imaginary part tolerated in the summed weights.
const REALITY_TOLERANCE: f64 = 1e-10;

/// Per-slice projector weights of one constrained configuration.
struct Slice {
    sigma: Vec<i8>,
    /// `⟨σ|G|σ⟩`.
    identity: f64,
    /// `Σ_{𝒥 ∈ {Ī, X̄}} ⟨σ|𝒥G|σ⟩`.
    summed: f64,
}

/// Fidelity by brute force over every doubled history `(σ̄, τ̄)` with star-
/// satisfying slices. Each history is weighted by `exp(−ℋ)` times its
/// projector matrix elements. The numerator restricts the first and last
/// cycle to identity insertions; every other insertion is summed over
/// `{Ī, X̄}`. For `N = 1` the two restricted cycles coincide.
pub fn fidelity_exact<T: Real>(
    lattice: &CodeLattice,
    h: &EffectiveHamiltonian<'_, T>,
    n_cycles: usize,
) -> Result<FidelityEstimate<T>> {
    if h.n_cycles() != n_cycles {
        return Err(Error::DimensionMismatch { what: "Hamiltonian cycles", expected: n_cycles, got: h.n_cycles() });
    }
    if h.lattice().n_qubits() != lattice.n_qubits() {
        return Err(Error::DimensionMismatch {
            what: "Hamiltonian qubits",
            expected: lattice.n_qubits(),
            got: h.lattice().n_qubits(),
        });
    }
    if n_cycles > EXACT_CYCLE_LIMIT {
        return Err(Error::Capacity { what: "cycles", value: n_cycles, limit: EXACT_CYCLE_LIMIT });
    }

    let slices: Vec<Slice> = lattice
        .constrained_sigma()?
        .map(|sigma| {
            let identity: f64 = lattice.projector_element(&sigma, LogicalInsertion::Identity)?;
            let flipped: f64 = lattice.projector_element(&sigma, LogicalInsertion::LogicalX)?;
            Ok(Slice { sigma, identity, summed: identity + flipped })
        })
        .collect::<Result<_>>()?;
    let c = slices.len();
    let m = lattice.n_qubits();
    // Odometer digits: σ_0..σ_{N-1}, then τ_0..τ_{N-1}.
    let digits = 2 * n_cycles;
    let total = c.pow(digits as u32);

    let restricted = |l: usize| l == 0 || l + 1 == n_cycles;
    let (num, den) = (0..c)
        .into_par_iter()
        .map(|first| -> Result<(Complex<T>, Complex<T>)> {
            let mut num = Complex::new(T::zero(), T::zero());
            let mut den = num;
            let mut idx = vec![0usize; digits];
            idx[0] = first;
            let mut sigma = Vec::with_capacity(m * n_cycles);
            let mut tau = Vec::with_capacity(m * n_cycles);
            for _ in 0..total / c {
                sigma.clear();
                tau.clear();
                let (mut p_num, mut p_den) = (1.0f64, 1.0f64);
                for l in 0..n_cycles {
                    let (s, t) = (&slices[idx[l]], &slices[idx[n_cycles + l]]);
                    sigma.extend_from_slice(&s.sigma);
                    tau.extend_from_slice(&t.sigma);
                    p_den *= s.summed * t.summed;
                    p_num *= if restricted(l) { s.identity * t.identity } else { s.summed * t.summed };
                }
                if p_den != 0.0 || p_num != 0.0 {
                    let hist = SpinHistory::new(m, n_cycles, sigma.clone(), tau.clone())?;
                    let w = (-h.energy(&hist)?).exp();
                    num += w * T::from_f64(p_num).unwrap();
                    den += w * T::from_f64(p_den).unwrap();
                }
                for slot in idx.iter_mut().skip(1) {
                    *slot += 1;
                    if *slot < c {
                        break;
                    }
                    *slot = 0;
                }
            }
            Ok((num, den))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold((Complex::new(T::zero(), T::zero()), Complex::new(T::zero(), T::zero())), |a, b| (a.0 + b.0, a.1 + b.1));

    for z in [num, den] {
        if z.im.abs() > T::lit(REALITY_TOLERANCE) * z.re.abs().max(T::min_positive_value()) {
            return Err(Error::NotReal { imag: z.im.abs().to_f64().unwrap(), real: z.re.abs().to_f64().unwrap() });
        }
    }
    if !(den.re.to_f64().unwrap_or(0.0).abs() >= 1e-300) {
        return Err(Error::Degenerate { value: den.re.to_f64().unwrap_or(f64::NAN) });
    }

    let coupling_j = match h.form() {
        HamiltonianForm::General => None,
        _ => Some(h.coupling()),
    };
    Ok(FidelityEstimate {
        value: num.re / den.re,
        std_error: T::zero(),
        method: FidelityMethod::ExactEnumeration,
        params: FidelityParams { d: lattice.distance(), n_cycles, coupling_j, form: h.form(), env: None, seed: None },
        raw_denominator: Some(den.re),
    })
}
