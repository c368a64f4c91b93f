use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fidelity_slice_product, FidelityEstimate, SliceProductOptions};
use crate::code::CodeLattice;
use crate::env::EnvironmentSpec;
use crate::seed::derive_seed;
use crate::statmech::coupling_j;
use crate::{Error, Real, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<T> {
    pub d: usize,
    pub n_cycles: usize,
    pub lambda: T,
    pub coupling_j: T,
    pub estimate: FidelityEstimate<T>,
    pub seed: u64,
}

/// A step along λ where the fidelity rose by more than two combined errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityViolation {
    pub d: usize,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    /// Rise beyond the allowed noise band.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable<T> {
    /// Sorted by `d`, then λ.
    pub rows: Vec<SweepRow<T>>,
    pub violations: Vec<MonotonicityViolation>,
}

impl<T: Real> SweepTable<T> {
    pub fn is_monotone(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn rows_for_distance(&self, d: usize) -> impl Iterator<Item = &SweepRow<T>> {
        self.rows.iter().filter(move |r| r.d == d)
    }

    /// Rows at one λ (exact match), ordered by `d`.
    pub fn column(&self, lambda: T) -> Vec<&SweepRow<T>> {
        self.rows.iter().filter(|r| r.lambda == lambda).collect()
    }

    /// CSV with columns `d,N,lambda,J,fidelity,std_error,method,seed`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "d,N,lambda,J,fidelity,std_error,method,seed")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.d,
                r.n_cycles,
                r.lambda,
                r.coupling_j,
                r.estimate.value,
                r.estimate.std_error,
                r.estimate.method.name(),
                r.seed
            )?;
        }
        Ok(())
    }
}

fn monotonicity<T: Real>(rows: &[SweepRow<T>]) -> Vec<MonotonicityViolation> {
    rows.windows(2)
        .filter(|w| w[0].d == w[1].d)
        .filter_map(|w| {
            let (a, b) = (&w[0], &w[1]);
            let f = |x: T| x.to_f64().unwrap();
            let band = 2.0 * (f(a.estimate.std_error).powi(2) + f(b.estimate.std_error).powi(2)).sqrt() + 1e-12;
            let excess = f(b.estimate.value) - f(a.estimate.value) - band;
            (excess > 0.0).then(|| MonotonicityViolation {
                d: a.d,
                lambda_lo: f(a.lambda),
                lambda_hi: f(b.lambda),
                excess,
            })
        })
        .collect()
}

/// Slice-product fidelity on every `(d, λ)` cell, computed in parallel. Each
/// cell gets its own seed derived from `opts.seed`.
pub fn fidelity_sweep<T: Real>(
    distances: &[usize],
    lambdas: &[T],
    env: &EnvironmentSpec<T>,
    n_cycles: usize,
    opts: &SliceProductOptions,
) -> Result<SweepTable<T>> {
    if distances.is_empty() || lambdas.is_empty() {
        return Err(Error::invalid("grid", "distance and lambda grids must be non-empty"));
    }
    env.validate()?;
    env.require_superohmic()?;
    let mut distances = distances.to_vec();
    distances.sort_unstable();
    distances.dedup();
    let mut lambdas = lambdas.to_vec();
    lambdas.sort_by(|a, b| a.partial_cmp(b).expect("finite lambda"));
    lambdas.dedup();

    let lattices = distances.iter().map(|&d| CodeLattice::new(d)).collect::<Result<Vec<_>>>()?;
    let cells: Vec<(usize, usize)> =
        (0..lattices.len()).flat_map(|a| (0..lambdas.len()).map(move |b| (a, b))).collect();
    let rows = cells
        .par_iter()
        .map(|&(a, b)| {
            let lattice = &lattices[a];
            let cell_env = env.with_lambda(lambdas[b]);
            let seed = derive_seed(opts.seed, &[lattice.distance() as u64, b as u64]);
            let estimate = fidelity_slice_product(lattice, &cell_env, n_cycles, &opts.clone().with_seed(seed))?;
            Ok(SweepRow {
                d: lattice.distance(),
                n_cycles,
                lambda: lambdas[b],
                coupling_j: coupling_j(&cell_env)?,
                estimate,
                seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let violations = monotonicity(&rows);
    Ok(SweepTable { rows, violations })
}
