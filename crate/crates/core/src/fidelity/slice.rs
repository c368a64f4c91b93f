//! Per-slice evaluation for decoupled cycles.
//!
//! With `ℋ_l = J Σ_r S²_{r,l}` and `π = στ` (itself star-satisfying), the
//! weight of a slice is `exp(−JM/2) exp((J/2) Σ_r π_r)`. Writing `π` through
//! mass fields turns `Σ_r π_r` into an Ising energy on the plaquette lattice
//! with bond `J/2` and fields on the top and bottom rows. After fixing the
//! top sign to `+1`, the bottom sign `η` equals `X̄(π)`. The restricted end
//! slices then contribute `ρ = (Z(+) + Z(−)) / (2 Z(+))` and middle slices
//! contribute one, so `F = ρ` for `N = 1` and `F = ρ²` otherwise.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{FidelityEstimate, FidelityMethod, FidelityParams};
use crate::code::CodeLattice;
use crate::env::EnvironmentSpec;
use crate::seed::derive_seed;
use crate::statmech::{coupling_j, HamiltonianForm};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceProductOptions {
    /// Plaquette lattices up to this many sites are enumerated exactly.
    pub exact_site_limit: usize,
    /// Use Monte Carlo even below the enumeration limit (for cross-checks).
    pub force_monte_carlo: bool,
    /// Independent bridge replicas; their spread sets the error bar.
    pub replicas: usize,
    pub sweeps_per_stage: usize,
    pub burn_in_sweeps: usize,
    /// Largest change of `K·h·(bottom row size)` between bridge stages.
    pub max_stage_step: f64,
    /// Estimates with a larger standard error are rejected.
    pub max_std_error: f64,
    pub seed: u64,
}

impl Default for SliceProductOptions {
    fn default() -> Self {
        Self {
            exact_site_limit: 20,
            force_monte_carlo: false,
            replicas: 16,
            sweeps_per_stage: 2000,
            burn_in_sweeps: 200,
            max_stage_step: 0.5,
            max_std_error: 5e-3,
            seed: 0,
        }
    }
}

impl SliceProductOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// `Z(+)` and `Z(−)`, both scaled by `exp(−x_max)` where `x_max` is the
/// exponent of the all-up configuration at `η = +1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPartition<T> {
    pub z_plus: T,
    pub z_minus: T,
}

/// The per-slice factor and how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceRatio<T> {
    /// `Z(−)/Z(+)`.
    pub z_ratio: T,
    /// `ρ = (1 + Z(−)/Z(+)) / 2`.
    pub rho: T,
    pub std_error: T,
    pub method: FidelityMethod,
}

struct DualGraph {
    sites: usize,
    bonds: Vec<(usize, usize)>,
    top: Vec<usize>,
    bottom: Vec<usize>,
}

impl DualGraph {
    fn new(lattice: &CodeLattice) -> Self {
        Self {
            sites: lattice.n_plaquettes(),
            bonds: lattice.dual_bonds().collect(),
            top: lattice.top_boundary_sites().collect(),
            bottom: lattice.bottom_boundary_sites().collect(),
        }
    }
}

/// Counts configurations by `(Σ bonds + Σ top, Σ bottom)`. The counts are
/// exact integers, so every coupling reuses one enumeration.
fn density_of_states(g: &DualGraph) -> BTreeMap<(i64, i64), u64> {
    let mut dos = BTreeMap::new();
    let mut spins = vec![1i64; g.sites];
    for bits in 0u64..(1u64 << g.sites) {
        for (i, s) in spins.iter_mut().enumerate() {
            *s = if bits >> i & 1 == 1 { -1 } else { 1 };
        }
        let bulk: i64 = g.bonds.iter().map(|&(p, q)| spins[p] * spins[q]).sum::<i64>()
            + g.top.iter().map(|&p| spins[p]).sum::<i64>();
        let bottom: i64 = g.bottom.iter().map(|&p| spins[p]).sum();
        *dos.entry((bulk, bottom)).or_insert(0) += 1;
    }
    dos
}

/// Exact boundary-field partition functions of one slice at coupling `J`
/// (Ising bond `J/2`), by enumerating all `2^P` plaquette configurations.
pub fn boundary_partition_functions<T: Real>(
    lattice: &CodeLattice,
    j: T,
    site_limit: usize,
) -> Result<BoundaryPartition<T>> {
    let g = DualGraph::new(lattice);
    if g.sites > site_limit || g.sites >= 63 {
        return Err(Error::Capacity { what: "dual sites", value: g.sites, limit: site_limit.min(62) });
    }
    let k = j / T::lit(2.0);
    let x_max = T::from_usize_lossy(g.bonds.len() + g.top.len() + g.bottom.len());
    let (mut zp, mut zm) = (T::zero(), T::zero());
    for (&(a, b), &count) in &density_of_states(&g) {
        let c = T::from_u64(count).unwrap();
        let (a, b) = (T::from_i64(a).unwrap(), T::from_i64(b).unwrap());
        zp += c * (k * (a + b - x_max)).exp();
        zm += c * (k * (a - b - x_max)).exp();
    }
    Ok(BoundaryPartition { z_plus: zp, z_minus: zm })
}

/// Sampler for the plaquette Ising model with bond `K`, top field `K` and
/// bottom field `K·h`. Both fields couple to one shared ghost spin, so every
/// Swendsen–Wang cluster (the ghost's included) may flip; observables are
/// taken in the ghost's frame. A Metropolis pass after each cluster update
/// lets interfaces slide in from the open sides, which clusters alone do
/// poorly deep in the ordered phase.
struct Bridge<'g> {
    g: &'g DualGraph,
    neighbors: Vec<Vec<usize>>,
    top_mult: Vec<u32>,
    bottom_mult: Vec<u32>,
    spins: Vec<i8>,
    ghost: i8,
    parent: Vec<usize>,
}

impl<'g> Bridge<'g> {
    fn new(g: &'g DualGraph) -> Self {
        let mut neighbors = vec![Vec::new(); g.sites];
        for &(p, q) in &g.bonds {
            neighbors[p].push(q);
            neighbors[q].push(p);
        }
        let mut top_mult = vec![0; g.sites];
        let mut bottom_mult = vec![0; g.sites];
        for &p in &g.top {
            top_mult[p] += 1;
        }
        for &p in &g.bottom {
            bottom_mult[p] += 1;
        }
        Self { g, neighbors, top_mult, bottom_mult, spins: vec![1; g.sites], ghost: 1, parent: Vec::new() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    /// Field on `p` in the ghost's frame.
    fn field(&self, p: usize, k: f64, h: f64) -> f64 {
        k * (self.top_mult[p] as f64 + h * self.bottom_mult[p] as f64)
    }

    fn cluster_update<R: Rng>(&mut self, k: f64, h: f64, rng: &mut R) {
        let n = self.g.sites;
        let ghost = n;
        self.parent = (0..n + 1).collect();
        let p_bond = 1.0 - (-2.0 * k).exp();
        for p in 0..n {
            for idx in 0..self.neighbors[p].len() {
                let q = self.neighbors[p][idx];
                if p < q && self.spins[p] == self.spins[q] && rng.gen::<f64>() < p_bond {
                    self.union(p, q);
                }
            }
            let s = (self.spins[p] * self.ghost) as f64;
            if self.top_mult[p] > 0 && s > 0.0 && rng.gen::<f64>() < 1.0 - (-2.0 * k * self.top_mult[p] as f64).exp() {
                self.union(p, ghost);
            }
            if self.bottom_mult[p] > 0
                && s * h > 0.0
                && rng.gen::<f64>() < 1.0 - (-2.0 * k * h.abs() * self.bottom_mult[p] as f64).exp()
            {
                self.union(p, ghost);
            }
        }
        let mut flip = vec![None; n + 1];
        for p in 0..=n {
            let root = self.find(p);
            if *flip[root].get_or_insert_with(|| rng.gen::<bool>()) {
                if p == ghost {
                    self.ghost = -self.ghost;
                } else {
                    self.spins[p] = -self.spins[p];
                }
            }
        }
    }

    fn metropolis_pass<R: Rng>(&mut self, k: f64, h: f64, rng: &mut R) {
        for p in 0..self.g.sites {
            let s = self.spins[p] as f64;
            let local: f64 = self.neighbors[p].iter().map(|&q| self.spins[q] as f64).sum();
            let delta = 2.0 * s * (k * local + self.field(p, k, h) * self.ghost as f64);
            if delta <= 0.0 || rng.gen::<f64>() < (-delta).exp() {
                self.spins[p] = -self.spins[p];
            }
        }
    }

    fn sweep<R: Rng>(&mut self, k: f64, h: f64, rng: &mut R) {
        self.cluster_update(k, h, rng);
        self.metropolis_pass(k, h, rng);
    }

    fn bottom_sum(&self) -> f64 {
        let g = self.ghost as f64;
        self.g.bottom.iter().map(|&p| self.spins[p] as f64 * g).sum()
    }
}

/// One replica: `Z(−)/Z(+)` as a product of stage ratios
/// `⟨exp(K (h_{k+1} − h_k) Σ_bottom s)⟩_{h_k}` along `h: +1 → −1`.
fn bridge_replica(g: &DualGraph, k: f64, opts: &SliceProductOptions, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = 2.0 * k * g.bottom.len() as f64;
    let stages = ((span / opts.max_stage_step).ceil() as usize).max(1);
    let mut sampler = Bridge::new(g);
    let mut log_ratio = 0.0;
    for stage in 0..stages {
        let h = 1.0 - 2.0 * stage as f64 / stages as f64;
        let dh = -2.0 / stages as f64;
        for _ in 0..opts.burn_in_sweeps {
            sampler.sweep(k, h, &mut rng);
        }
        let mut acc = 0.0;
        for _ in 0..opts.sweeps_per_stage {
            sampler.sweep(k, h, &mut rng);
            acc += (k * dh * sampler.bottom_sum()).exp();
        }
        log_ratio += (acc / opts.sweeps_per_stage as f64).ln();
    }
    log_ratio.exp()
}

/// The per-slice factor at coupling `J`.
pub fn slice_ratio<T: Real>(lattice: &CodeLattice, j: T, opts: &SliceProductOptions) -> Result<SliceRatio<T>> {
    if !j.is_finite() || j < T::zero() {
        return Err(Error::invalid("J", format!("must be finite and >= 0, got {j}")));
    }
    let g = DualGraph::new(lattice);
    if g.sites <= opts.exact_site_limit && !opts.force_monte_carlo {
        let z = boundary_partition_functions(lattice, j, opts.exact_site_limit)?;
        let q = z.z_minus / z.z_plus;
        return Ok(SliceRatio {
            z_ratio: q,
            rho: (T::one() + q) / T::lit(2.0),
            std_error: T::zero(),
            method: FidelityMethod::SliceProduct,
        });
    }
    if opts.replicas < 2 || opts.sweeps_per_stage == 0 {
        return Err(Error::invalid("replicas", "Monte Carlo needs >= 2 replicas and >= 1 sweep per stage"));
    }
    let k = j.to_f64().unwrap() / 2.0;
    let base = derive_seed(opts.seed, &[lattice.distance() as u64, j.to_f64().unwrap().to_bits()]);
    let samples: Vec<f64> = (0..opts.replicas)
        .into_par_iter()
        .map(|r| bridge_replica(&g, k, opts, derive_seed(base, &[r as u64])))
        .collect();
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se_q = (var / n).sqrt();
    Ok(SliceRatio {
        z_ratio: T::from_f64(mean).unwrap(),
        rho: T::from_f64((1.0 + mean) / 2.0).unwrap(),
        std_error: T::from_f64(se_q / 2.0).unwrap(),
        method: FidelityMethod::MonteCarlo,
    })
}

/// Slice-product fidelity for the superohmic bath over `n_cycles` cycles.
pub fn fidelity_slice_product<T: Real>(
    lattice: &CodeLattice,
    env: &EnvironmentSpec<T>,
    n_cycles: usize,
    opts: &SliceProductOptions,
) -> Result<FidelityEstimate<T>> {
    env.validate()?;
    env.require_superohmic()?;
    let mut est = fidelity_slice_product_with_coupling(lattice, coupling_j(env)?, n_cycles, opts)?;
    est.params.env = Some(*env);
    Ok(est)
}

/// Slice-product fidelity at a given spin-1 coupling `J`.
pub fn fidelity_slice_product_with_coupling<T: Real>(
    lattice: &CodeLattice,
    j: T,
    n_cycles: usize,
    opts: &SliceProductOptions,
) -> Result<FidelityEstimate<T>> {
    if n_cycles == 0 {
        return Err(Error::invalid("n_cycles", "must be >= 1"));
    }
    let ratio = slice_ratio(lattice, j, opts)?;
    let (value, std_error) = if n_cycles == 1 {
        (ratio.rho, ratio.std_error)
    } else {
        (ratio.rho * ratio.rho, T::lit(2.0) * ratio.rho * ratio.std_error)
    };
    if ratio.method == FidelityMethod::MonteCarlo && std_error.to_f64().unwrap() > opts.max_std_error {
        return Err(Error::NotConverged { std_error: std_error.to_f64().unwrap(), threshold: opts.max_std_error });
    }
    Ok(FidelityEstimate {
        value,
        std_error,
        method: ratio.method,
        params: FidelityParams {
            d: lattice.distance(),
            n_cycles,
            coupling_j: Some(j),
            form: HamiltonianForm::SingleSlice,
            env: None,
            seed: (ratio.method == FidelityMethod::MonteCarlo).then_some(opts.seed),
        },
        raw_denominator: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coupling_is_unity() {
        for d in 2..=4 {
            let lat = CodeLattice::new(d).unwrap();
            let f = fidelity_slice_product_with_coupling(&lat, 0.0, 3, &SliceProductOptions::default()).unwrap();
            assert_eq!(f.value, 1.0);
        }
    }

    #[test]
    fn strong_coupling_approaches_one_half() {
        let lat = CodeLattice::new(3).unwrap();
        let f = fidelity_slice_product_with_coupling(&lat, 40.0f64, 1, &SliceProductOptions::default()).unwrap();
        assert!((f.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn density_of_states_counts_everything() {
        let lat = CodeLattice::new(3).unwrap();
        let dos = density_of_states(&DualGraph::new(&lat));
        assert_eq!(dos.values().sum::<u64>(), 64);
    }

    #[test]
    fn rejects_bad_inputs() {
        let lat = CodeLattice::new(2).unwrap();
        let opts = SliceProductOptions::default();
        assert!(fidelity_slice_product_with_coupling(&lat, -1.0, 1, &opts).is_err());
        assert!(fidelity_slice_product_with_coupling(&lat, 1.0, 0, &opts).is_err());
        let mut env = EnvironmentSpec::superohmic(1.0, 1.0, 1.0, 1.0);
        env.s = 0.0;
        assert!(matches!(fidelity_slice_product(&lat, &env, 1, &opts), Err(Error::Regime { .. })));
    }
}
