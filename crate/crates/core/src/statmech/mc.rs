//! Equilibrium Monte Carlo for the periodic square-lattice Ising model with
//! bond strength `J/4`, and Binder-cumulant location of its critical point.

use std::io::{self, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seed::derive_seed;
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateScheme {
    /// Sequential single-spin-flip Metropolis sweeps.
    Metropolis,
    /// Wolff clusters; one sweep flips about as many spins as the lattice holds.
    Wolff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    /// Total sweeps per (size, J) cell, burn-in included.
    pub sweeps: usize,
    pub burn_in_fraction: f64,
    pub scheme: UpdateScheme,
    pub bootstrap_resamples: usize,
    /// Number of contiguous blocks the production series is cut into for
    /// resampling, which preserves autocorrelations inside a block.
    pub bootstrap_blocks: usize,
    pub seed: u64,
    /// Keep the per-sweep magnetization series in the result.
    pub record_traces: bool,
}

impl McOptions {
    pub fn new(sweeps: usize, seed: u64) -> Self {
        Self {
            sweeps,
            burn_in_fraction: 0.2,
            scheme: UpdateScheme::Metropolis,
            bootstrap_resamples: 100,
            bootstrap_blocks: 50,
            seed,
            record_traces: false,
        }
    }

    pub fn with_scheme(mut self, scheme: UpdateScheme) -> Self {
        self.scheme = scheme;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.sweeps < 10 {
            return Err(Error::invalid("sweeps", format!("need at least 10, got {}", self.sweeps)));
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return Err(Error::invalid("burn_in_fraction", "must lie in [0, 1)"));
        }
        if self.bootstrap_blocks < 2 {
            return Err(Error::invalid("bootstrap_blocks", "need at least 2"));
        }
        Ok(())
    }

    fn production_sweeps(&self) -> usize {
        self.sweeps - (self.sweeps as f64 * self.burn_in_fraction).floor() as usize
    }
}

/// Periodic `L × L` Ising lattice.
#[derive(Debug, Clone)]
pub struct SquareIsing {
    size: usize,
    spins: Vec<i8>,
}

impl SquareIsing {
    pub fn ordered(size: usize) -> Self {
        Self { size, spins: vec![1; size * size] }
    }

    pub fn random<R: Rng + ?Sized>(size: usize, rng: &mut R) -> Self {
        let spins = (0..size * size).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        Self { size, spins }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    #[inline]
    fn neighbors(&self, i: usize) -> [usize; 4] {
        let l = self.size;
        let (x, y) = (i % l, i / l);
        [y * l + (x + 1) % l, y * l + (x + l - 1) % l, ((y + 1) % l) * l + x, ((y + l - 1) % l) * l + x]
    }

    /// Magnetization per spin.
    pub fn magnetization(&self) -> f64 {
        self.spins.iter().map(|&s| s as i64).sum::<i64>() as f64 / self.spins.len() as f64
    }

    /// `−K Σ_{⟨ij⟩} s_i s_j`.
    pub fn energy(&self, bond: f64) -> f64 {
        let mut e = 0i64;
        for i in 0..self.spins.len() {
            let [right, _, down, _] = self.neighbors(i);
            e += (self.spins[i] * (self.spins[right] + self.spins[down])) as i64;
        }
        -bond * e as f64
    }

    pub fn metropolis_sweep<R: Rng + ?Sized>(&mut self, bond: f64, rng: &mut R) {
        // Acceptance for local field products s·h = 2 and 4.
        let accept = [(-4.0 * bond).exp(), (-8.0 * bond).exp()];
        for i in 0..self.spins.len() {
            let h: i8 = self.neighbors(i).iter().map(|&j| self.spins[j]).sum();
            let sh = self.spins[i] * h;
            let flip = sh <= 0 || rng.gen::<f64>() < accept[(sh / 2 - 1) as usize];
            if flip {
                self.spins[i] = -self.spins[i];
            }
        }
    }

    /// Grows and flips one Wolff cluster; returns its size.
    pub fn wolff_step<R: Rng + ?Sized>(&mut self, bond: f64, rng: &mut R) -> usize {
        let p_add = 1.0 - (-2.0 * bond).exp();
        let seed = rng.gen_range(0..self.spins.len());
        let target = self.spins[seed];
        self.spins[seed] = -target;
        let mut stack = vec![seed];
        let mut flipped = 1;
        while let Some(i) = stack.pop() {
            for j in self.neighbors(i) {
                if self.spins[j] == target && rng.gen::<f64>() < p_add {
                    self.spins[j] = -target;
                    stack.push(j);
                    flipped += 1;
                }
            }
        }
        flipped
    }

    pub fn sweep<R: Rng + ?Sized>(&mut self, scheme: UpdateScheme, bond: f64, rng: &mut R) {
        match scheme {
            UpdateScheme::Metropolis => self.metropolis_sweep(bond, rng),
            UpdateScheme::Wolff => {
                let mut flipped = 0;
                while flipped < self.spins.len() {
                    flipped += self.wolff_step(bond, rng);
                }
            }
        }
    }
}

/// Equilibration check: `⟨|m|⟩` over the two halves of the production run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftCheck {
    pub first_half: f64,
    pub second_half: f64,
    /// Largest difference accepted as noise: four combined block errors plus 0.01.
    pub threshold: f64,
    pub flagged: bool,
}

/// Measurements of one (size, J) chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McCell {
    pub size: usize,
    pub j: f64,
    pub seed: u64,
    pub mean_abs_m: f64,
    pub m2: f64,
    pub m4: f64,
    pub binder: f64,
    pub drift: DriftCheck,
    /// Per-sweep magnetization after burn-in, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<f64>>,
}

impl McCell {
    /// CSV with columns `sweep,m,m2,m4`; empty body if no trace was kept.
    pub fn write_trace_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "sweep,m,m2,m4")?;
        for (i, &m) in self.trace.iter().flatten().enumerate() {
            let m2 = m * m;
            writeln!(w, "{i},{m},{m2},{}", m2 * m2)?;
        }
        Ok(())
    }
}

pub fn binder_cumulant(m2: f64, m4: f64) -> f64 {
    1.0 - m4 / (3.0 * m2 * m2)
}

fn block_means(series: &[f64], blocks: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let blocks = blocks.min(series.len()).max(1);
    let len = series.len() / blocks;
    (0..blocks).map(|b| series[b * len..(b + 1) * len].iter().map(|&m| f(m)).sum::<f64>() / len as f64).collect()
}

fn mean_and_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn drift_check(series: &[f64]) -> DriftCheck {
    let (a, b) = series.split_at(series.len() / 2);
    let (ma, ea) = mean_and_error(&block_means(a, 25, f64::abs));
    let (mb, eb) = mean_and_error(&block_means(b, 25, f64::abs));
    let threshold = 4.0 * (ea * ea + eb * eb).sqrt() + 0.01;
    DriftCheck { first_half: ma, second_half: mb, threshold, flagged: (ma - mb).abs() > threshold }
}

struct Chain {
    cell: McCell,
    m2_blocks: Vec<f64>,
    m4_blocks: Vec<f64>,
}

fn run_chain(size: usize, j: f64, opts: &McOptions, seed: u64) -> Chain {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bond = j / 4.0;
    let mut lattice = SquareIsing::random(size, &mut rng);
    let production = opts.production_sweeps();
    for _ in 0..opts.sweeps - production {
        lattice.sweep(opts.scheme, bond, &mut rng);
    }
    let mut series = Vec::with_capacity(production);
    for _ in 0..production {
        lattice.sweep(opts.scheme, bond, &mut rng);
        series.push(lattice.magnetization());
    }
    let n = series.len() as f64;
    let mean_abs_m = series.iter().map(|m| m.abs()).sum::<f64>() / n;
    let m2 = series.iter().map(|m| m * m).sum::<f64>() / n;
    let m4 = series.iter().map(|m| m.powi(4)).sum::<f64>() / n;
    let m2_blocks = block_means(&series, opts.bootstrap_blocks, |m| m * m);
    let m4_blocks = block_means(&series, opts.bootstrap_blocks, |m| m.powi(4));
    let cell = McCell {
        size,
        j,
        seed,
        mean_abs_m,
        m2,
        m4,
        binder: binder_cumulant(m2, m4),
        drift: drift_check(&series),
        trace: opts.record_traces.then_some(series),
    };
    Chain { cell, m2_blocks, m4_blocks }
}

/// Runs a single chain at coupling `J` (bond `J/4`).
pub fn mc_run<T: Real>(size: usize, j: T, opts: &McOptions) -> Result<McCell> {
    opts.validate()?;
    if size < 2 {
        return Err(Error::invalid("size", format!("need L >= 2, got {size}")));
    }
    let jf = j.to_f64().unwrap_or(f64::NAN);
    if !jf.is_finite() || jf < 0.0 {
        return Err(Error::invalid("J", format!("must be finite and >= 0, got {j}")));
    }
    Ok(run_chain(size, jf, opts, derive_seed(opts.seed, &[size as u64, jf.to_bits()])).cell)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalEstimate<T> {
    pub j_c: T,
    /// Standard deviation of the crossing over block-bootstrap resamples.
    pub std_error: T,
    /// The two sizes whose Binder curves were intersected.
    pub crossing_sizes: (usize, usize),
    /// Resamples that still bracketed a crossing.
    pub bootstrap_used: usize,
    pub cells: Vec<McCell>,
    /// Cells whose `⟨|m|⟩` drifted between the halves of the run.
    pub drift_flagged: usize,
}

/// First sign change of `U_large − U_small` along the grid, linearly interpolated.
fn crossing(grid: &[f64], small: &[f64], large: &[f64]) -> Option<f64> {
    let diff: Vec<f64> = large.iter().zip(small).map(|(a, b)| a - b).collect();
    (0..grid.len() - 1).find_map(|i| {
        let (a, b) = (diff[i], diff[i + 1]);
        if a == 0.0 {
            return Some(grid[i]);
        }
        (a.signum() != b.signum()).then(|| grid[i] + (grid[i + 1] - grid[i]) * a / (a - b))
    })
}

/// Locates the critical coupling from the Binder-cumulant crossing of the two
/// largest sizes. Chains for every (size, J) run in parallel with seeds
/// derived from `opts.seed`.
pub fn mc_locate_critical<T: Real>(sizes: &[usize], j_grid: &[T], opts: &McOptions) -> Result<CriticalEstimate<T>> {
    opts.validate()?;
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 2 {
        return Err(Error::invalid("sizes", "need at least two distinct lattice sizes"));
    }
    if sizes[0] < 2 {
        return Err(Error::invalid("sizes", "every size must be >= 2"));
    }
    let mut grid: Vec<f64> = j_grid.iter().map(|j| j.to_f64().unwrap_or(f64::NAN)).collect();
    if grid.iter().any(|j| !j.is_finite() || *j < 0.0) {
        return Err(Error::invalid("j_grid", "entries must be finite and >= 0"));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if grid.len() < 2 {
        return Err(Error::invalid("j_grid", "need at least two distinct couplings"));
    }

    let (small, large) = (sizes[sizes.len() - 2], sizes[sizes.len() - 1]);
    let jobs: Vec<(usize, usize)> = sizes.iter().flat_map(|&l| (0..grid.len()).map(move |k| (l, k))).collect();
    let chains: Vec<Chain> = jobs
        .par_iter()
        .map(|&(l, k)| run_chain(l, grid[k], opts, derive_seed(opts.seed, &[l as u64, k as u64])))
        .collect();

    let curve = |size: usize| -> Vec<&Chain> { chains.iter().filter(|c| c.cell.size == size).collect() };
    let (cs, cl) = (curve(small), curve(large));
    let binder_of = |cs: &[&Chain]| cs.iter().map(|c| c.cell.binder).collect::<Vec<_>>();
    let j_c = crossing(&grid, &binder_of(&cs), &binder_of(&cl)).ok_or(Error::NonBracketing { small, large })?;

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, &[u64::MAX]));
    let resample = |chains: &[&Chain], rng: &mut ChaCha8Rng| -> Vec<f64> {
        chains
            .iter()
            .map(|c| {
                let b = c.m2_blocks.len();
                let (mut m2, mut m4) = (0.0, 0.0);
                for _ in 0..b {
                    let pick = rng.gen_range(0..b);
                    m2 += c.m2_blocks[pick];
                    m4 += c.m4_blocks[pick];
                }
                binder_cumulant(m2 / b as f64, m4 / b as f64)
            })
            .collect()
    };
    let mut estimates = Vec::with_capacity(opts.bootstrap_resamples);
    for _ in 0..opts.bootstrap_resamples {
        let us = resample(&cs, &mut rng);
        let ul = resample(&cl, &mut rng);
        if let Some(x) = crossing(&grid, &us, &ul) {
            estimates.push(x);
        }
    }
    let std_error = if estimates.len() >= 2 {
        let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
        (estimates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (estimates.len() - 1) as f64).sqrt()
    } else {
        f64::INFINITY
    };

    let cells: Vec<McCell> = chains.into_iter().map(|c| c.cell).collect();
    let drift_flagged = cells.iter().filter(|c| c.drift.flagged).count();
    Ok(CriticalEstimate {
        j_c: T::from_f64(j_c).unwrap(),
        std_error: T::from_f64(std_error).unwrap(),
        crossing_sizes: (small, large),
        bootstrap_used: estimates.len(),
        cells,
        drift_flagged,
    })
}
