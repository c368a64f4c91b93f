use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quadrature::{angular_means, integrate_panels, QuadratureOptions};
use super::{leading_divergence, Divergence, EnvironmentSpec};
use crate::code::{CodeLattice, LatticeVector};
use crate::{Error, Real, Result};

/// The five bath correlators coupling qubit Ising variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CorrelatorKind {
    F1,
    F2,
    Phi1,
    Phi2,
    Phi3,
}

impl CorrelatorKind {
    pub const ALL: [CorrelatorKind; 5] = [Self::F1, Self::F2, Self::Phi1, Self::Phi2, Self::Phi3];

    pub fn name(self) -> &'static str {
        match self {
            Self::F1 => "F1",
            Self::F2 => "F2",
            Self::Phi1 => "Phi1",
            Self::Phi2 => "Phi2",
            Self::Phi3 => "Phi3",
        }
    }

    /// Odd under `r -> -r` (carries `sin(k·r)`).
    pub fn is_odd(self) -> bool {
        matches!(self, Self::Phi2 | Self::Phi3)
    }

    /// Whether the value depends on the cycle separation. Φ₁ does not.
    pub fn depends_on_cycle(self) -> bool {
        !matches!(self, Self::Phi1)
    }
}

impl fmt::Display for CorrelatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorrelatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid("kind", format!("unknown correlator `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelatorMode {
    /// Sum over the momenta `2π n / L` with `0 < |k| <= Λ`.
    Discrete,
    /// Radial-angular integral over the disc `|k| <= Λ` (D = 2).
    Continuum,
    /// Only F₁(0,0) and F₁(0,1), replaced by their leading cutoff-linear terms.
    LeadingDivergence,
}

impl CorrelatorMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Discrete => "discrete",
            Self::Continuum => "continuum",
            Self::LeadingDivergence => "leading_divergence",
        }
    }
}

impl FromStr for CorrelatorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "discrete" => Ok(Self::Discrete),
            "continuum" => Ok(Self::Continuum),
            "leading_divergence" => Ok(Self::LeadingDivergence),
            _ => Err(Error::invalid("mode", format!("unknown correlator mode `{s}`"))),
        }
    }
}

/// `1 - cos x` without cancellation at small `x`.
fn one_minus_cos<T: Real>(x: T) -> T {
    let h = (x / T::lit(2.0)).sin();
    T::lit(2.0) * h * h
}

/// `x - sin x` without cancellation at small `x`.
fn x_minus_sin<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-2) {
        let x2 = x * x;
        x * x2 / T::lit(6.0) * (T::one() - x2 / T::lit(20.0) * (T::one() - x2 / T::lit(42.0)))
    } else {
        x - x.sin()
    }
}

/// Frequency-domain part of the correlator kernel, `ω_k² × [...]`, at
/// `phase = ω_k Δ`. The spatial factor is applied separately.
fn time_kernel<T: Real>(kind: CorrelatorKind, phase: T, n: usize) -> T {
    let nphase = phase * T::from_usize_lossy(n);
    match kind {
        CorrelatorKind::F1 | CorrelatorKind::Phi2 => one_minus_cos(phase) * nphase.cos(),
        CorrelatorKind::F2 | CorrelatorKind::Phi3 => one_minus_cos(phase) * nphase.sin(),
        CorrelatorKind::Phi1 => x_minus_sin(phase),
    }
}

/// Evaluates one correlator at lattice displacement `r` and cycle separation `n`.
pub fn correlator<T: Real>(
    env: &EnvironmentSpec<T>,
    kind: CorrelatorKind,
    r: LatticeVector,
    n: usize,
    mode: CorrelatorMode,
    opts: &QuadratureOptions,
) -> Result<T> {
    env.validate()?;
    match mode {
        CorrelatorMode::Continuum => continuum(env, kind, r, n, opts),
        CorrelatorMode::Discrete => discrete(env, kind, r, n),
        CorrelatorMode::LeadingDivergence => leading_only(env, kind, r, n),
    }
}

fn leading_only<T: Real>(env: &EnvironmentSpec<T>, kind: CorrelatorKind, r: LatticeVector, n: usize) -> Result<T> {
    if kind != CorrelatorKind::F1 || !r.is_zero() {
        return Ok(T::zero());
    }
    match n {
        0 => leading_divergence(env, Divergence::F1Origin),
        1 => leading_divergence(env, Divergence::F1NextCycle),
        _ => Ok(T::zero()),
    }
}

fn continuum<T: Real>(
    env: &EnvironmentSpec<T>,
    kind: CorrelatorKind,
    r: LatticeVector,
    n: usize,
    opts: &QuadratureOptions,
) -> Result<T> {
    if env.dim != 2 {
        return Err(Error::invalid("dim", format!("continuum correlators need D = 2, got {}", env.dim)));
    }
    if !(env.s > T::lit(-1.0)) {
        return Err(Error::invalid("s", "continuum integrals need s > -1"));
    }
    let (rx, ry) = (r.x::<T>(), r.y::<T>());
    let radius = (rx * rx + ry * ry).sqrt();
    let n_eff = if kind.depends_on_cycle() { n } else { 0 };
    let vd = env.v * env.delta;
    let radial_power = T::lit(2.0) * env.s - T::one();

    let integrand = |rho: T| {
        let (ang_c, ang_s) = angular_means(rho, rx, ry);
        let spatial = if kind.is_odd() { ang_s } else { ang_c };
        rho.powf(radial_power) * time_kernel(kind, vd * rho, n_eff) * spatial
    };

    let top_frequency = vd * T::from_usize_lossy(n_eff + 1) + radius;
    let panel = T::PI() / top_frequency;
    let integral = integrate_panels(integrand, T::zero(), env.cutoff, panel, opts)?;

    // λ²(v/ω₀)^{2+2s} / (4π²) × 2π (angular mean) / v²
    let base = (env.v / env.omega0).powf(T::lit(2.0) + T::lit(2.0) * env.s) / (T::lit(2.0) * T::PI() * env.v * env.v);
    Ok(env.lambda * env.lambda * (base * integral.value))
}

const DISCRETE_POINT_LIMIT: usize = 50_000_000;

fn discrete<T: Real>(env: &EnvironmentSpec<T>, kind: CorrelatorKind, r: LatticeVector, n: usize) -> Result<T> {
    let dim = env.dim;
    let spacing = T::lit(2.0) * T::PI() / env.box_len;
    let n_max = (env.cutoff / spacing).floor().to_usize().unwrap_or(usize::MAX);
    let side = 2 * n_max + 1;
    let points = side.checked_pow(dim as u32).unwrap_or(usize::MAX);
    if points > DISCRETE_POINT_LIMIT {
        return Err(Error::Capacity { what: "discrete k-grid points", value: points, limit: DISCRETE_POINT_LIMIT });
    }
    let n_eff = if kind.depends_on_cycle() { n } else { 0 };
    let r_vec = [r.x::<T>(), r.y::<T>(), T::zero()];
    let cutoff2 = env.cutoff * env.cutoff;
    let offset = n_max as i64;

    let mut sum = T::zero();
    let mut idx = vec![0usize; dim];
    for _ in 0..points {
        let mut k2 = T::zero();
        let mut dot = T::zero();
        for (axis, &i) in idx.iter().enumerate() {
            let k = spacing * T::from_i64((i as i64) - offset).unwrap();
            k2 += k * k;
            dot += k * r_vec[axis];
        }
        if k2 > T::zero() && k2 <= cutoff2 {
            let k = k2.sqrt();
            let omega = env.v * k;
            let spatial = if kind.is_odd() { dot.sin() } else { dot.cos() };
            sum +=
                k.powf(T::lit(2.0) * env.s) / (omega * omega) * time_kernel(kind, omega * env.delta, n_eff) * spatial;
        }
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < side {
                break;
            }
            *slot = 0;
        }
    }

    let dim_t = T::from_usize_lossy(dim);
    let base = (env.v / env.omega0).powf(dim_t + T::lit(2.0) * env.s) / env.box_len.powi(dim as i32);
    Ok(env.lambda * env.lambda * (base * sum))
}

type Key = (CorrelatorKind, LatticeVector, usize);

/// Memoized correlator values on a set of displacements and cycle separations.
#[derive(Debug, Clone)]
pub struct CorrelatorTable<T> {
    displacements: Vec<LatticeVector>,
    max_cycle_sep: usize,
    mode: CorrelatorMode,
    values: HashMap<Key, T>,
}

impl<T: Real> CorrelatorTable<T> {
    /// Evaluates every kind at every displacement and separation `0..=max_cycle_sep`.
    /// Entries are computed in parallel.
    pub fn build(
        env: &EnvironmentSpec<T>,
        displacements: &[LatticeVector],
        max_cycle_sep: usize,
        mode: CorrelatorMode,
        opts: &QuadratureOptions,
    ) -> Result<Self> {
        Self::build_kinds(env, &CorrelatorKind::ALL, displacements, max_cycle_sep, mode, opts)
    }

    pub fn build_kinds(
        env: &EnvironmentSpec<T>,
        kinds: &[CorrelatorKind],
        displacements: &[LatticeVector],
        max_cycle_sep: usize,
        mode: CorrelatorMode,
        opts: &QuadratureOptions,
    ) -> Result<Self> {
        env.validate()?;
        let mut displacements = displacements.to_vec();
        displacements.sort();
        displacements.dedup();

        let mut keys = Vec::new();
        for &kind in kinds {
            for &r in &displacements {
                let seps = if kind.depends_on_cycle() { max_cycle_sep } else { 0 };
                for n in 0..=seps {
                    keys.push((kind, r, n));
                }
            }
        }
        let values = keys
            .into_par_iter()
            .map(|key| correlator(env, key.0, key.1, key.2, mode, opts).map(|v| (key, v)))
            .collect::<Result<HashMap<_, _>>>()?;
        Ok(Self { displacements, max_cycle_sep, mode, values })
    }

    /// Table covering every displacement between two qubits of `lattice`
    /// and every separation below `n_cycles`.
    pub fn for_lattice(
        env: &EnvironmentSpec<T>,
        lattice: &CodeLattice,
        n_cycles: usize,
        mode: CorrelatorMode,
        opts: &QuadratureOptions,
    ) -> Result<Self> {
        if n_cycles == 0 {
            return Err(Error::invalid("n_cycles", "must be >= 1"));
        }
        Self::build(env, &lattice.displacements(), n_cycles - 1, mode, opts)
    }

    pub fn get(&self, kind: CorrelatorKind, r: LatticeVector, n: usize) -> Option<T> {
        let n = if kind.depends_on_cycle() { n } else { 0 };
        self.values.get(&(kind, r, n)).copied()
    }

    /// Like [`get`](Self::get) but names the missing entry.
    pub fn require(&self, kind: CorrelatorKind, r: LatticeVector, n: usize) -> Result<T> {
        self.get(kind, r, n).ok_or(Error::MissingCorrelator {
            kind: kind.name(),
            rx: r.x::<f64>(),
            ry: r.y::<f64>(),
            n,
        })
    }

    pub fn displacements(&self) -> &[LatticeVector] {
        &self.displacements
    }

    pub fn max_cycle_sep(&self) -> usize {
        self.max_cycle_sep
    }

    pub fn mode(&self) -> CorrelatorMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Entries in a stable order: kind, displacement, separation.
    pub fn entries(&self) -> Vec<(CorrelatorKind, LatticeVector, usize, T)> {
        let mut out: Vec<_> = self.values.iter().map(|(&(k, r, n), &v)| (k, r, n, v)).collect();
        out.sort_by_key(|e| (e.0, e.1, e.2));
        out
    }

    /// Returns a copy with every entry multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        let values = self.values.iter().map(|(&k, &v)| (k, v * factor)).collect();
        Self { values, ..self.clone() }
    }

    /// CSV with columns `kind,rx,ry,n,value,mode`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "kind,rx,ry,n,value,mode")?;
        for (kind, r, n, value) in self.entries() {
            writeln!(w, "{},{},{},{},{},{}", kind, r.x::<f64>(), r.y::<f64>(), n, value, self.mode.name())?;
        }
        Ok(())
    }
}

impl<T: Real> CorrelatorTable<T> {
    /// Table whose only nonzero entries are F₁(0,0) and F₁(0,1), set to their
    /// leading cutoff-linear terms.
    pub fn leading_divergence(env: &EnvironmentSpec<T>, lattice: &CodeLattice, n_cycles: usize) -> Result<Self> {
        Self::for_lattice(env, lattice, n_cycles, CorrelatorMode::LeadingDivergence, &QuadratureOptions::default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn unit(cutoff: f64) -> EnvironmentSpec<f64> {
        EnvironmentSpec::superohmic(1.0, 1.0, 1.0, cutoff)
    }

    fn origin() -> LatticeVector {
        LatticeVector::new(0, 0)
    }

    #[test]
    fn f1_origin_matches_closed_form() {
        let opts = QuadratureOptions::default();
        let got = correlator(&unit(100.0), CorrelatorKind::F1, origin(), 0, CorrelatorMode::Continuum, &opts).unwrap();
        let oracle = (100.0 - 100f64.sin()) / (2.0 * PI);
        assert_abs_diff_eq!(got, oracle, epsilon = 1e-9);
        assert_abs_diff_eq!(got, 15.99608, epsilon = 1e-5);
    }

    #[test]
    fn f1_next_cycle_matches_closed_form() {
        let opts = QuadratureOptions::default();
        let lam = 100.0f64;
        let got = correlator(&unit(lam), CorrelatorKind::F1, origin(), 1, CorrelatorMode::Continuum, &opts).unwrap();
        let oracle = (lam.sin() - lam / 2.0 - (2.0 * lam).sin() / 4.0) / (2.0 * PI);
        assert_abs_diff_eq!(got, oracle, epsilon = 1e-9);
    }

    #[test]
    fn sine_in_time_vanishes_at_equal_times() {
        let opts = QuadratureOptions::default();
        for mode in [CorrelatorMode::Continuum, CorrelatorMode::Discrete] {
            let env = unit(6.0).with_box_len(10.0);
            for r in [origin(), LatticeVector::new(2, 0), LatticeVector::new(1, 1)] {
                assert_eq!(correlator(&env, CorrelatorKind::F2, r, 0, mode, &opts).unwrap(), 0.0);
                assert_eq!(correlator(&env, CorrelatorKind::Phi3, r, 0, mode, &opts).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn general_v_and_delta_follow_antiderivative() {
        let opts = QuadratureOptions::default();
        let mut env = unit(30.0);
        env.v = 2.0;
        env.delta = 0.7;
        env.omega0 = 1.3;
        env.lambda = 0.9;
        let got = correlator(&env, CorrelatorKind::F1, origin(), 0, CorrelatorMode::Continuum, &opts).unwrap();
        let vd = env.v * env.delta;
        let oracle =
            env.lambda.powi(2) * env.v / (2.0 * PI * env.omega0.powi(3)) * (env.cutoff - (vd * env.cutoff).sin() / vd);
        assert_abs_diff_eq!(got, oracle, epsilon = 1e-9);
    }

    #[test]
    fn phi1_origin_matches_closed_form() {
        // (1/2π) ∫₀^Λ (k - sin k) dk
        let opts = QuadratureOptions::default();
        let lam = 20.0f64;
        let got = correlator(&unit(lam), CorrelatorKind::Phi1, origin(), 3, CorrelatorMode::Continuum, &opts).unwrap();
        let oracle = (lam * lam / 2.0 + lam.cos() - 1.0) / (2.0 * PI);
        assert_abs_diff_eq!(got, oracle, epsilon = 1e-9);
    }

    #[test]
    fn discrete_one_dimensional_sum_by_hand() {
        let mut env = unit(2.0);
        env.dim = 1;
        env.box_len = 2.0 * PI; // k = ±1, ±2
        let got = correlator(
            &env,
            CorrelatorKind::F1,
            LatticeVector::new(2, 0),
            1,
            CorrelatorMode::Discrete,
            &QuadratureOptions::default(),
        )
        .unwrap();
        // (v/ω₀)^{2}/L Σ |k| (1 - cos k) cos(k r) cos(k) / k²
        let term = |k: f64| (1.0 - k.cos()) * k.cos() * k.cos() / k;
        let oracle = 2.0 * (term(1.0) + term(2.0)) / (2.0 * PI);
        assert_abs_diff_eq!(got, oracle, epsilon = 1e-14);
    }

    #[test]
    fn leading_divergence_mode_only_fills_f1_origin() {
        let env = unit(10.0);
        let opts = QuadratureOptions::default();
        let m = CorrelatorMode::LeadingDivergence;
        assert_abs_diff_eq!(correlator(&env, CorrelatorKind::F1, origin(), 0, m, &opts).unwrap(), 10.0 / (2.0 * PI));
        assert_abs_diff_eq!(correlator(&env, CorrelatorKind::F1, origin(), 1, m, &opts).unwrap(), -5.0 / (2.0 * PI));
        assert_eq!(correlator(&env, CorrelatorKind::F1, origin(), 2, m, &opts).unwrap(), 0.0);
        assert_eq!(correlator(&env, CorrelatorKind::Phi1, origin(), 0, m, &opts).unwrap(), 0.0);
        assert_eq!(correlator(&env, CorrelatorKind::F1, LatticeVector::new(2, 0), 0, m, &opts).unwrap(), 0.0);
    }

    #[test]
    fn continuum_rejects_other_dimensions() {
        let mut env = unit(10.0);
        env.dim = 3;
        let r =
            correlator(&env, CorrelatorKind::F1, origin(), 0, CorrelatorMode::Continuum, &QuadratureOptions::default());
        assert!(r.is_err());
    }

    #[test]
    fn table_reports_missing_entries() {
        let lat = CodeLattice::new(2).unwrap();
        let table = CorrelatorTable::leading_divergence(&unit(10.0), &lat, 1).unwrap();
        assert!(table.get(CorrelatorKind::F1, origin(), 0).is_some());
        let err = table.require(CorrelatorKind::F1, origin(), 1).unwrap_err();
        assert!(matches!(err, Error::MissingCorrelator { n: 1, .. }));
        // Φ₁ ignores the separation.
        assert_eq!(table.get(CorrelatorKind::Phi1, origin(), 7), table.get(CorrelatorKind::Phi1, origin(), 0));
    }

    #[test]
    fn csv_has_expected_columns() {
        let lat = CodeLattice::new(2).unwrap();
        let table = CorrelatorTable::leading_divergence(&unit(10.0), &lat, 2).unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("kind,rx,ry,n,value,mode"));
        assert!(text.lines().any(|l| l.starts_with("F1,0,0,0,") && l.ends_with(",leading_divergence")));
        assert_eq!(text.lines().count(), 1 + table.len());
    }
}
