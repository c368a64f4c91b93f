//! Planar surface-code geometry and the mass-field change of variables.
//!
//! Layout for distance `d` (`d = 3` shown, `*` = star vertex):
//!
//! ```text
//!   h00 * h01 * h02        row 0: top boundary, 3-qubit stars
//!       |     |
//!      v00   v01
//!       |     |
//!   h10 * h11 * h12        row 1: bulk, 4-qubit stars
//!       |     |
//!      v10   v11
//!       |     |
//!   h20 * h21 * h22        row 2: bottom boundary, 3-qubit stars
//! ```
//!
//! Horizontal qubits `h(i, j)` sit at `(j, i)` for `i, j < d`. Vertical qubits
//! `v(i, j)` sit at `(j + 1/2, i + 1/2)` for `i, j < d - 1`. The dangling edges
//! at the left and right carry no star, so `M = d² + (d-1)²`. Plaquettes
//! `f(i, j)`, `i < d - 1`, `j < d`, lie between vertex rows `i` and `i + 1`.
//! The mass field lives on these plaquettes. `X̄` runs down the left column of
//! horizontal qubits and `Z̄` along the top row.

use std::collections::BTreeSet;
use std::io::{self, Write};
use std::ops::{Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

/// Largest lattice that [`CodeLattice::constrained_sigma`] will enumerate.
pub const ENUMERATION_QUBIT_LIMIT: usize = 16;

/// Position or displacement in half lattice spacings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct LatticeVector {
    pub x2: i32,
    pub y2: i32,
}

impl LatticeVector {
    pub const fn new(x2: i32, y2: i32) -> Self {
        Self { x2, y2 }
    }

    /// Rounds real coordinates to the half-spacing grid; `None` if off-grid.
    pub fn from_coords(x: f64, y: f64) -> Option<Self> {
        let (x2, y2) = ((2.0 * x).round(), (2.0 * y).round());
        if (2.0 * x - x2).abs() > 1e-9 || (2.0 * y - y2).abs() > 1e-9 {
            return None;
        }
        Some(Self::new(x2 as i32, y2 as i32))
    }

    pub fn x<T: Real>(self) -> T {
        T::from_i32(self.x2).unwrap() / T::lit(2.0)
    }

    pub fn y<T: Real>(self) -> T {
        T::from_i32(self.y2).unwrap() / T::lit(2.0)
    }

    pub fn is_zero(self) -> bool {
        self.x2 == 0 && self.y2 == 0
    }
}

impl Sub for LatticeVector {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x2 - rhs.x2, self.y2 - rhs.y2)
    }
}

impl Neg for LatticeVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x2, -self.y2)
    }
}

/// How a qubit edge sits between plaquettes (dual sites).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DualEdge {
    /// Between two plaquettes.
    Bulk(usize, usize),
    /// Top boundary edge with a single plaquette below it.
    Top(usize),
    /// Bottom boundary edge with a single plaquette above it.
    Bottom(usize),
}

/// Logical insertion in the projector matrix elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogicalInsertion {
    Identity,
    LogicalX,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeLattice {
    distance: usize,
    qubit_sites: Vec<LatticeVector>,
    stars: Vec<Vec<usize>>,
    plaquettes: Vec<Vec<usize>>,
    logical_x_path: Vec<usize>,
    logical_z_path: Vec<usize>,
    dual_edges: Vec<DualEdge>,
}

impl CodeLattice {
    pub fn new(distance: usize) -> Result<Self> {
        if distance < 2 {
            return Err(Error::invalid("d", format!("code distance must be >= 2, got {distance}")));
        }
        let d = distance;
        let h = |i: usize, j: usize| i * d + j;
        let v = |i: usize, j: usize| d * d + i * (d - 1) + j;
        let face = |i: usize, j: usize| i * d + j;

        let mut qubit_sites = Vec::with_capacity(d * d + (d - 1) * (d - 1));
        for i in 0..d {
            for j in 0..d {
                qubit_sites.push(LatticeVector::new(2 * j as i32, 2 * i as i32));
            }
        }
        for i in 0..d - 1 {
            for j in 0..d - 1 {
                qubit_sites.push(LatticeVector::new(2 * j as i32 + 1, 2 * i as i32 + 1));
            }
        }

        let mut stars = Vec::with_capacity(d * (d - 1));
        for i in 0..d {
            for j in 0..d - 1 {
                let mut star = vec![h(i, j), h(i, j + 1)];
                if i > 0 {
                    star.push(v(i - 1, j));
                }
                if i + 1 < d {
                    star.push(v(i, j));
                }
                stars.push(star);
            }
        }

        let mut plaquettes = Vec::with_capacity(d * (d - 1));
        for i in 0..d - 1 {
            for j in 0..d {
                let mut plaq = vec![h(i, j), h(i + 1, j)];
                if j > 0 {
                    plaq.push(v(i, j - 1));
                }
                if j + 1 < d {
                    plaq.push(v(i, j));
                }
                plaquettes.push(plaq);
            }
        }

        let mut dual_edges = Vec::with_capacity(qubit_sites.len());
        for i in 0..d {
            for j in 0..d {
                dual_edges.push(if i == 0 {
                    DualEdge::Top(face(0, j))
                } else if i == d - 1 {
                    DualEdge::Bottom(face(d - 2, j))
                } else {
                    DualEdge::Bulk(face(i - 1, j), face(i, j))
                });
            }
        }
        for i in 0..d - 1 {
            for j in 0..d - 1 {
                dual_edges.push(DualEdge::Bulk(face(i, j), face(i, j + 1)));
            }
        }

        Ok(Self {
            distance,
            qubit_sites,
            stars,
            plaquettes,
            logical_x_path: (0..d).map(|i| h(i, 0)).collect(),
            logical_z_path: (0..d).map(|j| h(0, j)).collect(),
            dual_edges,
        })
    }

    pub fn distance(&self) -> usize {
        self.distance
    }

    pub fn n_qubits(&self) -> usize {
        self.qubit_sites.len()
    }

    pub fn qubit_sites(&self) -> &[LatticeVector] {
        &self.qubit_sites
    }

    pub fn stars(&self) -> &[Vec<usize>] {
        &self.stars
    }

    pub fn plaquettes(&self) -> &[Vec<usize>] {
        &self.plaquettes
    }

    pub fn n_plaquettes(&self) -> usize {
        self.plaquettes.len()
    }

    pub fn logical_x_path(&self) -> &[usize] {
        &self.logical_x_path
    }

    pub fn logical_z_path(&self) -> &[usize] {
        &self.logical_z_path
    }

    pub fn dual_edges(&self) -> &[DualEdge] {
        &self.dual_edges
    }

    /// Pairs of plaquettes sharing a qubit: the bonds of the dual Ising model.
    pub fn dual_bonds(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.dual_edges.iter().filter_map(|e| match *e {
            DualEdge::Bulk(p, q) => Some((p, q)),
            _ => None,
        })
    }

    pub fn top_boundary_sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.dual_edges.iter().filter_map(|e| match *e {
            DualEdge::Top(p) => Some(p),
            _ => None,
        })
    }

    pub fn bottom_boundary_sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.dual_edges.iter().filter_map(|e| match *e {
            DualEdge::Bottom(p) => Some(p),
            _ => None,
        })
    }

    /// All displacements `r - s` between qubit sites, deduplicated and sorted.
    pub fn displacements(&self) -> Vec<LatticeVector> {
        let set: BTreeSet<_> =
            self.qubit_sites.iter().flat_map(|&a| self.qubit_sites.iter().map(move |&b| a - b)).collect();
        set.into_iter().collect()
    }

    /// N_◊ = 2^{#stars}: `G|σ⟩ = N_◊ |σ⟩` for star-satisfying `σ`.
    pub fn star_normalization<T: Real>(&self) -> T {
        T::lit(2.0).powi(self.stars.len() as i32)
    }

    fn check_len(&self, sigma: &[i8]) -> Result<()> {
        if sigma.len() != self.n_qubits() {
            return Err(Error::DimensionMismatch {
                what: "qubit configuration",
                expected: self.n_qubits(),
                got: sigma.len(),
            });
        }
        Ok(())
    }

    /// One ±1 entry per star: the product of `sigma` over the star's qubits.
    pub fn star_syndrome(&self, sigma: &[i8]) -> Result<Vec<i8>> {
        self.check_len(sigma)?;
        check_spins(sigma)?;
        Ok(self.stars.iter().map(|star| star.iter().map(|&q| sigma[q]).product()).collect())
    }

    pub fn satisfies_stars(&self, sigma: &[i8]) -> Result<bool> {
        Ok(self.star_syndrome(sigma)?.iter().all(|&s| s == 1))
    }

    /// Eigenvalue of `X̄` on the x-basis state `|σ⟩`.
    pub fn logical_x_value(&self, sigma: &[i8]) -> Result<i8> {
        self.check_len(sigma)?;
        Ok(self.logical_x_path.iter().map(|&q| sigma[q]).product())
    }

    /// `⟨σ| 𝒥 G |σ⟩` for `𝒥 ∈ {Ī, X̄}`, with `G = ∏(1 + A_S)`.
    pub fn projector_element<T: Real>(&self, sigma: &[i8], insertion: LogicalInsertion) -> Result<T> {
        if !self.satisfies_stars(sigma)? {
            return Ok(T::zero());
        }
        let n = self.star_normalization::<T>();
        Ok(match insertion {
            LogicalInsertion::Identity => n,
            LogicalInsertion::LogicalX => n * T::from_i8(self.logical_x_value(sigma)?).unwrap(),
        })
    }

    /// Every qubit configuration with all stars `+1`, each exactly once, by
    /// filtering all `2^M` assignments.
    pub fn constrained_sigma(&self) -> Result<impl Iterator<Item = Vec<i8>> + '_> {
        let m = self.n_qubits();
        if m > ENUMERATION_QUBIT_LIMIT {
            return Err(Error::Capacity { what: "qubits", value: m, limit: ENUMERATION_QUBIT_LIMIT });
        }
        Ok((0u32..(1u32 << m)).filter_map(move |bits| {
            let sigma = bits_to_spins(bits as u64, m);
            self.satisfies_stars(&sigma).ok().filter(|&ok| ok).map(|_| sigma)
        }))
    }

    /// Membership CSV: `element,index,qubit,x,y`, for stars, plaquettes and
    /// the two logical paths.
    pub fn write_adjacency_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "element,index,qubit,x,y")?;
        let groups: [(&str, &[Vec<usize>]); 2] = [("star", &self.stars), ("plaquette", &self.plaquettes)];
        for (name, sets) in groups {
            for (i, set) in sets.iter().enumerate() {
                for &q in set {
                    self.write_member(&mut w, name, i, q)?;
                }
            }
        }
        for &q in &self.logical_x_path {
            self.write_member(&mut w, "logical_x", 0, q)?;
        }
        for &q in &self.logical_z_path {
            self.write_member(&mut w, "logical_z", 0, q)?;
        }
        Ok(())
    }

    fn write_member<W: Write>(&self, w: &mut W, name: &str, index: usize, q: usize) -> io::Result<()> {
        let p = self.qubit_sites[q];
        writeln!(w, "{name},{index},{q},{},{}", p.x::<f64>(), p.y::<f64>())
    }
}

/// Free function form of [`CodeLattice::new`].
pub fn build_lattice(distance: usize) -> Result<CodeLattice> {
    CodeLattice::new(distance)
}

/// Free function form of [`CodeLattice::star_syndrome`].
pub fn star_syndrome(lattice: &CodeLattice, sigma: &[i8]) -> Result<Vec<i8>> {
    lattice.star_syndrome(sigma)
}

/// Free function form of [`CodeLattice::constrained_sigma`], collected.
pub fn enumerate_constrained_sigma(lattice: &CodeLattice) -> Result<Vec<Vec<i8>>> {
    Ok(lattice.constrained_sigma()?.collect())
}

pub(crate) fn check_spins(spins: &[i8]) -> Result<()> {
    match spins.iter().position(|&s| s != 1 && s != -1) {
        Some(index) => Err(Error::NotASpin { index, value: spins[index] }),
        None => Ok(()),
    }
}

/// Bit `i` set → spin `-1` at position `i`.
pub(crate) fn bits_to_spins(bits: u64, len: usize) -> Vec<i8> {
    (0..len).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect()
}

/// Mass-field variables of one time slice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MassFieldSlice {
    /// One ±1 per plaquette.
    pub mu: Vec<i8>,
    /// `μ_p σ_r` on every top-boundary edge.
    pub alpha_top: i8,
    /// `μ_p σ_r` on every bottom-boundary edge.
    pub alpha_bottom: i8,
}

impl MassFieldSlice {
    pub fn uniform(lattice: &CodeLattice) -> Self {
        Self { mu: vec![1; lattice.n_plaquettes()], alpha_top: 1, alpha_bottom: 1 }
    }

    /// Global gauge flip: yields the same qubit configuration.
    pub fn flipped(&self) -> Self {
        Self { mu: self.mu.iter().map(|&m| -m).collect(), alpha_top: -self.alpha_top, alpha_bottom: -self.alpha_bottom }
    }

    /// Qubit signs: `μ_p μ_q` on bulk edges, `α μ_p` on boundary edges.
    pub fn to_sigma(&self, lattice: &CodeLattice) -> Result<Vec<i8>> {
        if self.mu.len() != lattice.n_plaquettes() {
            return Err(Error::DimensionMismatch {
                what: "mass field",
                expected: lattice.n_plaquettes(),
                got: self.mu.len(),
            });
        }
        check_spins(&self.mu)?;
        check_spins(&[self.alpha_top, self.alpha_bottom])?;
        Ok(lattice
            .dual_edges()
            .iter()
            .map(|e| match *e {
                DualEdge::Bulk(p, q) => self.mu[p] * self.mu[q],
                DualEdge::Top(p) => self.alpha_top * self.mu[p],
                DualEdge::Bottom(p) => self.alpha_bottom * self.mu[p],
            })
            .collect())
    }

    /// All `2^{P+2}` slices of a lattice with `P` plaquettes.
    pub fn enumerate(lattice: &CodeLattice) -> Result<impl Iterator<Item = MassFieldSlice>> {
        let p = lattice.n_plaquettes();
        if p + 2 > 2 * ENUMERATION_QUBIT_LIMIT {
            return Err(Error::Capacity { what: "mass-field sites", value: p, limit: 2 * ENUMERATION_QUBIT_LIMIT - 2 });
        }
        Ok((0u64..(1u64 << (p + 2))).map(move |bits| {
            let spins = bits_to_spins(bits, p + 2);
            MassFieldSlice { mu: spins[..p].to_vec(), alpha_top: spins[p], alpha_bottom: spins[p + 1] }
        }))
    }
}

/// Mass fields for every slice of a history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MassFieldConfig {
    pub slices: Vec<MassFieldSlice>,
}

/// Qubit configuration of slice `l` induced by the mass fields.
pub fn mass_field_to_sigma(lattice: &CodeLattice, mf: &MassFieldConfig, l: usize) -> Result<Vec<i8>> {
    let slice = mf.slices.get(l).ok_or(Error::DimensionMismatch {
        what: "mass-field slice index",
        expected: mf.slices.len(),
        got: l,
    })?;
    slice.to_sigma(lattice)
}
