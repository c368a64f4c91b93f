use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use threshold_lab::fidelity::SliceProductOptions;
use threshold_lab::{CodeLattice, CorrelatorMode, EnvironmentSpec, HamiltonianForm, UpdateScheme};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Correlators,
    Critical,
    Fidelity,
    Threshold,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Correlators => "correlators",
            Self::Critical => "critical",
            Self::Fidelity => "fidelity",
            Self::Threshold => "threshold",
            Self::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityRoute {
    /// Slice product: enumeration when small, Monte Carlo otherwise.
    SliceProduct,
    /// Full doubled-history enumeration with the chosen Hamiltonian form.
    Exact,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn two() -> usize {
    2
}
fn hundred() -> f64 {
    100.0
}
fn one_usize() -> usize {
    1
}
fn default_d() -> usize {
    3
}
fn default_sizes() -> Vec<usize> {
    vec![8, 16]
}
fn default_sweeps() -> usize {
    100_000
}
fn default_mode() -> CorrelatorMode {
    CorrelatorMode::Continuum
}
fn default_scheme() -> UpdateScheme {
    UpdateScheme::Metropolis
}
fn default_route() -> FidelityRoute {
    FidelityRoute::SliceProduct
}
fn default_form() -> HamiltonianForm {
    HamiltonianForm::SingleSlice
}
fn default_distances() -> Vec<usize> {
    vec![2, 3, 4]
}
fn default_site_limit() -> usize {
    SliceProductOptions::default().exact_site_limit
}

/// Flat `key = value` run description. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,

    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default = "one")]
    pub v: f64,
    #[serde(default = "one")]
    pub omega0: f64,
    #[serde(default = "one")]
    pub cutoff: f64,
    #[serde(default = "half")]
    pub s: f64,
    #[serde(default = "two")]
    pub dim: usize,
    #[serde(default = "one")]
    pub delta: f64,
    #[serde(default = "hundred")]
    pub box_len: f64,
    #[serde(default = "one")]
    pub q0: f64,

    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "one_usize")]
    pub n_cycles: usize,
    #[serde(default = "default_mode")]
    pub mode: CorrelatorMode,

    #[serde(default = "default_route")]
    pub route: FidelityRoute,
    #[serde(default = "default_form")]
    pub form: HamiltonianForm,
    #[serde(default = "default_distances")]
    pub distances: Vec<usize>,
    /// Absolute couplings for `sweep`.
    #[serde(default)]
    pub lambdas: Vec<f64>,
    /// Couplings for `sweep` as multiples of the threshold λ_c.
    #[serde(default)]
    pub lambda_factors: Vec<f64>,
    #[serde(default = "default_site_limit")]
    pub exact_site_limit: usize,

    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_sweeps")]
    pub sweeps: usize,
    #[serde(default)]
    pub j_grid: Vec<f64>,
    #[serde(default = "default_scheme")]
    pub scheme: UpdateScheme,

    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::usage(format!("config {}: {}", path.display(), e.message())))
    }

    pub fn env(&self) -> EnvironmentSpec<f64> {
        EnvironmentSpec {
            lambda: self.lambda,
            v: self.v,
            omega0: self.omega0,
            cutoff: self.cutoff,
            s: self.s,
            dim: self.dim,
            delta: self.delta,
            box_len: self.box_len,
            q0: self.q0,
        }
    }

    pub fn slice_options(&self) -> SliceProductOptions {
        SliceProductOptions {
            exact_site_limit: self.exact_site_limit,
            seed: self.seed.unwrap_or(0),
            ..Default::default()
        }
    }

    fn needs_monte_carlo(&self, d: usize) -> bool {
        d * d.saturating_sub(1) > self.exact_site_limit
    }

    /// Whether this run draws random numbers, in which case a seed is required.
    pub fn is_stochastic(&self) -> bool {
        match self.command {
            Command::Critical => true,
            Command::Fidelity => self.route == FidelityRoute::SliceProduct && self.needs_monte_carlo(self.d),
            Command::Sweep => self.distances.iter().any(|&d| self.needs_monte_carlo(d)),
            Command::Correlators | Command::Threshold => false,
        }
    }

    /// Checks everything that can be checked before any computation starts.
    pub fn validate(&self) -> Result<(), CliError> {
        self.env().validate()?;
        if self.is_stochastic() && self.seed.is_none() {
            return Err(CliError::usage(format!(
                "`{}` is stochastic here and needs `seed` (config or --seed)",
                self.command.name()
            )));
        }
        if self.n_cycles == 0 {
            return Err(CliError::usage("`n_cycles` must be >= 1"));
        }
        if matches!(self.command, Command::Correlators | Command::Fidelity) {
            CodeLattice::new(self.d)?;
        }
        match self.command {
            Command::Critical => {
                if self.j_grid.len() < 2 {
                    return Err(CliError::usage("`critical` needs a `j_grid` with at least two points"));
                }
                if self.sizes.len() < 2 {
                    return Err(CliError::usage("`critical` needs at least two `sizes`"));
                }
            }
            Command::Sweep => {
                if self.lambdas.is_empty() == self.lambda_factors.is_empty() {
                    return Err(CliError::usage("`sweep` needs exactly one of `lambdas` or `lambda_factors`"));
                }
                if self.distances.is_empty() {
                    return Err(CliError::usage("`sweep` needs non-empty `distances`"));
                }
                for &d in &self.distances {
                    CodeLattice::new(d)?;
                }
                self.env().require_superohmic()?;
            }
            Command::Threshold | Command::Fidelity => self.env().require_superohmic()?,
            Command::Correlators => {}
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, leaving out fields that do not
    /// affect results (`output_path`, `threads`).
    pub fn hash(&self) -> String {
        let canonical = RunConfig { output_path: None, threads: None, ..self.clone() };
        let json = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
