//! Experiment configuration (TOML).

use serde::{Deserialize, Serialize};

use kolmo_core::sde::Scheme;
use kolmo_core::solver::MassScheme;

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub space: SpaceConfig,
    #[serde(default)]
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub convex_set: ConvexSetConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub solve: Option<SolveConfig>,
    #[serde(default)]
    pub sde: Option<SdeConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    /// Covariance eigenvalues; ignored when a model block is present.
    #[serde(default)]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default = "defaults::box_radius")]
    pub box_radius: f64,
    #[serde(default = "defaults::cells")]
    pub cells_per_axis: usize,
    #[serde(default = "defaults::qmc_samples")]
    pub qmc_samples: usize,
    #[serde(default = "defaults::memory_cap_mb")]
    pub memory_cap_mb: u64,
}

impl Default for SpaceConfig {
    fn default() -> Self {
        Self {
            lambdas: None,
            box_radius: defaults::box_radius(),
            cells_per_axis: defaults::cells(),
            qmc_samples: defaults::qmc_samples(),
            memory_cap_mb: defaults::memory_cap_mb(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Rd,
    Ch,
    Custom,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    #[serde(default = "defaults::one")]
    pub modes: usize,
    #[serde(default = "defaults::phi")]
    pub phi: String,
    #[serde(default = "defaults::unit")]
    pub phi_scale: f64,
    /// Envelope parameter of the Cahn–Hilliard model.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "defaults::xi_grid")]
    pub xi_grid: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConvexSetConfig {
    #[default]
    Whole,
    Halfspace {
        direction: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    Ellipsoid {
        alphas: Vec<f64>,
        radius: f64,
    },
    Hypograph {
        axis: usize,
        map: MapConfig,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapConfig {
    Affine {
        coeffs: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    NegQuadratic {
        curvature: Vec<f64>,
        #[serde(default)]
        linear: Option<Vec<f64>>,
        #[serde(default)]
        offset: f64,
    },
}

/// Separable potential U(x) = Σ Φ(x_k) for custom spaces.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    #[serde(default = "defaults::phi")]
    pub phi: String,
    #[serde(default = "defaults::unit")]
    pub scale: f64,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self {
            phi: defaults::phi(),
            scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMode {
    Restricted,
    Penalized,
    Whole,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum MassConfig {
    Auto,
    Lumped,
    AxisConsistent,
}

impl From<MassConfig> for MassScheme {
    fn from(m: MassConfig) -> Self {
        match m {
            MassConfig::Auto => MassScheme::Auto,
            MassConfig::Lumped => MassScheme::Lumped,
            MassConfig::AxisConsistent => MassScheme::AxisConsistent,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub lambda: f64,
    #[serde(default)]
    pub rhs: RhsConfig,
    #[serde(default = "defaults::mode")]
    pub mode: SolveMode,
    /// Penalization parameter for `mode = "penalized"`.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub alpha_sweep: Vec<f64>,
    #[serde(default = "defaults::cg_tol")]
    pub cg_tol: f64,
    #[serde(default = "defaults::mass")]
    pub mass: MassConfig,
    /// Band half-width in units of the largest cell size.
    #[serde(default = "defaults::band_factor")]
    pub band_factor: f64,
    /// Cells per axis of the flux-check ladder.
    #[serde(default)]
    pub refine: Vec<usize>,
    #[serde(default = "defaults::diss_slack")]
    pub diss_slack: f64,
    #[serde(default = "defaults::maxreg_slack")]
    pub maxreg_slack: f64,
}

/// f = constant + Σ_terms Σ_j c_j H_j(x_axis / √(2λ_axis)) + expr, H_j the
/// physicists' Hermite polynomials.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct RhsConfig {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub hermite: Vec<HermiteTerm>,
    /// Expression over x0, x1, ... (evalexpr syntax).
    #[serde(default)]
    pub expr: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HermiteTerm {
    pub axis: usize,
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SdeConfig {
    #[serde(default = "defaults::scheme")]
    pub scheme: Scheme,
    pub dt: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub paths: usize,
    /// Overrides the top-level seed.
    #[serde(default)]
    pub seed: Option<u64>,
    /// U_α in the projected drift, or V_α for the penalization scheme.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub exponential: bool,
    #[serde(default)]
    pub probes: Vec<Vec<f64>>,
    #[serde(default)]
    pub invariant: Option<InvariantConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InvariantConfig {
    pub dt: f64,
    pub burn_in: f64,
    /// Recorded time per path.
    pub record: f64,
    pub paths: usize,
    #[serde(default = "defaults::bins")]
    pub bins: usize,
    /// Start point (origin projected onto C when absent).
    #[serde(default)]
    pub start: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "defaults::out_dir")]
    pub dir: String,
    #[serde(default = "defaults::yes")]
    pub csv: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: defaults::out_dir(),
            csv: true,
        }
    }
}

mod defaults {
    use super::*;

    pub fn box_radius() -> f64 {
        8.0
    }
    pub fn cells() -> usize {
        200
    }
    pub fn qmc_samples() -> usize {
        1 << 14
    }
    pub fn memory_cap_mb() -> u64 {
        2048
    }
    pub fn one() -> usize {
        1
    }
    pub fn unit() -> f64 {
        1.0
    }
    pub fn phi() -> String {
        "zero".into()
    }
    pub fn xi_grid() -> usize {
        kolmo_core::models::DEFAULT_XI_GRID
    }
    pub fn mode() -> SolveMode {
        SolveMode::Restricted
    }
    pub fn cg_tol() -> f64 {
        1e-10
    }
    pub fn mass() -> MassConfig {
        MassConfig::Auto
    }
    pub fn band_factor() -> f64 {
        2.0
    }
    pub fn diss_slack() -> f64 {
        0.05
    }
    pub fn maxreg_slack() -> f64 {
        0.10
    }
    pub fn scheme() -> Scheme {
        Scheme::Project
    }
    pub fn bins() -> usize {
        400
    }
    pub fn out_dir() -> String {
        "out".into()
    }
    pub fn yes() -> bool {
        true
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks that do not need the numerical modules.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.model.is_none() && self.space.lambdas.is_none() {
            return bad("either space.lambdas or a model block is required".into());
        }
        if self.space.cells_per_axis < 2 {
            return bad("space.cells_per_axis must be at least 2".into());
        }
        if let Some(m) = &self.model {
            if m.kind == ModelKind::Ch && m.alpha.is_none() {
                return bad("model.alpha is required for the Cahn-Hilliard model".into());
            }
        }
        if let Some(s) = &self.solve {
            if !(s.lambda > 0.0) {
                return bad(format!("solve.lambda must be positive, got {}", s.lambda));
            }
            if s.mode == SolveMode::Penalized && s.alpha.is_none() && self.model_alpha().is_none() {
                return bad("penalized mode needs solve.alpha".into());
            }
            if s.alpha_sweep.iter().any(|a| !(*a > 0.0)) {
                return bad("solve.alpha_sweep entries must be positive".into());
            }
            if s.alpha_sweep.windows(2).any(|w| w[1] >= w[0]) {
                return bad("solve.alpha_sweep must be strictly descending".into());
            }
            if !(s.cg_tol > 0.0) || !(s.band_factor > 0.0) {
                return bad("solve.cg_tol and solve.band_factor must be positive".into());
            }
        }
        if let Some(s) = &self.sde {
            if !(s.dt > 0.0) || !(s.horizon > 0.0) || s.paths == 0 {
                return bad("sde.dt, sde.T and sde.paths must be positive".into());
            }
        }
        Ok(())
    }

    pub fn model_alpha(&self) -> Option<f64> {
        self.model.as_ref().and_then(|m| m.alpha)
    }

    pub fn sde_seed(&self) -> u64 {
        self.sde.as_ref().and_then(|s| s.seed).unwrap_or(self.seed)
    }
}
