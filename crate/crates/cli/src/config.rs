use std::path::{Path, PathBuf};

use lie_kam_core::normal_form::{KamConfig, LieSeriesConfig};
use lie_kam_core::verify::{BoundSweepConfig, VerifyConfig};
use serde::{Deserialize, Serialize};

use crate::exit::CliError;

/// Everything a run can be configured with. Each command reads its own
/// section; the top-level seed applies to all of them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub simulate: SimulateConfig,
    pub normalize: NormalizeConfig,
    pub iterate: IterateConfig,
    pub bounds: BoundSweepConfig,
    pub verify: VerifyConfig,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub preset: String,
    pub eps: Option<f64>,
    /// Step size; the preset's when absent.
    pub h: Option<f64>,
    #[serde(rename = "T")]
    pub duration: Option<f64>,
    /// Number of random initial conditions.
    pub n: usize,
    /// Every `stride`-th step is written to the trajectory CSV.
    pub stride: usize,
    pub section: bool,
    /// Largest accepted |ρ(t) − ρ(0)|.
    pub rho_tol: f64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            preset: "fig1".into(),
            eps: None,
            h: None,
            duration: None,
            n: 1,
            stride: 10,
            section: false,
            rho_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormalizeConfig {
    pub preset: String,
    pub eps: Option<f64>,
    /// Lower bound on |Q₀₀|.
    pub q: f64,
    pub probes: usize,
    /// Each ε·k is rerun for the power-law fit of ‖V_*‖ against ε.
    pub quadratic_factors: Vec<f64>,
    pub lie: LieSeriesConfig,
}

impl Default for NormalizeConfig {
    fn default() -> Self {
        Self {
            preset: "pert1".into(),
            eps: None,
            q: 0.5,
            probes: 20,
            quadratic_factors: vec![10.0, 3.0, 1.0, 0.3],
            lie: LieSeriesConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IterateConfig {
    pub preset: String,
    pub eps: Option<f64>,
    pub tau: f64,
    pub q: f64,
    /// Lattice radius for the γ scan.
    pub gamma_scan: usize,
    /// Bound on ‖V_{i+1}‖ / ‖V_i‖² reported in the ledger summary.
    pub quadratic_factor: f64,
    pub kam: KamConfig,
}

impl Default for IterateConfig {
    fn default() -> Self {
        Self {
            preset: "pert1".into(),
            eps: None,
            tau: 1.0,
            q: 0.5,
            gamma_scan: 50,
            quadratic_factor: 10.0,
            kam: KamConfig::default(),
        }
    }
}
