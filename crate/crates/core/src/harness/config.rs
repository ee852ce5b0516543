//! JSON experiment specifications.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::aggregate::TailEstimator;
use crate::arrivals::ArrivalModel;
use crate::claims::ClaimDistribution;
use crate::error::{Error, Result};
use crate::ruin::{Horizon, RiskConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub experiment: Experiment,
    pub n_paths: u64,
    pub seed: u64,
    /// 0 means one worker per available core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    Ruin {
        risk: RiskConfig,
        u_grid: Vec<f64>,
        horizon: Horizon,
    },
    Aggregate {
        model: ArrivalModel,
        claims: ClaimDistribution,
        t: f64,
        x_grid: Vec<f64>,
        #[serde(default = "one")]
        gamma_floor: f64,
        #[serde(default)]
        estimator: TailEstimator,
    },
}

fn one() -> f64 {
    1.0
}

impl Experiment {
    pub fn model(&self) -> &ArrivalModel {
        match self {
            Experiment::Ruin { risk, .. } => &risk.arrivals,
            Experiment::Aggregate { model, .. } => model,
        }
    }

    pub fn claims(&self) -> &ClaimDistribution {
        match self {
            Experiment::Ruin { risk, .. } => &risk.claims,
            Experiment::Aggregate { claims, .. } => claims,
        }
    }
}

fn check_grid(field: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config(format!("{field}: grid must not be empty")));
    }
    if let Some(i) = grid.iter().position(|v| !v.is_finite()) {
        return Err(Error::Config(format!("{field}[{i}]: grid values must be finite")));
    }
    if let Some(i) = (1..grid.len()).find(|&i| !(grid[i] > grid[i - 1])) {
        return Err(Error::Config(format!("{field}[{i}]: grid must be strictly increasing")));
    }
    Ok(())
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// Checks that serde cannot express: grids, counts, horizons.
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Config("name: must not be empty".into()));
        }
        if self.n_paths == 0 {
            return Err(Error::Config("n_paths: must be at least 1".into()));
        }
        match &self.experiment {
            Experiment::Ruin { risk, u_grid, horizon } => {
                risk.validate().map_err(|e| Error::Config(format!("experiment.risk: {e}")))?;
                check_grid("experiment.u_grid", u_grid)?;
                if u_grid[0] < 0.0 {
                    return Err(Error::Config("experiment.u_grid[0]: reserves must be >= 0".into()));
                }
                match *horizon {
                    Horizon::Finite { z } if !(z > 0.0 && z.is_finite()) => {
                        return Err(Error::Config(format!("experiment.horizon.z: must be positive, got {z}")));
                    }
                    Horizon::Scaled { t } if !(t > 0.0 && t.is_finite()) => {
                        return Err(Error::Config(format!("experiment.horizon.t: must be positive, got {t}")));
                    }
                    _ => {}
                }
            }
            Experiment::Aggregate { t, x_grid, gamma_floor, .. } => {
                if !(*t > 0.0 && t.is_finite()) {
                    return Err(Error::Config(format!("experiment.t: must be positive, got {t}")));
                }
                if !(*gamma_floor > 0.0) {
                    return Err(Error::Config(format!("experiment.gamma_floor: must be positive, got {gamma_floor}")));
                }
                check_grid("experiment.x_grid", x_grid)?;
            }
        }
        Ok(())
    }

    /// `ρ` for ruin experiments.
    pub fn rho(&self) -> Option<f64> {
        match &self.experiment {
            Experiment::Ruin { risk, .. } => Some(risk.rho()),
            Experiment::Aggregate { .. } => None,
        }
    }
}

/// Reads and validates an experiment file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    ExperimentSpec::from_json(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// An arrival model given either bare or inside an experiment file.
pub fn load_model(path: impl AsRef<Path>) -> Result<ArrivalModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    match serde_json::from_str::<ArrivalModel>(&text) {
        Ok(m) => Ok(m),
        Err(bare) => match ExperimentSpec::from_json(&text) {
            Ok(spec) => Ok(spec.experiment.model().clone()),
            Err(_) => Err(Error::Config(format!("{}: {bare}", path.display()))),
        },
    }
}
