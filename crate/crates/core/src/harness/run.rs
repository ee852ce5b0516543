//! Executes an [`ExperimentSpec`] and persists CSV plus a JSON sidecar.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::config::{Experiment, ExperimentSpec};
use super::rng::RngStreamPlan;
use crate::aggregate::{mc_aggregate_tail_grid, AggregateReport};
use crate::error::{Error, Result};
use crate::ruin::{ruin_sweep, EstimateReport, Horizon};

pub const VERSION: &str = match option_env!("RUINLAB_GIT_DESCRIBE") {
    Some(v) => v,
    None => env!("CARGO_PKG_VERSION"),
};

pub const RUIN_HEADER: &str = "u,z_or_inf,mc_estimate,std_error,asymptotic,ratio,seed";
pub const AGGREGATE_HEADER: &str = "x,mc_tail,std_error,approx,ratio,in_regime,seed";

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Rows {
    Ruin(Vec<(f64, EstimateReport)>),
    Aggregate(Vec<AggregateReport>),
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Rows {
    pub fn len(&self) -> usize {
        match self {
            Rows::Ruin(r) => r.len(),
            Rows::Aggregate(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_csv(&self, horizon: Option<Horizon>) -> String {
        let mut out = String::new();
        match self {
            Rows::Ruin(rows) => {
                out.push_str(RUIN_HEADER);
                out.push('\n');
                for (u, r) in rows {
                    let z = match horizon {
                        Some(Horizon::Infinite) | None => "inf".to_string(),
                        _ => opt(r.horizon),
                    };
                    let _ = writeln!(out, "{u},{z},{},{},{},{},{}", r.estimate, r.std_error, opt(r.asymptotic), opt(r.ratio), r.seed);
                }
            }
            Rows::Aggregate(rows) => {
                out.push_str(AGGREGATE_HEADER);
                out.push('\n');
                for a in rows {
                    let r = &a.report;
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{}",
                        a.x,
                        r.estimate,
                        r.std_error,
                        opt(r.asymptotic),
                        opt(r.ratio),
                        a.in_regime,
                        r.seed
                    );
                }
            }
        }
        out
    }
}

/// Runs the sweep; asymptotic columns are left empty when `ρ ≥ 1`.
pub fn execute(spec: &ExperimentSpec) -> Result<Rows> {
    spec.validate()?;
    let plan = RngStreamPlan::new(spec.seed);
    match &spec.experiment {
        Experiment::Ruin { risk, u_grid, horizon } => {
            let reports = ruin_sweep(risk, u_grid, *horizon, spec.n_paths, &plan, spec.workers)?;
            Ok(Rows::Ruin(u_grid.iter().copied().zip(reports).collect()))
        }
        Experiment::Aggregate { model, claims, t, x_grid, gamma_floor, estimator } => {
            let reports = mc_aggregate_tail_grid(model, claims, *t, x_grid, *gamma_floor, spec.n_paths, &plan, spec.workers, *estimator)?;
            Ok(Rows::Aggregate(reports))
        }
    }
}

/// CSV bytes for `spec`; identical for any worker count.
pub fn render_csv(spec: &ExperimentSpec) -> Result<String> {
    let rows = execute(spec)?;
    Ok(rows.to_csv(horizon_of(spec)))
}

fn horizon_of(spec: &ExperimentSpec) -> Option<Horizon> {
    match &spec.experiment {
        Experiment::Ruin { horizon, .. } => Some(*horizon),
        Experiment::Aggregate { .. } => None,
    }
}

#[derive(Debug, Clone, Serialize)]
struct Sidecar<'a> {
    spec: &'a ExperimentSpec,
    version: &'a str,
    wall_time_seconds: f64,
    rho: Option<f64>,
    rows: &'a Rows,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub csv_path: PathBuf,
    pub sidecar_path: PathBuf,
    pub rows: Rows,
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| Error::Config(format!("output_path {} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.partial", name.to_string_lossy()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// Runs the spec and writes `<output>` plus `<output>.json`. Nothing is written if
/// the simulation fails.
pub fn run(spec: &ExperimentSpec) -> Result<RunOutput> {
    let csv_path = spec.output_path.clone().ok_or_else(|| Error::Config("output_path: required to run an experiment".into()))?;
    let started = Instant::now();
    let rows = execute(spec)?;
    let csv = rows.to_csv(horizon_of(spec));
    let sidecar = Sidecar { spec, version: VERSION, wall_time_seconds: started.elapsed().as_secs_f64(), rho: spec.rho(), rows: &rows };
    let json = serde_json::to_string_pretty(&sidecar).map_err(|e| Error::Numeric(format!("sidecar: {e}")))?;
    let sidecar_path = sidecar_path(&csv_path);
    write_atomic(&csv_path, csv.as_bytes())?;
    if let Err(e) = write_atomic(&sidecar_path, json.as_bytes()) {
        let _ = std::fs::remove_file(&csv_path);
        return Err(e);
    }
    Ok(RunOutput { csv_path, sidecar_path, rows })
}
