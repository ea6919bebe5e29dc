//! Run configuration: parsed from a JSON file, then overridden by flags and
//! environment variables.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use ksphere_core::error::{Error, Result};
use ksphere_core::io::{HamiltonianFile, SeedSpec};
use ksphere_core::models::ModelSpec;
use ksphere_core::operator_space::{HermitianMatrix, OperatorState};
use ksphere_core::{dynamics, lanczos};

/// What the pipeline runs on: a dense Hamiltonian or a coefficient family.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum InputSpec {
    HamiltonianPath { hamiltonian_path: PathBuf },
    Hamiltonian { hamiltonian: HamiltonianFile },
    Model { model: ModelSpec },
}

/// Output time grid: linspace or explicit.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TimeGrid {
    Linspace { t_max: f64, num_samples: usize },
    Explicit { times: Vec<f64> },
}

impl TimeGrid {
    pub fn realize(&self) -> Result<Vec<f64>> {
        match self {
            TimeGrid::Linspace { t_max, num_samples } => {
                if !(*t_max > 0.0) {
                    return Err(Error::InvalidInput(format!("t_max must be > 0, got {t_max}")));
                }
                if *num_samples < 2 {
                    return Err(Error::InvalidInput(format!(
                        "num_samples must be >= 2, got {num_samples}"
                    )));
                }
                Ok((0..*num_samples)
                    .map(|i| t_max * i as f64 / (*num_samples - 1) as f64)
                    .collect())
            }
            TimeGrid::Explicit { times } => {
                if times.len() < 2 {
                    return Err(Error::InvalidInput("need at least two times".into()));
                }
                Ok(times.clone())
            }
        }
    }

    pub fn t_max(&self) -> f64 {
        match self {
            TimeGrid::Linspace { t_max, .. } => *t_max,
            TimeGrid::Explicit { times } => times.last().copied().unwrap_or(0.0),
        }
    }
}

fn default_time_grid() -> TimeGrid {
    TimeGrid::Linspace {
        t_max: 10.0,
        num_samples: 201,
    }
}

/// Tolerance overrides; unset fields use the library defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub term_tol: Option<f64>,
    pub tail_tol: Option<f64>,
}

impl Tolerances {
    pub fn rtol(&self) -> f64 {
        self.rtol.unwrap_or(dynamics::DEFAULT_RTOL)
    }
    pub fn atol(&self) -> f64 {
        self.atol.unwrap_or(dynamics::DEFAULT_ATOL)
    }
    pub fn term_tol(&self) -> f64 {
        self.term_tol.unwrap_or(lanczos::DEFAULT_TERM_TOL)
    }
    pub fn tail_tol(&self) -> f64 {
        self.tail_tol.unwrap_or(dynamics::DEFAULT_TAIL_TOL)
    }
}

/// Which identity groups `verify` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Speed,
    Geometry,
    Hall,
    Bounds,
    Invariants,
    Moments,
}

pub const ALL_CHECKS: [CheckKind; 6] = [
    CheckKind::Speed,
    CheckKind::Geometry,
    CheckKind::Hall,
    CheckKind::Bounds,
    CheckKind::Invariants,
    CheckKind::Moments,
];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<InputSpec>,
    pub seed_operator: Option<SeedSpec>,
    #[serde(default = "default_time_grid")]
    pub time_grid: TimeGrid,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub output_dir: Option<PathBuf>,
    pub checks: Option<Vec<CheckKind>>,
    #[serde(default)]
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            seed_operator: None,
            time_grid: default_time_grid(),
            tolerances: Tolerances::default(),
            output_dir: None,
            checks: None,
            seed: 0,
        }
    }
}

/// A config together with the canonical bytes it was hashed from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub sha256: String,
}

pub fn load_config(path: Option<&Path>) -> Result<LoadedConfig> {
    let (config, bytes) = match path {
        Some(p) => {
            let bytes = fs::read(p).map_err(|e| {
                Error::InvalidInput(format!("cannot read config {}: {e}", p.display()))
            })?;
            let config: RunConfig = serde_json::from_slice(&bytes)
                .map_err(|e| Error::InvalidInput(format!("bad config JSON: {e}")))?;
            (config, bytes)
        }
        None => (RunConfig::default(), Vec::new()),
    };
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let sha256 = hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect::<String>();
    Ok(LoadedConfig { config, sha256 })
}

/// A resolved dense-Hamiltonian system ready for the pipeline.
pub struct DenseSystem {
    pub hamiltonian: HermitianMatrix,
    pub seed: OperatorState,
}

impl RunConfig {
    pub fn dense_system(&self) -> Result<Option<DenseSystem>> {
        let input = match &self.input {
            Some(i) => i,
            None => return Ok(None),
        };
        let hamiltonian = match input {
            InputSpec::Hamiltonian { hamiltonian } => hamiltonian.realize()?,
            InputSpec::HamiltonianPath { hamiltonian_path } => {
                let text = fs::read_to_string(hamiltonian_path).map_err(|e| {
                    Error::InvalidInput(format!(
                        "cannot read Hamiltonian {}: {e}",
                        hamiltonian_path.display()
                    ))
                })?;
                ksphere_core::io::hamiltonian_from_json(&text)?
            }
            InputSpec::Model { .. } => return Ok(None),
        };
        let seed = match &self.seed_operator {
            Some(spec) => spec.realize()?,
            None => {
                return Err(Error::InvalidInput(
                    "a dense Hamiltonian input needs a seed_operator".into(),
                ))
            }
        };
        Ok(Some(DenseSystem { hamiltonian, seed }))
    }

    pub fn model(&self) -> Option<&ModelSpec> {
        match &self.input {
            Some(InputSpec::Model { model }) => Some(model),
            _ => None,
        }
    }
}
