//! Experiment configuration: a versioned JSON document with every field
//! defaulted, so an empty object `{}` is a valid configuration.
//!
//! The canonical form is the pretty-printed serialization of the fully
//! populated struct. Parsing and re-emitting a canonical document is
//! byte-identical, and its SHA-256 identifies the run.

use std::path::Path;

use dtc_core::{
    hamiltonian::range_exponent_serde, Boundary, DriveSpec, HamiltonianSpec, InitialState, Method,
    ScanParameter, DENSE_MAX_SITES,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// One stroboscopic trajectory and its spectrum.
    #[default]
    Run,
    /// KLD phase map over a one-parameter grid.
    Scan,
    /// Quasi-energies and π-pairing size scaling.
    Floquet,
    /// Infinite-range model: exact Dicke-sector evolution and closed form.
    Lmg,
    /// Main-peak splitting scaling fit over sizes and kick errors.
    Fit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub parameter: ScanParameter,
    pub min: f64,
    pub max: f64,
    /// Number of grid points, endpoints included.
    pub steps: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            parameter: ScanParameter::Epsilon,
            min: 0.0,
            max: 0.5,
            steps: 51,
        }
    }
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        let span = self.max - self.min;
        (0..self.steps)
            .map(|k| self.min + span * k as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub command: Command,
    pub n_sites: usize,
    pub coupling: f64,
    pub field: f64,
    #[serde(with = "range_exponent_serde")]
    pub range_exponent: f64,
    pub period_tau: f64,
    pub epsilon: f64,
    pub noise_bound: f64,
    pub n_periods: usize,
    pub seed: u64,
    /// Noise realizations averaged by `run` when `noise_bound > 0`.
    pub realizations: usize,
    pub initial_state: InitialState,
    pub method: Method,
    /// Spectra on `[-π, π)` rather than `[0, 2π)`.
    pub fold: bool,
    /// Grid swept by `scan`.
    pub scan: Grid,
    /// System sizes used by `floquet` and `fit`.
    pub sizes: Vec<usize>,
    /// Kick errors used by `floquet` and `fit`.
    pub epsilons: Vec<f64>,
    /// Worker threads; `null` uses every core. Results do not depend on it,
    /// so it is left out of the hash.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: Command::Run,
            n_sites: 10,
            coupling: 1.0,
            field: 0.0,
            range_exponent: f64::INFINITY,
            period_tau: 0.6,
            epsilon: 0.08,
            noise_bound: 0.0,
            n_periods: 1000,
            seed: 0,
            realizations: 1,
            initial_state: InitialState::ProductRight,
            method: Method::Auto,
            fold: true,
            scan: Grid::default(),
            sizes: vec![4, 6, 8, 10],
            epsilons: vec![0.02, 0.04, 0.06, 0.08, 0.1, 0.12],
            threads: None,
        }
    }
}

/// Sets `key` (dotted path, e.g. `scan.max`) to `raw`, read as JSON when it
/// parses and as a bare string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{assignment}` is not key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let map = node.as_object_mut().ok_or_else(|| {
            CliError::Config(format!("`{key}`: `{part}` is not inside an object"))
        })?;
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Err(CliError::Config("empty override key".into()))
}

impl ExperimentConfig {
    /// File (if any), then `key=value` overrides. Call [`Self::validate`]
    /// once every override is in.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut doc = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Config(format!("cannot read config {}: {e}", p.display()))
                })?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => Value::Object(Default::default()),
        };
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let config: Self =
            serde_json::from_value(doc).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(config)
    }

    /// Pretty JSON with a trailing newline.
    pub fn canonical(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// SHA-256 of the canonical form without `threads`.
    pub fn hash(&self) -> String {
        let hashed = Self {
            threads: None,
            ..self.clone()
        };
        hex::encode(Sha256::digest(hashed.canonical().as_bytes()))
    }

    pub fn hamiltonian(&self) -> HamiltonianSpec {
        HamiltonianSpec {
            n_sites: self.n_sites,
            coupling: self.coupling,
            field: self.field,
            range_exponent: self.range_exponent,
            boundary: Boundary::Open,
        }
    }

    pub fn drive(&self) -> DriveSpec {
        DriveSpec {
            period_tau: self.period_tau,
            epsilon: self.epsilon,
            noise_bound: self.noise_bound,
            n_periods: self.n_periods,
            rng_seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |msg: String| Err(CliError::Config(msg));
        if self.schema_version != SCHEMA_VERSION {
            return fail(format!(
                "schema_version must be {SCHEMA_VERSION}, got {}",
                self.schema_version
            ));
        }
        if self.threads == Some(0) {
            return fail("threads must be at least 1".into());
        }
        if self.realizations == 0 {
            return fail("realizations must be at least 1".into());
        }
        // Ahead of the generic checks so the dense cap is the reported reason.
        if matches!(self.command, Command::Floquet) {
            if let Some(&n) = std::iter::once(&self.n_sites)
                .chain(&self.sizes)
                .find(|&&n| n > DENSE_MAX_SITES)
            {
                return fail(format!(
                    "floquet diagonalizes dense 2^N matrices: N must be at most {DENSE_MAX_SITES}, got {n}"
                ));
            }
        }
        match self.command {
            Command::Lmg => {
                if !(self.period_tau > 0.0 && self.period_tau.is_finite()) {
                    return fail(format!(
                        "period_tau must be positive, got {}",
                        self.period_tau
                    ));
                }
                if !self.field.is_finite() || !self.epsilon.is_finite() {
                    return fail("field and epsilon must be finite".into());
                }
                if !(2..=dtc_core::lmg::MAX_LMG_SITES).contains(&self.n_sites) {
                    return fail(format!(
                        "n_sites must be in [2, {}] for lmg, got {}",
                        dtc_core::lmg::MAX_LMG_SITES,
                        self.n_sites
                    ));
                }
            }
            _ => {
                self.hamiltonian()
                    .validate()
                    .and_then(|_| self.drive().validate())
                    .map_err(|e| CliError::Config(e.to_string()))?;
            }
        }
        match self.command {
            Command::Run | Command::Lmg => {}
            Command::Scan => {
                if self.scan.steps < 2 {
                    return fail(format!(
                        "scan.steps must be at least 2, got {}",
                        self.scan.steps
                    ));
                }
                if !(self.scan.min.is_finite() && self.scan.max.is_finite())
                    || self.scan.max <= self.scan.min
                {
                    return fail(format!(
                        "scan range must satisfy min < max, got [{}, {}]",
                        self.scan.min, self.scan.max
                    ));
                }
            }
            Command::Floquet => {
                if self.noise_bound > 0.0 {
                    return fail("floquet needs a noiseless drive (noise_bound = 0)".into());
                }
                self.check_sizes_and_epsilons()?;
            }
            Command::Fit => self.check_sizes_and_epsilons()?,
        }
        Ok(())
    }

    fn check_sizes_and_epsilons(&self) -> Result<(), CliError> {
        if self.sizes.len() < 3 {
            return Err(CliError::Config(format!(
                "sizes needs at least 3 entries, got {}",
                self.sizes.len()
            )));
        }
        if self.epsilons.is_empty() {
            return Err(CliError::Config("epsilons must not be empty".into()));
        }
        Ok(())
    }
}
