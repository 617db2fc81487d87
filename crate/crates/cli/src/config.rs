use std::path::{Path, PathBuf};

use kramers_core::{GraphSpec, Interval, Potential, Tolerances};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

fn default_grid_n() -> usize {
    2001
}

fn default_eps0() -> f64 {
    0.05
}

fn default_tau_count() -> usize {
    25
}

/// Rescaled times `τ`. Either explicit `values`, or `0` plus `count`
/// log-spaced points up to `max` (default `5/μ⁰₂`).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauGrid {
    pub values: Option<Vec<f64>>,
    pub max: Option<f64>,
    #[serde(default = "default_tau_count")]
    pub count: usize,
}

impl Default for TauGrid {
    fn default() -> Self {
        Self { values: None, max: None, count: default_tau_count() }
    }
}

impl TauGrid {
    pub fn resolve(&self, mu2: f64) -> Vec<f64> {
        match &self.values {
            Some(v) => v.clone(),
            None => kramers_core::dynamics::default_tau_grid(self.max.unwrap_or(5.0 / mu2), self.count),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub potential: Option<String>,
    /// Search interval for critical points.
    pub domain: Option<[f64; 2]>,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    /// Explicit computational interval; otherwise derived from the wells.
    pub grid_domain: Option<[f64; 2]>,
    pub margin: Option<f64>,
    #[serde(default)]
    pub h_list: Vec<f64>,
    pub beta: Option<Vec<f64>>,
    #[serde(default)]
    pub tau_grid: TauGrid,
    #[serde(default = "default_eps0")]
    pub eps0: f64,
    /// Cutoff width for the quasi-modes; defaults to `S/8`.
    pub eps_cut: Option<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub output_dir: Option<PathBuf>,
    pub graph: Option<GraphSpec>,
}

/// A validated config together with the hash of its raw bytes.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: Config,
    pub sha256: String,
}

impl Loaded {
    pub fn read(path: &Path) -> CliResult<Self> {
        let bytes = std::fs::read(path).map_err(|source| CliError::Io { action: "read", path: path.into(), source })?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> CliResult<Self> {
        let sha256 = hex::encode(Sha256::digest(bytes));
        let config: Config = serde_json::from_slice(bytes).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(Self { config, sha256 })
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn interval(name: &str, v: [f64; 2]) -> CliResult<Interval> {
    if !(v[0].is_finite() && v[1].is_finite() && v[0] < v[1]) {
        return Err(bad(format!("`{name}` must be a finite interval [a, b] with a < b, got {v:?}")));
    }
    Ok(Interval::new(v[0], v[1]))
}

impl Config {
    fn validate(&self) -> CliResult<()> {
        if let Some(src) = &self.potential {
            Potential::parse(src).map_err(|e| bad(format!("potential `{src}`: {e}")))?;
        }
        if let Some(d) = self.domain {
            interval("domain", d)?;
        }
        if let Some(d) = self.grid_domain {
            interval("grid_domain", d)?;
        }
        if self.grid_n < kramers_core::witten::MIN_GRID_NODES {
            return Err(bad(format!("grid_n = {} is below {}", self.grid_n, kramers_core::witten::MIN_GRID_NODES)));
        }
        if let Some(h) = self.h_list.iter().find(|h| !(**h > 0.0 && **h <= 1.0)) {
            return Err(bad(format!("h = {h} in h_list must lie in (0, 1]")));
        }
        if let Some(m) = self.margin.filter(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(bad(format!("margin = {m} must be positive")));
        }
        if !(self.eps0 > 0.0 && self.eps0.is_finite()) {
            return Err(bad(format!("eps0 = {} must be positive", self.eps0)));
        }
        if let Some(e) = self.eps_cut.filter(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(bad(format!("eps_cut = {e} must be positive")));
        }
        if let Some(b) = &self.beta {
            if b.iter().any(|x| !x.is_finite()) {
                return Err(bad("beta entries must be finite"));
            }
        }
        if let Some(v) = &self.tau_grid.values {
            if v.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
                return Err(bad("tau_grid.values must be finite and non-negative"));
            }
        }
        if let Some(m) = self.tau_grid.max.filter(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(bad(format!("tau_grid.max = {m} must be positive")));
        }
        if self.tau_grid.count == 0 {
            return Err(bad("tau_grid.count must be at least 1"));
        }
        if self.tolerances.n_scan < 100 {
            return Err(bad(format!("tolerances.n_scan = {} is below 100", self.tolerances.n_scan)));
        }
        Ok(())
    }

    pub fn potential(&self) -> CliResult<Potential> {
        let src = self.potential.as_deref().ok_or_else(|| bad("this command needs `potential`"))?;
        Ok(Potential::parse(src)?)
    }

    pub fn domain(&self) -> CliResult<Interval> {
        interval("domain", self.domain.ok_or_else(|| bad("this command needs `domain`"))?)
    }

    pub fn grid_domain(&self) -> Option<Interval> {
        self.grid_domain.map(|d| Interval::new(d[0], d[1]))
    }

    pub fn h_list(&self) -> CliResult<&[f64]> {
        if self.h_list.is_empty() {
            return Err(bad("this command needs a non-empty `h_list`"));
        }
        Ok(&self.h_list)
    }

    pub fn graph(&self) -> CliResult<&GraphSpec> {
        self.graph.as_ref().ok_or_else(|| bad("this command needs a `graph` block"))
    }
}
