//! Flat JSON run configuration shared by all subcommands. Unknown keys are
//! rejected by name; every field except the per-command required ones has a
//! default, so `{}` plus the required keys is a complete config.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use baconshor::experiment::{Engine, ExperimentConfig};

/// Errors surfaced to the user, split by exit code: configuration problems
/// exit with 2, run/check failures with 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "invalid configuration: {msg}"),
            CliError::Failure(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Failure(format!("i/o error: {err}"))
    }
}

fn default_engine() -> String {
    "densmat".into()
}

fn default_n_circuits() -> usize {
    200
}

fn default_n_trajectories() -> u64 {
    100_000
}

fn default_true() -> bool {
    true
}

fn default_p_max() -> f64 {
    baconshor::sitecount::DEFAULT_P_MAX
}

fn default_cross_check_configs() -> usize {
    20
}

fn default_cross_check_trajectories() -> u64 {
    20_000
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed for circuit sampling and trajectory noise.
    #[serde(default)]
    pub seed: u64,
    /// "densmat" (exact) or "stab" (Monte-Carlo).
    #[serde(default = "default_engine")]
    pub engine: String,
    /// Logical circuit depths (required by sweep and sitecount).
    pub depths: Option<Vec<usize>>,
    /// Parity-check spacings (required by sweep; sitecount uses divisors).
    pub gaps: Option<Vec<usize>>,
    /// Explicit noise grid; omitted means one is chosen per (depth, gap).
    pub p_grid: Option<Vec<f64>>,
    #[serde(default = "default_n_circuits")]
    pub n_circuits: usize,
    #[serde(default = "default_n_trajectories")]
    pub n_trajectories: u64,
    #[serde(default)]
    pub round_after_prep: bool,
    #[serde(default = "default_true")]
    pub final_parity_check: bool,
    #[serde(default)]
    pub mean_of_ratios: bool,
    /// Upper end of the analytic threshold scan.
    #[serde(default = "default_p_max")]
    pub p_max: f64,
    /// Random engine cross-comparisons run by `validate`.
    #[serde(default = "default_cross_check_configs")]
    pub cross_check_configs: usize,
    /// Monte-Carlo shots per cross-comparison.
    #[serde(default = "default_cross_check_trajectories")]
    pub cross_check_trajectories: u64,
    /// Worker threads (omitted: all available processors).
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn require_depths(&self) -> Result<&[usize], CliError> {
        match &self.depths {
            Some(d) if !d.is_empty() => Ok(d),
            Some(_) => Err(CliError::Config("\"depths\" must not be empty".into())),
            None => Err(CliError::Config("missing required key \"depths\"".into())),
        }
    }

    fn require_gaps(&self) -> Result<&[usize], CliError> {
        match &self.gaps {
            Some(g) if !g.is_empty() => Ok(g),
            Some(_) => Err(CliError::Config("\"gaps\" must not be empty".into())),
            None => Err(CliError::Config("missing required key \"gaps\"".into())),
        }
    }

    /// Assembles and validates the sweep configuration.
    pub fn to_experiment(&self) -> Result<ExperimentConfig, CliError> {
        let engine: Engine =
            self.engine.parse().map_err(|e| CliError::Config(format!("{e}")))?;
        let cfg = ExperimentConfig {
            seed: self.seed,
            engine,
            depths: self.require_depths()?.to_vec(),
            gaps: self.require_gaps()?.to_vec(),
            p_grid: self.p_grid.clone(),
            n_circuits: self.n_circuits,
            n_trajectories: self.n_trajectories,
            round_after_prep: self.round_after_prep,
            final_parity_check: self.final_parity_check,
            mean_of_ratios: self.mean_of_ratios,
        };
        cfg.validate().map_err(|e| CliError::Config(format!("{e}")))?;
        Ok(cfg)
    }

    /// Validates the keys the sitecount command consumes.
    pub fn check_sitecount(&self) -> Result<(), CliError> {
        let depths = self.require_depths()?;
        if let Some(&t) = depths.iter().find(|&&t| t == 0) {
            return Err(CliError::Config(format!(
                "\"depths\" entries must be at least 1, got {t}"
            )));
        }
        if !(self.p_max > 0.0 && self.p_max <= 0.75) {
            return Err(CliError::Config(format!(
                "\"p_max\" must lie in (0, 0.75], got {}",
                self.p_max
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"depths": [2], "gaps": [1]}"#).unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.engine, "densmat");
        assert_eq!(cfg.n_circuits, 200);
        assert_eq!(cfg.n_trajectories, 100_000);
        assert!(cfg.final_parity_check);
        assert!(!cfg.round_after_prep);
        assert!(cfg.to_experiment().is_ok());
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = serde_json::from_str::<RunConfig>(r#"{"noisy_measurements": true}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("noisy_measurements"), "{err}");
    }

    #[test]
    fn missing_depths_is_named() {
        let cfg: RunConfig = serde_json::from_str("{}").unwrap();
        let err = cfg.require_depths().unwrap_err().to_string();
        assert!(err.contains("depths"), "{err}");
    }

    #[test]
    fn zero_depth_is_rejected_for_sitecount() {
        let cfg: RunConfig = serde_json::from_str(r#"{"depths": [0]}"#).unwrap();
        assert!(cfg.check_sitecount().is_err());
    }

    #[test]
    fn bad_engine_is_a_config_error() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"depths": [1], "gaps": [1], "engine": "exact"}"#).unwrap();
        let err = cfg.to_experiment().unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
