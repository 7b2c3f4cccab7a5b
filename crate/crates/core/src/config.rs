//! Run configuration.
//!
//! A run is described by a TOML file:
//!
//! ```toml
//! master_seed = 20160712
//! alpha = 0.05
//! bonferroni = "experiment"      # or "mode"
//! ties = "exclude"               # or "lower"
//!
//! [[experiments]]
//! name = "population_fixed_census2010"
//! mode = "population"            # or "arrest"
//! location = "fixed"             # or "random"
//! vintage = "census2010"         # or "proj2016"
//! replications = 1000            # default 1000 fixed, 2000 random
//! weighting = "officers"         # random only; or "total_employment"
//!
//! [bodycam]
//! replications = 1000
//! ```
//!
//! The `config` member of a previous run's `run.json` is accepted as well.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::demography::Mode;
use crate::engine::{
    Location, SimulationConfig, Weighting, DEFAULT_BODYCAM_REPLICATIONS, DEFAULT_FIXED_REPLICATIONS,
    DEFAULT_RANDOM_REPLICATIONS,
};
use crate::inference::TieRule;
use crate::ingest::Vintage;
use crate::rng::derive_seed;

pub const DEFAULT_SEED: u64 = 20_160_712;
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: file not found")]
    Missing { path: PathBuf },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl ConfigError {
    pub fn is_missing_input(&self) -> bool {
        matches!(self, ConfigError::Missing { .. })
    }
}

/// How many tests a Bonferroni correction divides alpha by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BonferroniFamily {
    /// The six races of one experiment.
    #[default]
    Experiment,
    /// Every race of every experiment sharing the mode (a whole p-value table).
    Mode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub mode: Mode,
    pub location: Location,
    pub vintage: Vintage,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<u64>,
    #[serde(default)]
    pub weighting: Weighting,
    /// Overrides the seed derived from the master seed and the name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ExperimentSpec {
    pub fn replications(&self) -> u64 {
        self.replications.unwrap_or(match self.location {
            Location::Fixed => DEFAULT_FIXED_REPLICATIONS,
            Location::Random => DEFAULT_RANDOM_REPLICATIONS,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodycamSpec {
    #[serde(default = "default_bodycam_replications")]
    pub replications: u64,
    /// Defaults to the number of race-known incidents with a body camera.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draws_per_replication: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_bodycam_replications() -> u64 {
    DEFAULT_BODYCAM_REPLICATIONS
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_kde_points() -> usize {
    crate::report::MIN_GRID_POINTS
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub bonferroni: BonferroniFamily,
    /// Tail receiving resamples tied with the observed total.
    #[serde(default)]
    pub ties: TieRule,
    #[serde(default = "default_kde_points")]
    pub kde_points: usize,
    /// Run the body-camera chi-square test.
    #[serde(default = "default_true")]
    pub chi_square: bool,
    /// Compute employment and arrest correlations.
    #[serde(default = "default_true")]
    pub correlations: bool,
    /// Export every county's race distribution per mode and vintage.
    #[serde(default)]
    pub export_distributions: bool,
    pub experiments: Vec<ExperimentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bodycam: Option<BodycamSpec>,
    /// Worker threads; absent means the rayon default. Never affects results.
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
    /// Defaults for the command-line `--fixtures` and `--out` flags. Not
    /// recorded in `run.json`, so outputs do not depend on where they live.
    #[serde(default, skip_serializing)]
    pub fixture_dir: Option<PathBuf>,
    #[serde(default, skip_serializing)]
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a TOML file, or the `config` member of a `run.json`.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| {
            if source.kind() == std::io::ErrorKind::NotFound {
                ConfigError::Missing {
                    path: path.to_path_buf(),
                }
            } else {
                ConfigError::Io {
                    path: path.to_path_buf(),
                    source,
                }
            }
        })?;
        if path.extension().is_some_and(|e| e == "json") {
            let parse = |message: String| ConfigError::Parse {
                path: path.to_path_buf(),
                message,
            };
            let mut doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| parse(e.to_string()))?;
            let inner = doc
                .get_mut("config")
                .map(serde_json::Value::take)
                .ok_or_else(|| parse("no `config` member".into()))?;
            let cfg: RunConfig = serde_json::from_value(inner).map_err(|e| parse(e.to_string()))?;
            cfg.validate()?;
            Ok(cfg)
        } else {
            Self::from_toml_str(&text, path)
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return invalid(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.experiments.is_empty() {
            return invalid("at least one experiment is required".into());
        }
        let mut names = BTreeSet::new();
        for x in &self.experiments {
            if x.name.is_empty() || !x.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return invalid(format!("experiment name {:?} must be non-empty [A-Za-z0-9_-]", x.name));
            }
            if x.name == "bodycam" || !names.insert(x.name.as_str()) {
                return invalid(format!("experiment name {:?} is reserved or repeated", x.name));
            }
            if x.replications() == 0 {
                return invalid(format!("experiment {}: replications must be at least 1", x.name));
            }
        }
        if let Some(b) = &self.bodycam {
            if b.replications == 0 || b.draws_per_replication == Some(0) {
                return invalid("bodycam replications and draws must be at least 1".into());
            }
        }
        if self.threads == Some(0) {
            return invalid("threads must be at least 1".into());
        }
        Ok(())
    }

    /// Engine configurations with per-experiment seeds derived from the
    /// master seed and the experiment name.
    pub fn simulations(&self) -> Vec<SimulationConfig> {
        self.experiments
            .iter()
            .map(|x| SimulationConfig {
                name: x.name.clone(),
                mode: x.mode,
                location: x.location,
                vintage: x.vintage,
                replications: x.replications(),
                master_seed: x.seed.unwrap_or_else(|| derive_seed(self.master_seed, &x.name)),
                weighting: x.weighting,
            })
            .collect()
    }

    pub fn bodycam_seed(&self) -> Option<u64> {
        self.bodycam
            .as_ref()
            .map(|b| b.seed.unwrap_or_else(|| derive_seed(self.master_seed, "bodycam")))
    }

    /// Bonferroni family size for an experiment of the given mode.
    pub fn family_size(&self, mode: Option<Mode>) -> usize {
        let races = crate::race::RACE_COUNT;
        match (self.bonferroni, mode) {
            (BonferroniFamily::Mode, Some(m)) => races * self.experiments.iter().filter(|x| x.mode == m).count(),
            _ => races,
        }
    }

    /// The eight experiments of a full replication (two modes, two
    /// locations, two vintages) plus the body-camera randomization test.
    /// Ties go to the lower tail, matching how the published p-values were
    /// counted.
    pub fn replication_default() -> Self {
        let mut experiments = Vec::new();
        for mode in [Mode::Population, Mode::Arrest] {
            for location in [Location::Fixed, Location::Random] {
                for vintage in Vintage::ALL {
                    experiments.push(ExperimentSpec {
                        name: format!("{mode}_{location}_{}", vintage.as_str()),
                        mode,
                        location,
                        vintage,
                        replications: None,
                        weighting: Weighting::Officers,
                        seed: None,
                    });
                }
            }
        }
        RunConfig {
            master_seed: DEFAULT_SEED,
            alpha: DEFAULT_ALPHA,
            bonferroni: BonferroniFamily::Experiment,
            ties: TieRule::Lower,
            kde_points: default_kde_points(),
            chi_square: true,
            correlations: true,
            export_distributions: false,
            experiments,
            bodycam: Some(BodycamSpec {
                replications: DEFAULT_BODYCAM_REPLICATIONS,
                draws_per_replication: None,
                seed: None,
            }),
            threads: None,
            fixture_dir: None,
            out_dir: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [[experiments]]
        name = "pf"
        mode = "population"
        location = "fixed"
        vintage = "census2010"
    "#;

    #[test]
    fn defaults_fill_in() {
        let cfg = RunConfig::from_toml_str(MINIMAL, Path::new("x.toml")).unwrap();
        assert_eq!(cfg.master_seed, DEFAULT_SEED);
        assert_eq!(cfg.alpha, 0.05);
        assert_eq!(cfg.experiments[0].replications(), 1000);
        assert!(cfg.bodycam.is_none());
        let sims = cfg.simulations();
        assert_eq!(sims[0].master_seed, derive_seed(DEFAULT_SEED, "pf"));
    }

    #[test]
    fn random_default_replications() {
        let text = MINIMAL.replace("fixed", "random");
        let cfg = RunConfig::from_toml_str(&text, Path::new("x.toml")).unwrap();
        assert_eq!(cfg.experiments[0].replications(), 2000);
        assert_eq!(cfg.experiments[0].weighting, Weighting::Officers);
    }

    #[test]
    fn rejects_invalid() {
        let bad_alpha = format!("alpha = 1.5\n{MINIMAL}");
        assert!(matches!(
            RunConfig::from_toml_str(&bad_alpha, Path::new("x")),
            Err(ConfigError::Invalid(_))
        ));
        assert!(matches!(
            RunConfig::from_toml_str("experiments = []", Path::new("x")),
            Err(ConfigError::Invalid(_))
        ));
        let dup = format!("{MINIMAL}\n{MINIMAL}");
        assert!(RunConfig::from_toml_str(&dup, Path::new("x")).is_err());
        let typo = MINIMAL.replace("vintage", "vintag");
        assert!(matches!(
            RunConfig::from_toml_str(&typo, Path::new("x")),
            Err(ConfigError::Parse { .. })
        ));
        let zero = format!("{MINIMAL}replications = 0\n");
        assert!(RunConfig::from_toml_str(&zero, Path::new("x")).is_err());
    }

    #[test]
    fn json_round_trip_drops_runtime_keys() {
        let mut cfg = RunConfig::replication_default();
        cfg.threads = Some(3);
        cfg.out_dir = Some("somewhere".into());
        let doc = serde_json::json!({ "config": cfg });
        let text = doc.to_string();
        assert!(!text.contains("threads") && !text.contains("somewhere"));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, text).unwrap();
        let back = RunConfig::load(&path).unwrap();
        assert_eq!(back.experiments, cfg.experiments);
        assert_eq!(back.threads, None);
    }

    #[test]
    fn missing_file_is_missing_input() {
        assert!(RunConfig::load(Path::new("/nonexistent/run.toml")).unwrap_err().is_missing_input());
    }

    #[test]
    fn family_sizes() {
        let mut cfg = RunConfig::replication_default();
        assert_eq!(cfg.family_size(Some(Mode::Arrest)), 6);
        cfg.bonferroni = BonferroniFamily::Mode;
        assert_eq!(cfg.family_size(Some(Mode::Arrest)), 24);
        assert_eq!(cfg.family_size(None), 6);
    }

    #[test]
    fn bundled_replication_config_matches_default() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/replication.toml");
        assert_eq!(RunConfig::load(&path).unwrap(), RunConfig::replication_default());
    }
}
