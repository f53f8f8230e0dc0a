//! Run configuration: register geometry, physics, embedding and budgets.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedding::{EmbedConfig, HardwareGeometry};
use crate::error::{Error, Result};
use crate::instance_gen::ScenarioConfig;
use crate::rydberg::PhysicsConfig;
use crate::solvers::SapMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    /// Wall-clock limit for the exact MWIS search; `None` or `inf` runs to
    /// optimality.
    pub exact_seconds: Option<f64>,
    pub shots: usize,
    pub bootstrap_subsample: usize,
    pub bootstrap_reps: usize,
    /// Worker threads for `bench`; `None` uses all cores.
    pub workers: Option<usize>,
    pub sap_mode: SapMode,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            exact_seconds: Some(60.0),
            shots: 300,
            bootstrap_subsample: 100,
            bootstrap_reps: 20,
            workers: None,
            sap_mode: SapMode::Exact,
        }
    }
}

impl Budgets {
    pub fn exact_budget(&self) -> Option<std::time::Duration> {
        self.exact_seconds
            .filter(|s| s.is_finite())
            .map(std::time::Duration::from_secs_f64)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub geometry: HardwareGeometry,
    pub physics: PhysicsConfig,
    pub embed: EmbedConfig,
    pub budgets: Budgets,
    pub scenario: ScenarioConfig,
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.physics.validate()?;
        self.embed.den.validate()?;
        if self.budgets.exact_seconds.is_some_and(|s| !(s >= 0.0)) {
            return Err(Error::Input("exact_seconds must be non-negative".into()));
        }
        if self.budgets.shots == 0 {
            return Err(Error::Input("shots must be positive".into()));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Input(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Load TOML, or JSON when the file name ends in `.json`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if path.extension().is_some_and(|e| e == "json") {
            let cfg: Self = serde_json::from_str(&text)?;
            cfg.validate()?;
            Ok(cfg)
        } else {
            Self::from_toml(&text)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = Config::default();
        cfg.validate().unwrap();
        assert_eq!(Config::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn partial_file() {
        let cfg = Config::from_toml("[budgets]\nshots = 50\nexact_seconds = 1.5\n[geometry]\nd_min = 5.0\n").unwrap();
        assert_eq!(cfg.budgets.shots, 50);
        assert_eq!(cfg.budgets.bootstrap_reps, 20);
        assert_eq!(cfg.geometry.d_min, 5.0);
        assert_eq!(cfg.geometry.width, 76.0);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(Config::from_toml("[budgets]\nshotz = 3\n").is_err());
        assert!(Config::from_toml("[budgets]\nshots = 0\n").is_err());
        assert!(Config::from_toml("[geometry]\nd_min = 1.0\n").is_err());
    }
}
