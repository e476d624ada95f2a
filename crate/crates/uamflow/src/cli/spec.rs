//! Experiment specification and manifests.
//!
//! Every subcommand resolves one [`ExperimentSpec`] from built-in defaults,
//! an optional config file (flags override the file) and its flags, then
//! writes the fully resolved spec — scenario inlined — as `manifest.json`
//! next to its outputs. Feeding that manifest back through `--config`
//! reproduces the run bit for bit.

use crate::airspace::{validate_scenario, ScenarioConfig};
use crate::engine::EngineConfig;
use crate::metrics::RiskModelParams;
use crate::tactical::DetectionMode;
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const DEMAND_HIGH_S: f64 = 30.0;
pub const DEMAND_MEDIUM_S: f64 = 60.0;
pub const DEMAND_LOW_S: f64 = 120.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum StrategicChoice {
    None,
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TacticalChoice {
    None,
    Rule,
    Policy,
}

/// Parses `high`, `medium`, `low` or a mean interval in seconds.
pub fn parse_demand(s: &str) -> Result<f64, String> {
    match s {
        "high" => Ok(DEMAND_HIGH_S),
        "medium" => Ok(DEMAND_MEDIUM_S),
        "low" => Ok(DEMAND_LOW_S),
        other => other
            .parse::<f64>()
            .map_err(|_| format!("expected high|medium|low or seconds, got {other}"))
            .and_then(|v| {
                if v > 0.0 {
                    Ok(v)
                } else {
                    Err("demand interval must be positive".into())
                }
            }),
    }
}

/// The full, serializable description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    /// Where the scenario was loaded from, for the record.
    pub scenario_path: Option<String>,
    /// The scenario itself, inlined when the spec is resolved so reruns
    /// never depend on the file still being there.
    pub scenario: Option<ScenarioConfig>,
    pub strategic: StrategicChoice,
    pub tactical: TacticalChoice,
    /// Override applied to every resource.
    pub capacity: Option<u32>,
    /// Mean departure interval override, seconds.
    pub demand_mean_interval: Option<f64>,
    pub runs: u64,
    pub seed: u64,
    /// Worker threads; `None` uses available parallelism. Results never
    /// depend on this.
    pub workers: Option<usize>,
    pub policy_file: Option<String>,
    /// Training: episode count.
    pub episodes: usize,
    /// Training: intruder detection mode.
    pub detection: DetectionMode,
    /// Training: size of the schedule pool.
    pub pool_tables: usize,
    /// Sweep: capacities to evaluate.
    pub capacities: Vec<u32>,
    pub engine: EngineConfig,
    pub risk: RiskModelParams,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            scenario_path: None,
            scenario: None,
            strategic: StrategicChoice::None,
            tactical: TacticalChoice::None,
            capacity: None,
            demand_mean_interval: None,
            runs: 30,
            seed: 0,
            workers: None,
            policy_file: None,
            episodes: 600,
            detection: DetectionMode::Forward,
            pool_tables: 20,
            capacities: (1..=8).collect(),
            engine: EngineConfig::default(),
            risk: RiskModelParams::default(),
        }
    }
}

impl ExperimentSpec {
    /// Loads a spec from `--config`: either a bare spec or a manifest
    /// wrapping one.
    pub fn from_config_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        if value.get("spec").is_some() {
            let manifest: Manifest = serde_json::from_value(value)
                .with_context(|| format!("parsing manifest {}", path.display()))?;
            Ok(manifest.spec)
        } else {
            serde_json::from_value(value)
                .with_context(|| format!("parsing experiment spec {}", path.display()))
        }
    }

    /// Ensures the scenario is loaded, validated and inlined.
    pub fn resolve_scenario(&mut self) -> Result<()> {
        if self.scenario.is_none() {
            let Some(path) = &self.scenario_path else {
                bail!("no scenario: pass --scenario <file> or a config with one inlined");
            };
            let cfg = ScenarioConfig::load(path).context("loading scenario")?;
            self.scenario = Some(cfg);
        }
        let scenario = self.scenario.as_ref().expect("just set");
        let report = validate_scenario(scenario);
        if !report.is_ok() {
            bail!(
                "scenario is invalid:\n{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
        }
        Ok(())
    }

    /// The scenario with the demand and capacity overrides applied.
    pub fn effective_scenario(&self) -> Result<ScenarioConfig> {
        let Some(base) = &self.scenario else {
            bail!("spec has no scenario; resolve it first");
        };
        let mut out = base.clone();
        if let Some(mean) = self.demand_mean_interval {
            out = out.with_demand_mean(mean);
        }
        if let Some(capacity) = self.capacity {
            out = out.with_capacity(capacity);
        }
        Ok(out)
    }
}

/// What gets written next to every command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub artifact_version: String,
    pub command: String,
    pub spec: ExperimentSpec,
}

impl Manifest {
    pub fn new(command: &str, spec: ExperimentSpec) -> Self {
        Self {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            spec,
        }
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text)
            .with_context(|| format!("writing manifest {}", path.display()))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demand_presets_parse() {
        assert_eq!(parse_demand("high").unwrap(), 30.0);
        assert_eq!(parse_demand("medium").unwrap(), 60.0);
        assert_eq!(parse_demand("low").unwrap(), 120.0);
        assert_eq!(parse_demand("45").unwrap(), 45.0);
        assert!(parse_demand("fast").is_err());
        assert!(parse_demand("-3").is_err());
    }

    #[test]
    fn manifest_round_trips_through_config_loading() {
        let mut spec = ExperimentSpec {
            scenario: Some(ScenarioConfig::bundled_default()),
            seed: 9,
            ..Default::default()
        };
        spec.resolve_scenario().unwrap();
        let manifest = Manifest::new("montecarlo", spec.clone());
        let dir = tempfile::tempdir().unwrap();
        let path = manifest.write(dir.path()).unwrap();
        let loaded = ExperimentSpec::from_config_file(&path).unwrap();
        assert_eq!(loaded, spec);
    }

    #[test]
    fn overrides_apply_to_the_effective_scenario() {
        let spec = ExperimentSpec {
            scenario: Some(ScenarioConfig::bundled_default()),
            capacity: Some(2),
            demand_mean_interval: Some(60.0),
            ..Default::default()
        };
        let eff = spec.effective_scenario().unwrap();
        assert!(eff.resources.iter().all(|r| r.capacity == 2));
        assert_eq!(eff.demand.mean_interval, 60.0);
        assert_eq!(eff.demand.interval_range, (0.0, 120.0));
    }
}
