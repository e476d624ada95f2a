//! Scenario files: one JSON document describing the network, demand and all
//! tunable constants. Unknown keys are rejected so typos fail loudly.

use super::{AircraftPerformance, DemandSpec, Network, Node, Resource, Route};
use crate::dcb::DcbParams;
use crate::tactical::{RewardSpec, SafetyThresholds};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("failed to read scenario {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse scenario {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("scenario is invalid:\n{0}")]
    Invalid(ValidationReport),
    #[error(transparent)]
    Airspace(#[from] super::AirspaceError),
}

/// Everything a run needs, in one diffable document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub nodes: Vec<Node>,
    pub routes: Vec<Route>,
    pub resources: Vec<Resource>,
    pub performance: AircraftPerformance,
    pub demand: DemandSpec,
    pub thresholds: SafetyThresholds,
    pub reward: RewardSpec,
    pub dcb: DcbParams,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text).map_err(|source| ScenarioError::Parse {
            path: path.display().to_string(),
            source,
        })
    }

    /// Loads and validates, refusing scenarios with any violation.
    pub fn load_validated(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let cfg = Self::load(path)?;
        let report = validate_scenario(&cfg);
        if report.is_ok() {
            Ok(cfg)
        } else {
            Err(ScenarioError::Invalid(report))
        }
    }

    pub fn network(&self) -> Result<Network, super::AirspaceError> {
        Network::new(
            self.nodes.clone(),
            self.routes.clone(),
            self.resources.clone(),
            self.performance,
        )
    }

    /// The bundled hybrid network: two routes merging at one fix and a third
    /// crossing the shared segment, with constrained resources at both.
    pub fn bundled_default() -> Self {
        Self::from_json(include_str!("../../scenarios/default.json"))
            .expect("bundled default scenario parses")
    }

    /// The bundled worked instance: one route through a single capacity-one
    /// resource, three flights at fixed 10 s intervals.
    pub fn bundled_single_resource() -> Self {
        Self::from_json(include_str!("../../scenarios/single_resource.json"))
            .expect("bundled single-resource scenario parses")
    }

    /// Applies one capacity to every resource.
    pub fn with_capacity(&self, capacity: u32) -> Self {
        let mut out = self.clone();
        for r in &mut out.resources {
            r.capacity = capacity;
        }
        out
    }

    /// Replaces the demand level, rescaling the interval distribution.
    pub fn with_demand_mean(&self, mean_interval: f64) -> Self {
        let mut out = self.clone();
        out.demand = self.demand.scaled_to_mean(mean_interval);
        out
    }
}

/// One invariant violation, addressed by a JSON-ish path into the scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "scenario is valid");
        }
        for v in &self.violations {
            writeln!(f, "{}: {}", v.path, v.message)?;
        }
        Ok(())
    }
}

/// Checks every declared invariant and reports all violations with their
/// paths. Never repairs anything.
pub fn validate_scenario(cfg: &ScenarioConfig) -> ValidationReport {
    let mut report = ValidationReport::default();

    // Nodes: unique ids, finite coordinates.
    let mut seen = std::collections::BTreeSet::new();
    for (i, node) in cfg.nodes.iter().enumerate() {
        if !seen.insert(node.id.as_str()) {
            report.push(format!("nodes[{i}].id"), format!("duplicate node id {}", node.id));
        }
        if !node.x.is_finite() || !node.y.is_finite() {
            report.push(
                format!("nodes[{i}]"),
                format!("non-finite coordinates for node {}", node.id),
            );
        }
    }
    let node_ids: std::collections::BTreeSet<&str> =
        cfg.nodes.iter().map(|n| n.id.as_str()).collect();

    // Routes: >= 2 nodes, known and consecutive-distinct nodes, length > 0.
    let mut route_ids = std::collections::BTreeSet::new();
    for (i, route) in cfg.routes.iter().enumerate() {
        if !route_ids.insert(route.id.as_str()) {
            report.push(format!("routes[{i}].id"), format!("duplicate route id {}", route.id));
        }
        if route.nodes.len() < 2 {
            report.push(
                format!("routes[{i}].nodes"),
                format!("route {} needs at least two nodes", route.id),
            );
        }
        for (j, id) in route.nodes.iter().enumerate() {
            if !node_ids.contains(id.as_str()) {
                report.push(
                    format!("routes[{i}].nodes[{j}]"),
                    format!("route {} references unknown node {}", route.id, id),
                );
            }
        }
        for (j, pair) in route.nodes.windows(2).enumerate() {
            if pair[0] == pair[1] {
                report.push(
                    format!("routes[{i}].nodes[{j}]"),
                    format!("route {} repeats node {} consecutively", route.id, pair[0]),
                );
            }
        }
    }
    if report.is_ok() {
        // Geometry checks only make sense once references resolve.
        if let Ok(net) = cfg.network() {
            for (i, route) in cfg.routes.iter().enumerate() {
                if let Ok(len) = net.route_length(&route.id) {
                    if len <= 0.0 {
                        report.push(
                            format!("routes[{i}]"),
                            format!("route {} has zero length", route.id),
                        );
                    }
                }
            }
        }
    }

    // Resources: capacity >= 1, window > 0, node known and on >= 1 route.
    let mut resource_nodes = std::collections::BTreeSet::new();
    for (i, res) in cfg.resources.iter().enumerate() {
        if res.capacity < 1 {
            report.push(
                format!("resources[{i}].capacity"),
                format!("resource {} must have capacity >= 1", res.node_id),
            );
        }
        if !(res.window_length > 0.0) {
            report.push(
                format!("resources[{i}].window_length"),
                format!("resource {} must have a positive window", res.node_id),
            );
        }
        if !node_ids.contains(res.node_id.as_str()) {
            report.push(
                format!("resources[{i}].node_id"),
                format!("resource references unknown node {}", res.node_id),
            );
        } else if !cfg.routes.iter().any(|r| r.nodes.contains(&res.node_id)) {
            report.push(
                format!("resources[{i}].node_id"),
                format!("resource node {} is not reachable by any route", res.node_id),
            );
        }
        if !resource_nodes.insert(res.node_id.as_str()) {
            report.push(
                format!("resources[{i}].node_id"),
                format!("duplicate resource at node {}", res.node_id),
            );
        }
    }

    // Performance envelope.
    let p = &cfg.performance;
    if !(p.v_min > 0.0 && p.v_min <= p.v_cruise && p.v_cruise <= p.v_max) {
        report.push(
            "performance",
            format!(
                "speeds must satisfy 0 < v_min <= v_cruise <= v_max, got {}/{}/{}",
                p.v_min, p.v_cruise, p.v_max
            ),
        );
    }
    if !(p.dv > 0.0) {
        report.push("performance.dv", "speed increment must be positive");
    }
    if !(p.accel > 0.0) {
        report.push("performance.accel", "acceleration must be positive");
    }

    if let Err(e) = cfg.demand.validate() {
        report.push("demand", e.to_string());
    }

    if let Err(msg) = cfg.thresholds.validate() {
        report.push("thresholds", msg);
    }

    if let Err(msg) = cfg.reward.validate() {
        report.push("reward", msg);
    }

    if !(cfg.dcb.departure_separation >= 0.0) {
        report.push(
            "dcb.departure_separation",
            "departure separation must be non-negative",
        );
    }
    if let Some(h) = cfg.dcb.horizon {
        if !(h > 0.0) {
            report.push("dcb.horizon", "horizon must be positive when set");
        }
    }

    report
}
