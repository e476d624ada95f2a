//! Strategic conflict management: ground delays that keep per-window demand
//! at every constrained resource within capacity.
//!
//! Three routes to a solution live here: an exact branch-and-bound optimizer
//! ([`solve_exact`]), an online single-pass heuristic ([`HeuristicDcb`] /
//! [`solve_heuristic`]) and an exhaustive enumeration oracle
//! ([`brute_force_oracle`]) that guards the optimizer in tests.

mod exact;
mod heuristic;
mod oracle;
mod validate;

pub use exact::solve_exact;
pub use heuristic::{solve_heuristic, HeuristicDcb, ReleaseState};
pub use oracle::brute_force_oracle;
pub use validate::{validate_solution, SolutionReport, SolutionViolation};

use crate::airspace::{estimate_transit_time, AirspaceError, FlightPlan, Network};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Relative slack when deciding which window a boundary-grazing arrival
/// falls in, to keep `(B - T) + T` round-trips from flipping windows.
const WINDOW_SNAP: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DcbError {
    #[error(transparent)]
    Airspace(#[from] AirspaceError),
    #[error("resources disagree on window length: {0}")]
    MixedWindowLengths(String),
    #[error("no capacity configured for resource {0}")]
    MissingCapacity(String),
    #[error("instance too large for the enumeration oracle: {0}")]
    OracleRefused(String),
}

/// Scenario-level strategic settings; capacities and window length come from
/// the resource list itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DcbParams {
    /// Minimum separation between consecutive departures from one origin, s.
    pub departure_separation: f64,
    /// Last window end considered, s. `None` derives a horizon generous
    /// enough that any instance with capacities >= 1 stays feasible.
    pub horizon: Option<f64>,
}

/// Full strategic configuration for one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcbConfig {
    /// Window length W, seconds, shared by every resource.
    pub window_length: f64,
    /// Minimum separation between consecutive same-origin departures, s.
    pub departure_separation: f64,
    /// Capacity per resource node id.
    pub capacities: BTreeMap<String, u32>,
    /// Last window end, s. `None` lets solvers derive one per instance.
    pub horizon: Option<f64>,
}

impl DcbConfig {
    /// Builds the config from a network's resource list plus the scenario's
    /// strategic section. All resources must share one window length.
    pub fn from_network(network: &Network, params: &DcbParams) -> Result<Self, DcbError> {
        let mut window = None;
        let mut capacities = BTreeMap::new();
        for res in &network.resources {
            match window {
                None => window = Some(res.window_length),
                Some(w) if (w - res.window_length).abs() > 1e-9 => {
                    return Err(DcbError::MixedWindowLengths(format!(
                        "{} has {} s, expected {} s",
                        res.node_id, res.window_length, w
                    )))
                }
                _ => {}
            }
            capacities.insert(res.node_id.clone(), res.capacity);
        }
        Ok(Self {
            window_length: window.unwrap_or(200.0),
            departure_separation: params.departure_separation,
            horizon: params.horizon,
            capacities,
        })
    }

    /// Index of the half-open window `[n*W, (n+1)*W)` containing `t`.
    ///
    /// Arrivals within a sliver of the upper boundary are snapped up so that
    /// a departure derived from a window edge lands in the intended window
    /// despite float rounding.
    pub fn window_index(&self, t: f64) -> i64 {
        window_index(t, self.window_length)
    }

    /// Start time `B_n` of window `n`.
    pub fn window_start(&self, n: i64) -> f64 {
        n as f64 * self.window_length
    }

    pub fn capacity_of(&self, resource: &str) -> Result<u32, DcbError> {
        self.capacities
            .get(resource)
            .copied()
            .ok_or_else(|| DcbError::MissingCapacity(resource.to_string()))
    }
}

pub(crate) fn window_index(t: f64, window_length: f64) -> i64 {
    let ratio = t / window_length;
    let floor = ratio.floor();
    if ratio - floor >= 1.0 - WINDOW_SNAP {
        floor as i64 + 1
    } else {
        floor as i64
    }
}

/// The window decision: which capacity window each flight occupies at each
/// resource on its route. Exactly one window per (resource, flight) pair.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WindowAssignment {
    /// (resource node id, flight id) -> window index.
    pub entries: BTreeMap<(String, String), i64>,
}

impl WindowAssignment {
    pub fn window_of(&self, resource: &str, flight: &str) -> Option<i64> {
        self.entries
            .get(&(resource.to_string(), flight.to_string()))
            .copied()
    }

    /// Occupancy count per (resource, window).
    pub fn occupancy(&self) -> BTreeMap<(String, i64), u32> {
        let mut out = BTreeMap::new();
        for ((res, _), &n) in &self.entries {
            *out.entry((res.clone(), n)).or_insert(0) += 1;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Produced by the exact solver: no feasible solution has less delay.
    Optimal,
    /// Feasible but without an optimality guarantee.
    Feasible,
    Infeasible,
}

/// Outcome of a strategic solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcbSolution {
    /// flight id -> required departure time, seconds.
    pub required_departures: BTreeMap<String, f64>,
    pub assignment: WindowAssignment,
    pub total_delay: f64,
    pub status: SolveStatus,
    /// For infeasible outcomes, the resource whose capacity or horizon bound
    /// the search.
    pub binding_resource: Option<String>,
}

impl DcbSolution {
    pub fn infeasible(binding: Option<String>) -> Self {
        Self {
            required_departures: BTreeMap::new(),
            assignment: WindowAssignment::default(),
            total_delay: f64::INFINITY,
            status: SolveStatus::Infeasible,
            binding_resource: binding,
        }
    }

    /// Copies required departures onto the plans (by flight id).
    pub fn apply_to(&self, plans: &mut [FlightPlan]) {
        for plan in plans {
            if let Some(&r) = self.required_departures.get(&plan.flight_id) {
                plan.required_departure = r;
            }
        }
    }
}

/// One flight of a prepared instance: scheduled time, origin, and the
/// constrained resources on its route with cruise transit times.
#[derive(Debug, Clone)]
pub(crate) struct InstanceFlight {
    pub flight_id: String,
    pub origin: String,
    pub scheduled: f64,
    /// (resource node id, transit time from origin) in route order.
    pub resources: Vec<(String, f64)>,
}

/// Flights sorted by (scheduled, id) plus per-origin predecessor links, the
/// shape every solver works on.
#[derive(Debug, Clone)]
pub(crate) struct Instance {
    pub flights: Vec<InstanceFlight>,
    /// Index of the previous flight from the same origin, per flight.
    pub predecessor: Vec<Option<usize>>,
    pub horizon: f64,
}

impl Instance {
    pub fn prepare(
        plans: &[FlightPlan],
        network: &Network,
        cfg: &DcbConfig,
    ) -> Result<Self, DcbError> {
        let mut flights = Vec::with_capacity(plans.len());
        for plan in plans {
            let route = network.route(&plan.route_id)?;
            let mut resources = Vec::new();
            for res in network.resources_on_route(route) {
                let t = estimate_transit_time(
                    network,
                    route,
                    route.origin(),
                    &res.node_id,
                    &network.performance,
                )?;
                cfg.capacity_of(&res.node_id)?;
                resources.push((res.node_id.clone(), t));
            }
            flights.push(InstanceFlight {
                flight_id: plan.flight_id.clone(),
                origin: route.origin().to_string(),
                scheduled: plan.scheduled_departure,
                resources,
            });
        }
        flights.sort_by(|a, b| {
            a.scheduled
                .total_cmp(&b.scheduled)
                .then_with(|| a.flight_id.cmp(&b.flight_id))
        });

        let mut last_by_origin: BTreeMap<&str, usize> = BTreeMap::new();
        let mut predecessor = vec![None; flights.len()];
        for (i, f) in flights.iter().enumerate() {
            if let Some(&p) = last_by_origin.get(f.origin.as_str()) {
                predecessor[i] = Some(p);
            }
            last_by_origin.insert(f.origin.as_str(), i);
        }

        let horizon = cfg.horizon.unwrap_or_else(|| {
            let last_s = flights.iter().map(|f| f.scheduled).fold(0.0, f64::max);
            let max_t = flights
                .iter()
                .flat_map(|f| f.resources.iter().map(|(_, t)| *t))
                .fold(0.0, f64::max);
            let per_flight = cfg.window_length.max(cfg.departure_separation);
            last_s + flights.len() as f64 * per_flight + max_t + cfg.window_length
        });

        Ok(Self {
            flights,
            predecessor,
            horizon,
        })
    }

    pub fn total_delay(&self, required: &BTreeMap<String, f64>) -> f64 {
        self.flights
            .iter()
            .map(|f| (required.get(&f.flight_id).copied().unwrap_or(f.scheduled) - f.scheduled).max(0.0))
            .sum()
    }
}
