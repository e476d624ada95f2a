//! Route network, capacity-constrained resources, aircraft performance and
//! demand generation.
//!
//! Positions live in a local planar frame in meters; separation thresholds
//! are given in meters and the networks are city-scale, so no geodetic math
//! is done anywhere.

mod demand;
mod scenario;

pub use demand::{generate_schedule, DemandSpec};
pub use scenario::{validate_scenario, ScenarioConfig, ValidationReport, Violation};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AirspaceError {
    #[error("route {route}: node {node} is not on the route")]
    NodeNotOnRoute { route: String, node: String },
    #[error("route {route}: node {from} does not precede node {to}")]
    NodeOrder {
        route: String,
        from: String,
        to: String,
    },
    #[error("unknown route {0}")]
    UnknownRoute(String),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("invalid demand spec: {0}")]
    InvalidDemand(String),
}

/// A named waypoint in the local planar frame (meters).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

impl Node {
    pub fn distance_to(&self, other: &Node) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// An ordered sequence of node ids, origin first, destination last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Route {
    pub id: String,
    pub nodes: Vec<String>,
}

impl Route {
    pub fn origin(&self) -> &str {
        &self.nodes[0]
    }

    pub fn destination(&self) -> &str {
        self.nodes.last().map(String::as_str).unwrap_or_default()
    }
}

/// A capacity-constrained point (merge or crossing fix): at most `capacity`
/// operations may arrive during any one window of `window_length` seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resource {
    pub node_id: String,
    pub capacity: u32,
    pub window_length: f64,
}

/// Speed envelope and advisory increment for the simulated vehicle class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AircraftPerformance {
    /// Minimum airborne speed, m/s.
    pub v_min: f64,
    /// Nominal cruise speed, m/s.
    pub v_cruise: f64,
    /// Maximum speed, m/s.
    pub v_max: f64,
    /// Speed change per advisory, m/s.
    pub dv: f64,
    /// Magnitude of the speed ramp rate, m/s^2.
    pub accel: f64,
}

impl Default for AircraftPerformance {
    fn default() -> Self {
        Self {
            v_min: 20.0,
            v_cruise: 50.0,
            v_max: 70.0,
            dv: 2.5,
            accel: 2.0,
        }
    }
}

/// One operation's schedule: where it flies and when it may leave the ground.
///
/// `required_departure` starts equal to `scheduled_departure` and is raised
/// by the strategic layer; it never drops below the schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightPlan {
    pub flight_id: String,
    pub route_id: String,
    pub scheduled_departure: f64,
    pub required_departure: f64,
}

impl FlightPlan {
    pub fn new(flight_id: impl Into<String>, route_id: impl Into<String>, scheduled: f64) -> Self {
        Self {
            flight_id: flight_id.into(),
            route_id: route_id.into(),
            scheduled_departure: scheduled,
            required_departure: scheduled,
        }
    }

    pub fn ground_delay(&self) -> f64 {
        (self.required_departure - self.scheduled_departure).max(0.0)
    }

    /// Estimated arrival time at each constrained resource on the route,
    /// derived from the required departure plus the cruise transit time.
    pub fn etas(&self, network: &Network) -> Result<BTreeMap<String, f64>, AirspaceError> {
        let route = network.route(&self.route_id)?;
        let mut out = BTreeMap::new();
        for res in network.resources_on_route(route) {
            let t = estimate_transit_time(
                network,
                route,
                route.origin(),
                &res.node_id,
                &network.performance,
            )?;
            out.insert(res.node_id.clone(), self.required_departure + t);
        }
        Ok(out)
    }
}

/// Per-route geometry precomputed from node positions: cumulative arc length
/// at every node plus leg headings, so the engine can map an arc position to
/// planar coordinates cheaply.
#[derive(Debug, Clone)]
pub struct RouteGeometry {
    /// Cumulative distance from the origin at each node of the route.
    pub cum_dist: Vec<f64>,
    /// Planar positions of the route nodes.
    pub points: Vec<(f64, f64)>,
    /// Heading (radians, atan2 convention) of each leg.
    pub leg_heading: Vec<f64>,
}

impl RouteGeometry {
    pub fn length(&self) -> f64 {
        *self.cum_dist.last().unwrap_or(&0.0)
    }

    /// Planar position at `arc` meters along the route (clamped to the ends).
    pub fn position_at(&self, arc: f64) -> (f64, f64) {
        let arc = arc.clamp(0.0, self.length());
        let leg = match self
            .cum_dist
            .iter()
            .position(|&d| arc < d)
        {
            Some(i) => i.saturating_sub(1),
            None => self.leg_heading.len().saturating_sub(1),
        };
        let (x0, y0) = self.points[leg];
        let run = arc - self.cum_dist[leg];
        let h = self.leg_heading[leg];
        (x0 + run * h.cos(), y0 + run * h.sin())
    }

    /// Heading of the leg containing `arc`.
    pub fn heading_at(&self, arc: f64) -> f64 {
        let arc = arc.clamp(0.0, self.length());
        let leg = match self.cum_dist.iter().position(|&d| arc < d) {
            Some(i) => i.saturating_sub(1),
            None => self.leg_heading.len().saturating_sub(1),
        };
        self.leg_heading[leg]
    }
}

/// The immutable airspace description: nodes, routes, resources and the
/// shared performance envelope, with lookup tables and precomputed geometry.
///
/// Read-only after construction; safe to share across workers.
#[derive(Debug, Clone)]
pub struct Network {
    pub nodes: Vec<Node>,
    pub routes: Vec<Route>,
    pub resources: Vec<Resource>,
    pub performance: AircraftPerformance,
    node_index: BTreeMap<String, usize>,
    route_index: BTreeMap<String, usize>,
    geometry: Vec<RouteGeometry>,
}

impl Network {
    /// Builds lookup tables and geometry. Fails on dangling node references;
    /// broader invariant checking lives in [`validate_scenario`].
    pub fn new(
        nodes: Vec<Node>,
        routes: Vec<Route>,
        resources: Vec<Resource>,
        performance: AircraftPerformance,
    ) -> Result<Self, AirspaceError> {
        let node_index: BTreeMap<String, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i))
            .collect();
        let route_index: BTreeMap<String, usize> = routes
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.clone(), i))
            .collect();
        let mut geometry = Vec::with_capacity(routes.len());
        for route in &routes {
            let mut points = Vec::with_capacity(route.nodes.len());
            for id in &route.nodes {
                let idx = node_index
                    .get(id)
                    .ok_or_else(|| AirspaceError::UnknownNode(id.clone()))?;
                points.push((nodes[*idx].x, nodes[*idx].y));
            }
            let mut cum = vec![0.0];
            let mut headings = Vec::new();
            for w in points.windows(2) {
                let (x0, y0) = w[0];
                let (x1, y1) = w[1];
                let d = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
                headings.push((y1 - y0).atan2(x1 - x0));
                cum.push(cum.last().unwrap() + d);
            }
            geometry.push(RouteGeometry {
                cum_dist: cum,
                points,
                leg_heading: headings,
            });
        }
        for res in &resources {
            if !node_index.contains_key(&res.node_id) {
                return Err(AirspaceError::UnknownNode(res.node_id.clone()));
            }
        }
        Ok(Self {
            nodes,
            routes,
            resources,
            performance,
            node_index,
            route_index,
            geometry,
        })
    }

    pub fn route(&self, id: &str) -> Result<&Route, AirspaceError> {
        self.route_index
            .get(id)
            .map(|&i| &self.routes[i])
            .ok_or_else(|| AirspaceError::UnknownRoute(id.to_string()))
    }

    pub fn node(&self, id: &str) -> Result<&Node, AirspaceError> {
        self.node_index
            .get(id)
            .map(|&i| &self.nodes[i])
            .ok_or_else(|| AirspaceError::UnknownNode(id.to_string()))
    }

    pub fn geometry(&self, route_id: &str) -> Result<&RouteGeometry, AirspaceError> {
        self.route_index
            .get(route_id)
            .map(|&i| &self.geometry[i])
            .ok_or_else(|| AirspaceError::UnknownRoute(route_id.to_string()))
    }

    pub fn route_length(&self, route_id: &str) -> Result<f64, AirspaceError> {
        Ok(self.geometry(route_id)?.length())
    }

    /// Resources that lie on the given route, in route order.
    pub fn resources_on_route<'a>(&'a self, route: &'a Route) -> impl Iterator<Item = &'a Resource> {
        route.nodes.iter().filter_map(move |id| {
            self.resources.iter().find(|r| &r.node_id == id)
        })
    }

    /// Arc distance of `node` from the route origin.
    pub fn arc_of_node(&self, route_id: &str, node: &str) -> Result<f64, AirspaceError> {
        let route = self.route(route_id)?;
        let geom = self.geometry(route_id)?;
        let pos = route
            .nodes
            .iter()
            .position(|n| n == node)
            .ok_or_else(|| AirspaceError::NodeNotOnRoute {
                route: route_id.to_string(),
                node: node.to_string(),
            })?;
        Ok(geom.cum_dist[pos])
    }

    /// Unobstructed flight time for the whole route at cruise speed.
    pub fn estimated_route_time(&self, route_id: &str) -> Result<f64, AirspaceError> {
        Ok(self.route_length(route_id)? / self.performance.v_cruise)
    }
}

/// Cruise-speed transit time between two nodes of a route: the path distance
/// between them divided by `v_cruise`. `from` must not come after `to`; the
/// same node twice is a zero-length (0 s) transit.
pub fn estimate_transit_time(
    network: &Network,
    route: &Route,
    from: &str,
    to: &str,
    perf: &AircraftPerformance,
) -> Result<f64, AirspaceError> {
    let geom = network.geometry(&route.id)?;
    let find = |node: &str| -> Result<usize, AirspaceError> {
        route
            .nodes
            .iter()
            .position(|n| n == node)
            .ok_or_else(|| AirspaceError::NodeNotOnRoute {
                route: route.id.clone(),
                node: node.to_string(),
            })
    };
    let i = find(from)?;
    let j = find(to)?;
    if i > j {
        return Err(AirspaceError::NodeOrder {
            route: route.id.clone(),
            from: from.to_string(),
            to: to.to_string(),
        });
    }
    Ok((geom.cum_dist[j] - geom.cum_dist[i]) / perf.v_cruise)
}
