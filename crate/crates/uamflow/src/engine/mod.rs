//! Deterministic fast-time simulation: departure release, route-following
//! kinematics, tactical advisories at a fixed cadence, separation event
//! detection and per-flight outcome accounting.

mod episode;
mod events;
mod montecarlo;

pub use episode::{run_episode, run_plans_episode, StrategicMode, TacticalMode};
pub use events::{EventKind, EventTracker, SeparationEvent};
pub use montecarlo::monte_carlo;

use crate::airspace::AirspaceError;
use crate::dcb::DcbError;
use crate::tactical::{Advisory, DetectionMode, ObservationVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Airspace(#[from] AirspaceError),
    #[error(transparent)]
    Dcb(#[from] DcbError),
    #[error("strategic plan is infeasible{}", .binding.as_deref().map(|r| format!(" (binding resource {r})")).unwrap_or_default())]
    StrategicInfeasible { binding: Option<String> },
    #[error("engine config invalid: {0}")]
    InvalidConfig(String),
}

/// Integration step, advisory cadence and the wall-clock cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineConfig {
    /// Kinematic integration step, s.
    pub step_dt: f64,
    /// Seconds between advisory rounds; must be a multiple of `step_dt`.
    pub decision_dt: f64,
    /// Episodes are cut off (and marked truncated) at this simulated time.
    pub max_sim_time: f64,
    /// Record a per-step speed sample for every airborne aircraft.
    pub record_speeds: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            step_dt: 1.0,
            // Advisories every simulation step. At coarser cadences the
            // speed authority (dv per advisory, ramp-limited) is too weak
            // to sequence two aircraft converging on a fix.
            decision_dt: 1.0,
            max_sim_time: 7200.0,
            record_speeds: false,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if !(self.step_dt > 0.0 && self.step_dt <= self.decision_dt) {
            return Err(EngineError::InvalidConfig(format!(
                "need 0 < step_dt <= decision_dt, got {} / {}",
                self.step_dt, self.decision_dt
            )));
        }
        if !(self.max_sim_time > 0.0) {
            return Err(EngineError::InvalidConfig(
                "max_sim_time must be positive".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn steps_per_decision(&self) -> u64 {
        (self.decision_dt / self.step_dt).round().max(1.0) as u64
    }
}

/// Flight lifecycle inside one episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    PreDeparture,
    Airborne,
    Landed,
    Removed,
}

/// Where a flight ended up when the episode finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlightOutcome {
    Landed,
    /// Exceeded its maximum flying time and was pulled from the airspace.
    Removed,
    /// Still flying when the episode hit the time cap.
    AirborneAtTruncation,
    /// Never released before the episode hit the time cap.
    NotReleased,
}

/// Everything recorded about one flight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightRecord {
    pub flight_id: String,
    pub route_id: String,
    pub scheduled_departure: f64,
    pub required_departure: f64,
    /// Simulation time the aircraft actually left the ground.
    pub release_time: Option<f64>,
    /// Unobstructed route time at cruise speed.
    pub estimated_time: f64,
    /// Airborne time actually spent (to landing, removal or truncation).
    pub actual_time: Option<f64>,
    pub alerts: u32,
    pub ground_delay: f64,
    pub airborne_delay: Option<f64>,
    pub outcome: FlightOutcome,
}

/// One per-step speed sample, for speed-curve analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedSample {
    pub t: f64,
    pub flight_id: String,
    pub speed: f64,
}

/// Complete record of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub seed: u64,
    pub flights: Vec<FlightRecord>,
    pub events: Vec<SeparationEvent>,
    /// Minimum pairwise separation after each step; `None` with fewer than
    /// two aircraft airborne.
    pub min_separation_series: Vec<Option<f64>>,
    /// Sum of all airborne time, hours. Removed and truncated aircraft
    /// contribute the time they actually flew.
    pub flight_hours: f64,
    pub truncated: bool,
    /// Policy lookups that hit an unseen state and fell back to holding.
    pub policy_fallbacks: u64,
    pub speed_trace: Option<Vec<SpeedSample>>,
}

impl EpisodeLog {
    pub fn count_events(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    pub fn total_ground_delay(&self) -> f64 {
        self.flights.iter().map(|f| f.ground_delay).sum()
    }

    pub fn total_airborne_delay(&self) -> f64 {
        self.flights
            .iter()
            .filter_map(|f| f.airborne_delay)
            .sum()
    }

    pub fn total_alerts(&self) -> u64 {
        self.flights.iter().map(|f| f.alerts as u64).sum()
    }
}

/// A tactical decision-maker the engine consults every advisory round.
///
/// `advise` receives, besides the fresh observation, the closest separation
/// the aircraft saw since its previous decision, so learners can score the
/// transition that just ended. `on_terminal` fires once when the aircraft
/// lands, times out or the episode is truncated.
pub trait AdvisoryPolicy {
    fn detection_mode(&self) -> DetectionMode;

    fn advise(&mut self, ctx: &DecisionContext<'_>) -> Advisory;

    fn on_terminal(&mut self, _ctx: &TerminalContext<'_>) {}

    /// How many unseen-state fallbacks fired so far.
    fn fallbacks(&self) -> u64 {
        0
    }
}

pub struct DecisionContext<'a> {
    pub flight_id: &'a str,
    pub obs: &'a ObservationVector,
    /// Airborne seconds at this decision.
    pub elapsed: f64,
    /// Closest separation to any traffic since the previous decision.
    pub min_separation: Option<f64>,
    /// This flight's maximum flying time.
    pub max_flight_time: f64,
}

pub struct TerminalContext<'a> {
    pub flight_id: &'a str,
    pub elapsed: f64,
    pub min_separation: Option<f64>,
    pub max_flight_time: f64,
    pub timed_out: bool,
}
