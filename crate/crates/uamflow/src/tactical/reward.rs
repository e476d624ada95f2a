//! The per-step feedback signal: a safety term driven by the closest
//! separation, a time term that taxes loitering and punishes timeouts, and
//! an action term that taxes every speed change.

use super::{SafetyThresholds, SpeedAction};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RewardError {
    #[error("separation distance must be non-negative, got {0}")]
    NegativeDistance(f64),
}

/// Scenario-level reward settings. `alpha`, `delta` and `max_flight_time`
/// may be left unset to take the derived defaults: the slope pair that makes
/// the safety term continuous at both separation thresholds, and three times
/// the unobstructed route time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardSpec {
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_psi")]
    pub psi: f64,
    pub max_flight_time: Option<f64>,
}

fn default_eta() -> f64 {
    0.001
}

fn default_psi() -> f64 {
    0.01
}

impl Default for RewardSpec {
    fn default() -> Self {
        Self {
            alpha: None,
            delta: None,
            eta: default_eta(),
            psi: default_psi(),
            max_flight_time: None,
        }
    }
}

impl RewardSpec {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("delta", self.delta),
            ("max_flight_time", self.max_flight_time),
        ] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(format!("{name} must be finite and non-negative, got {v}"));
                }
            }
        }
        if !(self.eta >= 0.0 && self.psi >= 0.0) {
            return Err(format!(
                "eta and psi must be non-negative, got {} / {}",
                self.eta, self.psi
            ));
        }
        Ok(())
    }

    /// Resolves the nullable fields against the thresholds and a per-flight
    /// unobstructed flight time.
    pub fn resolve(&self, thresholds: &SafetyThresholds, route_time: f64) -> RewardParams {
        let span = thresholds.d_lowc - thresholds.d_nmac;
        RewardParams {
            alpha: self.alpha.unwrap_or(thresholds.d_lowc / span),
            delta: self.delta.unwrap_or(1.0 / span),
            eta: self.eta,
            psi: self.psi,
            max_flight_time: self.max_flight_time.unwrap_or(3.0 * route_time),
        }
    }
}

/// Fully resolved reward coefficients for one flight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    /// Safety-penalty intercept.
    pub alpha: f64,
    /// Safety-penalty slope per meter of separation.
    pub delta: f64,
    /// Per-step time penalty.
    pub eta: f64,
    /// Per-speed-change penalty.
    pub psi: f64,
    /// Maximum flying time T, seconds; beyond it the flight times out.
    pub max_flight_time: f64,
}

impl RewardParams {
    /// Continuity defaults for the given thresholds:
    /// `delta = 1/(d_lowc - d_nmac)`, `alpha = d_lowc/(d_lowc - d_nmac)`, so
    /// the safety term meets -1 at the NMAC boundary and 0 at the well-clear
    /// boundary with no cliff at either.
    pub fn continuity_defaults(thresholds: &SafetyThresholds, max_flight_time: f64) -> Self {
        RewardSpec::default().resolve(thresholds, max_flight_time / 3.0)
    }
}

/// One agent transition, as seen by the reward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    /// Closest separation to any traffic over the step, m. `None` when no
    /// other aircraft was airborne.
    pub min_separation: Option<f64>,
    /// Airborne time at the end of the step, s.
    pub elapsed: f64,
    pub action: SpeedAction,
}

/// The three penalty components and their sum. Each component is itself a
/// penalty (<= 0 under the defaults); the total is exactly their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub safety: f64,
    pub time: f64,
    pub action: f64,
    pub total: f64,
}

/// Scores one transition:
/// safety is -1 inside the NMAC boundary, `-alpha + delta * d` between the
/// NMAC and well-clear boundaries and 0 beyond; time is -1 past the maximum
/// flying time and `-eta` otherwise; action is `-psi` for any speed change.
pub fn reward(
    transition: &Transition,
    params: &RewardParams,
    thresholds: &SafetyThresholds,
) -> Result<RewardBreakdown, RewardError> {
    let safety = match transition.min_separation {
        None => 0.0,
        Some(d) if d < 0.0 => return Err(RewardError::NegativeDistance(d)),
        Some(d) if d < thresholds.d_nmac => -1.0,
        Some(d) if d <= thresholds.d_lowc => -params.alpha + params.delta * d,
        Some(_) => 0.0,
    };
    let time = if transition.elapsed > params.max_flight_time {
        -1.0
    } else {
        -params.eta
    };
    let action = match transition.action {
        SpeedAction::Hold => 0.0,
        _ => -params.psi,
    };
    Ok(RewardBreakdown {
        safety,
        time,
        action,
        total: safety + time + action,
    })
}
