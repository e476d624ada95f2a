//! Airborne deconfliction: observation building, the reward machinery, the
//! rule-based baseline, one-step merge game analysis and a tabular learner
//! sharing one policy across all aircraft.

mod game;
mod observe;
mod policy;
mod reward;
mod rule;
mod train;

pub use game::{enumerate_equilibria, CostMatrix, EquilibriumAnalysis};
pub use observe::{is_leading, observe, AgentView, WorldView};
pub use policy::{Discretization, FeatureBins, LearningParams, PolicyError, PolicyTable};
pub use reward::{reward, RewardBreakdown, RewardError, RewardParams, RewardSpec, Transition};
pub use rule::{rule_based_policy, HoldBand, RulePolicyParams};
pub use train::{
    build_preconditioned_pool, build_raw_pool, train_policy, EpisodeReward, TrainConfig,
    TrainError, TrainOutcome,
};

use serde::{Deserialize, Serialize};

/// Horizontal separation thresholds (meters) and the sensing range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SafetyThresholds {
    /// Collision proxy: roughly one vehicle dimension.
    pub d_mac: f64,
    /// Near mid-air collision boundary.
    pub d_nmac: f64,
    /// Loss of well clear boundary.
    pub d_lowc: f64,
    /// How far an aircraft can perceive traffic.
    pub observation_range: f64,
}

impl Default for SafetyThresholds {
    fn default() -> Self {
        Self {
            d_mac: 10.0,
            d_nmac: 150.0,
            d_lowc: 500.0,
            observation_range: 1500.0,
        }
    }
}

impl SafetyThresholds {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0 < self.d_mac && self.d_mac < self.d_nmac) {
            return Err(format!(
                "need 0 < d_mac < d_nmac, got {} / {}",
                self.d_mac, self.d_nmac
            ));
        }
        if !(self.d_nmac < self.d_lowc) {
            return Err(format!(
                "need d_nmac < d_lowc, got {} / {}",
                self.d_nmac, self.d_lowc
            ));
        }
        if !(self.d_lowc <= self.observation_range) {
            return Err(format!(
                "need d_lowc <= observation_range, got {} / {}",
                self.d_lowc, self.observation_range
            ));
        }
        Ok(())
    }
}

/// Which traffic an aircraft treats as intruders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionMode {
    /// Everything within the observation range.
    All,
    /// Only traffic ahead of the ownship toward the next shared fix, which
    /// turns a symmetric merge into a leader/follower interaction.
    Forward,
}

/// One speed advisory step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedAction {
    Decrease,
    Hold,
    Increase,
}

impl SpeedAction {
    pub const ALL: [SpeedAction; 3] = [SpeedAction::Decrease, SpeedAction::Hold, SpeedAction::Increase];

    pub fn index(self) -> usize {
        match self {
            SpeedAction::Decrease => 0,
            SpeedAction::Hold => 1,
            SpeedAction::Increase => 2,
        }
    }

    /// Signed target-speed change in units of the advisory increment.
    pub fn sign(self) -> f64 {
        match self {
            SpeedAction::Decrease => -1.0,
            SpeedAction::Hold => 0.0,
            SpeedAction::Increase => 1.0,
        }
    }
}

/// What a tactical policy can command at a decision instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Advisory {
    Speed(SpeedAction),
    /// Emergency directive: command the minimum speed outright (the vehicle
    /// model has no zero-speed hover state).
    Hover,
}

impl Advisory {
    /// Anything other than holding the current speed counts as an alert.
    pub fn is_alert(self) -> bool {
        !matches!(self, Advisory::Speed(SpeedAction::Hold))
    }
}

/// Ownship features of the observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OwnshipState {
    /// Remaining distance to the destination, m.
    pub d_goal: f64,
    /// Current speed, m/s.
    pub v: f64,
    /// Current heading, radians.
    pub heading: f64,
    /// The NMAC boundary the agent must respect, m.
    pub d_nmac: f64,
}

/// One perceived intruder, mirrored from its own state plus the pairwise
/// distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntruderTrack {
    pub flight_id: String,
    pub d_goal: f64,
    pub v: f64,
    pub heading: f64,
    /// Distance from the ownship, m.
    pub d_oi: f64,
}

/// The full per-agent state at one decision instant. Intruders are sorted
/// by ascending distance; an empty list is a valid observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationVector {
    pub ownship: OwnshipState,
    pub intruders: Vec<IntruderTrack>,
}

impl ObservationVector {
    pub fn nearest_intruder(&self) -> Option<&IntruderTrack> {
        self.intruders.first()
    }
}
