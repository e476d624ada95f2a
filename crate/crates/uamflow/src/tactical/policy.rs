//! The learned policy: a table of action values over a discretized
//! observation, serialized as a self-describing JSON artifact.

use super::{DetectionMode, ObservationVector, SpeedAction};
use crate::airspace::Network;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

pub const POLICY_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("failed to read policy {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse policy {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("unsupported policy format version {0}")]
    Version(u32),
}

/// Uniform bin edges for one feature; values outside the span clamp to the
/// end bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBins {
    pub edges: Vec<f64>,
}

impl FeatureBins {
    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Self {
        let step = (hi - lo) / bins as f64;
        Self {
            edges: (0..=bins).map(|i| lo + step * i as f64).collect(),
        }
    }

    pub fn bins(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn bin_of(&self, x: f64) -> usize {
        let last = self.bins() - 1;
        if x <= self.edges[0] {
            return 0;
        }
        for i in 0..self.bins() {
            if x < self.edges[i + 1] {
                return i;
            }
        }
        last
    }
}

/// How observations collapse into table states: own distance to goal, own
/// speed, distance to the nearest intruder, its speed relative to the
/// ownship and the relative heading. A missing intruder takes a dedicated
/// bucket.
///
/// The relative-heading axis disambiguates an intruder converging from a
/// side route (distance shrinking purely through geometry) from benign
/// in-trail traffic; without it the two look identical whenever the speeds
/// match, and the table cannot learn to sequence merges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub d_goal: FeatureBins,
    pub speed: FeatureBins,
    pub intruder_distance: FeatureBins,
    pub relative_speed: FeatureBins,
    pub relative_heading: FeatureBins,
}

impl Discretization {
    /// Default bin layout sized to a network: 10 distance-to-goal bins over
    /// the longest route, 5 speed bins over the envelope, 12 intruder
    /// distance bins over the observation range, 5 relative-speed bins, and
    /// 3 relative-heading bins (in trail, converging, crossing/opposed).
    pub fn for_network(network: &Network, observation_range: f64) -> Self {
        let longest = network
            .routes
            .iter()
            .map(|r| network.route_length(&r.id).unwrap_or(0.0))
            .fold(0.0, f64::max)
            .max(1.0);
        let p = &network.performance;
        let rel_span = (p.v_max - p.v_min).max(1.0);
        Self {
            d_goal: FeatureBins::uniform(0.0, longest, 10),
            speed: FeatureBins::uniform(p.v_min, p.v_max, 5),
            intruder_distance: FeatureBins::uniform(0.0, observation_range, 12),
            relative_speed: FeatureBins::uniform(-rel_span, rel_span, 5),
            relative_heading: FeatureBins {
                edges: vec![
                    0.0,
                    std::f64::consts::FRAC_PI_6,
                    std::f64::consts::FRAC_PI_2,
                    std::f64::consts::PI,
                ],
            },
        }
    }

    /// Encodes an observation into a table key. The intruder-distance axis
    /// has one extra bucket (index 0) for "no intruder in sight".
    pub fn state_key(&self, obs: &ObservationVector) -> u32 {
        let dg = self.d_goal.bin_of(obs.ownship.d_goal);
        let sp = self.speed.bin_of(obs.ownship.v);
        let (id, rs, rh) = match obs.nearest_intruder() {
            Some(intruder) => {
                let mut dh = (intruder.heading - obs.ownship.heading).abs()
                    % (2.0 * std::f64::consts::PI);
                if dh > std::f64::consts::PI {
                    dh = 2.0 * std::f64::consts::PI - dh;
                }
                (
                    self.intruder_distance.bin_of(intruder.d_oi) + 1,
                    self.relative_speed.bin_of(intruder.v - obs.ownship.v),
                    self.relative_heading.bin_of(dh),
                )
            }
            None => (0, 0, 0),
        };
        let mut key = dg as u32;
        key = key * self.speed.bins() as u32 + sp as u32;
        key = key * (self.intruder_distance.bins() as u32 + 1) + id as u32;
        key = key * self.relative_speed.bins() as u32 + rs as u32;
        key = key * self.relative_heading.bins() as u32 + rh as u32;
        key
    }

    pub fn state_count(&self) -> u32 {
        self.d_goal.bins() as u32
            * self.speed.bins() as u32
            * (self.intruder_distance.bins() as u32 + 1)
            * self.relative_speed.bins() as u32
            * self.relative_heading.bins() as u32
    }
}

/// Learning hyperparameters carried inside the policy artifact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearningParams {
    pub learning_rate: f64,
    pub discount: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Episodes over which exploration decays linearly.
    pub epsilon_decay_episodes: usize,
    /// Episodes between applications of the accumulated updates.
    pub update_period: usize,
}

impl Default for LearningParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            // Near-undiscounted: flights are finite and the time savings of
            // a speed change land mostly at the end of the flight, which a
            // low discount would erase.
            discount: 0.999,
            epsilon_start: 0.3,
            epsilon_end: 0.02,
            epsilon_decay_episodes: 400,
            update_period: 30,
        }
    }
}

impl LearningParams {
    pub fn epsilon_at(&self, episode: usize) -> f64 {
        if self.epsilon_decay_episodes == 0 {
            return self.epsilon_end;
        }
        let frac = (episode as f64 / self.epsilon_decay_episodes as f64).min(1.0);
        self.epsilon_start + frac * (self.epsilon_end - self.epsilon_start)
    }
}

/// Action values keyed by discretized state. States never visited stay out
/// of the table; reading one falls back to holding speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyTable {
    pub version: u32,
    pub detection_mode: DetectionMode,
    pub discretization: Discretization,
    pub learning: LearningParams,
    values: BTreeMap<u32, [f64; 3]>,
}

impl PolicyTable {
    pub fn new(
        detection_mode: DetectionMode,
        discretization: Discretization,
        learning: LearningParams,
    ) -> Self {
        Self {
            version: POLICY_FORMAT_VERSION,
            detection_mode,
            discretization,
            learning,
            values: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn q_values(&self, key: u32) -> Option<[f64; 3]> {
        self.values.get(&key).copied()
    }

    pub fn max_q(&self, key: u32) -> f64 {
        self.values
            .get(&key)
            .map(|q| q.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .unwrap_or(0.0)
    }

    /// One temporal-difference step toward `target`.
    pub fn update(&mut self, key: u32, action: SpeedAction, target: f64, learning_rate: f64) {
        let q = self.values.entry(key).or_insert([0.0; 3]);
        let i = action.index();
        q[i] += learning_rate * (target - q[i]);
    }

    /// Greedy readout with a deterministic tie-break (hold, then decrease,
    /// then increase). Returns the action plus whether the state was unseen
    /// and the hold fallback fired.
    pub fn act_greedy(&self, obs: &ObservationVector) -> (SpeedAction, bool) {
        let key = self.discretization.state_key(obs);
        match self.values.get(&key) {
            None => (SpeedAction::Hold, true),
            Some(q) => {
                let mut chosen = SpeedAction::Hold;
                for a in [SpeedAction::Decrease, SpeedAction::Increase] {
                    if q[a.index()] > q[chosen.index()] {
                        chosen = a;
                    }
                }
                (chosen, false)
            }
        }
    }

    /// Exploring readout used during training.
    pub fn act_eps_greedy(
        &self,
        obs: &ObservationVector,
        epsilon: f64,
        rng: &mut impl Rng,
    ) -> (SpeedAction, bool) {
        if rng.random::<f64>() < epsilon {
            let i = rng.random_range(0..SpeedAction::ALL.len());
            (SpeedAction::ALL[i], false)
        } else {
            self.act_greedy(obs)
        }
    }

    pub fn all_values_finite(&self) -> bool {
        self.values
            .values()
            .all(|q| q.iter().all(|v| v.is_finite()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("policy serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), PolicyError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| PolicyError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PolicyError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| PolicyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let table: Self = serde_json::from_str(&text).map_err(|source| PolicyError::Parse {
            path: path.display().to_string(),
            source,
        })?;
        if table.version != POLICY_FORMAT_VERSION {
            return Err(PolicyError::Version(table.version));
        }
        Ok(table)
    }
}
