//! Rule-based deconfliction: a follower reacts to the distance to its
//! nearest leading aircraft through two separation boundaries.

use super::{Advisory, ObservationVector, SafetyThresholds, SpeedAction};
use serde::{Deserialize, Serialize};

/// How the exact boundary distances are classified. `Closed` assigns both
/// boundaries to the hold band, removing the knife-edge that makes a
/// follower parked exactly on a boundary oscillate between speeding up and
/// slowing down. `Open` keeps the oscillating variant for studying that
/// behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoldBand {
    Closed,
    Open,
}

/// Boundaries for the rule-based policy. The defaults scale off the
/// well-clear threshold: slow down when the leader is within 1.3x well
/// clear, speed up when it is past 2.1x, hold in between. The wide hold
/// band damps oscillation; both boundaries cap at the observation range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RulePolicyParams {
    /// Low separation boundary, m: below it the follower slows down.
    pub d_ls: f64,
    /// High separation boundary, m: above it the follower speeds up.
    pub d_hs: f64,
    pub hold_band: HoldBand,
}

const LOW_BOUNDARY_FACTOR: f64 = 1.3;
const HIGH_BOUNDARY_FACTOR: f64 = 2.1;

impl RulePolicyParams {
    pub fn for_thresholds(thresholds: &SafetyThresholds) -> Self {
        Self {
            d_ls: (LOW_BOUNDARY_FACTOR * thresholds.d_lowc)
                .min(0.9 * thresholds.observation_range),
            d_hs: (HIGH_BOUNDARY_FACTOR * thresholds.d_lowc).min(thresholds.observation_range),
            hold_band: HoldBand::Closed,
        }
    }

    pub fn validate(&self, thresholds: &SafetyThresholds) -> Result<(), String> {
        if !(thresholds.d_nmac < self.d_ls
            && self.d_ls < self.d_hs
            && self.d_hs <= thresholds.observation_range)
        {
            return Err(format!(
                "need d_nmac < d_ls < d_hs <= observation_range, got {} < {} < {} <= {}",
                thresholds.d_nmac, self.d_ls, self.d_hs, thresholds.observation_range
            ));
        }
        Ok(())
    }
}

/// Advises from the nearest leading intruder's distance alone. The
/// observation must be built in forward mode so every listed intruder is a
/// leader. No leader, or a leader beyond the high boundary: speed up.
/// Inside the NMAC boundary: drop to minimum speed outright.
pub fn rule_based_policy(
    obs: &ObservationVector,
    params: &RulePolicyParams,
    thresholds: &SafetyThresholds,
) -> Advisory {
    let Some(leader) = obs.nearest_intruder() else {
        return Advisory::Speed(SpeedAction::Increase);
    };
    let d = leader.d_oi;
    if d < thresholds.d_nmac {
        return Advisory::Hover;
    }
    match params.hold_band {
        HoldBand::Closed => {
            if d < params.d_ls {
                Advisory::Speed(SpeedAction::Decrease)
            } else if d <= params.d_hs {
                Advisory::Speed(SpeedAction::Hold)
            } else {
                Advisory::Speed(SpeedAction::Increase)
            }
        }
        HoldBand::Open => {
            if d <= params.d_ls {
                Advisory::Speed(SpeedAction::Decrease)
            } else if d < params.d_hs {
                Advisory::Speed(SpeedAction::Hold)
            } else {
                Advisory::Speed(SpeedAction::Increase)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tactical::{IntruderTrack, OwnshipState};

    fn obs_with_leaders(distances: &[f64]) -> ObservationVector {
        let mut intruders: Vec<IntruderTrack> = distances
            .iter()
            .enumerate()
            .map(|(i, &d)| IntruderTrack {
                flight_id: format!("I{i}"),
                d_goal: 1000.0,
                v: 50.0,
                heading: 0.0,
                d_oi: d,
            })
            .collect();
        intruders.sort_by(|a, b| a.d_oi.total_cmp(&b.d_oi));
        ObservationVector {
            ownship: OwnshipState {
                d_goal: 2000.0,
                v: 50.0,
                heading: 0.0,
                d_nmac: 150.0,
            },
            intruders,
        }
    }

    fn setup() -> (RulePolicyParams, SafetyThresholds) {
        let thresholds = SafetyThresholds::default();
        let params = RulePolicyParams::for_thresholds(&thresholds);
        params.validate(&thresholds).unwrap();
        (params, thresholds)
    }

    #[test]
    fn no_leader_speeds_up() {
        let (params, thresholds) = setup();
        let obs = obs_with_leaders(&[]);
        assert_eq!(
            rule_based_policy(&obs, &params, &thresholds),
            Advisory::Speed(SpeedAction::Increase)
        );
    }

    #[test]
    fn leader_inside_nmac_forces_minimum_speed() {
        let (params, thresholds) = setup();
        let obs = obs_with_leaders(&[100.0]);
        assert_eq!(rule_based_policy(&obs, &params, &thresholds), Advisory::Hover);
    }

    #[test]
    fn bands_map_to_actions() {
        let (params, thresholds) = setup();
        let slow_at = (thresholds.d_nmac + params.d_ls) / 2.0;
        let hold_at = (params.d_ls + params.d_hs) / 2.0;
        let fast_at = (params.d_hs + thresholds.observation_range) / 2.0;
        assert_eq!(
            rule_based_policy(&obs_with_leaders(&[slow_at]), &params, &thresholds),
            Advisory::Speed(SpeedAction::Decrease)
        );
        assert_eq!(
            rule_based_policy(&obs_with_leaders(&[hold_at]), &params, &thresholds),
            Advisory::Speed(SpeedAction::Hold)
        );
        assert_eq!(
            rule_based_policy(&obs_with_leaders(&[fast_at]), &params, &thresholds),
            Advisory::Speed(SpeedAction::Increase)
        );
    }

    #[test]
    fn closed_band_holds_on_both_boundaries() {
        let (params, thresholds) = setup();
        assert_eq!(
            rule_based_policy(&obs_with_leaders(&[params.d_ls]), &params, &thresholds),
            Advisory::Speed(SpeedAction::Hold)
        );
        assert_eq!(
            rule_based_policy(&obs_with_leaders(&[params.d_hs]), &params, &thresholds),
            Advisory::Speed(SpeedAction::Hold)
        );
    }

    #[test]
    fn open_band_oscillates_on_the_boundaries() {
        let (mut params, thresholds) = setup();
        params.hold_band = HoldBand::Open;
        assert_eq!(
            rule_based_policy(&obs_with_leaders(&[params.d_ls]), &params, &thresholds),
            Advisory::Speed(SpeedAction::Decrease)
        );
        assert_eq!(
            rule_based_policy(&obs_with_leaders(&[params.d_hs]), &params, &thresholds),
            Advisory::Speed(SpeedAction::Increase)
        );
    }

    #[test]
    fn trailing_traffic_never_changes_the_action() {
        // Metamorphic: append a farther intruder, action unchanged.
        let (params, thresholds) = setup();
        for lead in [100.0, 600.0, 1300.0, 1460.0] {
            let base = rule_based_policy(&obs_with_leaders(&[lead]), &params, &thresholds);
            let with_extra =
                rule_based_policy(&obs_with_leaders(&[lead, lead + 200.0]), &params, &thresholds);
            assert_eq!(base, with_extra);
        }
    }
}
