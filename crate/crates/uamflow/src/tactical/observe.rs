//! Observation building: who counts as an intruder for whom.

use super::{DetectionMode, IntruderTrack, ObservationVector, OwnshipState, SafetyThresholds};

/// Snapshot of one airborne aircraft, as the observation builder needs it.
/// The engine produces these each decision instant.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentView {
    pub flight_id: String,
    pub position: (f64, f64),
    pub speed: f64,
    pub heading: f64,
    /// Remaining distance to the destination, m.
    pub d_goal: f64,
    /// Route fixes still ahead, each with the along-route distance to it.
    pub fixes_ahead: Vec<(String, f64)>,
}

/// All airborne traffic at one instant.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WorldView {
    pub agents: Vec<AgentView>,
}

impl WorldView {
    pub fn agent(&self, flight_id: &str) -> Option<&AgentView> {
        self.agents.iter().find(|a| a.flight_id == flight_id)
    }
}

fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Whether `other` is ahead of `own` on their shared downstream path:
/// strictly closer to the first fix both still have to cross. Aircraft with
/// no common fix ahead do not interact in forward mode. An exact distance
/// tie is broken by flight id, so one of the pair always leads; without
/// that, two aircraft converging in perfect symmetry would be mutually
/// blind and never deconflict. The (distance, id) order is total, so the
/// "watches" relation stays acyclic.
pub fn is_leading(own: &AgentView, other: &AgentView) -> bool {
    for (fix, d_own) in &own.fixes_ahead {
        if let Some((_, d_other)) = other.fixes_ahead.iter().find(|(f, _)| f == fix) {
            return d_other < d_own
                || (d_other == d_own && other.flight_id < own.flight_id);
        }
    }
    false
}

/// Builds the per-agent state: ownship features plus every intruder within
/// the observation range that passes the detection-mode filter, sorted by
/// ascending distance. Returns `None` when `ownship_id` is not in the view.
pub fn observe(
    view: &WorldView,
    ownship_id: &str,
    mode: DetectionMode,
    thresholds: &SafetyThresholds,
) -> Option<ObservationVector> {
    let own = view.agent(ownship_id)?;
    let mut intruders: Vec<IntruderTrack> = view
        .agents
        .iter()
        .filter(|a| a.flight_id != ownship_id)
        .filter_map(|a| {
            let d_oi = distance(own.position, a.position);
            if d_oi > thresholds.observation_range {
                return None;
            }
            let keep = match mode {
                DetectionMode::All => true,
                DetectionMode::Forward => is_leading(own, a),
            };
            keep.then(|| IntruderTrack {
                flight_id: a.flight_id.clone(),
                d_goal: a.d_goal,
                v: a.speed,
                heading: a.heading,
                d_oi,
            })
        })
        .collect();
    intruders.sort_by(|a, b| {
        a.d_oi
            .total_cmp(&b.d_oi)
            .then_with(|| a.flight_id.cmp(&b.flight_id))
    });
    Some(ObservationVector {
        ownship: OwnshipState {
            d_goal: own.d_goal,
            v: own.speed,
            heading: own.heading,
            d_nmac: thresholds.d_nmac,
        },
        intruders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn agent(id: &str, x: f64, y: f64, d_merge: f64) -> AgentView {
        AgentView {
            flight_id: id.into(),
            position: (x, y),
            speed: 50.0,
            heading: 0.0,
            d_goal: d_merge + 1000.0,
            fixes_ahead: vec![("MERGE".into(), d_merge), ("DEST".into(), d_merge + 1000.0)],
        }
    }

    #[test]
    fn empty_sky_means_empty_intruder_list() {
        let view = WorldView {
            agents: vec![agent("A", 0.0, 0.0, 2000.0)],
        };
        let obs = observe(&view, "A", DetectionMode::All, &SafetyThresholds::default()).unwrap();
        assert!(obs.intruders.is_empty());
    }

    #[test]
    fn out_of_range_traffic_is_invisible() {
        let view = WorldView {
            agents: vec![agent("A", 0.0, 0.0, 2000.0), agent("B", 1600.0, 0.0, 1500.0)],
        };
        let obs = observe(&view, "A", DetectionMode::All, &SafetyThresholds::default()).unwrap();
        assert!(obs.intruders.is_empty());
    }

    #[test]
    fn all_mode_observation_is_mutual() {
        let view = WorldView {
            agents: vec![agent("A", 0.0, 0.0, 1000.0), agent("B", 400.0, 300.0, 800.0)],
        };
        let t = SafetyThresholds::default();
        let a = observe(&view, "A", DetectionMode::All, &t).unwrap();
        let b = observe(&view, "B", DetectionMode::All, &t).unwrap();
        assert_eq!(a.intruders.len(), 1);
        assert_eq!(b.intruders.len(), 1);
        assert_eq!(a.intruders[0].d_oi, 500.0);
        assert_eq!(b.intruders[0].d_oi, 500.0);
    }

    #[test]
    fn forward_mode_sees_only_the_leader() {
        // B is nearer the merge, so only A lists an intruder.
        let view = WorldView {
            agents: vec![agent("A", 0.0, 0.0, 1000.0), agent("B", 400.0, 300.0, 800.0)],
        };
        let t = SafetyThresholds::default();
        let a = observe(&view, "A", DetectionMode::Forward, &t).unwrap();
        let b = observe(&view, "B", DetectionMode::Forward, &t).unwrap();
        assert_eq!(a.intruders.len(), 1);
        assert_eq!(a.intruders[0].flight_id, "B");
        assert!(b.intruders.is_empty());
    }

    #[test]
    fn disjoint_paths_do_not_interact_in_forward_mode() {
        let mut a = agent("A", 0.0, 0.0, 1000.0);
        a.fixes_ahead = vec![("X".into(), 500.0)];
        let mut b = agent("B", 100.0, 0.0, 900.0);
        b.fixes_ahead = vec![("Y".into(), 400.0)];
        let view = WorldView { agents: vec![a, b] };
        let t = SafetyThresholds::default();
        assert!(observe(&view, "A", DetectionMode::Forward, &t)
            .unwrap()
            .intruders
            .is_empty());
        assert!(observe(&view, "B", DetectionMode::Forward, &t)
            .unwrap()
            .intruders
            .is_empty());
    }

    #[test]
    fn intruders_sorted_by_distance() {
        let view = WorldView {
            agents: vec![
                agent("A", 0.0, 0.0, 2000.0),
                agent("B", 900.0, 0.0, 1100.0),
                agent("C", 300.0, 0.0, 1700.0),
            ],
        };
        let obs = observe(&view, "A", DetectionMode::All, &SafetyThresholds::default()).unwrap();
        let ids: Vec<&str> = obs.intruders.iter().map(|i| i.flight_id.as_str()).collect();
        assert_eq!(ids, vec!["C", "B"]);
    }

    #[test]
    fn forward_watch_relation_is_acyclic_on_random_merge_traffic() {
        // Random positions along two routes that merge and share a tail;
        // "A watches B" edges must never form a cycle.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..200 {
            let n = rng.random_range(2..8usize);
            let agents: Vec<AgentView> = (0..n)
                .map(|i| {
                    let d_merge: f64 = rng.random_range(1.0..5000.0);
                    let mut a = agent(&format!("F{i}"), d_merge, 0.0, d_merge);
                    a.position = (rng.random_range(-2000.0..2000.0), rng.random_range(-2000.0..2000.0));
                    a
                })
                .collect();
            let view = WorldView { agents };
            // Edge from watcher to watched.
            let mut edges = vec![vec![]; n];
            for i in 0..n {
                for j in 0..n {
                    if i != j && is_leading(&view.agents[i], &view.agents[j]) {
                        edges[i].push(j);
                    }
                }
            }
            // DFS cycle detection.
            fn has_cycle(edges: &[Vec<usize>], node: usize, state: &mut [u8]) -> bool {
                state[node] = 1;
                for &next in &edges[node] {
                    if state[next] == 1 {
                        return true;
                    }
                    if state[next] == 0 && has_cycle(edges, next, state) {
                        return true;
                    }
                }
                state[node] = 2;
                false
            }
            let mut state = vec![0u8; n];
            for i in 0..n {
                if state[i] == 0 {
                    assert!(!has_cycle(&edges, i, &mut state), "cycle in watch relation");
                }
            }
        }
    }
}
