//! One-step merge game analysis.
//!
//! Two aircraft converging on a fix each pick a speed action once. Under
//! symmetric observation the interaction is a general-sum bimatrix game;
//! restricting observation to leading traffic turns it into a leader/
//! follower game with a single dominant outcome. This module enumerates
//! both solution concepts by brute force over the nine profiles.

use super::SpeedAction;
use serde::{Deserialize, Serialize};

/// Per-player payoffs for every (aircraft 1, aircraft 2) action profile,
/// indexed by [`SpeedAction::index`]. Entries are penalties, so closer to
/// zero is better.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    pub payoffs: [[(f64, f64); 3]; 3],
}

impl CostMatrix {
    pub fn get(&self, a1: SpeedAction, a2: SpeedAction) -> (f64, f64) {
        self.payoffs[a1.index()][a2.index()]
    }

    /// The bundled two-aircraft merge game: only one speed-up/slow-down
    /// split resolves the conflict; every other profile ends in a loss of
    /// separation (-1 each), and slowing down costs a small energy penalty
    /// (-0.01).
    pub fn merge_game() -> Self {
        use SpeedAction::{Decrease as D, Hold as H, Increase as I};
        let mut payoffs = [[(0.0, 0.0); 3]; 3];
        let set = |p: &mut [[(f64, f64); 3]; 3], a1: SpeedAction, a2: SpeedAction, v: (f64, f64)| {
            p[a1.index()][a2.index()] = v;
        };
        set(&mut payoffs, I, I, (-1.0, -1.0));
        set(&mut payoffs, I, H, (-1.0, -1.0));
        set(&mut payoffs, I, D, (0.0, -0.01));
        set(&mut payoffs, H, I, (-1.0, -1.0));
        set(&mut payoffs, H, H, (-1.0, -1.0));
        set(&mut payoffs, H, D, (-1.0, -1.0));
        set(&mut payoffs, D, I, (-0.01, 0.0));
        set(&mut payoffs, D, H, (-1.0, -1.0));
        set(&mut payoffs, D, D, (-1.0, -1.0));
        Self { payoffs }
    }
}

/// Result of enumerating the nine profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumAnalysis {
    /// Profiles where every unilateral deviation strictly hurts the
    /// deviator.
    pub strict_nash: Vec<(SpeedAction, SpeedAction)>,
    /// Profiles where no unilateral deviation strictly helps, but some
    /// deviation is indifferent. Reported separately from the strict set.
    pub weak_nash: Vec<(SpeedAction, SpeedAction)>,
    /// Outcome when aircraft 1 commits first and aircraft 2 best-responds;
    /// follower ties are broken against the leader.
    pub stackelberg: (SpeedAction, SpeedAction),
    pub stackelberg_payoffs: (f64, f64),
}

/// Enumerates strict and weak pure Nash equilibria and the leader/follower
/// outcome with aircraft 1 leading.
pub fn enumerate_equilibria(game: &CostMatrix) -> EquilibriumAnalysis {
    let mut strict = Vec::new();
    let mut weak = Vec::new();
    for a1 in SpeedAction::ALL {
        for a2 in SpeedAction::ALL {
            let (u1, u2) = game.get(a1, a2);
            let mut strictly_stable = true;
            let mut stable = true;
            for alt in SpeedAction::ALL {
                if alt != a1 {
                    let (v1, _) = game.get(alt, a2);
                    if v1 >= u1 {
                        strictly_stable = false;
                    }
                    if v1 > u1 {
                        stable = false;
                    }
                }
                if alt != a2 {
                    let (_, v2) = game.get(a1, alt);
                    if v2 >= u2 {
                        strictly_stable = false;
                    }
                    if v2 > u2 {
                        stable = false;
                    }
                }
            }
            if strictly_stable {
                strict.push((a1, a2));
            } else if stable {
                weak.push((a1, a2));
            }
        }
    }

    // Leader/follower: for each leader action, the follower plays a best
    // response; among tied best responses the leader assumes the one worst
    // for itself, then leads with the action maximizing that guarantee.
    let mut best: Option<(SpeedAction, SpeedAction, f64, f64)> = None;
    for a1 in SpeedAction::ALL {
        let follower_best = SpeedAction::ALL
            .iter()
            .map(|&a2| game.get(a1, a2).1)
            .fold(f64::NEG_INFINITY, f64::max);
        let (a2, u1, u2) = SpeedAction::ALL
            .iter()
            .filter(|&&a2| game.get(a1, a2).1 == follower_best)
            .map(|&a2| {
                let (u1, u2) = game.get(a1, a2);
                (a2, u1, u2)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty action set");
        let better = match &best {
            Some((_, _, lead_u1, _)) => u1 > *lead_u1,
            None => true,
        };
        if better {
            best = Some((a1, a2, u1, u2));
        }
    }
    let (a1, a2, u1, u2) = best.expect("non-empty action set");

    EquilibriumAnalysis {
        strict_nash: strict,
        weak_nash: weak,
        stackelberg: (a1, a2),
        stackelberg_payoffs: (u1, u2),
    }
}
