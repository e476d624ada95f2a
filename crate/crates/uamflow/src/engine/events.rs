//! Separation event bookkeeping: maximal intervals during which a pair of
//! airborne aircraft is below each threshold. Nested levels are tracked
//! independently, so an NMAC always sits inside an enclosing LoWC.

use crate::tactical::SafetyThresholds;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    LoWC,
    Nmac,
    Mac,
}

impl EventKind {
    pub const ALL: [EventKind; 3] = [EventKind::LoWC, EventKind::Nmac, EventKind::Mac];

    pub fn threshold(self, t: &SafetyThresholds) -> f64 {
        match self {
            EventKind::LoWC => t.d_lowc,
            EventKind::Nmac => t.d_nmac,
            EventKind::Mac => t.d_mac,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EventKind::LoWC => "LoWC",
            EventKind::Nmac => "NMAC",
            EventKind::Mac => "MAC",
        }
    }
}

/// One maximal below-threshold interval for one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationEvent {
    pub kind: EventKind,
    pub flight_a: String,
    pub flight_b: String,
    pub t_start: f64,
    pub t_end: f64,
    pub min_distance: f64,
}

#[derive(Debug, Clone)]
struct OpenEvent {
    t_start: f64,
    min_distance: f64,
}

/// Feed it every airborne pair's distance each step; it opens an event when
/// a distance first drops below a threshold, keeps the running minimum, and
/// closes the event when the distance comes back up (or the pair stops
/// being observable).
#[derive(Debug, Clone)]
pub struct EventTracker {
    thresholds: SafetyThresholds,
    open: BTreeMap<(String, String), [Option<OpenEvent>; 3]>,
    closed: Vec<SeparationEvent>,
}

impl EventTracker {
    pub fn new(thresholds: SafetyThresholds) -> Self {
        Self {
            thresholds,
            open: BTreeMap::new(),
            closed: Vec::new(),
        }
    }

    /// Processes one step's pairwise distances, all stamped with time `t`.
    /// Pairs must be given with `flight_a < flight_b`; any open pair absent
    /// from `pairs` is closed at `t`.
    pub fn step(&mut self, t: f64, pairs: &[(String, String, f64)]) {
        for (a, b, d) in pairs {
            let key = (a.clone(), b.clone());
            let slots = self.open.entry(key).or_insert([None, None, None]);
            for (i, kind) in EventKind::ALL.into_iter().enumerate() {
                let threshold = kind.threshold(&self.thresholds);
                match (&mut slots[i], *d < threshold) {
                    (slot @ None, true) => {
                        *slot = Some(OpenEvent {
                            t_start: t,
                            min_distance: *d,
                        });
                    }
                    (Some(ev), true) => {
                        ev.min_distance = ev.min_distance.min(*d);
                    }
                    (slot @ Some(_), false) => {
                        let ev = slot.take().unwrap();
                        self.closed.push(SeparationEvent {
                            kind,
                            flight_a: a.clone(),
                            flight_b: b.clone(),
                            t_start: ev.t_start,
                            t_end: t,
                            min_distance: ev.min_distance,
                        });
                    }
                    (None, false) => {}
                }
            }
        }
        // Pairs no longer observed (someone landed or was removed).
        let current: std::collections::BTreeSet<(String, String)> = pairs
            .iter()
            .map(|(a, b, _)| (a.clone(), b.clone()))
            .collect();
        let stale: Vec<(String, String)> = self
            .open
            .iter()
            .filter(|(k, slots)| !current.contains(*k) && slots.iter().any(Option::is_some))
            .map(|(k, _)| k.clone())
            .collect();
        for key in stale {
            self.close_pair(&key, t);
        }
        self.open.retain(|_, slots| slots.iter().any(Option::is_some));
    }

    fn close_pair(&mut self, key: &(String, String), t: f64) {
        if let Some(slots) = self.open.get_mut(key) {
            for (i, kind) in EventKind::ALL.into_iter().enumerate() {
                if let Some(ev) = slots[i].take() {
                    self.closed.push(SeparationEvent {
                        kind,
                        flight_a: key.0.clone(),
                        flight_b: key.1.clone(),
                        t_start: ev.t_start,
                        t_end: t,
                        min_distance: ev.min_distance,
                    });
                }
            }
        }
    }

    /// Closes everything still open and returns the chronologically sorted
    /// event list.
    pub fn finish(mut self, t: f64) -> Vec<SeparationEvent> {
        let keys: Vec<(String, String)> = self.open.keys().cloned().collect();
        for key in keys {
            self.close_pair(&key, t);
        }
        self.closed.sort_by(|x, y| {
            x.t_start
                .total_cmp(&y.t_start)
                .then_with(|| x.flight_a.cmp(&y.flight_a))
                .then_with(|| x.flight_b.cmp(&y.flight_b))
                .then(x.kind.label().cmp(y.kind.label()))
        });
        self.closed
    }
}
