//! Independent recheck of a strategic solution: recomputes every arrival
//! time and window count from scratch and reports each constraint breach.
//! Reporting only; nothing is repaired.

use super::{DcbConfig, DcbError, DcbSolution, Instance};
use crate::airspace::{FlightPlan, Network};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolutionViolation {
    /// Window occupancy above capacity.
    Capacity {
        resource: String,
        window: i64,
        count: u32,
        capacity: u32,
    },
    /// Same-origin departures closer than the required separation.
    Separation {
        origin: String,
        leader: String,
        follower: String,
        gap: f64,
        required: f64,
    },
    /// Required departure earlier than the schedule.
    NonAnticipation {
        flight: String,
        scheduled: f64,
        required: f64,
    },
    /// The solution's stored window disagrees with the recomputed arrival.
    AssignmentMismatch {
        resource: String,
        flight: String,
        stored: Option<i64>,
        recomputed: i64,
    },
    /// A flight in the plan set has no required departure in the solution.
    MissingFlight { flight: String },
}

impl fmt::Display for SolutionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Capacity {
                resource,
                window,
                count,
                capacity,
            } => write!(
                f,
                "resource {resource} window {window}: {count} arrivals exceed capacity {capacity}"
            ),
            Self::Separation {
                origin,
                leader,
                follower,
                gap,
                required,
            } => write!(
                f,
                "origin {origin}: {follower} departs {gap:.1}s after {leader}, need {required:.1}s"
            ),
            Self::NonAnticipation {
                flight,
                scheduled,
                required,
            } => write!(
                f,
                "{flight}: required departure {required:.1}s precedes schedule {scheduled:.1}s"
            ),
            Self::AssignmentMismatch {
                resource,
                flight,
                stored,
                recomputed,
            } => write!(
                f,
                "{flight} at {resource}: stored window {stored:?} but arrival falls in {recomputed}"
            ),
            Self::MissingFlight { flight } => {
                write!(f, "{flight}: no required departure in solution")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SolutionReport {
    pub violations: Vec<SolutionViolation>,
}

impl SolutionReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for SolutionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "solution satisfies all constraints");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Rechecks capacity, separation and non-anticipation for any solver's
/// output against the original plans.
pub fn validate_solution(
    sol: &DcbSolution,
    plans: &[FlightPlan],
    network: &Network,
    cfg: &DcbConfig,
) -> Result<SolutionReport, DcbError> {
    let instance = Instance::prepare(plans, network, cfg)?;
    let mut report = SolutionReport::default();
    let eps = 1e-9;

    let mut required: Vec<Option<f64>> = Vec::with_capacity(instance.flights.len());
    for f in &instance.flights {
        match sol.required_departures.get(&f.flight_id) {
            Some(&r) => required.push(Some(r)),
            None => {
                report.violations.push(SolutionViolation::MissingFlight {
                    flight: f.flight_id.clone(),
                });
                required.push(None);
            }
        }
    }

    // Non-anticipation.
    for (f, r) in instance.flights.iter().zip(&required) {
        if let Some(r) = r {
            if *r < f.scheduled - eps {
                report.violations.push(SolutionViolation::NonAnticipation {
                    flight: f.flight_id.clone(),
                    scheduled: f.scheduled,
                    required: *r,
                });
            }
        }
    }

    // Separation per origin, in required-departure order.
    let mut by_origin: BTreeMap<&str, Vec<(f64, &str)>> = BTreeMap::new();
    for (f, r) in instance.flights.iter().zip(&required) {
        if let Some(r) = r {
            by_origin
                .entry(f.origin.as_str())
                .or_default()
                .push((*r, f.flight_id.as_str()));
        }
    }
    for (origin, mut deps) in by_origin {
        deps.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        for pair in deps.windows(2) {
            let gap = pair[1].0 - pair[0].0;
            if gap < cfg.departure_separation - eps {
                report.violations.push(SolutionViolation::Separation {
                    origin: origin.to_string(),
                    leader: pair[0].1.to_string(),
                    follower: pair[1].1.to_string(),
                    gap,
                    required: cfg.departure_separation,
                });
            }
        }
    }

    // Capacity from recomputed arrivals, plus assignment consistency.
    let mut occupancy: BTreeMap<(String, i64), u32> = BTreeMap::new();
    for (f, r) in instance.flights.iter().zip(&required) {
        let Some(r) = r else { continue };
        for (res, transit) in &f.resources {
            let w = cfg.window_index(r + transit);
            *occupancy.entry((res.clone(), w)).or_insert(0) += 1;
            let stored = sol.assignment.window_of(res, &f.flight_id);
            if stored != Some(w) {
                report
                    .violations
                    .push(SolutionViolation::AssignmentMismatch {
                        resource: res.clone(),
                        flight: f.flight_id.clone(),
                        stored,
                        recomputed: w,
                    });
            }
        }
    }
    for ((res, w), count) in occupancy {
        let capacity = cfg.capacity_of(&res)?;
        if count > capacity {
            report.violations.push(SolutionViolation::Capacity {
                resource: res,
                window: w,
                count,
                capacity,
            });
        }
    }

    Ok(report)
}
