//! Exhaustive verification oracle for small strategic instances.
//!
//! Enumerates, flight by flight in scheduled order, every distinct window
//! assignment a flight can take (each corresponds to one segment between
//! consecutive window edges on the departure axis), derives the minimal
//! feasible departure for the segment, and walks the whole tree. The only
//! shortcut is the trivial one: a partial assignment whose accumulated
//! delay already matches the best complete assignment cannot improve, since
//! delays are non-negative and additive. No relaxations, no look-ahead.
//!
//! Deliberately kept separate from the production solver so the two can
//! disagree in tests.

use super::{
    window_index, DcbConfig, DcbError, DcbSolution, Instance, SolveStatus, WindowAssignment,
};
use crate::airspace::{FlightPlan, Network};
use std::collections::BTreeMap;

const MAX_FLIGHTS: usize = 8;
const MAX_RESOURCES: usize = 2;
const MAX_WINDOWS: i64 = 64;

/// Global optimum by exhaustive enumeration. Refuses instances beyond a few
/// flights/resources; meant for tests only.
pub fn brute_force_oracle(
    plans: &[FlightPlan],
    network: &Network,
    cfg: &DcbConfig,
) -> Result<DcbSolution, DcbError> {
    let instance = Instance::prepare(plans, network, cfg)?;
    if instance.flights.len() > MAX_FLIGHTS {
        return Err(DcbError::OracleRefused(format!(
            "{} flights exceeds the {MAX_FLIGHTS}-flight bound",
            instance.flights.len()
        )));
    }
    let distinct: std::collections::BTreeSet<&str> = instance
        .flights
        .iter()
        .flat_map(|f| f.resources.iter().map(|(r, _)| r.as_str()))
        .collect();
    if distinct.len() > MAX_RESOURCES {
        return Err(DcbError::OracleRefused(format!(
            "{} resources exceeds the {MAX_RESOURCES}-resource bound",
            distinct.len()
        )));
    }
    let n_windows = (instance.horizon / cfg.window_length).ceil() as i64;
    if n_windows > MAX_WINDOWS {
        return Err(DcbError::OracleRefused(format!(
            "horizon spans {n_windows} windows, more than the {MAX_WINDOWS}-window bound"
        )));
    }

    let mut enumeration = Enumeration {
        instance: &instance,
        cfg,
        n_windows,
        departures: vec![0.0; instance.flights.len()],
        occupancy: BTreeMap::new(),
        best: None,
        best_delay: f64::INFINITY,
    };
    enumeration.visit(0, 0.0);

    Ok(match enumeration.best {
        Some(departures) => {
            let mut required = BTreeMap::new();
            let mut assignment = WindowAssignment::default();
            for (i, f) in instance.flights.iter().enumerate() {
                required.insert(f.flight_id.clone(), departures[i]);
                for (res, transit) in &f.resources {
                    assignment.entries.insert(
                        (res.clone(), f.flight_id.clone()),
                        window_index(departures[i] + transit, cfg.window_length),
                    );
                }
            }
            DcbSolution {
                total_delay: instance.total_delay(&required),
                required_departures: required,
                assignment,
                status: SolveStatus::Optimal,
                binding_resource: None,
            }
        }
        None => DcbSolution::infeasible(None),
    })
}

struct Enumeration<'a> {
    instance: &'a Instance,
    cfg: &'a DcbConfig,
    n_windows: i64,
    departures: Vec<f64>,
    occupancy: BTreeMap<(String, i64), u32>,
    best: Option<Vec<f64>>,
    best_delay: f64,
}

impl Enumeration<'_> {
    fn visit(&mut self, k: usize, delay: f64) {
        if delay >= self.best_delay {
            return;
        }
        if k == self.instance.flights.len() {
            self.best_delay = delay;
            self.best = Some(self.departures.clone());
            return;
        }
        let flight = &self.instance.flights[k];
        let mut floor = flight.scheduled;
        if let Some(p) = self.instance.predecessor[k] {
            floor = floor.max(self.departures[p] + self.cfg.departure_separation);
        }

        // Segment starts: the floor itself plus every window edge (shifted
        // back by the transit time) above it. Each start is the minimal
        // departure realizing one distinct window assignment.
        let mut starts = vec![floor];
        for (_, transit) in &flight.resources {
            let mut n = window_index(floor + transit, self.cfg.window_length) + 1;
            while n < self.n_windows {
                let edge = self.cfg.window_start(n) - transit;
                if edge > floor {
                    starts.push(edge);
                }
                n += 1;
            }
        }
        starts.sort_by(f64::total_cmp);
        starts.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

        for start in starts {
            let mut windows: Vec<(String, i64)> = Vec::with_capacity(flight.resources.len());
            let mut admissible = true;
            for (res, transit) in &flight.resources {
                let w = window_index(start + transit, self.cfg.window_length);
                if w >= self.n_windows {
                    admissible = false;
                    break;
                }
                let used = self
                    .occupancy
                    .get(&(res.clone(), w))
                    .copied()
                    .unwrap_or(0);
                let cap = self.cfg.capacities.get(res).copied().unwrap_or(u32::MAX);
                if used >= cap {
                    admissible = false;
                    break;
                }
                windows.push((res.clone(), w));
            }
            if !admissible {
                continue;
            }
            for key in &windows {
                *self.occupancy.entry(key.clone()).or_insert(0) += 1;
            }
            self.departures[k] = start;
            self.visit(k + 1, delay + (start - flight.scheduled));
            for key in &windows {
                *self.occupancy.get_mut(key).unwrap() -= 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airspace::ScenarioConfig;
    use crate::dcb::solve_exact;

    #[test]
    fn oracle_confirms_the_worked_instance() {
        let scenario = ScenarioConfig::bundled_single_resource();
        let network = scenario.network().unwrap();
        let cfg = DcbConfig::from_network(&network, &scenario.dcb).unwrap();
        let plans = vec![
            FlightPlan::new("F1", "RW", 0.0),
            FlightPlan::new("F2", "RW", 10.0),
            FlightPlan::new("F3", "RW", 20.0),
        ];
        let oracle = brute_force_oracle(&plans, &network, &cfg).unwrap();
        assert_eq!(oracle.total_delay, 370.0);
        let exact = solve_exact(&plans, &network, &cfg).unwrap();
        assert_eq!(exact.total_delay, oracle.total_delay);
    }

    #[test]
    fn oracle_flags_infeasible_toy() {
        let scenario = ScenarioConfig::bundled_single_resource();
        let network = scenario.network().unwrap();
        let mut cfg = DcbConfig::from_network(&network, &scenario.dcb).unwrap();
        cfg.horizon = Some(200.0); // one window for five flights at C=1
        let plans: Vec<FlightPlan> = (0..5)
            .map(|i| FlightPlan::new(format!("F{i}"), "RW", i as f64))
            .collect();
        let sol = brute_force_oracle(&plans, &network, &cfg).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn oracle_refuses_large_instances() {
        let scenario = ScenarioConfig::bundled_single_resource();
        let network = scenario.network().unwrap();
        let cfg = DcbConfig::from_network(&network, &scenario.dcb).unwrap();
        let plans: Vec<FlightPlan> = (0..9)
            .map(|i| FlightPlan::new(format!("F{i}"), "RW", i as f64))
            .collect();
        assert!(matches!(
            brute_force_oracle(&plans, &network, &cfg),
            Err(DcbError::OracleRefused(_))
        ));
    }
}
