//! The episode loop: releases, advisory rounds, kinematics and event
//! detection, fully determined by (scenario, modes, seed).

use super::events::EventTracker;
use super::{
    AdvisoryPolicy, DecisionContext, EngineConfig, EngineError, EpisodeLog, FlightOutcome,
    FlightRecord, Phase, SpeedSample, TerminalContext,
};
use crate::airspace::{generate_schedule, FlightPlan, Network, RouteGeometry, ScenarioConfig};
use crate::dcb::{solve_exact, DcbConfig, HeuristicDcb, SolveStatus};
use crate::tactical::{
    observe, rule_based_policy, Advisory, AgentView, DetectionMode, PolicyTable, RulePolicyParams,
    SafetyThresholds, WorldView,
};
use std::collections::BTreeMap;
use std::sync::Arc;

/// How departures are released.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategicMode {
    /// Release at the scheduled time, no strategic intervention.
    None,
    /// Solve the whole schedule up front and release at the optimized times.
    ExactPlan,
    /// Run the online gate: a flight departs at the first step its origin
    /// separation and all its arrival windows allow.
    Heuristic,
}

/// How airborne advisories are produced.
#[derive(Clone)]
pub enum TacticalMode {
    None,
    RuleBased(RulePolicyParams),
    Policy(Arc<PolicyTable>),
}

impl TacticalMode {
    pub fn label(&self) -> &'static str {
        match self {
            TacticalMode::None => "none",
            TacticalMode::RuleBased(_) => "rule",
            TacticalMode::Policy(_) => "policy",
        }
    }
}

struct RuleAdvisor {
    params: RulePolicyParams,
    thresholds: SafetyThresholds,
}

impl AdvisoryPolicy for RuleAdvisor {
    fn detection_mode(&self) -> DetectionMode {
        DetectionMode::Forward
    }

    fn advise(&mut self, ctx: &DecisionContext<'_>) -> Advisory {
        rule_based_policy(ctx.obs, &self.params, &self.thresholds)
    }
}

struct TableAdvisor {
    table: Arc<PolicyTable>,
    fallbacks: u64,
}

impl AdvisoryPolicy for TableAdvisor {
    fn detection_mode(&self) -> DetectionMode {
        self.table.detection_mode
    }

    fn advise(&mut self, ctx: &DecisionContext<'_>) -> Advisory {
        let (action, fallback) = self.table.act_greedy(ctx.obs);
        if fallback {
            self.fallbacks += 1;
        }
        Advisory::Speed(action)
    }

    fn fallbacks(&self) -> u64 {
        self.fallbacks
    }
}

/// Full per-aircraft simulation state.
#[derive(Debug, Clone)]
struct Aircraft {
    plan: FlightPlan,
    origin: String,
    /// (node id, arc of that node) for the whole route.
    node_arcs: Vec<(String, f64)>,
    /// (resource node id, transit time from origin), for the release gate.
    resources: Vec<(String, f64)>,
    route_len: f64,
    estimated_time: f64,
    max_flight_time: f64,
    phase: Phase,
    arc: f64,
    speed: f64,
    target_speed: f64,
    elapsed: f64,
    release_time: Option<f64>,
    actual_time: Option<f64>,
    alerts: u32,
    /// Closest separation to anyone since this aircraft's last decision.
    min_sep_since_decision: Option<f64>,
}

impl Aircraft {
    fn outcome(&self) -> FlightOutcome {
        match self.phase {
            Phase::Landed => FlightOutcome::Landed,
            Phase::Removed => FlightOutcome::Removed,
            Phase::Airborne => FlightOutcome::AirborneAtTruncation,
            Phase::PreDeparture => FlightOutcome::NotReleased,
        }
    }

    fn record(&self) -> FlightRecord {
        FlightRecord {
            flight_id: self.plan.flight_id.clone(),
            route_id: self.plan.route_id.clone(),
            scheduled_departure: self.plan.scheduled_departure,
            required_departure: self.plan.required_departure,
            release_time: self.release_time,
            estimated_time: self.estimated_time,
            actual_time: self.actual_time,
            alerts: self.alerts,
            ground_delay: self.plan.ground_delay(),
            airborne_delay: self
                .actual_time
                .map(|a| (a - self.estimated_time).max(0.0)),
            outcome: self.outcome(),
        }
    }
}

/// Runs one episode end to end: generates the demand for `seed`, applies the
/// strategic mode, then simulates with the tactical mode.
pub fn run_episode(
    scenario: &ScenarioConfig,
    strategic: StrategicMode,
    tactical: &TacticalMode,
    seed: u64,
    cfg: &EngineConfig,
) -> Result<EpisodeLog, EngineError> {
    let network = scenario.network()?;
    let mut plans = generate_schedule(&scenario.demand, &scenario.routes, seed)?;
    let use_gate = match strategic {
        StrategicMode::None => false,
        StrategicMode::Heuristic => true,
        StrategicMode::ExactPlan => {
            let dcb_cfg = DcbConfig::from_network(&network, &scenario.dcb)?;
            let solution = solve_exact(&plans, &network, &dcb_cfg)?;
            if solution.status == SolveStatus::Infeasible {
                return Err(EngineError::StrategicInfeasible {
                    binding: solution.binding_resource,
                });
            }
            solution.apply_to(&mut plans);
            false
        }
    };
    let mut rule_holder;
    let mut table_holder;
    let policy: Option<&mut dyn AdvisoryPolicy> = match tactical {
        TacticalMode::None => None,
        TacticalMode::RuleBased(params) => {
            rule_holder = RuleAdvisor {
                params: *params,
                thresholds: scenario.thresholds,
            };
            Some(&mut rule_holder)
        }
        TacticalMode::Policy(table) => {
            table_holder = TableAdvisor {
                table: Arc::clone(table),
                fallbacks: 0,
            };
            Some(&mut table_holder)
        }
    };
    run_plans_episode(&network, scenario, plans, use_gate, policy, cfg, seed)
}

/// Simulates a prepared set of plans. Required departures are honored as-is
/// unless `use_gate` turns on the online release gate. The caller owns the
/// advisory policy, so learners can record transitions.
pub fn run_plans_episode(
    network: &Network,
    scenario: &ScenarioConfig,
    plans: Vec<FlightPlan>,
    use_gate: bool,
    mut policy: Option<&mut dyn AdvisoryPolicy>,
    cfg: &EngineConfig,
    seed: u64,
) -> Result<EpisodeLog, EngineError> {
    cfg.validate()?;
    let thresholds = scenario.thresholds;
    let perf = network.performance;

    let mut aircraft = Vec::with_capacity(plans.len());
    for plan in plans {
        let route = network.route(&plan.route_id)?;
        let geom = network.geometry(&plan.route_id)?;
        let node_arcs: Vec<(String, f64)> = route
            .nodes
            .iter()
            .cloned()
            .zip(geom.cum_dist.iter().copied())
            .collect();
        let mut resources = Vec::new();
        for res in network.resources_on_route(route) {
            let arc = node_arcs
                .iter()
                .find(|(n, _)| n == &res.node_id)
                .map(|(_, a)| *a)
                .unwrap_or(0.0);
            resources.push((res.node_id.clone(), arc / perf.v_cruise));
        }
        let route_len = geom.length();
        let estimated_time = route_len / perf.v_cruise;
        let max_flight_time = scenario
            .reward
            .resolve(&thresholds, estimated_time)
            .max_flight_time;
        aircraft.push(Aircraft {
            origin: route.origin().to_string(),
            node_arcs,
            resources,
            route_len,
            estimated_time,
            max_flight_time,
            phase: Phase::PreDeparture,
            arc: 0.0,
            speed: 0.0,
            target_speed: 0.0,
            elapsed: 0.0,
            release_time: None,
            actual_time: None,
            alerts: 0,
            min_sep_since_decision: None,
            plan,
        });
    }
    // Deterministic processing order, independent of input order.
    aircraft.sort_by(|a, b| {
        a.plan
            .scheduled_departure
            .total_cmp(&b.plan.scheduled_departure)
            .then_with(|| a.plan.flight_id.cmp(&b.plan.flight_id))
    });

    // Per-origin FIFO queues for the online gate.
    let mut gate = if use_gate {
        let dcb_cfg = DcbConfig::from_network(network, &scenario.dcb)?;
        Some(HeuristicDcb::new(&dcb_cfg))
    } else {
        None
    };
    let mut origin_queues: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, a) in aircraft.iter().enumerate() {
        origin_queues.entry(a.origin.clone()).or_default().push(i);
    }
    for q in origin_queues.values_mut() {
        q.reverse();
    }

    let geometries: BTreeMap<String, &RouteGeometry> = network
        .routes
        .iter()
        .map(|r| (r.id.clone(), network.geometry(&r.id).unwrap()))
        .collect();

    let mut tracker = EventTracker::new(thresholds);
    let mut min_series: Vec<Option<f64>> = Vec::new();
    let mut speed_trace: Option<Vec<SpeedSample>> = cfg.record_speeds.then(Vec::new);
    let steps_per_decision = cfg.steps_per_decision();
    let dt = cfg.step_dt;
    let mut t = 0.0;
    let mut step: u64 = 0;
    let mut truncated = false;

    loop {
        // Releases at the current clock.
        match &mut gate {
            Some(gate) => {
                for q in origin_queues.values_mut() {
                    while let Some(&head) = q.last() {
                        let a = &aircraft[head];
                        if a.plan.scheduled_departure > t + 1e-9 {
                            break;
                        }
                        if gate.try_release(t, &a.origin, &a.resources) {
                            let a = &mut aircraft[head];
                            a.plan.required_departure = t;
                            release(a, t, perf.v_cruise);
                            q.pop();
                        } else {
                            break;
                        }
                    }
                }
            }
            None => {
                for a in aircraft.iter_mut() {
                    if a.phase == Phase::PreDeparture && a.plan.required_departure <= t + 1e-9 {
                        release(a, t, perf.v_cruise);
                    }
                }
            }
        }

        // Advisory round.
        if step % steps_per_decision == 0 {
            if let Some(policy) = policy.as_deref_mut() {
                // Timeouts first: an aircraft past its maximum flying time
                // is pulled out instead of advised.
                for a in aircraft.iter_mut() {
                    if a.phase == Phase::Airborne && a.elapsed > a.max_flight_time {
                        a.phase = Phase::Removed;
                        a.actual_time = Some(a.elapsed);
                        policy.on_terminal(&TerminalContext {
                            flight_id: &a.plan.flight_id,
                            elapsed: a.elapsed,
                            min_separation: a.min_sep_since_decision,
                            max_flight_time: a.max_flight_time,
                            timed_out: true,
                        });
                    }
                }
                let view = world_view(&aircraft, &geometries);
                let mode = policy.detection_mode();
                let mut advisories: Vec<(usize, Advisory)> = Vec::new();
                for (i, a) in aircraft.iter().enumerate() {
                    if a.phase != Phase::Airborne {
                        continue;
                    }
                    let obs = observe(&view, &a.plan.flight_id, mode, &thresholds)
                        .expect("airborne aircraft is in the view");
                    let advisory = policy.advise(&DecisionContext {
                        flight_id: &a.plan.flight_id,
                        obs: &obs,
                        elapsed: a.elapsed,
                        min_separation: a.min_sep_since_decision,
                        max_flight_time: a.max_flight_time,
                    });
                    advisories.push((i, advisory));
                }
                for (i, advisory) in advisories {
                    let a = &mut aircraft[i];
                    if advisory.is_alert() {
                        a.alerts += 1;
                    }
                    match advisory {
                        Advisory::Hover => a.target_speed = perf.v_min,
                        Advisory::Speed(action) => {
                            a.target_speed = (a.target_speed + action.sign() * perf.dv)
                                .clamp(perf.v_min, perf.v_max);
                        }
                    }
                    a.min_sep_since_decision = None;
                }
            } else {
                // No tactical layer: timeouts still apply.
                for a in aircraft.iter_mut() {
                    if a.phase == Phase::Airborne && a.elapsed > a.max_flight_time {
                        a.phase = Phase::Removed;
                        a.actual_time = Some(a.elapsed);
                    }
                }
            }
        }

        if aircraft
            .iter()
            .all(|a| matches!(a.phase, Phase::Landed | Phase::Removed))
        {
            break;
        }
        if t >= cfg.max_sim_time {
            truncated = true;
            break;
        }

        // Kinematics.
        for a in aircraft.iter_mut() {
            if a.phase != Phase::Airborne {
                continue;
            }
            let ramp = (a.target_speed - a.speed).clamp(-perf.accel * dt, perf.accel * dt);
            a.speed += ramp;
            let next_arc = a.arc + a.speed * dt;
            if next_arc >= a.route_len {
                // Fractional final step so the actual time is exact.
                let leftover = (a.route_len - a.arc) / a.speed;
                a.actual_time = Some(a.elapsed + leftover);
                a.arc = a.route_len;
                a.phase = Phase::Landed;
                if let Some(policy) = policy.as_deref_mut() {
                    policy.on_terminal(&TerminalContext {
                        flight_id: &a.plan.flight_id,
                        elapsed: a.elapsed + leftover,
                        min_separation: a.min_sep_since_decision,
                        max_flight_time: a.max_flight_time,
                        timed_out: false,
                    });
                }
            } else {
                a.arc = next_arc;
                a.elapsed += dt;
            }
        }
        t += dt;
        step += 1;

        // Pairwise separation, events and traces at the new state.
        let mut pairs: Vec<(String, String, f64)> = Vec::new();
        let mut step_min: Option<f64> = None;
        let airborne: Vec<usize> = (0..aircraft.len())
            .filter(|&i| aircraft[i].phase == Phase::Airborne)
            .collect();
        for (k, &i) in airborne.iter().enumerate() {
            for &j in &airborne[k + 1..] {
                let pi = position(&aircraft[i], &geometries);
                let pj = position(&aircraft[j], &geometries);
                let d = ((pi.0 - pj.0).powi(2) + (pi.1 - pj.1).powi(2)).sqrt();
                let (a, b) = ordered_ids(&aircraft[i].plan.flight_id, &aircraft[j].plan.flight_id);
                pairs.push((a, b, d));
                step_min = Some(step_min.map_or(d, |m: f64| m.min(d)));
                for idx in [i, j] {
                    let slot = &mut aircraft[idx].min_sep_since_decision;
                    *slot = Some(slot.map_or(d, |m| m.min(d)));
                }
            }
        }
        tracker.step(t, &pairs);
        min_series.push(step_min);
        if let Some(trace) = &mut speed_trace {
            for &i in &airborne {
                trace.push(SpeedSample {
                    t,
                    flight_id: aircraft[i].plan.flight_id.clone(),
                    speed: aircraft[i].speed,
                });
            }
        }
    }

    // Truncation: whoever is still airborne keeps the time flown so far.
    for a in aircraft.iter_mut() {
        if a.phase == Phase::Airborne {
            a.actual_time = Some(a.elapsed);
            if let Some(policy) = policy.as_deref_mut() {
                policy.on_terminal(&TerminalContext {
                    flight_id: &a.plan.flight_id,
                    elapsed: a.elapsed,
                    min_separation: a.min_sep_since_decision,
                    max_flight_time: a.max_flight_time,
                    timed_out: false,
                });
            }
        }
    }

    let events = tracker.finish(t);
    let flight_hours = aircraft
        .iter()
        .filter_map(|a| a.actual_time)
        .sum::<f64>()
        / 3600.0;
    Ok(EpisodeLog {
        seed,
        flights: aircraft.iter().map(Aircraft::record).collect(),
        events,
        min_separation_series: min_series,
        flight_hours,
        truncated,
        policy_fallbacks: policy.as_deref().map(|p| p.fallbacks()).unwrap_or(0),
        speed_trace,
    })
}

fn release(a: &mut Aircraft, t: f64, v_cruise: f64) {
    a.phase = Phase::Airborne;
    a.speed = v_cruise;
    a.target_speed = v_cruise;
    a.arc = 0.0;
    a.elapsed = 0.0;
    a.release_time = Some(t);
}

fn position(a: &Aircraft, geometries: &BTreeMap<String, &RouteGeometry>) -> (f64, f64) {
    geometries[&a.plan.route_id].position_at(a.arc)
}

fn ordered_ids(x: &str, y: &str) -> (String, String) {
    if x <= y {
        (x.to_string(), y.to_string())
    } else {
        (y.to_string(), x.to_string())
    }
}

fn world_view(aircraft: &[Aircraft], geometries: &BTreeMap<String, &RouteGeometry>) -> WorldView {
    let agents = aircraft
        .iter()
        .filter(|a| a.phase == Phase::Airborne)
        .map(|a| {
            let geom = geometries[&a.plan.route_id];
            let fixes_ahead = a
                .node_arcs
                .iter()
                .filter(|(_, arc)| *arc > a.arc)
                .map(|(n, arc)| (n.clone(), arc - a.arc))
                .collect();
            AgentView {
                flight_id: a.plan.flight_id.clone(),
                position: geom.position_at(a.arc),
                speed: a.speed,
                heading: geom.heading_at(a.arc),
                d_goal: a.route_len - a.arc,
                fixes_ahead,
            }
        })
        .collect();
    WorldView { agents }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::EventKind;

    fn quiet_scenario() -> ScenarioConfig {
        let mut scenario = ScenarioConfig::bundled_default();
        scenario.demand.flights_per_route = 1;
        scenario.demand.interval_range = (30.0, 30.0);
        scenario.demand.mean_interval = 30.0;
        scenario
    }

    #[test]
    fn lone_flight_arrives_exactly_on_estimate() {
        let mut scenario = quiet_scenario();
        scenario.routes.truncate(1); // only R1
        let log = run_episode(
            &scenario,
            StrategicMode::None,
            &TacticalMode::None,
            7,
            &EngineConfig::default(),
        )
        .unwrap();
        assert_eq!(log.flights.len(), 1);
        let f = &log.flights[0];
        assert_eq!(f.outcome, FlightOutcome::Landed);
        assert_eq!(f.actual_time, Some(f.estimated_time));
        assert_eq!(f.airborne_delay, Some(0.0));
        assert_eq!(f.alerts, 0);
        assert!(log.events.is_empty());
        assert!(!log.truncated);
    }

    #[test]
    fn same_inputs_same_log() {
        let scenario = ScenarioConfig::bundled_default();
        let cfg = EngineConfig::default();
        let a = run_episode(&scenario, StrategicMode::None, &TacticalMode::None, 42, &cfg).unwrap();
        let b = run_episode(&scenario, StrategicMode::None, &TacticalMode::None, 42, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unmitigated_high_demand_loses_separation() {
        let scenario = ScenarioConfig::bundled_default();
        let log = run_episode(
            &scenario,
            StrategicMode::None,
            &TacticalMode::None,
            3,
            &EngineConfig::default(),
        )
        .unwrap();
        assert!(log.count_events(EventKind::LoWC) > 0);
    }

    #[test]
    fn capacity_one_plan_with_no_tactics_has_zero_nmac() {
        let scenario = ScenarioConfig::bundled_default().with_capacity(1);
        let log = run_episode(
            &scenario,
            StrategicMode::ExactPlan,
            &TacticalMode::None,
            3,
            &EngineConfig::default(),
        )
        .unwrap();
        assert_eq!(log.count_events(EventKind::Nmac), 0);
    }

    #[test]
    fn flights_are_conserved() {
        let scenario = ScenarioConfig::bundled_default();
        let log = run_episode(
            &scenario,
            StrategicMode::Heuristic,
            &TacticalMode::None,
            11,
            &EngineConfig::default(),
        )
        .unwrap();
        let released = log.flights.iter().filter(|f| f.release_time.is_some()).count();
        let finished = log
            .flights
            .iter()
            .filter(|f| matches!(f.outcome, FlightOutcome::Landed | FlightOutcome::Removed))
            .count();
        let airborne = log
            .flights
            .iter()
            .filter(|f| f.outcome == FlightOutcome::AirborneAtTruncation)
            .count();
        assert_eq!(released, finished + airborne);
        assert_eq!(released, log.flights.len());
    }

    #[test]
    fn ground_delay_matches_required_minus_scheduled() {
        let scenario = ScenarioConfig::bundled_default().with_capacity(1);
        let log = run_episode(
            &scenario,
            StrategicMode::ExactPlan,
            &TacticalMode::None,
            5,
            &EngineConfig::default(),
        )
        .unwrap();
        for f in &log.flights {
            assert!(
                (f.ground_delay - (f.required_departure - f.scheduled_departure).max(0.0)).abs()
                    < 1e-9
            );
        }
    }

    #[test]
    fn speed_ramps_toward_target() {
        // target 55, current 50, accel 2, dt 1 -> speed 52 after one step.
        let perf = crate::airspace::AircraftPerformance::default();
        let mut speed: f64 = 50.0;
        let target = 55.0;
        let ramp = (target - speed).clamp(-perf.accel * 1.0, perf.accel * 1.0);
        speed += ramp;
        assert_eq!(speed, 52.0);
    }

    #[test]
    fn rule_based_mode_issues_alerts() {
        let scenario = ScenarioConfig::bundled_default();
        let params = RulePolicyParams::for_thresholds(&scenario.thresholds);
        let log = run_episode(
            &scenario,
            StrategicMode::None,
            &TacticalMode::RuleBased(params),
            3,
            &EngineConfig::default(),
        )
        .unwrap();
        assert!(log.total_alerts() > 0);
    }

    #[test]
    fn step_refinement_is_stable() {
        // Halving step_dt moves any actual flight time by less than one
        // decision interval.
        let scenario = quiet_scenario();
        let params = RulePolicyParams::for_thresholds(&scenario.thresholds);
        let coarse = EngineConfig {
            step_dt: 1.0,
            ..EngineConfig::default()
        };
        let fine = EngineConfig {
            step_dt: 0.5,
            ..EngineConfig::default()
        };
        let a = run_episode(
            &scenario,
            StrategicMode::None,
            &TacticalMode::RuleBased(params),
            9,
            &coarse,
        )
        .unwrap();
        let b = run_episode(
            &scenario,
            StrategicMode::None,
            &TacticalMode::RuleBased(params),
            9,
            &fine,
        )
        .unwrap();
        for (fa, fb) in a.flights.iter().zip(&b.flights) {
            let (Some(ta), Some(tb)) = (fa.actual_time, fb.actual_time) else {
                continue;
            };
            assert!(
                (ta - tb).abs() < coarse.decision_dt,
                "{}: {} vs {}",
                fa.flight_id,
                ta,
                tb
            );
        }
    }
}
