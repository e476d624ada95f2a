//! Shared-policy temporal-difference training over engine rollouts.
//!
//! Every aircraft in every episode reads and (between batches) writes the
//! same table. Rollouts inside one update period all see the frozen table
//! from the previous period; the accumulated transitions are then applied
//! by a single writer in episode order, so results are identical however
//! many workers roll episodes out.

use super::policy::LearningParams;
use super::{
    reward, Advisory, DetectionMode, Discretization, PolicyTable, RewardParams,
    SafetyThresholds, SpeedAction, Transition,
};
use crate::airspace::{FlightPlan, ScenarioConfig};
use crate::engine::{
    run_plans_episode, AdvisoryPolicy, DecisionContext, EngineConfig, EngineError,
    TerminalContext,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("scenario pool is empty")]
    EmptyPool,
    #[error("action values diverged (non-finite) by episode {episode}")]
    Diverged { episode: usize },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub episodes: usize,
    pub learning: LearningParams,
    pub engine: EngineConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            episodes: 600,
            learning: LearningParams::default(),
            engine: Self::training_engine(),
        }
    }
}

impl TrainConfig {
    /// Rollout engine defaults for training: a 5 s decision interval keeps
    /// transitions coarse enough that actions visibly move the discretized
    /// state. The learned map from state to action is cadence-free, so
    /// policies trained here can still be evaluated at a finer advisory
    /// cadence.
    pub fn training_engine() -> EngineConfig {
        EngineConfig {
            decision_dt: 5.0,
            ..EngineConfig::default()
        }
    }

    /// A budget of `episodes` with the exploration decay scaled to cover
    /// the first two thirds of it.
    pub fn for_episodes(episodes: usize) -> Self {
        Self {
            episodes,
            learning: LearningParams {
                epsilon_decay_episodes: episodes * 2 / 3,
                ..Default::default()
            },
            engine: Self::training_engine(),
        }
    }
}

/// Reward totals of one training episode, split into the three penalty
/// channels and summed over all agents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeReward {
    pub episode: usize,
    pub total: f64,
    pub safety: f64,
    pub time: f64,
    pub action: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub policy: PolicyTable,
    pub curve: Vec<EpisodeReward>,
}

/// One recorded agent step, applied to the table after the batch.
struct StepRecord {
    state: u32,
    action: SpeedAction,
    reward: f64,
    next: Option<u32>,
}

struct LearningAdvisor<'a> {
    table: &'a PolicyTable,
    mode: DetectionMode,
    epsilon: f64,
    rng: ChaCha8Rng,
    thresholds: SafetyThresholds,
    base_params: RewardParams,
    pending: BTreeMap<String, (u32, SpeedAction)>,
    steps: Vec<StepRecord>,
    safety_total: f64,
    time_total: f64,
    action_total: f64,
}

impl LearningAdvisor<'_> {
    fn close_transition(
        &mut self,
        flight_id: &str,
        min_separation: Option<f64>,
        elapsed: f64,
        max_flight_time: f64,
        next: Option<u32>,
    ) {
        let Some((state, action)) = self.pending.remove(flight_id) else {
            return;
        };
        let params = RewardParams {
            max_flight_time,
            ..self.base_params
        };
        let r = reward(
            &Transition {
                min_separation,
                elapsed,
                action,
            },
            &params,
            &self.thresholds,
        )
        .expect("engine separations are non-negative");
        self.safety_total += r.safety;
        self.time_total += r.time;
        self.action_total += r.action;
        self.steps.push(StepRecord {
            state,
            action,
            reward: r.total,
            next,
        });
    }
}

impl AdvisoryPolicy for LearningAdvisor<'_> {
    fn detection_mode(&self) -> DetectionMode {
        self.mode
    }

    fn advise(&mut self, ctx: &DecisionContext<'_>) -> Advisory {
        let key = self.table.discretization.state_key(ctx.obs);
        self.close_transition(
            ctx.flight_id,
            ctx.min_separation,
            ctx.elapsed,
            ctx.max_flight_time,
            Some(key),
        );
        let (action, _) = self.table.act_eps_greedy(ctx.obs, self.epsilon, &mut self.rng);
        self.pending
            .insert(ctx.flight_id.to_string(), (key, action));
        Advisory::Speed(action)
    }

    fn on_terminal(&mut self, ctx: &TerminalContext<'_>) {
        self.close_transition(
            ctx.flight_id,
            ctx.min_separation,
            ctx.elapsed,
            ctx.max_flight_time,
            None,
        );
    }
}

fn episode_seed(seed: u64, episode: usize) -> u64 {
    (episode as u64)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(seed)
}

/// Trains the shared table.
///
/// Each episode draws one flight table from `pool` (seeded), rolls it out
/// in the engine with epsilon-greedy advisories, and records every agent
/// transition; the table is updated after each update period. Returns the
/// policy plus the per-episode reward curve. Deterministic in `seed`
/// regardless of `workers`.
pub fn train_policy(
    pool: &[Vec<FlightPlan>],
    mode: DetectionMode,
    scenario: &ScenarioConfig,
    cfg: &TrainConfig,
    seed: u64,
    workers: Option<usize>,
) -> Result<TrainOutcome, TrainError> {
    if pool.is_empty() {
        return Err(TrainError::EmptyPool);
    }
    let network = scenario.network().map_err(EngineError::from)?;
    let discretization =
        Discretization::for_network(&network, scenario.thresholds.observation_range);
    let mut table = PolicyTable::new(mode, discretization, cfg.learning);
    // The per-step time penalty accrues every simulation step, and one
    // learner transition spans a whole decision interval.
    let mut base_params = scenario.reward.resolve(&scenario.thresholds, 1.0);
    base_params.eta *= cfg.engine.steps_per_decision() as f64;
    let mut curve = Vec::with_capacity(cfg.episodes);

    let run_batches = |table: &mut PolicyTable,
                       curve: &mut Vec<EpisodeReward>|
     -> Result<(), TrainError> {
        let mut episode = 0;
        while episode < cfg.episodes {
            let batch_end = (episode + cfg.learning.update_period.max(1)).min(cfg.episodes);
            let frozen: &PolicyTable = table;
            let rollouts: Result<Vec<_>, TrainError> = (episode..batch_end)
                .into_par_iter()
                .map(|ep| {
                    let mut rng = ChaCha8Rng::seed_from_u64(episode_seed(seed, ep));
                    let pick = rng.random_range(0..pool.len());
                    let mut advisor = LearningAdvisor {
                        table: frozen,
                        mode,
                        epsilon: cfg.learning.epsilon_at(ep),
                        rng,
                        thresholds: scenario.thresholds,
                        base_params,
                        pending: BTreeMap::new(),
                        steps: Vec::new(),
                        safety_total: 0.0,
                        time_total: 0.0,
                        action_total: 0.0,
                    };
                    run_plans_episode(
                        &network,
                        scenario,
                        pool[pick].clone(),
                        false,
                        Some(&mut advisor),
                        &cfg.engine,
                        episode_seed(seed, ep),
                    )?;
                    Ok((
                        ep,
                        advisor.steps,
                        EpisodeReward {
                            episode: ep,
                            total: advisor.safety_total
                                + advisor.time_total
                                + advisor.action_total,
                            safety: advisor.safety_total,
                            time: advisor.time_total,
                            action: advisor.action_total,
                        },
                    ))
                })
                .collect();
            // Single writer: apply the batch in episode order.
            for (_, steps, entry) in rollouts? {
                for step in steps {
                    let bootstrap = step.next.map(|n| table.max_q(n)).unwrap_or(0.0);
                    let target = step.reward + cfg.learning.discount * bootstrap;
                    table.update(step.state, step.action, target, cfg.learning.learning_rate);
                }
                curve.push(entry);
            }
            if !table.all_values_finite() {
                return Err(TrainError::Diverged { episode: batch_end });
            }
            episode = batch_end;
        }
        Ok(())
    };

    match workers {
        Some(n) if n > 0 => {
            let pool_threads = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| EngineError::InvalidConfig(format!("worker pool: {e}")))?;
            pool_threads.install(|| run_batches(&mut table, &mut curve))?;
        }
        _ => run_batches(&mut table, &mut curve)?,
    }

    Ok(TrainOutcome {
        policy: table,
        curve,
    })
}

/// Builds a training pool the way operations would: `tables` random
/// schedules, each preconditioned by the exact strategic solve.
pub fn build_preconditioned_pool(
    scenario: &ScenarioConfig,
    tables: usize,
    seed: u64,
) -> Result<Vec<Vec<FlightPlan>>, EngineError> {
    use crate::airspace::generate_schedule;
    use crate::dcb::{solve_exact, DcbConfig, SolveStatus};
    let network = scenario.network()?;
    let dcb_cfg = DcbConfig::from_network(&network, &scenario.dcb)?;
    let mut pool = Vec::with_capacity(tables);
    for i in 0..tables {
        let mut plans = generate_schedule(&scenario.demand, &scenario.routes, seed + i as u64)?;
        let solution = solve_exact(&plans, &network, &dcb_cfg)?;
        if solution.status == SolveStatus::Infeasible {
            return Err(EngineError::StrategicInfeasible {
                binding: solution.binding_resource,
            });
        }
        solution.apply_to(&mut plans);
        pool.push(plans);
    }
    Ok(pool)
}

/// Builds an unconditioned pool: raw schedules, required = scheduled.
pub fn build_raw_pool(
    scenario: &ScenarioConfig,
    tables: usize,
    seed: u64,
) -> Result<Vec<Vec<FlightPlan>>, EngineError> {
    use crate::airspace::generate_schedule;
    let mut pool = Vec::with_capacity(tables);
    for i in 0..tables {
        pool.push(generate_schedule(
            &scenario.demand,
            &scenario.routes,
            seed + i as u64,
        )?);
    }
    Ok(pool)
}
