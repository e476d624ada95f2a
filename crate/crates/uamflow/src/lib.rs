//! Fast-time simulation and optimization toolkit for urban air mobility
//! conflict management.
//!
//! Traffic through a capacity-constrained route network is managed in two
//! layers. Before departure, demand-capacity balancing assigns ground
//! delays so that no more operations arrive at a merge or crossing fix per
//! time window than the fix can take — either by an exact minimum-delay
//! optimizer or by an online release gate. Airborne, aircraft receive speed
//! advisories at a fixed cadence from either a rule-based
//! follower-separation policy or a learned shared policy, trained with
//! tabular temporal-difference updates over the same observation and reward
//! definitions. A deterministic engine simulates the whole thing and a
//! Monte Carlo harness turns episode logs into safety and efficiency
//! metrics: separation-loss rates, an estimated-collision chain with risk
//! ratios against an unmitigated baseline, ground and airborne delays and
//! advisory counts.
//!
//! Start from the runnable examples (`cargo run --release --example
//! dcb_exact`, `capacity_sweep`, `train_tabular_policy`, ...) or from the
//! bundled scenarios in `scenarios/`. The `uamflow` binary wraps the same
//! entry points as reproducible, manifest-stamped subcommands.
//!
//! Modules follow the problem structure: [`airspace`] (network, demand,
//! scenario files), [`dcb`] (strategic solvers and their oracle),
//! [`tactical`] (observations, rewards, policies, the merge game and the
//! trainer), [`engine`] (the simulator), [`metrics`] (aggregation and the
//! capacity sweep) and [`cli`] (the subcommand suite).

pub mod airspace;
pub mod cli;
pub mod dcb;
pub mod engine;
pub mod metrics;
pub mod tactical;
