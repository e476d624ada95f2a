//! The `uamflow` binary: reproducible experiment subcommands over the
//! library. Every command resolves an [`ExperimentSpec`] (defaults, then
//! `--config`, then flags), writes its outputs under `--out` and stamps a
//! manifest that reproduces the run exactly.

mod output;
mod spec;

pub use spec::{parse_demand, ExperimentSpec, Manifest, StrategicChoice, TacticalChoice};

use crate::airspace::generate_schedule;
use crate::dcb::{
    brute_force_oracle, solve_exact, solve_heuristic, validate_solution, DcbConfig, SolveStatus,
};
use crate::engine::{monte_carlo, run_episode, EngineConfig, StrategicMode, TacticalMode};
use crate::metrics::{
    aggregate, capacity_sweep, comparison_table, Aggregation, MetricsReport, RunStats,
};
use crate::tactical::{
    build_preconditioned_pool, build_raw_pool, enumerate_equilibria, train_policy, CostMatrix,
    DetectionMode, PolicyTable, RulePolicyParams, TrainConfig,
};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Parser)]
#[command(
    name = "uamflow",
    version,
    about = "Fast-time UAM traffic simulation with strategic demand-capacity balancing and tactical speed deconfliction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand. Flags override `--config`; the config
/// may be a previous run's manifest for an exact rerun.
#[derive(Args, Debug, Default, Clone)]
pub struct CommonArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Experiment spec or manifest JSON; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for Monte Carlo and training (default: available
    /// parallelism). Results do not depend on this.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Demand level: high, medium, low, or a mean interval in seconds.
    #[arg(long, value_parser = parse_demand)]
    pub demand: Option<f64>,
    /// Capacity override applied to every resource.
    #[arg(long)]
    pub capacity: Option<u32>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct ModeArgs {
    /// Strategic layer: none, exact or heuristic.
    #[arg(long, value_enum)]
    pub strategic: Option<StrategicChoice>,
    /// Tactical layer: none, rule or policy.
    #[arg(long, value_enum)]
    pub tactical: Option<TacticalChoice>,
    /// Trained policy artifact (required for --tactical policy).
    #[arg(long)]
    pub policy_file: Option<PathBuf>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a departure schedule from the scenario's demand model.
    Schedule {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Solve the strategic ground-delay problem for one generated schedule.
    Dcb {
        #[command(flatten)]
        common: CommonArgs,
        /// exact (default) or heuristic.
        #[arg(long, value_enum)]
        strategic: Option<StrategicChoice>,
        /// Cross-check the solution against the enumeration oracle
        /// (small instances only).
        #[arg(long)]
        check_oracle: bool,
    },
    /// Run one episode and write events, flights and speed curves.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        modes: ModeArgs,
    },
    /// Run repeated seeded episodes and aggregate the metrics.
    Montecarlo {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        modes: ModeArgs,
        /// Number of runs.
        #[arg(long)]
        runs: Option<u64>,
        /// Baseline run directory (its runs.csv) for the risk ratio.
        #[arg(long)]
        baseline: Option<PathBuf>,
    },
    /// Sweep resource capacities against the target level of safety.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        modes: ModeArgs,
        /// Runs per capacity point.
        #[arg(long)]
        runs: Option<u64>,
        /// Comma-separated capacities (default 1,2,...,8).
        #[arg(long, value_delimiter = ',')]
        capacities: Option<Vec<u32>>,
    },
    /// Train the shared tabular policy on a pool of schedules.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        /// Training episodes.
        #[arg(long)]
        episodes: Option<usize>,
        /// Intruder detection mode: all or forward.
        #[arg(long, value_enum)]
        detection: Option<DetectionModeArg>,
        /// Schedule tables in the training pool.
        #[arg(long)]
        tables: Option<usize>,
        /// Train on raw schedules instead of preconditioning the pool with
        /// the exact strategic solve.
        #[arg(long)]
        raw_pool: bool,
    },
    /// Enumerate equilibria of the two-aircraft merge cost table.
    Equilibria {
        #[command(flatten)]
        common: CommonArgs,
        /// 3x3 payoff matrix JSON; defaults to the bundled merge game.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Combine saved run directories into one comparison report.
    Report {
        #[command(flatten)]
        common: CommonArgs,
        /// Run directories (each containing runs.csv), one row each.
        #[arg(long, required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        /// Baseline (unmitigated) run directory for risk ratios and
        /// calibration.
        #[arg(long)]
        baseline: Option<PathBuf>,
        /// Pool counts over runs instead of averaging per-run metrics.
        #[arg(long)]
        pooled: bool,
        /// Keep the preset P(MAC|NMAC) instead of calibrating it from the
        /// baseline runs.
        #[arg(long)]
        no_calibrate: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DetectionModeArg {
    All,
    Forward,
}

impl From<DetectionModeArg> for DetectionMode {
    fn from(v: DetectionModeArg) -> Self {
        match v {
            DetectionModeArg::All => DetectionMode::All,
            DetectionModeArg::Forward => DetectionMode::Forward,
        }
    }
}

pub fn run() -> Result<()> {
    let cli = Cli::parse();
    dispatch(cli)
}

pub fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Schedule { common } => cmd_schedule(common),
        Command::Dcb {
            common,
            strategic,
            check_oracle,
        } => cmd_dcb(common, strategic, check_oracle),
        Command::Simulate { common, modes } => cmd_simulate(common, modes),
        Command::Montecarlo {
            common,
            modes,
            runs,
            baseline,
        } => cmd_montecarlo(common, modes, runs, baseline),
        Command::Sweep {
            common,
            modes,
            runs,
            capacities,
        } => cmd_sweep(common, modes, runs, capacities),
        Command::Train {
            common,
            episodes,
            detection,
            tables,
            raw_pool,
        } => cmd_train(common, episodes, detection, tables, raw_pool),
        Command::Equilibria { common, matrix } => cmd_equilibria(common, matrix),
        Command::Report {
            common,
            inputs,
            baseline,
            pooled,
            no_calibrate,
        } => cmd_report(common, inputs, baseline, pooled, no_calibrate),
    }
}

/// Structured error envelope printed to stderr on failure.
pub fn render_error(err: &anyhow::Error) -> String {
    serde_json::json!({ "error": { "message": format!("{err:#}") } }).to_string()
}

fn resolve_spec(common: &CommonArgs, needs_scenario: bool) -> Result<ExperimentSpec> {
    let mut spec = match &common.config {
        Some(path) => ExperimentSpec::from_config_file(path)?,
        None => ExperimentSpec::default(),
    };
    if let Some(path) = &common.scenario {
        spec.scenario_path = Some(path.display().to_string());
        spec.scenario = None; // the explicit flag wins over any inlined copy
    }
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    if let Some(workers) = common.workers {
        spec.workers = Some(workers);
    }
    if let Some(demand) = common.demand {
        spec.demand_mean_interval = Some(demand);
    }
    if let Some(capacity) = common.capacity {
        spec.capacity = Some(capacity);
    }
    if needs_scenario {
        spec.resolve_scenario()?;
    }
    Ok(spec)
}

fn out_dir(common: &CommonArgs, command: &str) -> Result<PathBuf> {
    let dir = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(command));
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    Ok(dir)
}

fn strategic_mode(choice: StrategicChoice) -> StrategicMode {
    match choice {
        StrategicChoice::None => StrategicMode::None,
        StrategicChoice::Exact => StrategicMode::ExactPlan,
        StrategicChoice::Heuristic => StrategicMode::Heuristic,
    }
}

fn tactical_mode(spec: &ExperimentSpec) -> Result<TacticalMode> {
    let scenario = spec.scenario.as_ref().expect("scenario resolved");
    Ok(match spec.tactical {
        TacticalChoice::None => TacticalMode::None,
        TacticalChoice::Rule => {
            let params = RulePolicyParams::for_thresholds(&scenario.thresholds);
            params
                .validate(&scenario.thresholds)
                .map_err(|m| anyhow::anyhow!(m))?;
            TacticalMode::RuleBased(params)
        }
        TacticalChoice::Policy => {
            let Some(path) = &spec.policy_file else {
                bail!("--tactical policy needs --policy-file");
            };
            TacticalMode::Policy(Arc::new(PolicyTable::load(path)?))
        }
    })
}

fn apply_mode_args(spec: &mut ExperimentSpec, modes: &ModeArgs) {
    if let Some(s) = modes.strategic {
        spec.strategic = s;
    }
    if let Some(t) = modes.tactical {
        spec.tactical = t;
    }
    if let Some(p) = &modes.policy_file {
        spec.policy_file = Some(p.display().to_string());
    }
}

fn cmd_schedule(common: CommonArgs) -> Result<()> {
    let spec = resolve_spec(&common, true)?;
    let out = out_dir(&common, "schedule")?;
    let scenario = spec.effective_scenario()?;
    let plans = generate_schedule(&scenario.demand, &scenario.routes, spec.seed)?;
    output::write_schedule_csv(&out.join("schedule.csv"), &plans)?;
    Manifest::new("schedule", spec).write(&out)?;
    println!(
        "wrote {} flights on {} routes to {}",
        plans.len(),
        scenario.routes.len(),
        out.join("schedule.csv").display()
    );
    Ok(())
}

fn cmd_dcb(
    common: CommonArgs,
    strategic: Option<StrategicChoice>,
    check_oracle: bool,
) -> Result<()> {
    let mut spec = resolve_spec(&common, true)?;
    spec.strategic = strategic.unwrap_or(StrategicChoice::Exact);
    let out = out_dir(&common, "dcb")?;
    let scenario = spec.effective_scenario()?;
    let network = scenario.network()?;
    let cfg = DcbConfig::from_network(&network, &scenario.dcb)?;
    let plans = generate_schedule(&scenario.demand, &scenario.routes, spec.seed)?;

    let solution = match spec.strategic {
        StrategicChoice::Heuristic => solve_heuristic(&plans, &network, &cfg, spec.engine.step_dt)?,
        _ => solve_exact(&plans, &network, &cfg)?,
    };
    if solution.status == SolveStatus::Infeasible {
        bail!(
            "strategic solve infeasible{}",
            solution
                .binding_resource
                .as_deref()
                .map(|r| format!("; binding resource {r}"))
                .unwrap_or_default()
        );
    }
    let check = validate_solution(&solution, &plans, &network, &cfg)?;
    if !check.is_ok() {
        bail!("solver produced a constraint violation:\n{check}");
    }
    if check_oracle {
        let oracle = brute_force_oracle(&plans, &network, &cfg)?;
        if (oracle.total_delay - solution.total_delay).abs() > 1e-6 {
            bail!(
                "oracle disagrees: {} vs {}",
                oracle.total_delay,
                solution.total_delay
            );
        }
        println!("oracle agrees: optimal delay {}", oracle.total_delay);
    }

    output::write_solution_csv(&out.join("solution.csv"), &plans, &solution)?;
    output::write_occupancy_csv(&out.join("occupancy.csv"), &plans, &network, &cfg, &solution)?;
    output::write_json(
        &out.join("summary.json"),
        &serde_json::json!({
            "status": solution.status,
            "total_delay": solution.total_delay,
            "flights": plans.len(),
        }),
    )?;
    Manifest::new("dcb", spec).write(&out)?;

    println!(
        "{:>12} {:>10} {:>10} {:>8}",
        "flight", "scheduled", "required", "delay"
    );
    let mut rows: Vec<_> = plans.iter().collect();
    rows.sort_by(|a, b| {
        a.scheduled_departure
            .total_cmp(&b.scheduled_departure)
            .then_with(|| a.flight_id.cmp(&b.flight_id))
    });
    for p in rows {
        let r = solution.required_departures[&p.flight_id];
        println!(
            "{:>12} {:>10.1} {:>10.1} {:>8.1}",
            p.flight_id,
            p.scheduled_departure,
            r,
            (r - p.scheduled_departure).max(0.0)
        );
    }
    println!(
        "total delay: {:.1} s ({:?})",
        solution.total_delay, solution.status
    );
    Ok(())
}

fn cmd_simulate(common: CommonArgs, modes: ModeArgs) -> Result<()> {
    let mut spec = resolve_spec(&common, true)?;
    apply_mode_args(&mut spec, &modes);
    let out = out_dir(&common, "simulate")?;
    let scenario = spec.effective_scenario()?;
    let tactical = tactical_mode(&spec)?;
    let engine_cfg = EngineConfig {
        record_speeds: true,
        ..spec.engine
    };
    let log = run_episode(
        &scenario,
        strategic_mode(spec.strategic),
        &tactical,
        spec.seed,
        &engine_cfg,
    )?;
    output::write_events_csv(&out.join("events.csv"), &log)?;
    output::write_flights_csv(&out.join("flights.csv"), &log)?;
    output::write_speeds_csv(&out.join("speeds.csv"), &log)?;
    let stats = RunStats::from_log(0, &log);
    output::write_json(
        &out.join("summary.json"),
        &serde_json::json!({
            "seed": log.seed,
            "flights": stats.flights,
            "flight_hours": stats.flight_hours,
            "lowc_events": stats.lowc_events,
            "nmac_events": stats.nmac_events,
            "mac_events": stats.mac_events,
            "total_alerts": stats.total_alerts,
            "total_ground_delay": stats.total_ground_delay,
            "total_airborne_delay": stats.total_airborne_delay,
            "truncated": stats.truncated,
            "policy_fallbacks": log.policy_fallbacks,
        }),
    )?;
    Manifest::new("simulate", spec).write(&out)?;
    println!(
        "episode done: {} flights, {:.2} fh, {} LoWC / {} NMAC / {} MAC events, {} alerts",
        stats.flights,
        stats.flight_hours,
        stats.lowc_events,
        stats.nmac_events,
        stats.mac_events,
        stats.total_alerts
    );
    Ok(())
}

fn cmd_montecarlo(
    common: CommonArgs,
    modes: ModeArgs,
    runs: Option<u64>,
    baseline: Option<PathBuf>,
) -> Result<()> {
    let mut spec = resolve_spec(&common, true)?;
    apply_mode_args(&mut spec, &modes);
    if let Some(r) = runs {
        spec.runs = r;
    }
    let out = out_dir(&common, "montecarlo")?;
    let scenario = spec.effective_scenario()?;
    let tactical = tactical_mode(&spec)?;
    let logs = monte_carlo(
        &scenario,
        strategic_mode(spec.strategic),
        &tactical,
        spec.runs,
        spec.seed,
        &spec.engine,
        spec.workers,
    )?;
    let stats: Vec<RunStats> = logs
        .iter()
        .enumerate()
        .map(|(i, log)| RunStats::from_log(i as u64, log))
        .collect();
    let mut report = aggregate(&stats, &spec.risk, Aggregation::PerRun);
    if let Some(dir) = &baseline {
        let base_stats = output::read_runs_csv(&dir.join("runs.csv"))?;
        let base_report = aggregate(&base_stats, &spec.risk, Aggregation::PerRun);
        report = report.with_baseline(&base_report);
    }
    output::write_runs_csv(&out.join("runs.csv"), &stats)?;
    output::write_json(&out.join("report.json"), &report)?;
    let label = format!(
        "{:?}+{}",
        spec.strategic,
        match spec.tactical {
            TacticalChoice::None => "none",
            TacticalChoice::Rule => "rule",
            TacticalChoice::Policy => "policy",
        }
    );
    let text = comparison_table(&[(label, &report)]);
    output::write_text(&out.join("report.txt"), &text)?;
    Manifest::new("montecarlo", spec).write(&out)?;
    print!("{text}");
    Ok(())
}

fn cmd_sweep(
    common: CommonArgs,
    modes: ModeArgs,
    runs: Option<u64>,
    capacities: Option<Vec<u32>>,
) -> Result<()> {
    let mut spec = resolve_spec(&common, true)?;
    apply_mode_args(&mut spec, &modes);
    if let Some(r) = runs {
        spec.runs = r;
    }
    if let Some(c) = capacities {
        spec.capacities = c;
    }
    let out = out_dir(&common, "sweep")?;
    let scenario = spec.effective_scenario()?;
    let tactical = tactical_mode(&spec)?;
    let table = capacity_sweep(
        &scenario,
        &tactical,
        &spec.capacities,
        spec.runs,
        spec.seed,
        &spec.engine,
        &spec.risk,
        spec.workers,
    )?;
    let mut w = csv::Writer::from_path(out.join("sweep.csv"))?;
    w.write_record([
        "capacity",
        "est_mac_per_100k_fh",
        "ci_lo",
        "ci_hi",
        "lowc_per_fh",
        "nmac_per_fh",
        "mean_ground_delay_s",
        "tls_compliant",
    ])?;
    for row in &table.rows {
        let r = &row.report;
        w.write_record([
            row.capacity.to_string(),
            format!("{}", r.est_mac_per_100k_fh.mean),
            format!("{}", r.est_mac_per_100k_fh.lo),
            format!("{}", r.est_mac_per_100k_fh.hi),
            format!("{}", r.lowc_per_fh.mean),
            format!("{}", r.nmac_per_fh.mean),
            format!("{}", r.mean_ground_delay_s.mean),
            row.tls_compliant.to_string(),
        ])?;
    }
    w.flush()?;
    output::write_json(&out.join("sweep.json"), &table)?;
    output::write_text(&out.join("sweep.txt"), &table.to_text())?;
    Manifest::new("sweep", spec).write(&out)?;
    print!("{}", table.to_text());
    Ok(())
}

fn cmd_train(
    common: CommonArgs,
    episodes: Option<usize>,
    detection: Option<DetectionModeArg>,
    tables: Option<usize>,
    raw_pool: bool,
) -> Result<()> {
    let mut spec = resolve_spec(&common, true)?;
    if let Some(e) = episodes {
        spec.episodes = e;
    }
    if let Some(d) = detection {
        spec.detection = d.into();
    }
    if let Some(t) = tables {
        spec.pool_tables = t;
    }
    let out = out_dir(&common, "train")?;
    let scenario = spec.effective_scenario()?;
    let pool = if raw_pool {
        build_raw_pool(&scenario, spec.pool_tables, spec.seed)?
    } else {
        build_preconditioned_pool(&scenario, spec.pool_tables, spec.seed)?
    };
    let mut cfg = TrainConfig::for_episodes(spec.episodes);
    cfg.engine.step_dt = spec.engine.step_dt;
    cfg.engine.max_sim_time = spec.engine.max_sim_time;
    if spec.engine.decision_dt > spec.engine.step_dt {
        // An explicitly coarsened advisory cadence carries into training.
        cfg.engine.decision_dt = spec.engine.decision_dt;
    }
    let outcome = train_policy(
        &pool,
        spec.detection,
        &scenario,
        &cfg,
        spec.seed,
        spec.workers,
    )?;
    outcome
        .policy
        .save(out.join("policy.json"))
        .context("saving policy")?;
    output::write_curve_csv(&out.join("curve.csv"), &outcome.curve)?;
    Manifest::new("train", spec).write(&out)?;
    let last = outcome.curve.last();
    println!(
        "trained {} episodes, {} states visited{}",
        outcome.curve.len(),
        outcome.policy.len(),
        last.map(|l| format!(", final episode reward {:.3}", l.total))
            .unwrap_or_default()
    );
    Ok(())
}

fn cmd_equilibria(common: CommonArgs, matrix: Option<PathBuf>) -> Result<()> {
    let spec = resolve_spec(&common, false)?;
    let out = out_dir(&common, "equilibria")?;
    let game = match &matrix {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading matrix {}", path.display()))?;
            let payoffs: [[(f64, f64); 3]; 3] =
                serde_json::from_str(&text).context("parsing 3x3 payoff matrix")?;
            CostMatrix { payoffs }
        }
        None => CostMatrix::merge_game(),
    };
    let analysis = enumerate_equilibria(&game);
    output::write_json(&out.join("equilibria.json"), &analysis)?;
    Manifest::new("equilibria", spec).write(&out)?;
    println!("strict pure Nash equilibria:");
    for (a, b) in &analysis.strict_nash {
        println!("  ({a:?}, {b:?})");
    }
    println!("weak (non-strict) equilibria: {}", analysis.weak_nash.len());
    let (l, f) = analysis.stackelberg;
    println!(
        "leader-first outcome: ({l:?}, {f:?}) with payoffs ({}, {})",
        analysis.stackelberg_payoffs.0, analysis.stackelberg_payoffs.1
    );
    Ok(())
}

fn cmd_report(
    common: CommonArgs,
    inputs: Vec<PathBuf>,
    baseline: Option<PathBuf>,
    pooled: bool,
    no_calibrate: bool,
) -> Result<()> {
    let spec = resolve_spec(&common, false)?;
    let out = out_dir(&common, "report")?;
    let aggregation = if pooled {
        Aggregation::Pooled
    } else {
        Aggregation::PerRun
    };

    let mut risk = spec.risk;
    let mut calibration = None;
    let baseline_stats = baseline
        .as_ref()
        .map(|dir| output::read_runs_csv(&dir.join("runs.csv")))
        .transpose()?;
    if let (Some(stats), false) = (&baseline_stats, no_calibrate) {
        // Calibrate P(MAC|NMAC) from the unmitigated runs when possible.
        let mac: u64 = stats.iter().map(|s| s.mac_events).sum();
        let nmac: u64 = stats.iter().map(|s| s.nmac_events).sum();
        if nmac > 0 {
            risk.p_mac_given_nmac = mac as f64 / nmac as f64;
            calibration = Some(serde_json::json!({
                "p_mac_given_nmac": risk.p_mac_given_nmac,
                "mac_events": mac,
                "nmac_events": nmac,
            }));
        }
    }

    let baseline_report = baseline_stats
        .as_ref()
        .map(|stats| aggregate(stats, &risk, aggregation));
    let label_of = |p: &Path| {
        p.file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| p.display().to_string())
    };

    let mut rows: Vec<(String, MetricsReport)> = Vec::new();
    if let (Some(base), Some(dir)) = (&baseline_report, &baseline) {
        rows.push((
            format!("{} (baseline)", label_of(dir)),
            base.clone().with_baseline(base),
        ));
    }
    for dir in &inputs {
        let stats = output::read_runs_csv(&dir.join("runs.csv"))?;
        let mut report = aggregate(&stats, &risk, aggregation);
        if let Some(base) = &baseline_report {
            report = report.with_baseline(base);
        }
        rows.push((label_of(dir), report));
    }

    let borrowed: Vec<(String, &MetricsReport)> =
        rows.iter().map(|(l, r)| (l.clone(), r)).collect();
    let text = comparison_table(&borrowed);
    output::write_text(&out.join("report.txt"), &text)?;
    output::write_json(
        &out.join("report.json"),
        &serde_json::json!({
            "aggregation": aggregation,
            "calibration": calibration,
            "rows": rows.iter().map(|(l, r)| serde_json::json!({"label": l, "report": r})).collect::<Vec<_>>(),
        }),
    )?;
    Manifest::new("report", spec).write(&out)?;
    print!("{text}");
    Ok(())
}
