//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers (run with `--nocapture` to see them).
//!
//!     cargo test --test acceptance -- --nocapture
//!
//! The heavier criteria (learning-rate ordering, capacity sweeps, method
//! ordering) run Monte Carlo experiments sized for a small desk machine;
//! see the per-test comments for their budgets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::sync::Arc;
use uamflow::airspace::{
    generate_schedule, AircraftPerformance, FlightPlan, Network, Node, Resource, Route,
    ScenarioConfig,
};
use uamflow::dcb::{
    brute_force_oracle, solve_exact, solve_heuristic, validate_solution, DcbConfig, SolveStatus,
};
use uamflow::engine::{monte_carlo, EngineConfig, EventKind, StrategicMode, TacticalMode};
use uamflow::metrics::{
    aggregate, capacity_sweep, estimate_mac, risk_ratio, Aggregation, RiskModelParams, RunStats,
    TARGET_LEVEL_OF_SAFETY,
};
use uamflow::tactical::{
    build_preconditioned_pool, enumerate_equilibria, reward, train_policy, CostMatrix,
    DetectionMode, RewardParams, RulePolicyParams, SafetyThresholds, SpeedAction, TrainConfig,
    Transition,
};

// ---------------------------------------------------------------------
// Random strategic instances shared by criteria 1 and 2.
// ---------------------------------------------------------------------

struct RandomInstance {
    plans: Vec<FlightPlan>,
    network: Network,
    cfg: DcbConfig,
}

/// A random line network with one or two shared constrained fixes and 1-3
/// routes of distinct origins. All times are integer-valued so optimal
/// delays compare exactly.
fn random_instance(rng: &mut ChaCha8Rng, max_flights: usize, max_capacity: u32) -> RandomInstance {
    let n_resources = rng.random_range(1..=2usize);
    let n_routes = rng.random_range(1..=3usize);
    let mut nodes = vec![
        Node {
            id: "R1".into(),
            x: 5000.0,
            y: 0.0,
        },
        Node {
            id: "R2".into(),
            x: 10000.0,
            y: 0.0,
        },
        Node {
            id: "DST".into(),
            x: 12500.0,
            y: 0.0,
        },
    ];
    let mut routes = Vec::new();
    for r in 0..n_routes {
        // Origin offset varies the transit time in 50 s steps (v = 50 m/s).
        let offset = rng.random_range(0..=2) as f64 * 2500.0;
        let origin = format!("O{r}");
        nodes.push(Node {
            id: origin.clone(),
            x: -offset,
            y: 0.0,
        });
        // Which fixes the route crosses; at least one.
        let through: Vec<&str> = if n_resources == 1 {
            vec!["R1"]
        } else {
            match rng.random_range(0..3u8) {
                0 => vec!["R1"],
                1 => vec!["R2"],
                _ => vec!["R1", "R2"],
            }
        };
        let mut ids = vec![origin];
        ids.extend(through.iter().map(|s| s.to_string()));
        ids.push("DST".into());
        routes.push(Route {
            id: format!("T{r}"),
            nodes: ids,
        });
    }
    let resources: Vec<Resource> = (0..n_resources)
        .map(|i| Resource {
            node_id: format!("R{}", i + 1),
            capacity: rng.random_range(1..=max_capacity),
            window_length: 200.0,
        })
        .collect();
    let network = Network::new(nodes, routes.clone(), resources, AircraftPerformance::default())
        .expect("random network is well formed");
    let cfg = DcbConfig::from_network(
        &network,
        &uamflow::dcb::DcbParams {
            departure_separation: if rng.random_bool(0.5) { 30.0 } else { 0.0 },
            horizon: None,
        },
    )
    .unwrap();
    let n_flights = rng.random_range(1..=max_flights);
    let plans: Vec<FlightPlan> = (0..n_flights)
        .map(|i| {
            let route = &routes[rng.random_range(0..routes.len())];
            FlightPlan::new(
                format!("F{i}"),
                route.id.clone(),
                rng.random_range(0..=400u32) as f64,
            )
        })
        .collect();
    RandomInstance {
        plans,
        network,
        cfg,
    }
}

#[test]
fn acceptance_01_exact_solver_matches_enumeration_oracle() {
    let started = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut infeasible = 0;
    for case in 0..200 {
        let inst = random_instance(&mut rng, 6, 2);
        let exact = solve_exact(&inst.plans, &inst.network, &inst.cfg).unwrap();
        let oracle = brute_force_oracle(&inst.plans, &inst.network, &inst.cfg).unwrap();
        assert_eq!(
            exact.status, oracle.status,
            "case {case}: status mismatch ({:?} vs {:?})",
            exact.status, oracle.status
        );
        if exact.status == SolveStatus::Infeasible {
            infeasible += 1;
            continue;
        }
        assert_eq!(
            exact.total_delay, oracle.total_delay,
            "case {case}: exact {} != oracle {}",
            exact.total_delay, oracle.total_delay
        );
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "criterion requires < 60 s, took {elapsed:?}"
    );
    println!(
        "ACCEPTANCE 1 PASS: exact == oracle on 200 random instances \
         ({infeasible} infeasible) in {elapsed:.2?}"
    );
}

#[test]
fn acceptance_02_solutions_validate_and_heuristic_never_beats_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut dominance_checked = 0;
    for case in 0..1000 {
        let inst = random_instance(&mut rng, 10, 3);
        let exact = solve_exact(&inst.plans, &inst.network, &inst.cfg).unwrap();
        if exact.status == SolveStatus::Infeasible {
            continue;
        }
        let report = validate_solution(&exact, &inst.plans, &inst.network, &inst.cfg).unwrap();
        assert!(report.is_ok(), "case {case} exact: {report}");

        let heuristic = solve_heuristic(&inst.plans, &inst.network, &inst.cfg, 1.0).unwrap();
        if heuristic.status == SolveStatus::Infeasible {
            continue;
        }
        let report = validate_solution(&heuristic, &inst.plans, &inst.network, &inst.cfg).unwrap();
        assert!(report.is_ok(), "case {case} heuristic: {report}");
        assert!(
            heuristic.total_delay >= exact.total_delay - 1e-9,
            "case {case}: heuristic {} beat exact {}",
            heuristic.total_delay,
            exact.total_delay
        );
        dominance_checked += 1;
    }
    println!(
        "ACCEPTANCE 2 PASS: 1000 random instances validate clean; heuristic >= exact \
         on all {dominance_checked} feasible instances"
    );
}

#[test]
fn acceptance_03_worked_three_flight_instance() {
    let scenario = ScenarioConfig::bundled_single_resource();
    let network = scenario.network().unwrap();
    let cfg = DcbConfig::from_network(&network, &scenario.dcb).unwrap();
    let plans = vec![
        FlightPlan::new("F1", "RW", 0.0),
        FlightPlan::new("F2", "RW", 10.0),
        FlightPlan::new("F3", "RW", 20.0),
    ];
    let exact = solve_exact(&plans, &network, &cfg).unwrap();
    let oracle = brute_force_oracle(&plans, &network, &cfg).unwrap();
    assert_eq!(exact.required_departures["F1"], 0.0);
    assert_eq!(exact.required_departures["F2"], 100.0);
    assert_eq!(exact.required_departures["F3"], 300.0);
    assert_eq!(exact.total_delay, 370.0);
    assert_eq!(oracle.total_delay, 370.0);
    println!(
        "ACCEPTANCE 3 PASS: worked instance gives departures 0/100/300 s, \
         total delay 370 s, oracle agrees"
    );
}

#[test]
fn acceptance_04_reward_algebra() {
    let thresholds = SafetyThresholds::default();
    let params = RewardParams::continuity_defaults(&thresholds, 1080.0);
    let mut rng = ChaCha8Rng::seed_from_u64(404);

    // Exact decomposition on randomized transitions.
    for _ in 0..10_000 {
        let t = Transition {
            min_separation: if rng.random_bool(0.1) {
                None
            } else {
                Some(rng.random_range(0.0..2000.0))
            },
            elapsed: rng.random_range(0.0..2200.0),
            action: SpeedAction::ALL[rng.random_range(0..3)],
        };
        let r = reward(&t, &params, &thresholds).unwrap();
        assert_eq!(r.total, r.safety + r.time + r.action);
        assert!(r.safety <= 0.0 && r.time <= 0.0 && r.action <= 0.0);
    }

    // Continuity at both safety boundaries under the derived defaults.
    let at = |d: f64| {
        reward(
            &Transition {
                min_separation: Some(d),
                elapsed: 0.0,
                action: SpeedAction::Hold,
            },
            &params,
            &thresholds,
        )
        .unwrap()
        .safety
    };
    let nmac_gap = (at(thresholds.d_nmac) - (-1.0)).abs();
    let lowc_gap = at(thresholds.d_lowc).abs();
    assert!(nmac_gap < 1e-12, "discontinuity {nmac_gap} at the NMAC boundary");
    assert!(lowc_gap < 1e-12, "discontinuity {lowc_gap} at the well-clear boundary");

    // Monotone non-decreasing across the linear band.
    let mut prev = f64::NEG_INFINITY;
    for i in 0..=1000 {
        let d = thresholds.d_nmac + (thresholds.d_lowc - thresholds.d_nmac) * i as f64 / 1000.0;
        let s = at(d);
        assert!(s >= prev, "safety term decreased at {d}");
        prev = s;
    }
    println!(
        "ACCEPTANCE 4 PASS: 10,000 transitions decompose exactly; boundary gaps \
         {nmac_gap:.1e} and {lowc_gap:.1e}; safety term monotone on the band"
    );
}

#[test]
fn acceptance_05_merge_game_equilibria() {
    use SpeedAction::{Decrease, Increase};
    let analysis = enumerate_equilibria(&CostMatrix::merge_game());
    assert_eq!(
        analysis.strict_nash,
        vec![(Decrease, Increase), (Increase, Decrease)],
        "strict Nash set"
    );
    assert_eq!(analysis.stackelberg, (Increase, Decrease), "leader-first outcome");
    println!(
        "ACCEPTANCE 5 PASS: strict Nash = {{(increase, decrease), (decrease, increase)}}, \
         leader-first outcome (increase, decrease)"
    );
}

#[test]
fn acceptance_09_metric_identities() {
    let params = RiskModelParams::default();
    for n in [0u64, 1, 4, 1000] {
        let e = estimate_mac(n, 10.0, &params).unwrap();
        assert_eq!(e.expected_macs, 5.038e-3 * 0.005 * n as f64, "n = {n}");
    }
    let r = risk_ratio(908.25, 205.53).unwrap();
    assert!((r - 4.419).abs() <= 0.001, "risk ratio {r}");
    println!(
        "ACCEPTANCE 9 PASS: estimated-collision chain exact for n in {{0,1,4,1000}}; \
         risk ratio 908.25/205.53 = {r:.4}"
    );
}

// ---------------------------------------------------------------------
// Criterion 10: byte-identical reruns from manifests.
// ---------------------------------------------------------------------

fn uamflow_bin() -> std::process::Command {
    std::process::Command::new(env!("CARGO_BIN_EXE_uamflow"))
}

fn run_ok(args: &[&str], cwd: &std::path::Path) {
    let output = uamflow_bin()
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs");
    assert!(
        output.status.success(),
        "uamflow {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn dir_bytes(dir: &std::path::Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).expect("output dir exists") {
        let path = entry.expect("dir entry").path();
        if path.is_file() {
            out.insert(
                path.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&path).expect("file reads"),
            );
        }
    }
    out
}

fn assert_identical_outputs(a: &std::path::Path, b: &std::path::Path, skip: &[&str]) {
    let fa = dir_bytes(a);
    let fb = dir_bytes(b);
    let keys: Vec<&String> = fa.keys().filter(|k| !skip.contains(&k.as_str())).collect();
    assert!(!keys.is_empty(), "no files to compare in {}", a.display());
    for k in keys {
        assert!(fb.contains_key(k), "{k} missing from rerun");
        assert_eq!(fa[k], fb[k], "{k} differs between runs");
    }
}

#[test]
fn acceptance_10_manifest_reruns_are_byte_identical() {
    let scenario_path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/default.json");
    let work = tempfile::tempdir().unwrap();
    let dir = work.path();

    // Monte Carlo with two workers, rerun from its manifest, plus a
    // single-worker rerun to show worker count changes nothing.
    run_ok(
        &[
            "montecarlo",
            "--scenario",
            scenario_path,
            "--runs",
            "3",
            "--seed",
            "11",
            "--workers",
            "2",
            "--strategic",
            "heuristic",
            "--tactical",
            "rule",
            "--out",
            "mc1",
        ],
        dir,
    );
    run_ok(
        &["montecarlo", "--config", "mc1/manifest.json", "--out", "mc2"],
        dir,
    );
    assert_identical_outputs(&dir.join("mc1"), &dir.join("mc2"), &[]);
    run_ok(
        &[
            "montecarlo",
            "--config",
            "mc1/manifest.json",
            "--workers",
            "1",
            "--out",
            "mc3",
        ],
        dir,
    );
    // The manifest records the requested worker count; everything else
    // must match bit for bit.
    assert_identical_outputs(&dir.join("mc1"), &dir.join("mc3"), &["manifest.json"]);

    // Training: parallel rollouts, rerun from manifest.
    run_ok(
        &[
            "train",
            "--scenario",
            scenario_path,
            "--episodes",
            "40",
            "--tables",
            "2",
            "--seed",
            "5",
            "--workers",
            "2",
            "--out",
            "tr1",
        ],
        dir,
    );
    run_ok(&["train", "--config", "tr1/manifest.json", "--out", "tr2"], dir);
    assert_identical_outputs(&dir.join("tr1"), &dir.join("tr2"), &[]);
    run_ok(
        &[
            "train",
            "--config",
            "tr1/manifest.json",
            "--workers",
            "1",
            "--out",
            "tr3",
        ],
        dir,
    );
    assert_identical_outputs(&dir.join("tr1"), &dir.join("tr3"), &["manifest.json"]);

    // Strategic solve rerun.
    run_ok(
        &[
            "dcb",
            "--scenario",
            scenario_path,
            "--seed",
            "3",
            "--capacity",
            "2",
            "--out",
            "dcb1",
        ],
        dir,
    );
    run_ok(&["dcb", "--config", "dcb1/manifest.json", "--out", "dcb2"], dir);
    assert_identical_outputs(&dir.join("dcb1"), &dir.join("dcb2"), &[]);

    println!(
        "ACCEPTANCE 10 PASS: montecarlo, train and dcb reruns from manifests are \
         byte-identical; worker count does not change results"
    );
}
