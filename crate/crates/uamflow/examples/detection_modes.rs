//! Observation filtering and the rule-based bands in action, on synthetic
//! traffic: symmetric (all) detection sees conflicts both ways, forward
//! detection turns the same geometry into leader/follower pairs. Also shows
//! the closed/open hold-band variants on the boundary knife-edge.
//!
//!     cargo run --release --example detection_modes

use uamflow::tactical::{
    observe, rule_based_policy, AgentView, DetectionMode, HoldBand, RulePolicyParams,
    SafetyThresholds, WorldView,
};

fn agent(id: &str, x: f64, d_merge: f64) -> AgentView {
    AgentView {
        flight_id: id.into(),
        position: (x, 0.0),
        speed: 50.0,
        heading: 0.0,
        d_goal: d_merge + 2000.0,
        fixes_ahead: vec![("MERGE".into(), d_merge), ("DEST".into(), d_merge + 2000.0)],
    }
}

fn main() {
    let thresholds = SafetyThresholds::default();
    let view = WorldView {
        agents: vec![agent("LEADER", 900.0, 1100.0), agent("FOLLOWER", 0.0, 2000.0)],
    };

    println!("two aircraft 900 m apart, both bound for the same merge fix\n");
    for mode in [DetectionMode::All, DetectionMode::Forward] {
        println!("{mode:?} detection:");
        for id in ["LEADER", "FOLLOWER"] {
            let obs = observe(&view, id, mode, &thresholds).unwrap();
            match obs.nearest_intruder() {
                Some(i) => println!("  {id} sees {} at {:.0} m", i.flight_id, i.d_oi),
                None => println!("  {id} sees nothing"),
            }
        }
    }

    let params = RulePolicyParams::for_thresholds(&thresholds);
    println!(
        "\nrule bands (d_ls = {:.0} m, d_hs = {:.0} m):",
        params.d_ls, params.d_hs
    );
    for gap in [100.0, 500.0, 800.0, 1200.0] {
        let view = WorldView {
            agents: vec![agent("L", gap, 1000.0), agent("F", 0.0, 1000.0 + gap)],
        };
        let obs = observe(&view, "F", DetectionMode::Forward, &thresholds).unwrap();
        println!(
            "  leader at {gap:>6.0} m -> {:?}",
            rule_based_policy(&obs, &params, &thresholds)
        );
    }

    println!("\non the exact low boundary, the two band variants differ:");
    for band in [HoldBand::Closed, HoldBand::Open] {
        let p = RulePolicyParams {
            hold_band: band,
            ..params
        };
        let view = WorldView {
            agents: vec![agent("L", p.d_ls, 1000.0), agent("F", 0.0, 1000.0 + p.d_ls)],
        };
        let obs = observe(&view, "F", DetectionMode::Forward, &thresholds).unwrap();
        println!(
            "  {band:?} hold band -> {:?}",
            rule_based_policy(&obs, &p, &thresholds)
        );
    }
}
