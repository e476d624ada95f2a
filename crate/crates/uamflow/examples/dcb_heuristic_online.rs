//! The online release gate, step by step: departure requests arrive in real
//! time and are held until their origin has been quiet long enough and all
//! their arrival windows have room.
//!
//!     cargo run --release --example dcb_heuristic_online

use uamflow::airspace::ScenarioConfig;
use uamflow::dcb::{DcbConfig, HeuristicDcb};

fn main() -> anyhow::Result<()> {
    let scenario = ScenarioConfig::bundled_single_resource();
    let network = scenario.network()?;
    let cfg = DcbConfig::from_network(&network, &scenario.dcb)?;
    let mut gate = HeuristicDcb::new(&cfg);

    // (flight, origin, request time); the route reaches the fix after 100 s.
    let route: Vec<(String, f64)> = vec![("M".into(), 100.0)];
    let mut requests = vec![("F1", 0.0), ("F2", 40.0), ("F3", 55.0)];
    let mut released: Vec<(&str, f64)> = Vec::new();

    let mut t = 0.0;
    while !requests.is_empty() && t < 1200.0 {
        while let Some(&(flight, req_t)) = requests.first() {
            if req_t > t {
                break;
            }
            if gate.try_release(t, "O", &route) {
                println!("t = {t:>5.0} s: released {flight} (arrival window {})", cfg.window_index(t + 100.0));
                released.push((flight, t));
                requests.remove(0);
            } else {
                let blocking = gate.blocking_resource(t, &route);
                if t == req_t {
                    println!(
                        "t = {t:>5.0} s: {flight} held{}",
                        blocking
                            .map(|r| format!(" (window at {r} is full)"))
                            .unwrap_or_else(|| " (origin separation)".into())
                    );
                }
                break;
            }
        }
        t += 1.0;
    }

    println!("\nrelease summary:");
    for (flight, t) in &released {
        println!("  {flight} departed at {t:>5.0} s");
    }
    Ok(())
}
