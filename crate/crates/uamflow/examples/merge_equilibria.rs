//! Why restricting observation to leading traffic helps: the bundled
//! two-aircraft merge game has two strict equilibria under symmetric
//! observation (an ambiguous coordination problem), but a single dominant
//! outcome once one aircraft is the leader.
//!
//!     cargo run --release --example merge_equilibria

use uamflow::tactical::{enumerate_equilibria, CostMatrix, SpeedAction};

fn main() {
    let game = CostMatrix::merge_game();

    println!("payoff table (aircraft 1 rows, aircraft 2 columns):\n");
    let labels = ["decrease", "hold", "increase"];
    print!("{:>10}", "");
    for l in labels {
        print!(" {l:>14}");
    }
    println!();
    for a1 in SpeedAction::ALL {
        print!("{:>10}", labels[a1.index()]);
        for a2 in SpeedAction::ALL {
            let (u1, u2) = game.get(a1, a2);
            print!(" {:>14}", format!("({u1}, {u2})"));
        }
        println!();
    }

    let analysis = enumerate_equilibria(&game);
    println!("\nstrict pure Nash equilibria:");
    for (a, b) in &analysis.strict_nash {
        println!("  aircraft1 {a:?} / aircraft2 {b:?}");
    }
    println!(
        "weak (non-strict) equilibria: {} profile(s)",
        analysis.weak_nash.len()
    );
    let (leader, follower) = analysis.stackelberg;
    println!(
        "\nwith aircraft 1 committing first: ({leader:?}, {follower:?}), payoffs ({}, {})",
        analysis.stackelberg_payoffs.0, analysis.stackelberg_payoffs.1
    );
    println!("one equilibrium remains, so the follower's best response is unambiguous");
}
