//! Print overall MSPE for the constant-mean and linear-mean scenarios.
//!
//! `cargo run --release -p sae-core --example tables -- [replicates]`

use sae_core::simulation::{run_scenario, ScenarioConfig};
use sae_core::Estimator;

fn main() {
    let k: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let mut scenarios = Vec::new();
    for b in [5.0, 10.0] {
        for m in [40, 100, 400] {
            scenarios.push((format!("({m}, {b})"), ScenarioConfig::const_mean(m, b)));
        }
    }
    for m in [40, 100, 400] {
        scenarios.push((format!("{m} linear"), ScenarioConfig::linear(m, 10.0, 5.0)));
    }
    println!("{:>14} {}", "scenario", Estimator::ALL.map(|e| format!("{:>9}", e.tag())).join(" "));
    for (label, mut cfg) in scenarios {
        cfg.replicates = k;
        let r = run_scenario(&cfg).expect("scenario failed");
        let cells: Vec<String> = Estimator::ALL
            .iter()
            .map(|&e| format!("{:>9.3}", r.estimator(e).unwrap().overall_mspe))
            .collect();
        println!("{label:>14} {}  [{:.1?}]", cells.join(" "), r.wall_time);
    }
}
