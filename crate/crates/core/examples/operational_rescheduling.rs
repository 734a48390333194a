//! Real-time use: delay a batch of trains, close a siding for two hours and
//! re-plan under a wall-clock limit.

use std::time::Duration;

use platforming::io::{generate_large_station, perturb_instance, LargeStationConfig, Scenario};
use platforming::lr::{self, LrParams};
use platforming::oracle::check_feasibility;

fn main() -> platforming::Result<()> {
    let limit: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let plan = generate_large_station(&LargeStationConfig { trains: 150, seed: 150, horizon: 12 * 3600, ..Default::default() })?;
    let disrupted = perturb_instance(
        &plan,
        &[
            Scenario::Delays { from: 0, to: 150, max_delay: 600, seed: 15 },
            Scenario::TrackOutage { node: "S3".into(), from: 4 * 3600, until: Some(6 * 3600) },
        ],
    )?;
    let net = disrupted.network()?;
    let params = LrParams { time_limit: Some(Duration::from_secs(limit)), ..Default::default() };
    let out = lr::run(&net, &disrupted.weights, params);
    let sol = out.solution.expect("a plan within the limit");
    assert!(check_feasibility(&net, &sol, None)?.is_feasible());
    let b = &out.bounds;
    println!(
        "{} iterations in {:.1}s: UB {:.0}, LB {:.0}, gap {:.2}%, {} cancelled",
        b.iterations.len(),
        b.elapsed.as_secs_f64(),
        b.ub_best,
        b.lb_best,
        b.gap() * 100.0,
        sol.cancelled_count()
    );
    Ok(())
}
