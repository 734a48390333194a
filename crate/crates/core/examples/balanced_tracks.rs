//! Balanced track use: cap each siding at the average load plus a tolerance
//! and watch the spread of siding loads shrink.

use platforming::io::{generate_large_station, LargeStationConfig};
use platforming::lr::{self, LrParams};
use platforming::oracle::check_feasibility;
use platforming::BalanceParams;

fn main() -> platforming::Result<()> {
    let inst = generate_large_station(&LargeStationConfig { trains: 49, seed: 49, horizon: 4 * 3600, ..Default::default() })?;
    let net = inst.network()?;
    for tol in [None, Some(4), Some(2), Some(0)] {
        let balance = BalanceParams { average_usage: None, tolerance: tol };
        let cap = balance.cap(&net.trains, net.index.sidings());
        let out = lr::run(&net, &inst.weights, LrParams { max_iterations: 150, balance, ..Default::default() });
        let sol = out.solution.expect("plan");
        assert!(check_feasibility(&net, &sol, cap)?.is_feasible());
        let counts = net.siding_assignments(&sol);
        let mean = counts.iter().sum::<u32>() as f64 / counts.len() as f64;
        let sd = (counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / counts.len() as f64).sqrt();
        println!(
            "tolerance {:>3}  cap {:>4}  loads {:?}  std {:.2}  objective {:.0}",
            tol.map_or("inf".into(), |t| t.to_string()),
            cap.map_or("-".into(), |c| c.to_string()),
            counts,
            sd,
            out.bounds.ub_best
        );
    }
    Ok(())
}
