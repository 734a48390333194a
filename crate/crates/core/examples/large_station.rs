//! A full synthetic day at a thirteen-siding station: 287 trains on a 15 s
//! grid. Prints the bound trajectory of the first iterations.

use platforming::io::{generate_large_station, LargeStationConfig};
use platforming::lr::{LagrangianSolver, LrParams};
use std::time::Instant;

fn main() -> platforming::Result<()> {
    let iterations: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let inst = generate_large_station(&LargeStationConfig::default())?;
    let t = Instant::now();
    let net = inst.network()?;
    let arcs: usize = net.blocks.iter().map(|b| b.arcs.len()).sum();
    let links: usize = net.blocks.iter().map(|b| b.total_links()).sum();
    println!("{} trains, {arcs} arcs, {links} links, built in {:.1}s", net.train_count(), t.elapsed().as_secs_f64());

    let params = LrParams { max_iterations: iterations, gap_tolerance: 0.0, ..Default::default() };
    let mut solver = LagrangianSolver::new(&net, &inst.weights, params);
    println!("{:>4} {:>12} {:>12} {:>9} {:>8} {:>8}", "m", "LB", "UB*", "violated", "pool", "secs");
    loop {
        let out = solver.iterate();
        let r = out.record;
        println!(
            "{:>4} {:>12.1} {:>12.1} {:>9} {:>8} {:>8.1}",
            r.m,
            r.lb,
            r.ub_best,
            r.violated,
            r.pool_size,
            t.elapsed().as_secs_f64()
        );
        if out.done.is_some() {
            break;
        }
    }
    let res = solver.finish();
    println!("gap {:.2}%", res.bounds.gap() * 100.0);
    Ok(())
}
