//! Exact branch-and-bound on a small instance, checked against the
//! feasibility oracle and compared with the heuristic and the relaxation.

use platforming::heuristic::solve_heuristic;
use platforming::io::{generate_virtual_station, VirtualStationConfig};
use platforming::lr::{self, LrParams};
use platforming::oracle::{check_feasibility, solve_exact, ExactLimits};
use platforming::{objective_value, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> platforming::Result<()> {
    let inst = generate_virtual_station(&VirtualStationConfig { trains: 7, seed: 21, ..Default::default() })?;
    let net = inst.network()?;
    let exact = solve_exact(&net, &inst.weights, None, &ExactLimits::default())?;
    assert!(check_feasibility(&net, &exact.solution, None)?.is_feasible());
    println!("exact      {:>8.1}  ({} nodes)", exact.optimum, exact.nodes);

    let raw = net.raw_costs(&inst.weights);
    let h = solve_heuristic(&net, &raw, None, &mut ChaCha8Rng::seed_from_u64(1));
    println!("heuristic  {:>8.1}", objective_value(&net, &h, &inst.weights));

    let out = lr::run(&net, &inst.weights, LrParams::default());
    println!("lr         {:>8.1}  (lower bound {:.1})", out.bounds.ub_best, out.bounds.lb_best);

    // The search refuses rather than running away.
    let tight = ExactLimits { max_nodes: 10, ..Default::default() };
    match solve_exact(&net, &inst.weights, None, &tight) {
        Err(Error::EnumerationCap(msg)) => println!("with 10 nodes: {msg}"),
        other => println!("with 10 nodes: {:?}", other.map(|e| e.optimum)),
    }
    Ok(())
}
