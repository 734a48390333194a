//! Generate a small station, solve it with Lagrangian relaxation and compare
//! with the exact optimum.

use platforming::io::{generate_virtual_station, SolutionFile, SolveSummary, VirtualStationConfig};
use platforming::lr::{self, LrParams};
use platforming::oracle::{check_feasibility, solve_exact, ExactLimits};

fn main() -> platforming::Result<()> {
    let inst = generate_virtual_station(&VirtualStationConfig { trains: 6, seed: 7, ..Default::default() })?;
    let net = inst.network()?;

    let out = lr::run(&net, &inst.weights, LrParams { seed: 7, ..Default::default() });
    let solution = out.solution.expect("cancellations always give a plan");
    let report = check_feasibility(&net, &solution, None)?;
    assert!(report.is_feasible());

    let b = &out.bounds;
    let summary = SolveSummary {
        method: "lr".into(),
        lower_bound: Some(b.lb_best),
        upper_bound: b.ub_best,
        gap: Some(b.gap()),
        iterations: b.iterations.len(),
        wall_time_s: b.elapsed.as_secs_f64(),
        termination: b.termination.map(|t| format!("{t:?}")),
    };
    let file = SolutionFile::from_solution(&net, &solution, &inst.weights, Some(summary))?;
    print!("{}", file.render_text());

    let exact = solve_exact(&net, &inst.weights, None, &ExactLimits::default())?;
    println!("exact optimum {:.1} ({} search nodes)", exact.optimum, exact.nodes);
    Ok(())
}
