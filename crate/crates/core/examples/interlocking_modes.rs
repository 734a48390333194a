//! Sectional release frees each switch group as soon as the train has passed
//! it; route release holds the whole route until the end. Compare optima.

use platforming::io::{generate_virtual_station, SolutionFile, VirtualStationConfig};
use platforming::oracle::{solve_exact, ExactLimits};
use platforming::InterlockingMode;

fn main() -> platforming::Result<()> {
    let mut shown = 0;
    for seed in 9000..9050 {
        let sectional = generate_virtual_station(&VirtualStationConfig { trains: 5, seed, ..Default::default() })?;
        let mut route = sectional.clone();
        route.station.interlocking_mode = InterlockingMode::RouteRelease;
        let (ns, nr) = (sectional.network()?, route.network()?);
        let a = solve_exact(&ns, &sectional.weights, None, &ExactLimits::default())?;
        let b = solve_exact(&nr, &route.weights, None, &ExactLimits::default())?;
        if b.optimum - a.optimum < 30.0 {
            continue;
        }
        println!("seed {seed}: sectional {:.0}, route {:.0}", a.optimum, b.optimum);
        let ra = SolutionFile::from_solution(&ns, &a.solution, &sectional.weights, None)?;
        let rb = SolutionFile::from_solution(&nr, &b.solution, &route.weights, None)?;
        for (x, y) in ra.trains.iter().zip(&rb.trains) {
            if x != y {
                let fmt = |r: &platforming::io::TrainRow| {
                    format!(
                        "{} {:?}-{:?} via {}",
                        r.platform.as_deref().unwrap_or("-"),
                        r.arrival.unwrap_or_default(),
                        r.departure.unwrap_or_default(),
                        r.inbound_route.as_deref().unwrap_or("-")
                    )
                };
                println!("  {:<4} sectional {:<28} route {}", x.id, fmt(x), fmt(y));
            }
        }
        shown += 1;
        if shown == 3 {
            break;
        }
    }
    Ok(())
}
