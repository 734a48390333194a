//! A hand-written instance: one platform, one through line, and two stopping
//! trains that both want the platform at the same time.

use platforming::io::{Instance, SolutionFile};
use platforming::oracle::{solve_exact, ExactLimits};

const INSTANCE: &str = r#"{
  "name": "two trains, one platform",
  "station": {
    "nodes": [
      { "id": "west", "kind": "entering" },
      { "id": "east", "kind": "leaving" },
      { "id": "P1", "kind": "siding" },
      { "id": "M", "kind": "mainline" }
    ],
    "switch_groups": [{ "id": "W" }, { "id": "E" }],
    "routes": [
      { "id": "west>P1", "origin": "west", "destination": "P1", "running_time": 60, "kind": "inbound",
        "sg_occupations": [{ "sg": "W", "offset": 25 }] },
      { "id": "west>M", "origin": "west", "destination": "M", "running_time": 45, "kind": "inbound",
        "sg_occupations": [{ "sg": "W", "offset": 20 }] },
      { "id": "P1>east", "origin": "P1", "destination": "east", "running_time": 60, "kind": "outbound",
        "sg_occupations": [{ "sg": "E", "offset": 30 }] },
      { "id": "M>east", "origin": "M", "destination": "east", "running_time": 45, "kind": "outbound",
        "sg_occupations": [{ "sg": "E", "offset": 20 }] }
    ],
    "sg_headway": 30,
    "siding_headway": 30,
    "interlocking_mode": "sectional_release"
  },
  "grid": { "horizon": 3600, "macro_granularity": 15, "micro_granularity": 15 },
  "trains": [
    { "id": "IC 101", "origin": "west", "destination": "east", "desired_arrival": 900, "desired_departure": 1020,
      "arrival_window": [-120, 300], "departure_window": [-60, 420], "dwell_min": 120, "dwell_max": 300, "stops": true },
    { "id": "RE 7", "origin": "west", "destination": "east", "desired_arrival": 960, "desired_departure": 1080,
      "arrival_window": [-120, 300], "departure_window": [-60, 420], "dwell_min": 90, "dwell_max": 300, "stops": true },
    { "id": "freight", "origin": "west", "destination": "east", "desired_arrival": 1000, "desired_departure": 1000,
      "arrival_window": [-60, 240], "departure_window": [-60, 240], "dwell_min": 0, "dwell_max": 0, "stops": false }
  ]
}"#;

fn main() -> platforming::Result<()> {
    let inst = Instance::from_json(INSTANCE)?;
    let net = inst.network()?;
    let exact = solve_exact(&net, &inst.weights, None, &ExactLimits::default())?;
    let file = SolutionFile::from_solution(&net, &exact.solution, &inst.weights, None)?;
    print!("{}", file.render_text());
    Ok(())
}
