//! Solve a small instance and write its occupation chart as SVG.

use platforming::io::{emit_gantt, generate_virtual_station, VirtualStationConfig};
use platforming::lr::{self, LrParams};

fn main() -> platforming::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "platforming.svg".into());
    let inst = generate_virtual_station(&VirtualStationConfig { trains: 8, seed: 2, ..Default::default() })?;
    let net = inst.network()?;
    let out = lr::run(&net, &inst.weights, LrParams::default());
    let svg = emit_gantt(&net, &out.solution.expect("plan"));
    std::fs::write(&path, svg)?;
    println!("wrote {path}");
    Ok(())
}
