//! Which microscopic resources one macroscopic arc locks, under both
//! interlocking modes and two grids.

use platforming::io::{generate_virtual_station, VirtualStationConfig};
use platforming::network::ResourceKind;
use platforming::{ArcKind, InterlockingMode, MicroResource};

fn show(label: &str, list: &[MicroResource], ids: &dyn Fn(&MicroResource) -> String, micro: i64) {
    if list.is_empty() {
        return;
    }
    let mut by_space: Vec<(String, Vec<i64>)> = Vec::new();
    for r in list {
        let id = ids(r);
        match by_space.iter_mut().find(|(s, _)| *s == id) {
            Some((_, t)) => t.push(r.time as i64 * micro),
            None => by_space.push((id, vec![r.time as i64 * micro])),
        }
    }
    for (space, times) in by_space {
        println!("    {label:<8} {space:<6} {times:?}");
    }
}

fn main() -> platforming::Result<()> {
    for (macro_g, micro_g) in [(15, 15), (30, 10)] {
        for mode in [InterlockingMode::SectionalRelease, InterlockingMode::RouteRelease] {
            let mut inst = generate_virtual_station(&VirtualStationConfig {
                trains: 1,
                seed: 4,
                granularity: macro_g,
                ..Default::default()
            })?;
            inst.grid.micro_granularity = micro_g;
            inst.station.interlocking_mode = mode;
            let net = inst.network()?;
            let b = &net.blocks[0];
            println!("grid {macro_g}/{micro_g} s, {mode:?}");
            let ids = |r: &MicroResource| match r.kind {
                ResourceKind::SwitchGroup => net.index.sg_ids[r.space as usize].clone(),
                ResourceKind::Siding => net.index.node_ids[net.index.siding_nodes[r.space as usize] as usize].clone(),
            };
            for kind in [ArcKind::Arrival, ArcKind::SidingWait, ArcKind::Departure] {
                let g = b.arcs_of_kind(kind).next().expect("arc of each kind");
                let a = &b.arcs[g as usize];
                let route = a.route.map_or("-".to_string(), |r| net.index.routes[r as usize].id.clone());
                println!(
                    "  {kind:?} {route} [{}s, {}s)",
                    a.start as i64 * macro_g,
                    a.end as i64 * macro_g
                );
                let sets = net.linking_sets(0, g);
                show("sg", &sets.phi_sg, &ids, micro_g);
                show("locked", &sets.phi_st, &ids, micro_g);
                show("headway", &sets.implicit_siding, &ids, micro_g);
                show("occupied", &sets.phi_ss, &ids, micro_g);
            }
        }
    }
    Ok(())
}
