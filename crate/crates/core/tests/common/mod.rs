#![allow(dead_code)]

use std::collections::BTreeSet;

use platforming::infrastructure::{PhysicalNode, PhysicalRoute, SgOccupation, SwitchGroup};
use platforming::io::{generate_virtual_station, Instance, VirtualStationConfig};
use platforming::network::{ArcKind, MicroResource, ResourceKind, StArc, TrainNetwork};
use platforming::{InterlockingMode, NodeKind, RouteKind, Seconds, ShiftWindow, Station, Train};

pub fn route(id: &str, from: &str, to: &str, t: Seconds, kind: RouteKind, sgs: &[(&str, Seconds)]) -> PhysicalRoute {
    PhysicalRoute {
        id: id.into(),
        origin: from.into(),
        destination: to.into(),
        running_time: t,
        kind,
        sg_occupations: sgs.iter().map(|&(s, o)| SgOccupation { sg: s.into(), offset: o }).collect(),
    }
}

/// One entry, one exit, sidings P1 and P2, mainline M, switch groups a and b.
pub fn tiny_station() -> Station {
    let node = |id: &str, kind| PhysicalNode { id: id.into(), kind };
    Station {
        nodes: vec![
            node("in", NodeKind::Entering),
            node("out", NodeKind::Leaving),
            node("P1", NodeKind::Siding),
            node("P2", NodeKind::Siding),
            node("M", NodeKind::Mainline),
        ],
        switch_groups: vec![SwitchGroup { id: "a".into() }, SwitchGroup { id: "b".into() }],
        routes: vec![
            route("in>P1", "in", "P1", 30, RouteKind::Inbound, &[("a", 20)]),
            route("in>P2", "in", "P2", 45, RouteKind::Inbound, &[("a", 20), ("b", 35)]),
            route("in>M", "in", "M", 30, RouteKind::Inbound, &[("a", 15)]),
            route("P1>out", "P1", "out", 30, RouteKind::Outbound, &[("b", 20)]),
            route("P2>out", "P2", "out", 45, RouteKind::Outbound, &[("b", 25), ("a", 40)]),
            route("M>out", "M", "out", 30, RouteKind::Outbound, &[("b", 15)]),
        ],
        sg_headway: 30,
        siding_headway: 30,
        interlocking_mode: InterlockingMode::SectionalRelease,
    }
}

pub fn train(id: &str, arrival: Seconds, departure: Seconds, dwell: (Seconds, Seconds), stops: bool) -> Train {
    Train {
        id: id.into(),
        origin: "in".into(),
        destination: "out".into(),
        desired_arrival: arrival,
        desired_departure: departure,
        arrival_window: ShiftWindow::new(-60, 60),
        departure_window: ShiftWindow::new(-60, 90),
        dwell_min: dwell.0,
        dwell_max: dwell.1,
        stops,
        cancellation_cost: None,
    }
}

pub fn virtual_instance(seed: u64, trains: usize) -> Instance {
    generate_virtual_station(&VirtualStationConfig { seed, trains, ..Default::default() }).unwrap()
}

/// Micro periods touched by `[from, to)`, found second by second.
pub fn periods_by_seconds(from: Seconds, to: Seconds, micro: Seconds, horizon: Seconds) -> BTreeSet<u32> {
    (from.max(0)..to.min(horizon)).map(|t| (t / micro) as u32).collect()
}

/// Linking set of `arc` recomputed from the raw station data, second by second.
pub fn simulate_links(
    station: &Station,
    arc: &StArc,
    macro_g: Seconds,
    micro_g: Seconds,
    horizon: Seconds,
) -> BTreeSet<MicroResource> {
    let mut out = BTreeSet::new();
    let siding_index = |node: &str| {
        station.nodes.iter().filter(|n| n.kind == NodeKind::Siding).position(|n| n.id == node).map(|i| i as u32)
    };
    let sg_index = |sg: &str| station.switch_groups.iter().position(|s| s.id == sg).unwrap() as u32;
    let start = arc.start as Seconds * macro_g;
    let end = arc.end as Seconds * macro_g;
    match arc.kind {
        ArcKind::Arrival | ArcKind::Departure => {
            let r = &station.routes[arc.route.unwrap() as usize];
            for o in &r.sg_occupations {
                let release = match station.interlocking_mode {
                    InterlockingMode::SectionalRelease => o.offset,
                    InterlockingMode::RouteRelease => r.running_time,
                };
                for j in periods_by_seconds(start, start + release + station.sg_headway, micro_g, horizon) {
                    out.insert(MicroResource { kind: ResourceKind::SwitchGroup, space: sg_index(&o.sg), time: j });
                }
            }
            let (node, from, to) = if arc.kind == ArcKind::Arrival {
                (&r.destination, start, end)
            } else {
                (&r.origin, start, start + station.siding_headway)
            };
            if let Some(s) = siding_index(node) {
                for j in periods_by_seconds(from, to, micro_g, horizon) {
                    out.insert(MicroResource { kind: ResourceKind::Siding, space: s, time: j });
                }
            }
        }
        ArcKind::SidingWait => {
            let platforming::network::StNode::Physical(n) = arc.start_node else { unreachable!() };
            let s = siding_index(&station.nodes[n as usize].id).unwrap();
            for j in periods_by_seconds(start, end, micro_g, horizon) {
                out.insert(MicroResource { kind: ResourceKind::Siding, space: s, time: j });
            }
        }
        _ => {}
    }
    out
}

/// Every dwell-feasible source-to-sink path, by exhaustive recursion.
pub fn all_paths(tn: &TrainNetwork) -> Vec<Vec<u32>> {
    fn rec(tn: &TrainNetwork, v: u32, waits: u32, at_siding: bool, path: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if v == tn.sink {
            out.push(path.clone());
            return;
        }
        for (g, a) in tn.arcs.iter().enumerate() {
            if a.from != v || a.kind == ArcKind::VirtualPath {
                continue;
            }
            let (w, s) = match a.kind {
                ArcKind::Arrival => (0, tn.siding_vertex[a.to as usize]),
                ArcKind::SidingWait => (waits + 1, true),
                ArcKind::Departure => (0, false),
                _ => (0, false),
            };
            if a.kind == ArcKind::SidingWait && w > tn.dwell_max {
                continue;
            }
            if a.kind == ArcKind::Departure && at_siding && waits < tn.dwell_min {
                continue;
            }
            path.push(g as u32);
            rec(tn, a.to, w, s, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    rec(tn, tn.source, 0, false, &mut Vec::new(), &mut out);
    out
}

pub fn path_cost(costs: &[f64], path: &[u32]) -> f64 {
    path.iter().map(|&g| costs[g as usize]).sum()
}
