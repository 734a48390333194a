//! Built-in station topologies and synthetic timetables.
//!
//! Both generators share one two-line, double-ended layout: lines A and B run
//! through the station in both directions, each line with a down and an up
//! mainline. Sidings sit in an upper group (reached from line A) and a lower
//! group (reached from line B); reaching the other group crosses over.
//! Switch groups on the left throat are odd, on the right throat even.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::infrastructure::{
    InterlockingMode, NodeKind, PhysicalNode, PhysicalRoute, RouteKind, Seconds, SgOccupation, Station, SwitchGroup,
};
use crate::io::Instance;
use crate::network::TimeGrid;
use crate::timetable::{ShiftWindow, Train, Weights};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Line {
    A,
    B,
}

impl Line {
    fn name(self) -> &'static str {
        match self {
            Line::A => "A",
            Line::B => "B",
        }
    }
}

fn side_name(s: Side) -> &'static str {
    match s {
        Side::Left => "L",
        Side::Right => "R",
    }
}

/// Switch group numbers: entry, exit, upper ladder, lower ladder, crossover.
fn sg_entry(side: Side, line: Line) -> u32 {
    match (side, line) {
        (Side::Left, Line::A) => 1,
        (Side::Left, Line::B) => 5,
        (Side::Right, Line::A) => 2,
        (Side::Right, Line::B) => 6,
    }
}

fn sg_exit(side: Side, line: Line) -> u32 {
    sg_entry(side, line) + 2
}

fn sg_ladder(side: Side, line: Line) -> u32 {
    let base = if side == Side::Left { 9 } else { 10 };
    if line == Line::A { base } else { base + 2 }
}

fn sg_crossover(side: Side) -> u32 {
    if side == Side::Left { 13 } else { 14 }
}

fn sg(n: u32) -> String {
    format!("SG{n}")
}

/// Down trains enter on the left; up trains on the right.
fn mainline(line: Line, entering: Side) -> String {
    let dir = if entering == Side::Left { "dn" } else { "up" };
    format!("M{}_{dir}", line.name())
}

fn boundary(side: Side, line: Line, inbound: bool) -> String {
    format!("{}_{}_{}", side_name(side), line.name(), if inbound { "in" } else { "out" })
}

/// Builds the layout with `upper` sidings reached from line A and `lower`
/// sidings reached from line B.
pub fn station_layout(upper: usize, lower: usize, sg_headway: Seconds, siding_headway: Seconds) -> Station {
    let mut nodes = Vec::new();
    let lines = [Line::A, Line::B];
    let sides = [Side::Left, Side::Right];
    for side in sides {
        for line in lines {
            nodes.push(PhysicalNode { id: boundary(side, line, true), kind: NodeKind::Entering });
            nodes.push(PhysicalNode { id: boundary(side, line, false), kind: NodeKind::Leaving });
        }
    }
    for line in lines {
        for side in sides {
            nodes.push(PhysicalNode { id: mainline(line, side), kind: NodeKind::Mainline });
        }
    }
    // (id, group line, position from the mainline starting at 1)
    let mut sidings = Vec::new();
    for k in 1..=upper {
        sidings.push((format!("S{}", sidings.len() + 1), Line::A, k));
    }
    for k in 1..=lower {
        sidings.push((format!("S{}", sidings.len() + 1), Line::B, k));
    }
    for (id, _, _) in &sidings {
        nodes.push(PhysicalNode { id: id.clone(), kind: NodeKind::Siding });
    }
    let switch_groups = (1..=14).map(|n| SwitchGroup { id: sg(n) }).collect();

    let occ = |list: &[(u32, Seconds)]| -> Vec<SgOccupation> {
        list.iter().map(|&(n, offset)| SgOccupation { sg: sg(n), offset }).collect()
    };
    let mut routes = Vec::new();
    for side in sides {
        for line in lines {
            let entering = boundary(side, line, true);
            let leaving = boundary(side, line, false);
            // Mainline passes, in the direction of trains entering on `side`.
            let ml = mainline(line, side);
            routes.push(PhysicalRoute {
                id: format!("{entering}>{ml}"),
                origin: entering.clone(),
                destination: ml.clone(),
                running_time: 50,
                kind: RouteKind::Inbound,
                sg_occupations: occ(&[(sg_entry(side, line), 25)]),
            });
            let other = if side == Side::Left { Side::Right } else { Side::Left };
            let ml_out = mainline(line, other);
            routes.push(PhysicalRoute {
                id: format!("{ml_out}>{leaving}"),
                origin: ml_out,
                destination: leaving.clone(),
                running_time: 50,
                kind: RouteKind::Outbound,
                sg_occupations: occ(&[(sg_exit(side, line), 25)]),
            });
            for (sid, group, k) in &sidings {
                let sections = k.div_ceil(2) as Seconds;
                let mut list = vec![(sg_entry(side, line), 20)];
                if *group != line {
                    list.push((sg_crossover(side), 45));
                }
                let last = list.last().unwrap().1;
                list.push((sg_ladder(side, *group), last + 25 * sections));
                let rt = list.last().unwrap().1 + 35;
                routes.push(PhysicalRoute {
                    id: format!("{entering}>{sid}"),
                    origin: entering.clone(),
                    destination: sid.clone(),
                    running_time: rt,
                    kind: RouteKind::Inbound,
                    sg_occupations: occ(&list),
                });

                let mut list = vec![(sg_ladder(side, *group), 30 + 25 * (sections - 1))];
                if *group != line {
                    list.push((sg_crossover(side), list[0].1 + 25));
                }
                let last = list.last().unwrap().1;
                list.push((sg_exit(side, line), last + 25));
                let rt = list.last().unwrap().1 + 20;
                routes.push(PhysicalRoute {
                    id: format!("{sid}>{leaving}"),
                    origin: sid.clone(),
                    destination: leaving.clone(),
                    running_time: rt,
                    kind: RouteKind::Outbound,
                    sg_occupations: occ(&list),
                });
            }
        }
    }
    Station {
        nodes,
        switch_groups,
        routes,
        sg_headway,
        siding_headway,
        interlocking_mode: InterlockingMode::SectionalRelease,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VirtualStationConfig {
    pub seed: u64,
    pub trains: usize,
    pub horizon: Seconds,
    pub granularity: Seconds,
    pub headway: Seconds,
    pub stop_probability: f64,
    pub arrival_window: ShiftWindow,
    pub departure_window: ShiftWindow,
    /// Dwell allowed beyond the planned one.
    pub extra_dwell: Seconds,
}

impl Default for VirtualStationConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trains: 8,
            horizon: 2400,
            granularity: 15,
            headway: 30,
            stop_probability: 0.75,
            arrival_window: ShiftWindow::new(-60, 120),
            departure_window: ShiftWindow::new(-60, 180),
            extra_dwell: 120,
        }
    }
}

/// Longest route of the layout, used to keep windows inside the horizon.
fn longest_route(station: &Station, kind: RouteKind) -> Seconds {
    station.routes.iter().filter(|r| r.kind == kind).map(|r| r.running_time).max().unwrap_or(0)
}

#[allow(clippy::too_many_arguments)]
fn draw_train<R: Rng>(
    rng: &mut R,
    id: String,
    arrival: Seconds,
    planned_dwell: Option<Seconds>,
    extra_dwell: Seconds,
    arrival_window: ShiftWindow,
    departure_window: ShiftWindow,
) -> Train {
    let entering = if rng.gen_bool(0.5) { Side::Left } else { Side::Right };
    let leaving = if entering == Side::Left { Side::Right } else { Side::Left };
    let line_in = if rng.gen_bool(0.5) { Line::A } else { Line::B };
    let line_out = if rng.gen_bool(0.8) { line_in } else if line_in == Line::A { Line::B } else { Line::A };
    let (stops, dwell_min, dwell_max, dwell) = match planned_dwell {
        Some(d) => (true, d, d + extra_dwell, d),
        None => (false, 0, extra_dwell, 0),
    };
    Train {
        id,
        origin: boundary(entering, line_in, true),
        destination: boundary(leaving, line_out, false),
        desired_arrival: arrival,
        desired_departure: arrival + dwell,
        arrival_window,
        departure_window,
        dwell_min,
        dwell_max,
        stops,
        cancellation_cost: None,
    }
}

/// Small four-siding station with a random timetable.
pub fn generate_virtual_station(cfg: &VirtualStationConfig) -> Result<Instance> {
    if cfg.trains == 0 {
        return Err(Error::Scenario("at least one train is required".into()));
    }
    let station = station_layout(2, 2, cfg.headway, cfg.headway);
    let grid = TimeGrid::new(cfg.horizon, cfg.granularity, cfg.granularity);
    grid.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dwells = [60, 90, 120, 180];
    let g = cfg.granularity;
    let lead = -cfg.arrival_window.earliest + longest_route(&station, RouteKind::Inbound);
    let tail = cfg.departure_window.latest + longest_route(&station, RouteKind::Outbound);
    let lo = (lead + g - 1) / g;
    let mut trains = Vec::with_capacity(cfg.trains);
    for i in 0..cfg.trains {
        let dwell = rng.gen_bool(cfg.stop_probability).then(|| *dwells.choose(&mut rng).unwrap());
        let hi = (cfg.horizon - tail - dwell.unwrap_or(0)) / g;
        if hi < lo {
            return Err(Error::InvalidGrid(format!(
                "horizon {} is too short for a train with windows {:?}/{:?}",
                cfg.horizon, cfg.arrival_window, cfg.departure_window
            )));
        }
        let arrival = rng.gen_range(lo..=hi) * g;
        trains.push(draw_train(
            &mut rng,
            format!("T{:02}", i + 1),
            arrival,
            dwell,
            cfg.extra_dwell,
            cfg.arrival_window,
            cfg.departure_window,
        ));
    }
    trains.sort_by(|a, b| (a.desired_arrival, &a.id).cmp(&(b.desired_arrival, &b.id)));
    Ok(Instance {
        name: Some(format!("virtual-{}-s{}", cfg.trains, cfg.seed)),
        station,
        grid,
        trains,
        weights: Weights::default(),
        balance: None,
        outages: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LargeStationConfig {
    pub seed: u64,
    pub trains: usize,
    pub horizon: Seconds,
    pub granularity: Seconds,
    pub headway: Seconds,
    pub arrival_window: ShiftWindow,
    pub departure_window: ShiftWindow,
    pub extra_dwell: Seconds,
}

impl Default for LargeStationConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trains: 287,
            horizon: 86_400,
            granularity: 15,
            headway: 30,
            arrival_window: ShiftWindow::new(-600, 600),
            departure_window: ShiftWindow::new(-600, 600),
            extra_dwell: 300,
        }
    }
}

/// Thirteen-siding station with a synthetic timetable: two traffic peaks,
/// mostly short stops, some long layovers and a few passing trains.
pub fn generate_large_station(cfg: &LargeStationConfig) -> Result<Instance> {
    if cfg.trains == 0 {
        return Err(Error::Scenario("at least one train is required".into()));
    }
    let station = station_layout(7, 6, cfg.headway, cfg.headway);
    let grid = TimeGrid::new(cfg.horizon, cfg.granularity, cfg.granularity);
    grid.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let g = cfg.granularity;
    let lead = -cfg.arrival_window.earliest + longest_route(&station, RouteKind::Inbound);
    let tail = cfg.departure_window.latest + longest_route(&station, RouteKind::Outbound);
    let h = cfg.horizon as f64;
    let mut trains = Vec::with_capacity(cfg.trains);
    for i in 0..cfg.trains {
        let kind: f64 = rng.gen();
        let dwell = if kind < 0.65 {
            Some(*[120, 180, 240, 300].choose(&mut rng).unwrap())
        } else if kind < 0.9 {
            Some(*[600, 900, 1200].choose(&mut rng).unwrap())
        } else {
            None
        };
        let lo = (lead + g - 1) / g;
        let hi = (cfg.horizon - tail - dwell.unwrap_or(0)) / g;
        if hi < lo {
            return Err(Error::InvalidGrid(format!("horizon {} is too short", cfg.horizon)));
        }
        // Background traffic plus morning and evening peaks.
        let t = match rng.gen_range(0..10) {
            0..=3 => rng.gen_range(0.0..h),
            4..=6 => 0.32 * h + (rng.gen::<f64>() + rng.gen::<f64>() - 1.0) * 0.1 * h,
            _ => 0.74 * h + (rng.gen::<f64>() + rng.gen::<f64>() - 1.0) * 0.12 * h,
        };
        let arrival = ((t / g as f64).round() as Seconds).clamp(lo, hi) * g;
        trains.push(draw_train(
            &mut rng,
            format!("T{:03}", i + 1),
            arrival,
            dwell,
            cfg.extra_dwell,
            cfg.arrival_window,
            cfg.departure_window,
        ));
    }
    trains.sort_by(|a, b| (a.desired_arrival, &a.id).cmp(&(b.desired_arrival, &b.id)));
    Ok(Instance {
        name: Some(format!("large-{}-s{} (synthetic)", cfg.trains, cfg.seed)),
        station,
        grid,
        trains,
        weights: Weights::default(),
        balance: None,
        outages: Vec::new(),
    })
}
