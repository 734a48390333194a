//! Train paths, solutions and the objective.

use crate::error::{Error, Result};
use crate::infrastructure::Seconds;
use crate::network::{ArcKind, SpaceTimeNetwork};
use crate::timetable::Weights;

/// Either a cancelled train or the arc ids of a source-to-sink path in the
/// train's macroscopic network, in traversal order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TrainPath {
    Cancelled,
    Scheduled(Vec<u32>),
}

impl TrainPath {
    pub fn is_cancelled(&self) -> bool {
        matches!(self, TrainPath::Cancelled)
    }

    pub fn arcs(&self) -> &[u32] {
        match self {
            TrainPath::Cancelled => &[],
            TrainPath::Scheduled(a) => a,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Solution {
    pub paths: Vec<TrainPath>,
}

impl Solution {
    pub fn all_cancelled(trains: usize) -> Self {
        Self { paths: vec![TrainPath::Cancelled; trains] }
    }

    pub fn cancelled_count(&self) -> usize {
        self.paths.iter().filter(|p| p.is_cancelled()).count()
    }
}

/// Arrival and departure times with their signed shifts, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftComponents {
    pub arrival: Seconds,
    pub departure: Seconds,
    pub arrival_shift: Seconds,
    pub departure_shift: Seconds,
    /// Station travel time counted by the objective.
    pub travel_time: Seconds,
}

/// Checks that `path` is a connected source-to-sink walk in the train's network.
pub fn validate_path(net: &SpaceTimeNetwork, train: usize, path: &TrainPath) -> Result<()> {
    let arcs = match path {
        TrainPath::Cancelled => return Ok(()),
        TrainPath::Scheduled(a) => a,
    };
    let b = &net.blocks[train];
    let fail = |reason: String| Error::InvalidPath { train: net.trains[train].id.clone(), reason };
    if arcs.is_empty() {
        return Err(fail("empty path".into()));
    }
    let mut at = b.source;
    let mut dwell = 0;
    for &g in arcs {
        let a = b.arcs.get(g as usize).ok_or_else(|| fail(format!("arc {g} does not exist")))?;
        if a.kind == ArcKind::VirtualPath {
            return Err(fail("virtual arc inside a scheduled path".into()));
        }
        if a.from != at {
            return Err(fail(format!("arc {g} does not continue the path")));
        }
        match a.kind {
            ArcKind::SidingWait => {
                dwell += 1;
                if dwell > b.dwell_max {
                    return Err(fail("dwell exceeds the maximum".into()));
                }
            }
            ArcKind::Departure => {
                if b.siding_vertex[at as usize] && dwell < b.dwell_min {
                    return Err(fail("dwell below the minimum".into()));
                }
                dwell = 0;
            }
            _ => dwell = 0,
        }
        at = a.to;
    }
    if at != b.sink {
        return Err(fail("path does not reach the sink".into()));
    }
    Ok(())
}

pub fn path_cost(net: &SpaceTimeNetwork, train: usize, path: &TrainPath, weights: &Weights) -> f64 {
    match path {
        TrainPath::Cancelled => net.cancellation_cost(train, weights),
        TrainPath::Scheduled(arcs) => arcs.iter().map(|&g| net.raw_arc_cost(train, g, weights)).sum(),
    }
}

/// Total objective: weighted travel time and shifts plus cancellation costs.
pub fn objective_value(net: &SpaceTimeNetwork, solution: &Solution, weights: &Weights) -> f64 {
    solution.paths.iter().enumerate().map(|(f, p)| path_cost(net, f, p, weights)).sum()
}

pub fn shift_components(net: &SpaceTimeNetwork, train: usize, path: &TrainPath) -> Result<ShiftComponents> {
    let t = &net.trains[train];
    let arcs = match path {
        TrainPath::Cancelled => return Err(Error::Cancelled(t.id.clone())),
        TrainPath::Scheduled(a) => a,
    };
    let mut arrival = None;
    let mut departure = None;
    let mut travel = 0;
    for &g in arcs {
        let a = net.arc(train, g);
        match a.kind {
            ArcKind::Arrival => arrival = Some(net.grid.macro_seconds(a.end)),
            ArcKind::Departure => departure = Some(net.grid.macro_seconds(a.start)),
            _ => {}
        }
        travel += a.running_time;
    }
    let missing = |what: &str| Error::InvalidPath { train: t.id.clone(), reason: format!("no {what} arc") };
    let arrival = arrival.ok_or_else(|| missing("arrival"))?;
    let departure = departure.ok_or_else(|| missing("departure"))?;
    Ok(ShiftComponents {
        arrival,
        departure,
        arrival_shift: arrival - t.desired_arrival,
        departure_shift: departure - t.desired_departure,
        travel_time: travel,
    })
}
