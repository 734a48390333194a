//! Solution files: one row per train plus totals and bounds.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infrastructure::Seconds;
use crate::network::{ArcKind, SpaceTimeNetwork};
use crate::solution::{path_cost, shift_components, validate_path, Solution, TrainPath};
use crate::timetable::Weights;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainStatus {
    Scheduled,
    Cancelled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRow {
    pub id: String,
    pub status: TrainStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub platform: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrival: Option<Seconds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub departure: Option<Seconds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inbound_route: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outbound_route: Option<String>,
    #[serde(default)]
    pub arrival_shift: Seconds,
    #[serde(default)]
    pub departure_shift: Seconds,
    #[serde(default)]
    pub travel_time: Seconds,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub travel: Seconds,
    pub shift: Seconds,
    pub cancellations: usize,
    pub objective: f64,
}

/// Solver statistics attached to a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
    pub upper_bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    pub iterations: usize,
    pub wall_time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub termination: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub weights: Weights,
    pub trains: Vec<TrainRow>,
    pub totals: Totals,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<SolveSummary>,
}

impl SolutionFile {
    pub fn from_solution(
        net: &SpaceTimeNetwork,
        solution: &Solution,
        weights: &Weights,
        bounds: Option<SolveSummary>,
    ) -> Result<Self> {
        let mut rows = Vec::with_capacity(solution.paths.len());
        for (f, p) in solution.paths.iter().enumerate() {
            validate_path(net, f, p)?;
            let id = net.trains[f].id.clone();
            let cost = path_cost(net, f, p, weights);
            let row = match p {
                TrainPath::Cancelled => TrainRow {
                    id,
                    status: TrainStatus::Cancelled,
                    platform: None,
                    arrival: None,
                    departure: None,
                    inbound_route: None,
                    outbound_route: None,
                    arrival_shift: 0,
                    departure_shift: 0,
                    travel_time: 0,
                    cost,
                },
                TrainPath::Scheduled(arcs) => {
                    let s = shift_components(net, f, p)?;
                    let route_of = |kind: ArcKind| {
                        arcs.iter()
                            .map(|&g| net.arc(f, g))
                            .find(|a| a.kind == kind)
                            .and_then(|a| a.route)
                            .map(|r| net.index.routes[r as usize].id.clone())
                    };
                    let platform = arcs
                        .iter()
                        .find_map(|&g| {
                            let a = net.arc(f, g);
                            (a.kind == ArcKind::Arrival).then(|| a.stop_node()).flatten()
                        })
                        .map(|n| net.index.node_ids[n as usize].clone());
                    TrainRow {
                        id,
                        status: TrainStatus::Scheduled,
                        platform,
                        arrival: Some(s.arrival),
                        departure: Some(s.departure),
                        inbound_route: route_of(ArcKind::Arrival),
                        outbound_route: route_of(ArcKind::Departure),
                        arrival_shift: s.arrival_shift,
                        departure_shift: s.departure_shift,
                        travel_time: s.travel_time,
                        cost,
                    }
                }
            };
            rows.push(row);
        }
        let totals = Totals::of(&rows);
        Ok(Self { weights: *weights, trains: rows, totals, bounds })
    }

    /// Rebuilds the per-train paths in `net` from the rows.
    pub fn to_solution(&self, net: &SpaceTimeNetwork) -> Result<Solution> {
        if self.trains.len() != net.train_count() {
            return Err(Error::SolutionFile(format!(
                "{} rows for {} trains",
                self.trains.len(),
                net.train_count()
            )));
        }
        let mut paths = Vec::with_capacity(self.trains.len());
        for (f, row) in self.trains.iter().enumerate() {
            if row.id != net.trains[f].id {
                return Err(Error::SolutionFile(format!("row {f} is `{}`, expected `{}`", row.id, net.trains[f].id)));
            }
            paths.push(match row.status {
                TrainStatus::Cancelled => TrainPath::Cancelled,
                TrainStatus::Scheduled => rebuild_path(net, f, row)?,
            });
        }
        Ok(Solution { paths })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    /// Plain-text table of the plan and its totals.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<8} {:<10} {:<8} {:>8} {:>8} {:>7} {:>7} {:>10}",
            "train", "status", "track", "arrive", "depart", "d_arr", "d_dep", "cost"
        );
        for r in &self.trains {
            let status = match r.status {
                TrainStatus::Scheduled => "scheduled",
                TrainStatus::Cancelled => "cancelled",
            };
            let _ = writeln!(
                s,
                "{:<8} {:<10} {:<8} {:>8} {:>8} {:>7} {:>7} {:>10.1}",
                r.id,
                status,
                r.platform.as_deref().unwrap_or("-"),
                r.arrival.map_or("-".into(), clock),
                r.departure.map_or("-".into(), clock),
                r.arrival_shift,
                r.departure_shift,
                r.cost
            );
        }
        let t = &self.totals;
        let _ = writeln!(
            s,
            "travel {} s, shift {} s, cancelled {}, objective {:.1}",
            t.travel, t.shift, t.cancellations, t.objective
        );
        if let Some(b) = &self.bounds {
            let _ = write!(s, "{}: UB {:.1}", b.method, b.upper_bound);
            if let Some(lb) = b.lower_bound {
                let _ = write!(s, ", LB {lb:.1}");
            }
            if let Some(g) = b.gap {
                let _ = write!(s, ", gap {:.2}%", 100.0 * g);
            }
            let _ = writeln!(s, ", {} iterations, {:.2} s", b.iterations, b.wall_time_s);
        }
        s
    }
}

impl Totals {
    pub fn of(rows: &[TrainRow]) -> Self {
        Self {
            travel: rows.iter().map(|r| r.travel_time).sum(),
            shift: rows.iter().map(|r| r.arrival_shift.abs() + r.departure_shift.abs()).sum(),
            cancellations: rows.iter().filter(|r| r.status == TrainStatus::Cancelled).count(),
            objective: rows.iter().map(|r| r.cost).sum(),
        }
    }
}

fn clock(t: Seconds) -> String {
    format!("{:02}:{:02}:{:02}", t / 3600, t / 60 % 60, t % 60)
}

fn rebuild_path(net: &SpaceTimeNetwork, f: usize, row: &TrainRow) -> Result<TrainPath> {
    let b = &net.blocks[f];
    let missing = |what: &str| Error::SolutionFile(format!("train `{}`: {what}", row.id));
    let (Some(arr), Some(dep), Some(rin), Some(rout)) =
        (row.arrival, row.departure, row.inbound_route.as_deref(), row.outbound_route.as_deref())
    else {
        return Err(missing("scheduled row lacks times or routes"));
    };
    let rin = net.index.route(rin).ok_or_else(|| missing("unknown inbound route"))?;
    let rout = net.index.route(rout).ok_or_else(|| missing("unknown outbound route"))?;
    let g = net.grid.macro_granularity;
    if arr % g != 0 || dep % g != 0 {
        return Err(missing("times are not on the grid"));
    }
    let (a, q) = ((arr / g) as u32, (dep / g) as u32);
    let find = |pred: &dyn Fn(&crate::network::StArc) -> bool| {
        b.arcs.iter().position(pred).map(|i| i as u32)
    };
    let ga = find(&|x| x.kind == ArcKind::Arrival && x.route == Some(rin) && x.end == a)
        .ok_or_else(|| missing("arrival is not in the network"))?;
    let gd = find(&|x| x.kind == ArcKind::Departure && x.route == Some(rout) && x.start == q)
        .ok_or_else(|| missing("departure is not in the network"))?;
    let arrival = &b.arcs[ga as usize];
    let departure = &b.arcs[gd as usize];
    let mut arcs = Vec::new();
    arcs.push(
        find(&|x| x.kind == ArcKind::Source && x.to == arrival.from).ok_or_else(|| missing("no source arc"))?,
    );
    arcs.push(ga);
    let mut at = arrival.to;
    while at != departure.from {
        let w = b
            .out_arcs(at)
            .iter()
            .copied()
            .find(|&w| b.arcs[w as usize].kind == ArcKind::SidingWait)
            .ok_or_else(|| missing("dwell cannot be rebuilt"))?;
        arcs.push(w);
        at = b.arcs[w as usize].to;
    }
    arcs.push(gd);
    arcs.push(find(&|x| x.kind == ArcKind::Sink && x.from == departure.to).ok_or_else(|| missing("no sink arc"))?);
    let path = TrainPath::Scheduled(arcs);
    validate_path(net, f, &path)?;
    Ok(path)
}
