//! Two-level space-time network.
//!
//! The macroscopic level holds, for every train, a small time-expanded DAG of
//! source, arrival, siding-wait, departure and sink arcs (plus the virtual
//! cancellation arc). The microscopic level is a dense index of switch-group
//! and siding resources, one per micro period. Every macroscopic arc carries its
//! linking set: the microscopic resources it locks, actually or implicitly.
//!
//! Mixed granularities: a micro resource belongs to a linking set iff its
//! half-open interval `[j * micro, (j + 1) * micro)` intersects the real-time
//! interval that defines the set.

use std::collections::HashMap;
use std::io::Write;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infrastructure::{InterlockingMode, NodeKind, RouteKind, Seconds, Station};
use crate::solution::{Solution, TrainPath};
use crate::timetable::{Train, Weights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub horizon: Seconds,
    pub macro_granularity: Seconds,
    pub micro_granularity: Seconds,
}

impl TimeGrid {
    pub fn new(horizon: Seconds, macro_granularity: Seconds, micro_granularity: Seconds) -> Self {
        Self { horizon, macro_granularity, micro_granularity }
    }

    pub fn validate(&self) -> Result<()> {
        if self.macro_granularity <= 0 || self.micro_granularity <= 0 {
            return Err(Error::InvalidGrid("granularities must be positive".into()));
        }
        if self.horizon <= 0
            || self.horizon % self.macro_granularity != 0
            || self.horizon % self.micro_granularity != 0
        {
            return Err(Error::InvalidGrid(format!(
                "horizon {} must be a positive multiple of both granularities ({}, {})",
                self.horizon, self.macro_granularity, self.micro_granularity
            )));
        }
        if self.macro_granularity % self.micro_granularity != 0 {
            return Err(Error::InvalidGrid(format!(
                "macro granularity {} must be a multiple of micro granularity {}",
                self.macro_granularity, self.micro_granularity
            )));
        }
        Ok(())
    }

    pub fn macro_periods(&self) -> u32 {
        (self.horizon / self.macro_granularity) as u32
    }

    pub fn micro_periods(&self) -> u32 {
        (self.horizon / self.micro_granularity) as u32
    }

    /// Seconds at the start of macro period `t`.
    pub fn macro_seconds(&self, t: u32) -> Seconds {
        t as Seconds * self.macro_granularity
    }

    /// Whole macro periods needed to cover `seconds` (rounded up).
    pub fn periods_ceil(&self, seconds: Seconds) -> u32 {
        div_ceil(seconds, self.macro_granularity).max(0) as u32
    }

    /// Micro periods whose interval intersects `[from, to)`, clipped to the horizon.
    pub fn micro_cover(&self, from: Seconds, to: Seconds) -> Range<u32> {
        if to <= from {
            return 0..0;
        }
        let g = self.micro_granularity;
        let lo = from.div_euclid(g).max(0);
        let hi = div_ceil(to, g).min(self.micro_periods() as Seconds);
        if hi <= lo {
            0..0
        } else {
            lo as u32..hi as u32
        }
    }
}

fn div_ceil(a: Seconds, b: Seconds) -> Seconds {
    -((-a).div_euclid(b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceKind {
    SwitchGroup,
    Siding,
}

/// A microscopic space-time resource: one switch group or siding during one
/// micro period. `space` indexes the station's switch groups or sidings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MicroResource {
    pub kind: ResourceKind,
    pub space: u32,
    pub time: u32,
}

/// Dense index of a [`MicroResource`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResourceId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceSpace {
    pub switch_groups: u32,
    pub sidings: u32,
    pub micro_periods: u32,
}

impl ResourceSpace {
    pub fn len(&self) -> usize {
        (self.switch_groups + self.sidings) as usize * self.micro_periods as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn id(&self, r: MicroResource) -> ResourceId {
        let row = match r.kind {
            ResourceKind::SwitchGroup => r.space,
            ResourceKind::Siding => self.switch_groups + r.space,
        };
        ResourceId(row * self.micro_periods + r.time)
    }

    pub fn resource(&self, id: ResourceId) -> MicroResource {
        let row = id.0 / self.micro_periods;
        let time = id.0 % self.micro_periods;
        if row < self.switch_groups {
            MicroResource { kind: ResourceKind::SwitchGroup, space: row, time }
        } else {
            MicroResource { kind: ResourceKind::Siding, space: row - self.switch_groups, time }
        }
    }

    pub fn is_switch_group(&self, id: ResourceId) -> bool {
        id.0 / self.micro_periods < self.switch_groups
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedRoute {
    pub id: String,
    pub origin: u32,
    pub destination: u32,
    pub running_time: Seconds,
    pub kind: RouteKind,
    /// `(switch group index, sectional-release offset)`.
    pub sgs: Vec<(u32, Seconds)>,
}

/// A validated station with string ids resolved to dense indices.
#[derive(Debug, Clone)]
pub struct StationIndex {
    pub node_ids: Vec<String>,
    pub node_kinds: Vec<NodeKind>,
    node_lookup: HashMap<String, u32>,
    pub sg_ids: Vec<String>,
    /// Siding index of each node, `None` for non-siding nodes.
    pub siding_of_node: Vec<Option<u32>>,
    /// Node index of each siding.
    pub siding_nodes: Vec<u32>,
    pub routes: Vec<ResolvedRoute>,
    route_lookup: HashMap<String, u32>,
    pub sg_headway: Seconds,
    pub siding_headway: Seconds,
    pub mode: InterlockingMode,
}

impl StationIndex {
    pub fn new(station: &Station) -> Result<Self> {
        station.ensure_valid()?;
        let node_ids: Vec<String> = station.nodes.iter().map(|n| n.id.clone()).collect();
        let node_kinds: Vec<NodeKind> = station.nodes.iter().map(|n| n.kind).collect();
        let node_lookup: HashMap<String, u32> =
            node_ids.iter().enumerate().map(|(i, id)| (id.clone(), i as u32)).collect();
        let sg_ids: Vec<String> = station.switch_groups.iter().map(|s| s.id.clone()).collect();
        let sg_lookup: HashMap<&str, u32> =
            sg_ids.iter().enumerate().map(|(i, id)| (id.as_str(), i as u32)).collect();
        let mut siding_of_node = vec![None; node_ids.len()];
        let mut siding_nodes = Vec::new();
        for (i, k) in node_kinds.iter().enumerate() {
            if *k == NodeKind::Siding {
                siding_of_node[i] = Some(siding_nodes.len() as u32);
                siding_nodes.push(i as u32);
            }
        }
        let routes: Vec<ResolvedRoute> = station
            .routes
            .iter()
            .map(|r| ResolvedRoute {
                id: r.id.clone(),
                origin: node_lookup[&r.origin],
                destination: node_lookup[&r.destination],
                running_time: r.running_time,
                kind: r.kind,
                sgs: r.sg_occupations.iter().map(|o| (sg_lookup[o.sg.as_str()], o.offset)).collect(),
            })
            .collect();
        let route_lookup = routes.iter().enumerate().map(|(i, r)| (r.id.clone(), i as u32)).collect();
        Ok(Self {
            node_ids,
            node_kinds,
            node_lookup,
            sg_ids,
            siding_of_node,
            siding_nodes,
            routes,
            route_lookup,
            sg_headway: station.sg_headway,
            siding_headway: station.siding_headway,
            mode: station.interlocking_mode,
        })
    }

    pub fn node(&self, id: &str) -> Option<u32> {
        self.node_lookup.get(id).copied()
    }

    pub fn route(&self, id: &str) -> Option<u32> {
        self.route_lookup.get(id).copied()
    }

    pub fn sidings(&self) -> usize {
        self.siding_nodes.len()
    }

    /// Release offset of the `k`-th switch group of `route` in this station's mode.
    pub fn effective_offset(&self, route: &ResolvedRoute, k: usize) -> Seconds {
        match self.mode {
            InterlockingMode::SectionalRelease => route.sgs[k].1,
            InterlockingMode::RouteRelease => route.running_time,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcKind {
    Source,
    Sink,
    Arrival,
    Departure,
    SidingWait,
    VirtualPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StNode {
    Source,
    Sink,
    Physical(u32),
}

/// A macroscopic space-time arc. Times are macro periods.
#[derive(Debug, Clone, PartialEq)]
pub struct StArc {
    pub kind: ArcKind,
    pub route: Option<u32>,
    pub start_node: StNode,
    pub end_node: StNode,
    pub start: u32,
    pub end: u32,
    /// Seconds counted as travel time in the objective.
    pub running_time: Seconds,
    pub from: u32,
    pub to: u32,
}

impl StArc {
    /// Stop point touched by the arc: destination of an arrival, origin of a
    /// departure, or the waiting node.
    pub fn stop_node(&self) -> Option<u32> {
        match (self.kind, self.start_node, self.end_node) {
            (ArcKind::Arrival, _, StNode::Physical(n)) => Some(n),
            (ArcKind::Departure | ArcKind::SidingWait, StNode::Physical(n), _) => Some(n),
            _ => None,
        }
    }
}

/// Linking sets of one macroscopic arc, as explicit resources.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkSets {
    /// Switch-group resources locked by an arrival or departure arc.
    pub phi_sg: Vec<MicroResource>,
    /// Siding resources locked while an arrival's inbound route is run.
    pub phi_st: Vec<MicroResource>,
    /// Siding resources implicitly held for the headway after a departure.
    pub implicit_siding: Vec<MicroResource>,
    /// Siding resources actually occupied by a waiting arc.
    pub phi_ss: Vec<MicroResource>,
}

impl LinkSets {
    pub fn all(&self) -> impl Iterator<Item = &MicroResource> {
        self.phi_sg
            .iter()
            .chain(&self.phi_st)
            .chain(&self.implicit_siding)
            .chain(&self.phi_ss)
    }
}

/// Computes the linking sets of `arc` from scratch.
pub fn linking_sets(arc: &StArc, station: &StationIndex, grid: &TimeGrid) -> LinkSets {
    let mut out = LinkSets::default();
    let push_sg = |out: &mut LinkSets, route: &ResolvedRoute, base: Seconds| {
        for (k, &(sg, _)) in route.sgs.iter().enumerate() {
            let end = base + station.effective_offset(route, k) + station.sg_headway;
            for j in grid.micro_cover(base, end) {
                out.phi_sg.push(MicroResource { kind: ResourceKind::SwitchGroup, space: sg, time: j });
            }
        }
    };
    let siding = |node: u32, from: Seconds, to: Seconds| -> Vec<MicroResource> {
        match station.siding_of_node[node as usize] {
            Some(s) => grid
                .micro_cover(from, to)
                .map(|j| MicroResource { kind: ResourceKind::Siding, space: s, time: j })
                .collect(),
            None => Vec::new(),
        }
    };
    match arc.kind {
        ArcKind::Arrival => {
            let route = &station.routes[arc.route.expect("arrival arc has a route") as usize];
            let base = grid.macro_seconds(arc.start);
            push_sg(&mut out, route, base);
            out.phi_st = siding(route.destination, base, grid.macro_seconds(arc.end));
        }
        ArcKind::Departure => {
            let route = &station.routes[arc.route.expect("departure arc has a route") as usize];
            let base = grid.macro_seconds(arc.start);
            push_sg(&mut out, route, base);
            out.implicit_siding = siding(route.origin, base, base + station.siding_headway);
        }
        ArcKind::SidingWait => {
            if let StNode::Physical(n) = arc.start_node {
                out.phi_ss = siding(n, grid.macro_seconds(arc.start), grid.macro_seconds(arc.end));
            }
        }
        _ => {}
    }
    out
}

/// A siding taken out of service for `[from, until)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackOutage {
    pub node: String,
    pub from: Seconds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub until: Option<Seconds>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vertex {
    pub node: StNode,
    pub time: u32,
}

/// The macroscopic network of one train, with precomputed linking sets.
/// Vertices are stored in topological (time) order.
#[derive(Debug, Clone)]
pub struct TrainNetwork {
    pub train: usize,
    pub arcs: Vec<StArc>,
    pub vertices: Vec<Vertex>,
    pub source: u32,
    pub sink: u32,
    pub virtual_arc: u32,
    /// Dwell bounds in macro periods.
    pub dwell_min: u32,
    pub dwell_max: u32,
    /// Whether each vertex is a siding vertex (dwell is counted there).
    pub siding_vertex: Vec<bool>,
    out_start: Vec<u32>,
    out_arcs: Vec<u32>,
    link_data: Vec<ResourceId>,
    link_index: Vec<[u32; 3]>,
}

impl TrainNetwork {
    pub fn out_arcs(&self, vertex: u32) -> &[u32] {
        let v = vertex as usize;
        &self.out_arcs[self.out_start[v] as usize..self.out_start[v + 1] as usize]
    }

    /// Switch-group resources linked to `arc`.
    pub fn sg_links(&self, arc: u32) -> &[ResourceId] {
        let [s, m, _] = self.link_index[arc as usize];
        &self.link_data[s as usize..m as usize]
    }

    /// Siding resources linked to `arc` (actual, route-lock or implicit).
    pub fn siding_links(&self, arc: u32) -> &[ResourceId] {
        let [_, m, e] = self.link_index[arc as usize];
        &self.link_data[m as usize..e as usize]
    }

    pub fn links(&self, arc: u32) -> &[ResourceId] {
        let [s, _, e] = self.link_index[arc as usize];
        &self.link_data[s as usize..e as usize]
    }

    pub fn arcs_of_kind(&self, kind: ArcKind) -> impl Iterator<Item = u32> + '_ {
        self.arcs.iter().enumerate().filter(move |(_, a)| a.kind == kind).map(|(i, _)| i as u32)
    }

    pub fn total_links(&self) -> usize {
        self.link_data.len()
    }
}

#[derive(Debug, Clone)]
pub struct SpaceTimeNetwork {
    pub station: Station,
    pub index: StationIndex,
    pub grid: TimeGrid,
    pub trains: Vec<Train>,
    pub outages: Vec<TrackOutage>,
    pub resources: ResourceSpace,
    pub blocks: Vec<TrainNetwork>,
}

impl SpaceTimeNetwork {
    pub fn build(station: &Station, trains: &[Train], grid: &TimeGrid) -> Result<Self> {
        Self::build_with_outages(station, trains, grid, &[])
    }

    pub fn build_with_outages(
        station: &Station,
        trains: &[Train],
        grid: &TimeGrid,
        outages: &[TrackOutage],
    ) -> Result<Self> {
        grid.validate()?;
        let index = StationIndex::new(station)?;
        for t in trains {
            t.validate(station)?;
            if t.desired_arrival + t.arrival_window.earliest < 0
                || t.desired_departure + t.departure_window.latest > grid.horizon
            {
                return Err(Error::InvalidTrain {
                    train: t.id.clone(),
                    reason: format!("time window falls outside the horizon [0, {}]", grid.horizon),
                });
            }
        }
        let mut blocked = Vec::new();
        for o in outages {
            let node = index
                .node(&o.node)
                .ok_or_else(|| Error::Scenario(format!("outage of unknown track `{}`", o.node)))?;
            let siding = index.siding_of_node[node as usize]
                .ok_or_else(|| Error::Scenario(format!("outage node `{}` is not a siding", o.node)))?;
            blocked.push((siding, o.from, o.until.unwrap_or(Seconds::MAX)));
        }
        let resources = ResourceSpace {
            switch_groups: index.sg_ids.len() as u32,
            sidings: index.sidings() as u32,
            micro_periods: grid.micro_periods(),
        };
        let blocks = trains
            .par_iter()
            .enumerate()
            .map(|(f, t)| build_train(f, t, &index, grid, &resources, &blocked))
            .collect();
        Ok(Self {
            station: station.clone(),
            index,
            grid: *grid,
            trains: trains.to_vec(),
            outages: outages.to_vec(),
            resources,
            blocks,
        })
    }

    pub fn train_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn arc(&self, train: usize, arc: u32) -> &StArc {
        &self.blocks[train].arcs[arc as usize]
    }

    pub fn linking_sets(&self, train: usize, arc: u32) -> LinkSets {
        linking_sets(self.arc(train, arc), &self.index, &self.grid)
    }

    pub fn cancellation_cost(&self, train: usize, weights: &Weights) -> f64 {
        self.trains[train].cancellation_cost(weights, self.grid.horizon)
    }

    /// Objective contribution of one arc with no multipliers.
    pub fn raw_arc_cost(&self, train: usize, arc: u32, weights: &Weights) -> f64 {
        let a = self.arc(train, arc);
        let t = &self.trains[train];
        match a.kind {
            ArcKind::Source | ArcKind::Sink => 0.0,
            ArcKind::VirtualPath => self.cancellation_cost(train, weights),
            ArcKind::SidingWait => weights.w1 * a.running_time as f64,
            ArcKind::Arrival => {
                let shift = (self.grid.macro_seconds(a.end) - t.desired_arrival).abs();
                weights.w1 * a.running_time as f64 + weights.w2 * shift as f64
            }
            ArcKind::Departure => {
                let shift = (self.grid.macro_seconds(a.start) - t.desired_departure).abs();
                weights.w1 * a.running_time as f64 + weights.w2 * shift as f64
            }
        }
    }

    pub fn raw_costs(&self, weights: &Weights) -> Vec<Vec<f64>> {
        (0..self.blocks.len())
            .map(|f| {
                (0..self.blocks[f].arcs.len() as u32)
                    .map(|g| self.raw_arc_cost(f, g, weights))
                    .collect()
            })
            .collect()
    }

    /// Siding index receiving an arrival arc, if it ends on a siding.
    pub fn arrival_siding(&self, train: usize, arc: u32) -> Option<u32> {
        let a = self.arc(train, arc);
        if a.kind != ArcKind::Arrival {
            return None;
        }
        a.stop_node().and_then(|n| self.index.siding_of_node[n as usize])
    }

    /// Multiset of microscopic resources a path occupies.
    pub fn occupied_resources(&self, train: usize, path: &TrainPath) -> Vec<ResourceId> {
        match path {
            TrainPath::Cancelled => Vec::new(),
            TrainPath::Scheduled(arcs) => {
                let b = &self.blocks[train];
                arcs.iter().flat_map(|&g| b.links(g).iter().copied()).collect()
            }
        }
    }

    /// Total occupation count of every resource under `solution`.
    pub fn occupancy(&self, solution: &Solution) -> Vec<u32> {
        let mut occ = vec![0u32; self.resources.len()];
        for (f, p) in solution.paths.iter().enumerate() {
            if let TrainPath::Scheduled(arcs) = p {
                for &g in arcs {
                    for r in self.blocks[f].links(g) {
                        occ[r.0 as usize] += 1;
                    }
                }
            }
        }
        occ
    }

    /// Number of trains assigned to each siding.
    pub fn siding_assignments(&self, solution: &Solution) -> Vec<u32> {
        let mut counts = vec![0u32; self.index.sidings()];
        for (f, p) in solution.paths.iter().enumerate() {
            if let TrainPath::Scheduled(arcs) = p {
                for &g in arcs {
                    if let Some(s) = self.arrival_siding(f, g) {
                        counts[s as usize] += 1;
                    }
                }
            }
        }
        counts
    }

    /// Writes every linking set as CSV rows
    /// `train,arc,arc_kind,resource_kind,space,micro_period,start_s`.
    pub fn write_linking_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["train", "arc", "arc_kind", "resource_kind", "space", "micro_period", "start_s"])?;
        for (f, b) in self.blocks.iter().enumerate() {
            for g in 0..b.arcs.len() as u32 {
                let kind = format!("{:?}", b.arcs[g as usize].kind);
                for &id in b.links(g) {
                    let r = self.resources.resource(id);
                    let (rk, space) = match r.kind {
                        ResourceKind::SwitchGroup => ("sg", self.index.sg_ids[r.space as usize].clone()),
                        ResourceKind::Siding => (
                            "siding",
                            self.index.node_ids[self.index.siding_nodes[r.space as usize] as usize].clone(),
                        ),
                    };
                    w.write_record([
                        self.trains[f].id.clone(),
                        g.to_string(),
                        kind.clone(),
                        rk.to_string(),
                        space,
                        r.time.to_string(),
                        (r.time as Seconds * self.grid.micro_granularity).to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

struct ArcDraft {
    arc: StArc,
    from: (StNode, u32),
    to: (StNode, u32),
}

fn build_train(
    f: usize,
    train: &Train,
    index: &StationIndex,
    grid: &TimeGrid,
    space: &ResourceSpace,
    blocked: &[(u32, Seconds, Seconds)],
) -> TrainNetwork {
    let gm = grid.macro_granularity;
    let horizon = grid.macro_periods();
    let dwell_min = grid.periods_ceil(train.dwell_min);
    let dwell_max = (train.dwell_max / gm).max(0) as u32;
    let origin = index.node(&train.origin).expect("validated origin");
    let destination = index.node(&train.destination).expect("validated destination");

    // Arrival end periods and departure start periods admitted by the windows.
    let arr_lo = div_ceil(train.desired_arrival + train.arrival_window.earliest, gm).max(0);
    let arr_hi = (train.desired_arrival + train.arrival_window.latest).div_euclid(gm).min(horizon as Seconds);
    let dep_lo = div_ceil(train.desired_departure + train.departure_window.earliest, gm).max(0);
    let dep_hi = (train.desired_departure + train.departure_window.latest).div_euclid(gm).min(horizon as Seconds);

    let blocked_interval = |siding: Option<u32>, from: Seconds, to: Seconds| -> bool {
        let Some(s) = siding else { return false };
        blocked.iter().any(|&(bs, bf, bu)| {
            if bs != s {
                return false;
            }
            // Overlap in micro resolution, matching the linking-set rule.
            let r = grid.micro_cover(from, to);
            if r.is_empty() {
                return false;
            }
            let lo = r.start as Seconds * grid.micro_granularity;
            let hi = r.end as Seconds * grid.micro_granularity;
            lo < bu && hi > bf
        })
    };

    let mut drafts: Vec<ArcDraft> = Vec::new();
    drafts.push(ArcDraft {
        arc: StArc {
            kind: ArcKind::VirtualPath,
            route: None,
            start_node: StNode::Source,
            end_node: StNode::Sink,
            start: 0,
            end: 0,
            running_time: 0,
            from: 0,
            to: 0,
        },
        from: (StNode::Source, 0),
        to: (StNode::Sink, 0),
    });

    for (p, kind) in index.node_kinds.iter().enumerate() {
        let p = p as u32;
        let usable = match kind {
            NodeKind::Siding => true,
            NodeKind::Mainline => !train.stops && dwell_min == 0,
            _ => false,
        };
        if !usable {
            continue;
        }
        let siding = index.siding_of_node[p as usize];
        let (dmin, dmax) = if siding.is_some() { (dwell_min, dwell_max) } else { (0, 0) };
        if dmin > dmax {
            continue;
        }
        let inbound: Vec<u32> = index
            .routes
            .iter()
            .enumerate()
            .filter(|(_, r)| r.kind == RouteKind::Inbound && r.origin == origin && r.destination == p)
            .map(|(i, _)| i as u32)
            .collect();
        let outbound: Vec<u32> = index
            .routes
            .iter()
            .enumerate()
            .filter(|(_, r)| r.kind == RouteKind::Outbound && r.origin == p && r.destination == destination)
            .map(|(i, _)| i as u32)
            .collect();
        if inbound.is_empty() || outbound.is_empty() {
            continue;
        }

        // Candidate arrival ends (a) and departure starts (q) on this stop point.
        let mut arrivals: Vec<(u32, u32)> = Vec::new(); // (route, end period)
        for &r in &inbound {
            let k = grid.periods_ceil(index.routes[r as usize].running_time);
            for a in arr_lo..=arr_hi {
                if a < k as Seconds || a > horizon as Seconds {
                    continue;
                }
                let a = a as u32;
                let s = a - k;
                if blocked_interval(siding, grid.macro_seconds(s), grid.macro_seconds(a)) {
                    continue;
                }
                arrivals.push((r, a));
            }
        }
        let mut departures: Vec<(u32, u32)> = Vec::new(); // (route, start period)
        for &r in &outbound {
            let k = grid.periods_ceil(index.routes[r as usize].running_time);
            for q in dep_lo..=dep_hi {
                if q < 0 || q + k as Seconds > horizon as Seconds {
                    continue;
                }
                let q = q as u32;
                let base = grid.macro_seconds(q);
                if blocked_interval(siding, base, base + index.siding_headway) {
                    continue;
                }
                departures.push((r, q));
            }
        }
        let wait_ok = |t: u32| !blocked_interval(siding, grid.macro_seconds(t), grid.macro_seconds(t + 1));
        // Dwell path from a to q exists iff all waits in [a, q) are available.
        let reachable = |a: u32, q: u32| -> bool {
            q >= a && q - a >= dmin && q - a <= dmax && (a..q).all(wait_ok)
        };
        let arrivals: Vec<(u32, u32)> = arrivals
            .into_iter()
            .filter(|&(_, a)| departures.iter().any(|&(_, q)| reachable(a, q)))
            .collect();
        let departures: Vec<(u32, u32)> = departures
            .into_iter()
            .filter(|&(_, q)| arrivals.iter().any(|&(_, a)| reachable(a, q)))
            .collect();
        if arrivals.is_empty() {
            continue;
        }

        let mut entry_times = Vec::new();
        for &(r, a) in &arrivals {
            let route = &index.routes[r as usize];
            let s = a - grid.periods_ceil(route.running_time);
            entry_times.push(s);
            drafts.push(ArcDraft {
                arc: StArc {
                    kind: ArcKind::Arrival,
                    route: Some(r),
                    start_node: StNode::Physical(origin),
                    end_node: StNode::Physical(p),
                    start: s,
                    end: a,
                    running_time: route.running_time,
                    from: 0,
                    to: 0,
                },
                from: (StNode::Physical(origin), s),
                to: (StNode::Physical(p), a),
            });
        }
        if siding.is_some() && dmax > 0 {
            let first = arrivals.iter().map(|x| x.1).min().unwrap();
            let last = departures.iter().map(|x| x.1).max().unwrap();
            for t in first..last {
                if !wait_ok(t) {
                    continue;
                }
                drafts.push(ArcDraft {
                    arc: StArc {
                        kind: ArcKind::SidingWait,
                        route: None,
                        start_node: StNode::Physical(p),
                        end_node: StNode::Physical(p),
                        start: t,
                        end: t + 1,
                        running_time: gm,
                        from: 0,
                        to: 0,
                    },
                    from: (StNode::Physical(p), t),
                    to: (StNode::Physical(p), t + 1),
                });
            }
        }
        for &(r, q) in &departures {
            let route = &index.routes[r as usize];
            let e = q + grid.periods_ceil(route.running_time);
            drafts.push(ArcDraft {
                arc: StArc {
                    kind: ArcKind::Departure,
                    route: Some(r),
                    start_node: StNode::Physical(p),
                    end_node: StNode::Physical(destination),
                    start: q,
                    end: e,
                    running_time: route.running_time,
                    from: 0,
                    to: 0,
                },
                from: (StNode::Physical(p), q),
                to: (StNode::Physical(destination), e),
            });
        }
    }

    // Source and sink arcs for every used entering / leaving vertex.
    let mut entering: Vec<u32> =
        drafts.iter().filter(|d| d.arc.kind == ArcKind::Arrival).map(|d| d.arc.start).collect();
    entering.sort_unstable();
    entering.dedup();
    let mut leaving: Vec<u32> =
        drafts.iter().filter(|d| d.arc.kind == ArcKind::Departure).map(|d| d.arc.end).collect();
    leaving.sort_unstable();
    leaving.dedup();
    for s in entering {
        drafts.push(ArcDraft {
            arc: StArc {
                kind: ArcKind::Source,
                route: None,
                start_node: StNode::Source,
                end_node: StNode::Physical(origin),
                start: s,
                end: s,
                running_time: 0,
                from: 0,
                to: 0,
            },
            from: (StNode::Source, 0),
            to: (StNode::Physical(origin), s),
        });
    }
    for e in leaving {
        drafts.push(ArcDraft {
            arc: StArc {
                kind: ArcKind::Sink,
                route: None,
                start_node: StNode::Physical(destination),
                end_node: StNode::Sink,
                start: e,
                end: e,
                running_time: 0,
                from: 0,
                to: 0,
            },
            from: (StNode::Physical(destination), e),
            to: (StNode::Sink, 0),
        });
    }

    // Vertices in topological order: source, physical by time, sink.
    let rank = |(n, t): (StNode, u32)| -> (u8, u32, StNode) {
        match n {
            StNode::Source => (0, 0, n),
            StNode::Physical(_) => (1, t, n),
            StNode::Sink => (2, 0, n),
        }
    };
    let mut keys: Vec<(StNode, u32)> = drafts.iter().flat_map(|d| [d.from, d.to]).collect();
    keys.sort_by_key(|&k| rank(k));
    keys.dedup();
    let vid: HashMap<(StNode, u32), u32> = keys.iter().enumerate().map(|(i, &k)| (k, i as u32)).collect();
    let vertices: Vec<Vertex> = keys.iter().map(|&(node, time)| Vertex { node, time }).collect();
    let siding_vertex: Vec<bool> = vertices
        .iter()
        .map(|v| matches!(v.node, StNode::Physical(n) if index.siding_of_node[n as usize].is_some()))
        .collect();

    let mut arcs = Vec::with_capacity(drafts.len());
    let mut link_data = Vec::new();
    let mut link_index = Vec::with_capacity(drafts.len());
    for d in drafts {
        let mut arc = d.arc;
        arc.from = vid[&d.from];
        arc.to = vid[&d.to];
        let sets = linking_sets(&arc, index, grid);
        let s = link_data.len() as u32;
        link_data.extend(sets.phi_sg.iter().map(|&r| space.id(r)));
        let m = link_data.len() as u32;
        link_data.extend(
            sets.phi_st.iter().chain(&sets.implicit_siding).chain(&sets.phi_ss).map(|&r| space.id(r)),
        );
        link_index.push([s, m, link_data.len() as u32]);
        arcs.push(arc);
    }

    let n = vertices.len();
    let mut deg = vec![0u32; n + 1];
    for a in &arcs {
        if a.kind != ArcKind::VirtualPath {
            deg[a.from as usize + 1] += 1;
        }
    }
    for i in 0..n {
        deg[i + 1] += deg[i];
    }
    let mut fill = deg.clone();
    let mut out_arcs = vec![0u32; deg[n] as usize];
    for (g, a) in arcs.iter().enumerate() {
        if a.kind == ArcKind::VirtualPath {
            continue;
        }
        out_arcs[fill[a.from as usize] as usize] = g as u32;
        fill[a.from as usize] += 1;
    }

    let source = vid[&(StNode::Source, 0)];
    let sink = vid[&(StNode::Sink, 0)];
    TrainNetwork {
        train: f,
        arcs,
        vertices,
        source,
        sink,
        virtual_arc: 0,
        dwell_min,
        dwell_max,
        siding_vertex,
        out_start: deg,
        out_arcs,
        link_data,
        link_index,
    }
}
