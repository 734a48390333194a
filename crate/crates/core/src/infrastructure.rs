//! Physical station model.
//!
//! A station is a directed graph of boundary, siding and mainline nodes joined
//! by inbound and outbound routes. Each route crosses an ordered list of switch
//! groups in the bottleneck area; for every switch group the route records the
//! offset (seconds after the route starts) at which the group is released under
//! sectional release.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seconds. All external times are integral seconds.
pub type Seconds = i64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Entering,
    Leaving,
    Siding,
    Mainline,
}

impl NodeKind {
    /// Stop points: trains end inbound routes and start outbound routes here.
    pub fn is_stop_point(self) -> bool {
        matches!(self, NodeKind::Siding | NodeKind::Mainline)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhysicalNode {
    pub id: String,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchGroup {
    pub id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteKind {
    Inbound,
    Outbound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SgOccupation {
    pub sg: String,
    /// Seconds from route start until the group is released (sectional release).
    pub offset: Seconds,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhysicalRoute {
    pub id: String,
    pub origin: String,
    pub destination: String,
    pub running_time: Seconds,
    pub kind: RouteKind,
    #[serde(default)]
    pub sg_occupations: Vec<SgOccupation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterlockingMode {
    /// Route locking, sectional release.
    #[default]
    SectionalRelease,
    /// Route locking, route release: every group is held until the route ends.
    RouteRelease,
}

impl fmt::Display for InterlockingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InterlockingMode::SectionalRelease => f.write_str("sectional_release"),
            InterlockingMode::RouteRelease => f.write_str("route_release"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Station {
    pub nodes: Vec<PhysicalNode>,
    pub switch_groups: Vec<SwitchGroup>,
    pub routes: Vec<PhysicalRoute>,
    /// Minimum headway between two uses of the same switch group.
    pub sg_headway: Seconds,
    /// Minimum headway between a departure and the next use of the siding.
    pub siding_headway: Seconds,
    #[serde(default)]
    pub interlocking_mode: InterlockingMode,
}

/// Returns the release offset of `sg` on `route` under `mode`.
pub fn effective_sg_offset(route: &PhysicalRoute, sg: &str, mode: InterlockingMode) -> Result<Seconds> {
    let occ = route
        .sg_occupations
        .iter()
        .find(|o| o.sg == sg)
        .ok_or_else(|| {
            Error::MalformedStation(format!("switch group `{sg}` is not on route `{}`", route.id))
        })?;
    Ok(match mode {
        InterlockingMode::SectionalRelease => occ.offset,
        InterlockingMode::RouteRelease => route.running_time,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateNode(String),
    DuplicateSwitchGroup(String),
    DuplicateRoute(String),
    DanglingNode { route: String, node: String },
    DanglingSwitchGroup { route: String, sg: String },
    RepeatedSwitchGroup { route: String, sg: String },
    KindMismatch { route: String, detail: String },
    NonPositiveRunningTime { route: String },
    OffsetOutOfRange { route: String, sg: String, offset: Seconds, running_time: Seconds },
    NonPositiveHeadway(&'static str),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateNode(id) => write!(f, "duplicate node id `{id}`"),
            Violation::DuplicateSwitchGroup(id) => write!(f, "duplicate switch group id `{id}`"),
            Violation::DuplicateRoute(id) => write!(f, "duplicate route id `{id}`"),
            Violation::DanglingNode { route, node } => {
                write!(f, "route `{route}` references unknown node `{node}`")
            }
            Violation::DanglingSwitchGroup { route, sg } => {
                write!(f, "route `{route}` references unknown switch group `{sg}`")
            }
            Violation::RepeatedSwitchGroup { route, sg } => {
                write!(f, "route `{route}` lists switch group `{sg}` twice")
            }
            Violation::KindMismatch { route, detail } => write!(f, "route `{route}`: {detail}"),
            Violation::NonPositiveRunningTime { route } => {
                write!(f, "route `{route}` has non-positive running time")
            }
            Violation::OffsetOutOfRange { route, sg, offset, running_time } => write!(
                f,
                "route `{route}`: offset {offset} s of `{sg}` outside (0, {running_time}]"
            ),
            Violation::NonPositiveHeadway(which) => write!(f, "{which} must be positive"),
        }
    }
}

/// Checks every structural invariant of a station. An empty list means the
/// station is well formed.
pub fn validate_station(station: &Station) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut kinds: HashMap<&str, NodeKind> = HashMap::new();
    for n in &station.nodes {
        if kinds.insert(n.id.as_str(), n.kind).is_some() {
            out.push(Violation::DuplicateNode(n.id.clone()));
        }
    }
    let mut sgs: HashSet<&str> = HashSet::new();
    for s in &station.switch_groups {
        if !sgs.insert(s.id.as_str()) {
            out.push(Violation::DuplicateSwitchGroup(s.id.clone()));
        }
    }
    let mut route_ids: HashSet<&str> = HashSet::new();
    for r in &station.routes {
        if !route_ids.insert(r.id.as_str()) {
            out.push(Violation::DuplicateRoute(r.id.clone()));
        }
        let origin = kinds.get(r.origin.as_str()).copied();
        let dest = kinds.get(r.destination.as_str()).copied();
        if origin.is_none() {
            out.push(Violation::DanglingNode { route: r.id.clone(), node: r.origin.clone() });
        }
        if dest.is_none() {
            out.push(Violation::DanglingNode { route: r.id.clone(), node: r.destination.clone() });
        }
        if let (Some(o), Some(d)) = (origin, dest) {
            let ok = match r.kind {
                RouteKind::Inbound => o == NodeKind::Entering && d.is_stop_point(),
                RouteKind::Outbound => o.is_stop_point() && d == NodeKind::Leaving,
            };
            if !ok {
                let expected = match r.kind {
                    RouteKind::Inbound => "inbound routes run entering -> siding|mainline",
                    RouteKind::Outbound => "outbound routes run siding|mainline -> leaving",
                };
                out.push(Violation::KindMismatch {
                    route: r.id.clone(),
                    detail: format!("{expected}, found {o:?} -> {d:?}"),
                });
            }
        }
        if r.running_time <= 0 {
            out.push(Violation::NonPositiveRunningTime { route: r.id.clone() });
        }
        let mut seen = HashSet::new();
        for occ in &r.sg_occupations {
            if !sgs.contains(occ.sg.as_str()) {
                out.push(Violation::DanglingSwitchGroup { route: r.id.clone(), sg: occ.sg.clone() });
            }
            if !seen.insert(occ.sg.as_str()) {
                out.push(Violation::RepeatedSwitchGroup { route: r.id.clone(), sg: occ.sg.clone() });
            }
            if occ.offset <= 0 || occ.offset > r.running_time {
                out.push(Violation::OffsetOutOfRange {
                    route: r.id.clone(),
                    sg: occ.sg.clone(),
                    offset: occ.offset,
                    running_time: r.running_time,
                });
            }
        }
    }
    if station.sg_headway <= 0 {
        out.push(Violation::NonPositiveHeadway("sg_headway"));
    }
    if station.siding_headway <= 0 {
        out.push(Violation::NonPositiveHeadway("siding_headway"));
    }
    out
}

impl Station {
    pub fn node(&self, id: &str) -> Option<&PhysicalNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn route(&self, id: &str) -> Option<&PhysicalRoute> {
        self.routes.iter().find(|r| r.id == id)
    }

    pub fn sidings(&self) -> impl Iterator<Item = &PhysicalNode> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Siding)
    }

    /// Fails with every violation joined into one message.
    pub fn ensure_valid(&self) -> Result<()> {
        let v = validate_station(self);
        if v.is_empty() {
            Ok(())
        } else {
            let msg: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            Err(Error::MalformedStation(msg.join("; ")))
        }
    }
}
